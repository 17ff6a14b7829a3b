#include "fide/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

namespace fide {

namespace {

enum class Func { Sin, Cos, Exp, Log, Sqrt, Abs };

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
  }
  return "?";
}

}  // namespace

struct Expression::Node {
  enum class Kind { Number, VarT, VarTau, Add, Sub, Mul, Div, Pow, Neg, Call };

  Kind kind;
  double number = 0.0;
  Func func = Func::Sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
  std::size_t offset = 0;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

std::shared_ptr<Node> make_node(Node::Kind kind, std::size_t offset,
                                NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->offset = offset;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr run() {
    skip_ws();
    if (pos_ >= src_.size())
      throw ExprParseError("empty expression", 0);
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ < src_.size())
      fail("unexpected trailing input", pos_);
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what, std::size_t at) const {
    throw ExprParseError(what + " at offset " + std::to_string(at), at);
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_term();
    for (;;) {
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      const std::size_t at = pos_++;
      NodePtr rhs = parse_term();
      lhs = make_node(c == '+' ? Node::Kind::Add : Node::Kind::Sub, at,
                      std::move(lhs), std::move(rhs));
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      const std::size_t at = pos_++;
      NodePtr rhs = parse_unary();
      lhs = make_node(c == '*' ? Node::Kind::Mul : Node::Kind::Div, at,
                      std::move(lhs), std::move(rhs));
    }
  }

  NodePtr parse_unary() {
    if (peek() == '-') {
      const std::size_t at = pos_++;
      return make_node(Node::Kind::Neg, at, parse_unary());
    }
    return parse_power();
  }

  // The exponent is a unary expression, so 2^-3 parses and 2^3^2 groups as
  // 2^(3^2).
  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (peek() == '^') {
      const std::size_t at = pos_++;
      NodePtr exponent = parse_unary();
      return make_node(Node::Kind::Pow, at, std::move(base),
                       std::move(exponent));
    }
    return base;
  }

  NodePtr parse_primary() {
    const char c = peek();
    const std::size_t at = pos_;
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_sum();
      if (peek() != ')') fail("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number(at);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_identifier(at);
    if (c == '\0') fail("unexpected end of input", src_.size());
    fail(std::string("unexpected character '") + c + "'", at);
  }

  NodePtr parse_number(std::size_t at) {
    double value = 0.0;
    const char* begin = src_.data() + pos_;
    const char* end = src_.data() + src_.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) fail("malformed number", at);
    pos_ += static_cast<std::size_t>(ptr - begin);
    auto n = make_node(Node::Kind::Number, at);
    n->number = value;
    return n;
  }

  NodePtr parse_identifier(std::size_t at) {
    std::size_t end = pos_;
    while (end < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[end])) ||
            src_[end] == '_'))
      ++end;
    const std::string_view name = src_.substr(pos_, end - pos_);
    pos_ = end;

    if (name == "t") return make_node(Node::Kind::VarT, at);
    if (name == "tau") return make_node(Node::Kind::VarTau, at);

    Func f;
    if (name == "sin") f = Func::Sin;
    else if (name == "cos") f = Func::Cos;
    else if (name == "exp") f = Func::Exp;
    else if (name == "log") f = Func::Log;
    else if (name == "sqrt") f = Func::Sqrt;
    else if (name == "abs") f = Func::Abs;
    else fail("unknown identifier '" + std::string(name) + "'", at);

    if (peek() != '(') fail("expected '(' after function name", pos_);
    ++pos_;
    NodePtr arg = parse_sum();
    if (peek() != ')') fail("expected ')'", pos_);
    ++pos_;
    auto n = make_node(Node::Kind::Call, at, std::move(arg));
    n->func = f;
    return n;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

double check_finite(double v, const Node& n) {
  if (!std::isfinite(v))
    throw ExprEvalError("non-finite value at offset " + std::to_string(n.offset),
                        n.offset);
  return v;
}

double eval_node(const Node& n, double t, double tau) {
  switch (n.kind) {
    case Node::Kind::Number: return n.number;
    case Node::Kind::VarT: return t;
    case Node::Kind::VarTau: return tau;
    case Node::Kind::Add:
      return check_finite(eval_node(*n.lhs, t, tau) + eval_node(*n.rhs, t, tau), n);
    case Node::Kind::Sub:
      return check_finite(eval_node(*n.lhs, t, tau) - eval_node(*n.rhs, t, tau), n);
    case Node::Kind::Mul:
      return check_finite(eval_node(*n.lhs, t, tau) * eval_node(*n.rhs, t, tau), n);
    case Node::Kind::Div: {
      const double denom = eval_node(*n.rhs, t, tau);
      if (denom == 0.0)
        throw ExprEvalError(
            "division by zero at offset " + std::to_string(n.offset), n.offset);
      return check_finite(eval_node(*n.lhs, t, tau) / denom, n);
    }
    case Node::Kind::Pow:
      return check_finite(
          std::pow(eval_node(*n.lhs, t, tau), eval_node(*n.rhs, t, tau)), n);
    case Node::Kind::Neg: return -eval_node(*n.lhs, t, tau);
    case Node::Kind::Call: {
      const double a = eval_node(*n.lhs, t, tau);
      switch (n.func) {
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Exp: return check_finite(std::exp(a), n);
        case Func::Log:
          if (a <= 0.0)
            throw ExprEvalError("log of non-positive value at offset " +
                                    std::to_string(n.offset),
                                n.offset);
          return std::log(a);
        case Func::Sqrt:
          if (a < 0.0)
            throw ExprEvalError("sqrt of negative value at offset " +
                                    std::to_string(n.offset),
                                n.offset);
          return std::sqrt(a);
        case Func::Abs: return std::abs(a);
      }
      break;
    }
  }
  throw ExprEvalError("corrupt expression tree", n.offset);
}

void print_node(const Node& n, std::string& out) {
  char buf[32];
  switch (n.kind) {
    case Node::Kind::Number:
      std::snprintf(buf, sizeof buf, "%.17g", n.number);
      out += buf;
      return;
    case Node::Kind::VarT: out += 't'; return;
    case Node::Kind::VarTau: out += "tau"; return;
    case Node::Kind::Neg:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    case Node::Kind::Call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
    default: break;
  }
  const char op = n.kind == Node::Kind::Add   ? '+'
                  : n.kind == Node::Kind::Sub ? '-'
                  : n.kind == Node::Kind::Mul ? '*'
                  : n.kind == Node::Kind::Div ? '/'
                                              : '^';
  out += '(';
  print_node(*n.lhs, out);
  out += op;
  print_node(*n.rhs, out);
  out += ')';
}

bool node_uses(const Node& n, Node::Kind var) {
  if (n.kind == var) return true;
  if (n.lhs && node_uses(*n.lhs, var)) return true;
  if (n.rhs && node_uses(*n.rhs, var)) return true;
  return false;
}

}  // namespace

Expression::Expression(std::shared_ptr<const Node> root)
    : root_(std::move(root)) {}

Expression Expression::parse(std::string_view source) {
  return Expression(Parser(source).run());
}

double Expression::eval(double t, double tau) const {
  if (!root_) throw ExprEvalError("evaluating empty expression", 0);
  return eval_node(*root_, t, tau);
}

std::string Expression::to_string() const {
  if (!root_) return std::string();
  std::string out;
  print_node(*root_, out);
  return out;
}

bool Expression::uses_t() const {
  return root_ && node_uses(*root_, Node::Kind::VarT);
}

bool Expression::uses_tau() const {
  return root_ && node_uses(*root_, Node::Kind::VarTau);
}

}  // namespace fide
