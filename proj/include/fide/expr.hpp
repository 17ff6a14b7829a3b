#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fide {

/// Parse failure; offset is the byte position in the source string.
class ExprParseError : public std::runtime_error {
 public:
  ExprParseError(const std::string& message, std::size_t offset)
      : std::runtime_error(message), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation failure (log of a non-positive value, division by zero, a
/// non-finite intermediate). offset points at the offending subtree in the
/// original source.
class ExprEvalError : public std::runtime_error {
 public:
  ExprEvalError(const std::string& message, std::size_t offset)
      : std::runtime_error(message), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Scalar coefficient expression in the variables t and tau.
///
/// Grammar (tightest first): ^ is right-associative, then unary minus,
/// then * /, then + -. Functions: sin cos exp log sqrt abs. Identifiers are
/// case-sensitive; only t and tau are variables; no implicit multiplication.
///
/// Trees are immutable after parse; eval is re-entrant and safe to call
/// from many threads.
class Expression {
 public:
  Expression() = default;

  static Expression parse(std::string_view source);

  double eval(double t, double tau = 0.0) const;

  /// Fully parenthesized form; re-parsing it yields a tree with identical
  /// evaluations.
  std::string to_string() const;

  bool uses_t() const;
  bool uses_tau() const;
  bool empty() const { return root_ == nullptr; }

  struct Node;

 private:
  explicit Expression(std::shared_ptr<const Node> root);
  std::shared_ptr<const Node> root_;
};

}  // namespace fide
