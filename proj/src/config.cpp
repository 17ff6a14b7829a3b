#include "fide/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "fide/expr.hpp"

namespace fide {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

class Sections {
 public:
  explicit Sections(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("line " + std::to_string(lineno) +
                            ": unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) +
                          ": expected key = value");
      const std::string key = section + "." + trim(line.substr(0, eq));
      if (!values_.emplace(key, trim(line.substr(eq + 1))).second)
        throw ConfigError("duplicate key '" + key + "'", key);
    }
  }

  const std::string& require(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
      throw ConfigError("missing required key '" + key + "'", key);
    return it->second;
  }

  std::optional<std::string> find(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::string> values_;
};

double parse_double(const std::string& value, const std::string& key) {
  double out = 0.0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("key '" + key + "': expected a number, got '" + value +
                          "'",
                      key);
  return out;
}

int parse_int(const std::string& value, const std::string& key) {
  int out = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("key '" + key + "': expected an integer, got '" + value +
                          "'",
                      key);
  return out;
}

/// Rows separated by ';', entries by ','. Entries are expressions; which of
/// t / tau an entry may mention depends on what the matrix multiplies.
std::vector<std::vector<Expression>> parse_expr_matrix(
    const std::string& value, const std::string& key, int n, bool allow_t,
    bool allow_tau) {
  std::vector<std::vector<Expression>> rows;
  std::size_t consumed = 0;
  for (const std::string& row : split(value, ';')) {
    std::vector<Expression> cells;
    for (const std::string& cell : split(row, ',')) {
      const std::size_t cell_at = value.find(cell, consumed);
      try {
        cells.push_back(Expression::parse(cell));
      } catch (const ExprParseError& e) {
        throw ConfigError("key '" + key + "': " + e.what(), key,
                          e.offset() +
                              (cell_at == std::string::npos ? 0 : cell_at));
      }
      if (cell_at != std::string::npos) consumed = cell_at + cell.size();
      if (!allow_t && cells.back().uses_t())
        throw ConfigError("key '" + key + "': variable t is not allowed here",
                          key);
      if (!allow_tau && cells.back().uses_tau())
        throw ConfigError(
            "key '" + key + "': variable tau is not allowed here", key);
    }
    rows.push_back(std::move(cells));
  }
  if (static_cast<int>(rows.size()) != n)
    throw ConfigError("key '" + key + "': expected " + std::to_string(n) +
                          " rows",
                      key);
  for (const auto& row : rows)
    if (static_cast<int>(row.size()) != n)
      throw ConfigError("key '" + key + "': expected " + std::to_string(n) +
                            " entries per row",
                        key);
  return rows;
}

Matrix parse_numeric_matrix(const std::string& value, const std::string& key,
                            int n) {
  const std::vector<std::string> rows = split(value, ';');
  if (static_cast<int>(rows.size()) != n)
    throw ConfigError("key '" + key + "': expected " + std::to_string(n) +
                          " rows",
                      key);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    const std::vector<std::string> cells = split(rows[i], ',');
    if (static_cast<int>(cells.size()) != n)
      throw ConfigError("key '" + key + "': expected " + std::to_string(n) +
                            " entries per row",
                        key);
    for (int j = 0; j < n; ++j) m(i, j) = parse_double(cells[j], key);
  }
  return m;
}

MatrixFn matrix_fn_of_t(std::vector<std::vector<Expression>> rows, int n) {
  return [rows = std::move(rows), n](double t) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = rows[i][j].eval(t, 0.0);
    return m;
  };
}

MatrixFn matrix_fn_of_tau(std::vector<std::vector<Expression>> rows, int n) {
  return [rows = std::move(rows), n](double tau) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = rows[i][j].eval(0.0, tau);
    return m;
  };
}

}  // namespace

LoadedProblem load_problem_text(const std::string& text) {
  const Sections cfg(text);
  LoadedProblem out;
  Problem& p = out.problem;

  p.n = parse_int(cfg.require("problem.n"), "problem.n");
  p.T = parse_double(cfg.require("problem.T"), "problem.T");
  if (p.n < 1) throw ConfigError("problem.n must be >= 1", "problem.n");
  if (!(p.T > 0.0)) throw ConfigError("problem.T must be > 0", "problem.T");
  const int n = p.n;

  p.a_fn = matrix_fn_of_t(
      parse_expr_matrix(cfg.require("A.A"), "A.A", n, true, false), n);

  {
    const std::string key = "f.f";
    const std::vector<std::string> cells = split(cfg.require(key), ',');
    if (static_cast<int>(cells.size()) != n)
      throw ConfigError("key '" + key + "': expected " + std::to_string(n) +
                            " entries",
                        key);
    std::vector<Expression> entries;
    for (const std::string& cell : cells) {
      try {
        entries.push_back(Expression::parse(cell));
      } catch (const ExprParseError& e) {
        throw ConfigError("key '" + key + "': " + e.what(), key, e.offset());
      }
      if (entries.back().uses_tau())
        throw ConfigError("key '" + key + "': variable tau is not allowed here",
                          key);
    }
    p.f_fn = [entries, n](double t) {
      Vector v(n);
      for (int i = 0; i < n; ++i) v[i] = entries[i].eval(t, 0.0);
      return v;
    };
  }

  const std::string kind = cfg.require("kernel.kind");
  if (kind == "degenerate") {
    const int k = parse_int(cfg.require("kernel.k"), "kernel.k");
    if (k < 1) throw ConfigError("kernel.k must be >= 1", "kernel.k");
    DegenerateKernel dk;
    for (int j = 1; j <= k; ++j) {
      const std::string pk = "kernel.phi." + std::to_string(j);
      const std::string sk = "kernel.psi." + std::to_string(j);
      dk.phi.push_back(matrix_fn_of_t(
          parse_expr_matrix(cfg.require(pk), pk, n, true, false), n));
      dk.psi.push_back(matrix_fn_of_tau(
          parse_expr_matrix(cfg.require(sk), sk, n, false, true), n));
    }
    p.kernel = std::move(dk);
    out.general_kernel = false;
  } else if (kind == "general") {
    const std::string kk = "kernel.K";
    auto rows = parse_expr_matrix(cfg.require(kk), kk, n, true, true);
    GeneralKernel gk;
    gk.k = [rows = std::move(rows), n](double t, double tau) {
      Matrix m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rows[i][j].eval(t, tau);
      return m;
    };
    p.kernel = std::move(gk);
    out.general_kernel = true;
  } else {
    throw ConfigError("kernel.kind must be 'degenerate' or 'general'",
                      "kernel.kind");
  }

  {
    const std::vector<std::string> cells =
        split(cfg.require("condition.points"), ',');
    if (cells.size() < 2)
      throw ConfigError("condition.points needs at least two points",
                        "condition.points");
    for (const std::string& cell : cells)
      p.condition.points.push_back(parse_double(cell, "condition.points"));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string bk = "condition.B." + std::to_string(i);
      p.condition.b.push_back(parse_numeric_matrix(cfg.require(bk), bk, n));
    }
    const std::vector<std::string> dcells = split(cfg.require("condition.d"), ',');
    if (static_cast<int>(dcells.size()) != n)
      throw ConfigError("condition.d must have n entries", "condition.d");
    p.condition.d = Vector(n);
    for (int i = 0; i < n; ++i)
      p.condition.d[i] = parse_double(dcells[i], "condition.d");
  }

  if (const auto v = cfg.find("solver.degree"))
    out.settings.degree = parse_int(*v, "solver.degree");
  if (const auto v = cfg.find("solver.hmax"))
    out.settings.h_max = parse_double(*v, "solver.hmax");
  if (const auto v = cfg.find("solver.tol"))
    out.settings.tol = parse_double(*v, "solver.tol");
  if (const auto v = cfg.find("solver.max_iter"))
    out.settings.max_iter = parse_int(*v, "solver.max_iter");
  if (const auto v = cfg.find("solver.max_refine"))
    out.settings.max_refine = parse_int(*v, "solver.max_refine");
  if (out.settings.degree < 0)
    throw ConfigError("solver.degree must be >= 0", "solver.degree");
  if (!(out.settings.tol > 0.0))
    throw ConfigError("solver.tol must be > 0", "solver.tol");

  return out;
}

LoadedProblem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open problem file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_problem_text(buf.str());
}

}  // namespace fide
