#pragma once

#include <optional>
#include <string>

#include "fide/errors.hpp"
#include "fide/model.hpp"

namespace fide {

/// Problem-file parse failure. key names the offending entry when known;
/// offset is the byte position inside that entry's value (for expression
/// errors).
class ConfigError : public SolveError {
 public:
  ConfigError(const std::string& message, std::string key = {},
              std::optional<std::size_t> offset = {})
      : SolveError(ErrorCode::ParseError, message),
        key_(std::move(key)),
        offset_(offset) {}

  const std::string& key() const noexcept { return key_; }
  std::optional<std::size_t> offset() const noexcept { return offset_; }

 private:
  std::string key_;
  std::optional<std::size_t> offset_;
};

struct SolverSettings {
  int degree = 6;
  double h_max = 0.0;  // 0 selects the default density
  double tol = 1e-8;
  int max_iter = 25;
  int max_refine = 6;
};

struct LoadedProblem {
  Problem problem;
  SolverSettings settings;
  bool general_kernel = false;
};

/// Parse the sectioned problem format documented in docs/format.md.
LoadedProblem load_problem_text(const std::string& text);
LoadedProblem load_problem_file(const std::string& path);

}  // namespace fide
