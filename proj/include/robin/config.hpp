#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robin/domain.hpp"

namespace robin {

/// A config problem tied to a field ("section.key") and, when known, a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& message);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

enum class Mode { EigenSweep, PoissonSweep, LimitSolve, Uniqueness, Check };

const char* mode_name(Mode m);

struct DomainSpec {
  std::string shape = "disk";  // disk | square | rectangle | l_shape | annulus | mask
  double h = 1.0 / 32;
  double radius = 1.0;
  double side = 1.0;
  double width = 1.0;
  double height = 1.0;
  double arm = 0.5;
  double inner = 0.25;
  double outer = 1.0;
  std::string mask_file;
};

struct SourceSpec {
  std::string kind = "one";  // one | zero | ball | annulus
  double radius = 0.5;
  double inner = 0.6;
  double outer = 0.9;
};

struct RunConfig {
  std::string name;
  Mode mode = Mode::LimitSolve;
  std::uint64_t seed = 0;
  std::string output = "results";
  DomainSpec domain;
  double beta = 1.0;
  std::vector<double> p_list;
  SourceSpec f;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::string method = "newton";  // newton | cg
  std::string text;  // the parsed source, copied into the results directory
};

/// Flat `key = value` lines grouped under `[run]`, `[domain]`, `[problem]`
/// and `[solver]`. `#` starts a comment. Unknown keys are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Reads a number, accepting fractions such as `1/64`.
double parse_number(const std::string& text);

Domain build_domain(const DomainSpec& spec);
/// Short human-readable description, e.g. `disk radius=1 h=0.015625`.
std::string describe(const DomainSpec& spec);

}  // namespace robin
