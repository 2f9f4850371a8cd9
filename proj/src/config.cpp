#include "robin/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace robin {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

using Setter = std::function<void(RunConfig&, const std::string&)>;

double positive(const std::string& v) {
  const double x = parse_number(v);
  if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("must be a positive number");
  return x;
}

std::vector<double> number_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = trim(item);
    if (t.empty()) throw std::invalid_argument("empty list entry");
    out.push_back(t == "inf" ? std::numeric_limits<double>::infinity() : parse_number(t));
  }
  if (out.empty()) throw std::invalid_argument("list is empty");
  return out;
}

std::string one_of(const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw std::invalid_argument("must be one of " + list);
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.name",
       [](RunConfig& c, const std::string& v) {
         if (v.empty() || !std::all_of(v.begin(), v.end(), [](char ch) {
               return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
             }))
           throw std::invalid_argument("must be a non-empty name of letters, digits, '_', '-' or '.'");
         c.name = v;
       }},
      {"run.mode",
       [](RunConfig& c, const std::string& v) {
         one_of(v, {"eigen-sweep", "poisson-sweep", "limit-solve", "uniqueness", "check"});
         c.mode = v == "eigen-sweep"     ? Mode::EigenSweep
                  : v == "poisson-sweep" ? Mode::PoissonSweep
                  : v == "limit-solve"   ? Mode::LimitSolve
                  : v == "uniqueness"    ? Mode::Uniqueness
                                         : Mode::Check;
       }},
      {"run.seed",
       [](RunConfig& c, const std::string& v) {
         std::uint64_t s = 0;
         const auto r = std::from_chars(v.data(), v.data() + v.size(), s);
         if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw std::invalid_argument("must be a nonnegative integer");
         c.seed = s;
       }},
      {"run.output",
       [](RunConfig& c, const std::string& v) {
         if (v.empty()) throw std::invalid_argument("must not be empty");
         c.output = v;
       }},
      {"domain.shape",
       [](RunConfig& c, const std::string& v) {
         c.domain.shape = one_of(v, {"disk", "square", "rectangle", "l_shape", "annulus", "mask"});
       }},
      {"domain.h", [](RunConfig& c, const std::string& v) { c.domain.h = positive(v); }},
      {"domain.radius", [](RunConfig& c, const std::string& v) { c.domain.radius = positive(v); }},
      {"domain.side", [](RunConfig& c, const std::string& v) { c.domain.side = positive(v); }},
      {"domain.width", [](RunConfig& c, const std::string& v) { c.domain.width = positive(v); }},
      {"domain.height", [](RunConfig& c, const std::string& v) { c.domain.height = positive(v); }},
      {"domain.arm", [](RunConfig& c, const std::string& v) { c.domain.arm = positive(v); }},
      {"domain.inner", [](RunConfig& c, const std::string& v) { c.domain.inner = positive(v); }},
      {"domain.outer", [](RunConfig& c, const std::string& v) { c.domain.outer = positive(v); }},
      {"domain.mask_file",
       [](RunConfig& c, const std::string& v) {
         if (v.empty()) throw std::invalid_argument("must not be empty");
         c.domain.mask_file = v;
       }},
      {"problem.beta", [](RunConfig& c, const std::string& v) { c.beta = positive(v); }},
      {"problem.p_list",
       [](RunConfig& c, const std::string& v) {
         auto ps = number_list(v);
         for (std::size_t i = 0; i < ps.size(); ++i) {
           if (!(ps[i] > 1.0)) throw std::invalid_argument("every p must exceed 1");
           if (i > 0 && !(ps[i] > ps[i - 1])) throw std::invalid_argument("p values must be strictly increasing");
         }
         c.p_list = std::move(ps);
       }},
      {"problem.f", [](RunConfig& c, const std::string& v) { c.f.kind = one_of(v, {"one", "zero", "ball", "annulus"}); }},
      {"problem.f_radius", [](RunConfig& c, const std::string& v) { c.f.radius = positive(v); }},
      {"problem.f_inner", [](RunConfig& c, const std::string& v) { c.f.inner = positive(v); }},
      {"problem.f_outer", [](RunConfig& c, const std::string& v) { c.f.outer = positive(v); }},
      {"solver.tol", [](RunConfig& c, const std::string& v) { c.tol = positive(v); }},
      {"solver.max_iter",
       [](RunConfig& c, const std::string& v) {
         int n = 0;
         const auto r = std::from_chars(v.data(), v.data() + v.size(), n);
         if (r.ec != std::errc() || r.ptr != v.data() + v.size() || n < 1)
           throw std::invalid_argument("must be a positive integer");
         c.max_iter = n;
       }},
      {"solver.method", [](RunConfig& c, const std::string& v) { c.method = one_of(v, {"newton", "cg"}); }},
  };
  return table;
}

}  // namespace

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}: {}", line, field, message)
                                  : fmt::format("{}: {}", field, message)),
      field_(std::move(field)),
      line_(line) {}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::EigenSweep: return "eigen-sweep";
    case Mode::PoissonSweep: return "poisson-sweep";
    case Mode::LimitSolve: return "limit-solve";
    case Mode::Uniqueness: return "uniqueness";
    case Mode::Check: return "check";
  }
  return "?";
}

double parse_number(const std::string& text) {
  const auto t = trim(text);
  const auto slash = t.find('/');
  const auto one = [](const std::string& s) {
    double x = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
      throw std::invalid_argument("'" + s + "' is not a number");
    return x;
  };
  if (slash == std::string::npos) return one(t);
  const double den = one(trim(t.substr(slash + 1)));
  if (den == 0.0) throw std::invalid_argument("division by zero");
  return one(trim(t.substr(0, slash))) / den;
}

RunConfig parse_config(const std::string& text) {
  static const std::set<std::string> sections = {"run", "domain", "problem", "solver"};
  RunConfig cfg;
  cfg.text = text;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const auto s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("section", line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!sections.count(section)) throw ConfigError(section, line, "unknown section");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("syntax", line, "expected key = value");
    const auto key = trim(s.substr(0, eq));
    const auto value = trim(s.substr(eq + 1));
    if (section.empty()) throw ConfigError(key, line, "key outside of a section");
    const auto field = section + "." + key;
    const auto it = setters().find(field);
    if (it == setters().end()) throw ConfigError(field, line, "unknown key");
    if (seen.count(field)) throw ConfigError(field, line, fmt::format("duplicate key (first set on line {})", seen[field]));
    seen[field] = line;
    try {
      it->second(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field, line, e.what());
    }
  }

  const auto require = [&](const std::string& field, const std::string& why) {
    if (!seen.count(field)) throw ConfigError(field, 0, "required " + why);
  };
  require("run.name", "for every run");
  require("run.mode", "for every run");
  if (cfg.mode == Mode::EigenSweep || cfg.mode == Mode::PoissonSweep)
    require("problem.p_list", std::string("for mode ") + mode_name(cfg.mode));
  if (cfg.mode == Mode::PoissonSweep && !cfg.p_list.empty() && std::isinf(cfg.p_list.back()))
    throw ConfigError("problem.p_list", seen["problem.p_list"], "poisson-sweep needs finite p");
  if (cfg.mode == Mode::EigenSweep && !cfg.p_list.empty() && std::isinf(cfg.p_list.back()))
    throw ConfigError("problem.p_list", seen["problem.p_list"], "eigen-sweep needs finite p");
  if (cfg.domain.shape == "mask") require("domain.mask_file", "when shape = mask");
  if (cfg.domain.shape == "annulus" && !(cfg.domain.inner < cfg.domain.outer))
    throw ConfigError("domain.inner", seen.count("domain.inner") ? seen["domain.inner"] : 0, "must be below domain.outer");
  if (cfg.f.kind == "annulus" && !(cfg.f.inner < cfg.f.outer))
    throw ConfigError("problem.f_inner", seen.count("problem.f_inner") ? seen["problem.f_inner"] : 0,
                      "must be below problem.f_outer");
  if (cfg.method == "cg" && cfg.mode != Mode::PoissonSweep && cfg.mode != Mode::Uniqueness)
    throw ConfigError("solver.method", seen["solver.method"], "only p-Poisson solves take a method");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", 0, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Domain build_domain(const DomainSpec& s) {
  try {
    if (s.shape == "disk") return build(disk_shape(s.radius, s.h));
    if (s.shape == "square") return build(square_shape(s.side, s.h));
    if (s.shape == "rectangle") return build(rectangle_shape(s.width, s.height, s.h));
    if (s.shape == "l_shape") return build(l_shape(s.arm, s.h));
    if (s.shape == "annulus") return build(annulus_shape(s.inner, s.outer, s.h));
    if (s.shape == "mask") return build(read_mask_file(s.mask_file));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(s.shape == "mask" ? "domain.mask_file" : "domain.h", 0, e.what());
  }
  throw ConfigError("domain.shape", 0, "unknown shape " + s.shape);
}

std::string describe(const DomainSpec& s) {
  if (s.shape == "disk") return fmt::format("disk radius={} h={}", s.radius, s.h);
  if (s.shape == "square") return fmt::format("square side={} h={}", s.side, s.h);
  if (s.shape == "rectangle") return fmt::format("rectangle width={} height={} h={}", s.width, s.height, s.h);
  if (s.shape == "l_shape") return fmt::format("l_shape arm={} h={}", s.arm, s.h);
  if (s.shape == "annulus") return fmt::format("annulus inner={} outer={} h={}", s.inner, s.outer, s.h);
  return fmt::format("mask file={}", s.mask_file);
}

}  // namespace robin
