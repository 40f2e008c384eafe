#ifndef KSPM_CONFIG_HPP
#define KSPM_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kspm/errors.hpp"
#include "kspm/format.hpp"
#include "kspm/initial.hpp"
#include "kspm/montecarlo.hpp"

namespace kspm {

/// Every problem found while reading a configuration.
class ConfigError : public InvalidArgument {
 public:
  explicit ConfigError(std::vector<std::string> errors)
      : InvalidArgument(join(errors)), errors_(std::move(errors)) {}

  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& errors) {
    std::string s;
    for (const auto& e : errors) s += (s.empty() ? "" : "; ") + e;
    return s;
  }
  std::vector<std::string> errors_;
};

struct RunConfig {
  EnsembleConfig ensemble;
  std::string output = "kspm_out";
  bool write_fields = true;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline bool parse_double(const std::string& s, double& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

template <class Int>
bool parse_integer(const std::string& s, Int& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

/// Flat key table: every configuration key with its setter and printer.
class ConfigSchema {
 public:
  using Setter = std::function<std::string(RunConfig&, const std::string&)>;
  using Getter = std::function<std::string(const RunConfig&)>;

  struct Key {
    std::string name;
    Setter set;
    Getter get;
    bool required = false;
  };

  static const std::vector<Key>& keys() {
    static const std::vector<Key> table = build();
    return table;
  }

 private:
  static Key real(std::string name, double EnsembleConfig::*member, bool required = false) {
    return {name,
            [member, name](RunConfig& c, const std::string& v) -> std::string {
              double x = 0.0;
              if (!detail::parse_double(v, x)) return name + ": '" + v + "' is not a finite number";
              c.ensemble.*member = x;
              return {};
            },
            [member](const RunConfig& c) { return detail::format_double(c.ensemble.*member); }, required};
  }

  static Key param(std::string name, double ModelParams::*member, bool required = false) {
    return {name,
            [member, name](RunConfig& c, const std::string& v) -> std::string {
              double x = 0.0;
              if (!detail::parse_double(v, x)) return name + ": '" + v + "' is not a finite number";
              c.ensemble.params.*member = x;
              return {};
            },
            [member](const RunConfig& c) { return detail::format_double(c.ensemble.params.*member); },
            required};
  }

  static Key noise_real(std::string name, NoiseSpec EnsembleConfig::*spec, double NoiseSpec::*member) {
    return {name,
            [spec, member, name](RunConfig& c, const std::string& v) -> std::string {
              double x = 0.0;
              if (!detail::parse_double(v, x)) return name + ": '" + v + "' is not a finite number";
              (c.ensemble.*spec).*member = x;
              return {};
            },
            [spec, member](const RunConfig& c) { return detail::format_double((c.ensemble.*spec).*member); }};
  }

  static Key noise_kmax(std::string name, NoiseSpec EnsembleConfig::*spec) {
    return {name,
            [spec, name](RunConfig& c, const std::string& v) -> std::string {
              int x = 0;
              if (!detail::parse_integer(v, x)) return name + ": '" + v + "' is not an integer";
              (c.ensemble.*spec).kmax = x;
              return {};
            },
            [spec](const RunConfig& c) { return std::to_string((c.ensemble.*spec).kmax); }};
  }

  template <class Int>
  static Key count(std::string name, Int EnsembleConfig::*member) {
    return {name,
            [member, name](RunConfig& c, const std::string& v) -> std::string {
              long long x = 0;
              if (!detail::parse_integer(v, x)) return name + ": '" + v + "' is not an integer";
              if (x < 0) return name + " must be nonnegative";
              c.ensemble.*member = static_cast<Int>(x);
              return {};
            },
            [member](const RunConfig& c) { return std::to_string(c.ensemble.*member); }};
  }

  template <class Enum>
  static Key choice(std::string name, Enum EnsembleConfig::*member,
                    std::vector<std::pair<std::string, Enum>> options) {
    return {name,
            [member, name, options](RunConfig& c, const std::string& v) -> std::string {
              std::string names;
              for (const auto& [label, value] : options) {
                if (label == v) {
                  c.ensemble.*member = value;
                  return {};
                }
                names += (names.empty() ? "" : ", ") + label;
              }
              return name + ": '" + v + "' is not one of " + names;
            },
            [member, options](const RunConfig& c) {
              for (const auto& [label, value] : options)
                if (c.ensemble.*member == value) return label;
              return std::string("?");
            }};
  }

  static Key initial(std::string name, InitialCondition EnsembleConfig::*member) {
    return {name,
            [member, name](RunConfig& c, const std::string& v) -> std::string {
              try {
                c.ensemble.*member = InitialCondition::parse(v);
              } catch (const InvalidArgument& e) {
                return name + ": " + e.what();
              }
              return {};
            },
            [member](const RunConfig& c) { return (c.ensemble.*member).describe(); }};
  }

  static std::vector<Key> build() {
    using E = EnsembleConfig;
    using P = ModelParams;
    std::vector<Key> k;
    k.push_back(param("gamma", &P::gamma, true));
    k.push_back(param("r_u", &P::r_u));
    k.push_back(param("r_v", &P::r_v));
    k.push_back(param("chi", &P::chi));
    k.push_back(param("alpha", &P::alpha));
    k.push_back(param("beta", &P::beta));
    k.push_back(param("sigma_u", &P::sigma_u));
    k.push_back(param("sigma_v", &P::sigma_v));
    k.push_back(noise_real("delta_u", &E::noise_u, &NoiseSpec::delta));
    k.push_back(noise_kmax("kmax_u", &E::noise_u));
    k.push_back(noise_real("delta_v", &E::noise_v, &NoiseSpec::delta));
    k.push_back(noise_kmax("kmax_v", &E::noise_v));
    k.push_back(initial("u0", &E::u0));
    k.push_back(initial("v0", &E::v0));
    k.push_back(count("resolution", &E::resolution));
    k.push_back(real("t_end", &E::t_end));
    k.push_back(choice("dt_policy", &E::dt_policy,
                       {{"adaptive", DtPolicy::adaptive}, {"fixed", DtPolicy::fixed}}));
    k.push_back(real("dt", &E::dt));
    k.push_back(real("dt_max", &E::dt_max));
    k.push_back(count("snapshots", &E::snapshots));
    k.push_back(real("cfl_safety", &E::cfl_safety));
    k.push_back(count("paths", &E::num_paths));
    k.push_back(count("seed", &E::base_seed));
    k.push_back(choice("method", &E::method, {{"direct", Method::direct}, {"picard", Method::picard}}));
    k.push_back(real("picard_tol", &E::picard_tol));
    k.push_back(count("picard_max_iter", &E::picard_max_iter));
    k.push_back(choice("integrator", &E::integrator,
                       {{"ito", Integrator::ito},
                        {"stratonovich", Integrator::stratonovich},
                        {"heun", Integrator::heun}}));
    k.push_back({"output",
                 [](RunConfig& c, const std::string& v) -> std::string {
                   if (v.empty()) return "output: directory must not be empty";
                   c.output = v;
                   return {};
                 },
                 [](const RunConfig& c) { return c.output; }});
    k.push_back({"write_fields",
                 [](RunConfig& c, const std::string& v) -> std::string {
                   if (v == "true") c.write_fields = true;
                   else if (v == "false") c.write_fields = false;
                   else return "write_fields: '" + v + "' is not true or false";
                   return {};
                 },
                 [](const RunConfig& c) { return std::string(c.write_fields ? "true" : "false"); }});
    return k;
  }
};

/// Default configuration before any key is applied.
inline RunConfig default_run_config() {
  RunConfig c;
  c.ensemble = EnsembleConfig::default_stochastic();
  return c;
}

/// Parses `key = value` lines. Text after '#' is a comment. Unknown keys,
/// duplicates, malformed values, missing required keys and sign violations
/// are all collected and reported together.
inline RunConfig parse_config(std::string_view text) {
  RunConfig c = default_run_config();
  std::vector<std::string> errors;
  std::set<std::string> seen;
  std::map<std::string, const ConfigSchema::Key*> lookup;
  for (const auto& k : ConfigSchema::keys()) lookup[k.name] = &k;

  std::istringstream in{std::string(text)};
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'key = value', got '" + body + "'");
      continue;
    }
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    const auto it = lookup.find(key);
    if (it == lookup.end()) {
      errors.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (!seen.insert(key).second) {
      errors.push_back(where + "duplicate key '" + key + "'");
      continue;
    }
    if (value.empty()) {
      errors.push_back(where + key + ": missing value");
      continue;
    }
    if (std::string msg = it->second->set(c, value); !msg.empty()) errors.push_back(where + msg);
  }
  for (const auto& k : ConfigSchema::keys()) {
    if (k.required && !seen.count(k.name)) errors.push_back("missing required key '" + k.name + "'");
  }
  for (auto& v : c.ensemble.violations()) errors.push_back(std::move(v));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  c.ensemble.noise_u.sigma = c.ensemble.params.sigma_u;
  c.ensemble.noise_v.sigma = c.ensemble.params.sigma_v;
  return c;
}

/// Key/value pairs in schema order. The output directory is left out
/// unless requested, so echoes of one run in two places agree.
inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c,
                                                                       bool with_output = false) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : ConfigSchema::keys()) {
    if (k.name != "output" || with_output) out.emplace_back(k.name, k.get(c));
  }
  return out;
}

/// Canonical text form; parse_config(to_text(c, true)) reproduces c.
inline std::string to_text(const RunConfig& c, bool with_output = false) {
  std::string out;
  for (const auto& [key, value] : config_entries(c, with_output)) out += key + " = " + value + "\n";
  return out;
}

}  // namespace kspm

#endif  // KSPM_CONFIG_HPP
