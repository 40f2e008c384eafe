#ifndef KSPM_INITIAL_HPP
#define KSPM_INITIAL_HPP

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kspm/barenblatt.hpp"
#include "kspm/errors.hpp"
#include "kspm/format.hpp"
#include "kspm/grid.hpp"
#include "kspm/snapshot_io.hpp"

namespace kspm {

/// Initial field selector.
///
/// Text forms (whitespace separated):
///   constant C
///   cosine M1 M2 AMPLITUDE [OFFSET]   OFFSET + AMPLITUDE cos(pi M1 x) cos(pi M2 y)
///   barenblatt MASS T0                Barenblatt profile of the u-equation at time T0
///   file PATH                         snapshot file
struct InitialCondition {
  enum class Kind { constant, cosine, barenblatt, file };

  Kind kind = Kind::constant;
  double value = 0.0;  ///< constant level, or the cosine offset
  int m1 = 0;
  int m2 = 0;
  double amplitude = 0.0;
  double mass = 0.0;
  double t0 = 0.0;
  std::string path;

  static InitialCondition constant(double c) {
    InitialCondition ic;
    ic.value = c;
    return ic;
  }
  static InitialCondition cosine(int m1, int m2, double amplitude, double offset) {
    InitialCondition ic;
    ic.kind = Kind::cosine;
    ic.value = offset;
    ic.m1 = m1;
    ic.m2 = m2;
    ic.amplitude = amplitude;
    return ic;
  }
  static InitialCondition barenblatt(double mass, double t0) {
    InitialCondition ic;
    ic.kind = Kind::barenblatt;
    ic.mass = mass;
    ic.t0 = t0;
    return ic;
  }
  static InitialCondition file(std::string path) {
    InitialCondition ic;
    ic.kind = Kind::file;
    ic.path = std::move(path);
    return ic;
  }

  /// Parses the text form; throws InvalidArgument with a description on error.
  static InitialCondition parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    if (tok.empty()) throw InvalidArgument("empty initial condition");
    auto number = [&](std::size_t k) {
      double v = 0.0;
      const auto& s = tok[k];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw InvalidArgument("initial condition: '" + s + "' is not a number");
      }
      return v;
    };
    auto integer = [&](std::size_t k) {
      const double v = number(k);
      if (v != std::floor(v) || v < 0.0 || v > 1e6) {
        throw InvalidArgument("initial condition: mode index '" + tok[k] + "' must be a nonnegative integer");
      }
      return static_cast<int>(v);
    };
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (tok.size() < lo + 1 || tok.size() > hi + 1) {
        throw InvalidArgument("initial condition '" + tok[0] + "' takes " + std::to_string(lo) +
                              (lo == hi ? "" : "-" + std::to_string(hi)) + " arguments");
      }
    };
    const std::string& head = tok[0];
    if (head == "constant") {
      arity(1, 1);
      return constant(number(1));
    }
    if (head == "cosine") {
      arity(3, 4);
      return cosine(integer(1), integer(2), number(3), tok.size() == 5 ? number(4) : 0.0);
    }
    if (head == "barenblatt") {
      arity(2, 2);
      const double mass = number(1), t0 = number(2);
      if (!(mass > 0.0) || !(t0 > 0.0)) throw InvalidArgument("barenblatt initial condition needs mass > 0 and t0 > 0");
      return barenblatt(mass, t0);
    }
    if (head == "file") {
      arity(1, 1);
      return file(tok[1]);
    }
    throw InvalidArgument("unknown initial condition '" + head +
                          "' (expected constant, cosine, barenblatt or file)");
  }

  /// Canonical text form; parse(describe()) reproduces the selector.
  std::string describe() const {
    using detail::format_double;
    switch (kind) {
      case Kind::constant: return "constant " + format_double(value);
      case Kind::cosine:
        return "cosine " + std::to_string(m1) + ' ' + std::to_string(m2) + ' ' + format_double(amplitude) + ' ' +
               format_double(value);
      case Kind::barenblatt: return "barenblatt " + format_double(mass) + ' ' + format_double(t0);
      case Kind::file: return "file " + path;
    }
    return {};
  }

  /// Smallest value the selector can take before sampling, when known in
  /// closed form (used for early admissibility checks).
  bool known_negative() const {
    switch (kind) {
      case Kind::constant: return value < 0.0;
      case Kind::cosine: return value - std::abs(amplitude) < 0.0;
      default: return false;
    }
  }

  /// Samples the selector on `g`. The Barenblatt profile uses the porous
  /// medium exponent and diffusivity of the u-equation.
  Field realize(const Grid& g, double gamma = 2.0, double diffusivity = 1.0) const {
    switch (kind) {
      case Kind::constant: return Field(g, value);
      case Kind::cosine: {
        const double pi = std::numbers::pi;
        return Field::sample(g, [&](double x, double y) {
          return value + amplitude * std::cos(pi * m1 * x) * std::cos(pi * m2 * y);
        });
      }
      case Kind::barenblatt:
        return Barenblatt::with_mass(mass, gamma, diffusivity).sample(g, t0);
      case Kind::file: {
        Field f = read_snapshot(path);
        if (!(f.grid() == g)) {
          throw InvalidArgument("initial field " + path + " is " + std::to_string(f.grid().nx()) + "x" +
                                std::to_string(f.grid().ny()) + ", run grid is " +
                                std::to_string(g.nx()) + "x" + std::to_string(g.ny()));
        }
        return f;
      }
    }
    throw InvalidArgument("unhandled initial condition");
  }

  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

}  // namespace kspm

#endif  // KSPM_INITIAL_HPP
