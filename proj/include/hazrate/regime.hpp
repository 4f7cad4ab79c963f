#pragma once

#include <optional>
#include <string>

namespace hazrate {

// Static treatment strategy: never treat, treat from time 0, or start treatment at a fixed time.
struct Regime {
  enum class Kind { never, always, initiate_at };

  Kind kind = Kind::never;
  double u = 0.0;  // initiation time, initiate_at only

  static Regime never() { return {Kind::never, 0.0}; }
  static Regime always() { return {Kind::always, 0.0}; }
  static Regime initiate_at(double u) { return {Kind::initiate_at, u}; }

  // Initiation time implied by the regime, if any.
  std::optional<double> initiation() const {
    switch (kind) {
      case Kind::never:
        return std::nullopt;
      case Kind::always:
        return 0.0;
      case Kind::initiate_at:
        return u;
    }
    return std::nullopt;
  }

  std::string describe() const;
};

}  // namespace hazrate
