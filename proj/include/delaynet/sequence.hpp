#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <variant>
#include <vector>

#include "delaynet/error.hpp"

namespace delaynet {

/// A real sequence indexed by m >= 0: a constant, an omega-periodic table,
/// or an explicit table for m = 0..M0 followed by a constant tail.
class Sequence {
 public:
  enum class Kind { Constant, Periodic, Table };

  Sequence() : Sequence(constant(0.0)) {}

  static Sequence constant(double value) {
    require_finite(value);
    return Sequence(ConstantRep{value});
  }

  static Sequence periodic(std::vector<double> values) {
    if (values.empty()) throw InputError("periodic sequence needs at least one value");
    for (double v : values) require_finite(v);
    return Sequence(PeriodicRep{std::move(values)});
  }

  static Sequence table(std::vector<double> values, double tail) {
    if (values.empty()) throw InputError("table sequence needs at least one value");
    for (double v : values) require_finite(v);
    require_finite(tail);
    return Sequence(TableRep{std::move(values), tail});
  }

  double operator()(Index m) const {
    if (m < 0) throw InputError("sequence evaluated at negative index");
    return std::visit(
        [m](const auto& rep) -> double {
          using T = std::decay_t<decltype(rep)>;
          if constexpr (std::is_same_v<T, ConstantRep>) {
            return rep.value;
          } else if constexpr (std::is_same_v<T, PeriodicRep>) {
            return rep.values[static_cast<std::size_t>(m % static_cast<Index>(rep.values.size()))];
          } else {
            return m < static_cast<Index>(rep.values.size()) ? rep.values[static_cast<std::size_t>(m)]
                                                             : rep.tail;
          }
        },
        rep_);
  }

  Kind kind() const { return static_cast<Kind>(rep_.index()); }

  /// Every value the sequence ever takes (table values plus tail).
  std::vector<double> range_values() const {
    return std::visit(
        [](const auto& rep) -> std::vector<double> {
          using T = std::decay_t<decltype(rep)>;
          if constexpr (std::is_same_v<T, ConstantRep>) {
            return {rep.value};
          } else if constexpr (std::is_same_v<T, PeriodicRep>) {
            return rep.values;
          } else {
            auto all = rep.values;
            all.push_back(rep.tail);
            return all;
          }
        },
        rep_);
  }

  // Exact over the whole of N0: one period, or the table plus its tail.
  double inf() const {
    auto v = range_values();
    return *std::min_element(v.begin(), v.end());
  }
  double sup() const {
    auto v = range_values();
    return *std::max_element(v.begin(), v.end());
  }
  double sup_abs() const {
    double s = 0.0;
    for (double v : range_values()) s = std::max(s, std::abs(v));
    return s;
  }

  /// Number of leading indices that determine the sequence: 1 for a
  /// constant, the period, or the table length.
  Index span() const {
    return std::visit(
        [](const auto& rep) -> Index {
          using T = std::decay_t<decltype(rep)>;
          if constexpr (std::is_same_v<T, ConstantRep>) {
            return 1;
          } else {
            return static_cast<Index>(rep.values.size());
          }
        },
        rep_);
  }

  /// Declared period; absent for finite tables.
  std::optional<Index> period() const {
    switch (kind()) {
      case Kind::Constant: return 1;
      case Kind::Periodic: return span();
      case Kind::Table: return std::nullopt;
    }
    return std::nullopt;
  }

  std::optional<double> tail() const {
    if (auto* t = std::get_if<TableRep>(&rep_)) return t->tail;
    return std::nullopt;
  }

  /// Explicit values (the constant, the period, or the table without tail).
  std::vector<double> values() const {
    auto v = range_values();
    if (kind() == Kind::Table) v.pop_back();
    return v;
  }

  Sequence scaled(double factor) const {
    Sequence out = *this;
    std::visit(
        [factor](auto& rep) {
          using T = std::decay_t<decltype(rep)>;
          if constexpr (std::is_same_v<T, ConstantRep>) {
            rep.value *= factor;
          } else {
            for (double& v : rep.values) v *= factor;
            if constexpr (std::is_same_v<T, TableRep>) rep.tail *= factor;
          }
        },
        out.rep_);
    return out;
  }

  bool is_integer_valued() const {
    for (double v : range_values())
      if (v != std::floor(v)) return false;
    return true;
  }

 private:
  struct ConstantRep {
    double value;
  };
  struct PeriodicRep {
    std::vector<double> values;
  };
  struct TableRep {
    std::vector<double> values;
    double tail;
  };
  using Rep = std::variant<ConstantRep, PeriodicRep, TableRep>;

  explicit Sequence(Rep rep) : rep_(std::move(rep)) {}

  static void require_finite(double v) {
    if (!std::isfinite(v)) throw InputError("sequence values must be finite");
  }

  Rep rep_;
};

}  // namespace delaynet
