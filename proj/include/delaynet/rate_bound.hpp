#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "delaynet/error.hpp"

namespace delaynet {

/// The comparison double sequence a'_{m,n} on Delta: either the exponential
/// family K e^{-mu (m-n)} (K = 1 unless a prefactor is needed to dominate
/// the exact operator norms), or explicit values on a truncated window.
class RateBound {
 public:
  static RateBound exponential(double mu, double prefactor = 1.0) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("rate bound: mu must be positive");
    if (!(prefactor >= 1.0) || !std::isfinite(prefactor)) throw InputError("rate bound: prefactor must be >= 1");
    RateBound b;
    b.mu_ = mu;
    b.prefactor_ = prefactor;
    return b;
  }

  /// rows[n - first_start][m - n] = a'_{m,n}.
  static RateBound tabulated(Index first_start, std::vector<std::vector<double>> rows) {
    if (rows.empty()) throw InputError("rate bound table is empty");
    for (const auto& row : rows) {
      if (row.empty()) throw InputError("rate bound table has an empty row");
      for (double v : row)
        if (!(v > 0.0) || !std::isfinite(v)) throw InputError("rate bound table values must be positive");
    }
    RateBound b;
    b.first_ = first_start;
    b.rows_ = std::move(rows);
    return b;
  }

  double operator()(Index m, Index n) const {
    if (!(m >= n && n >= 0)) throw InputError("rate bound evaluated outside Delta");
    if (mu_) return prefactor_ * std::exp(-*mu_ * static_cast<double>(m - n));
    const Index r = n - first_;
    if (r < 0 || r >= static_cast<Index>(rows_.size()) ||
        m - n >= static_cast<Index>(rows_[static_cast<std::size_t>(r)].size()))
      throw InputError("rate bound table does not cover (" + std::to_string(m) + ", " + std::to_string(n) + ")");
    return rows_[static_cast<std::size_t>(r)][static_cast<std::size_t>(m - n)];
  }

  std::optional<double> rate() const { return mu_; }
  double prefactor() const { return prefactor_; }

 private:
  RateBound() = default;
  std::optional<double> mu_;
  double prefactor_ = 1.0;
  Index first_ = 0;
  std::vector<std::vector<double>> rows_;
};

}  // namespace delaynet
