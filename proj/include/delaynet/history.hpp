#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "delaynet/error.hpp"

namespace delaynet {

/// An element of X^N: N real components over the integer offsets r..0,
/// with r = -depth. Stored offset-major, so at(j) is a contiguous N-vector.
class HistorySegment {
 public:
  HistorySegment() = default;

  HistorySegment(std::size_t neurons, int depth)
      : neurons_(neurons), depth_(depth), data_(neurons * static_cast<std::size_t>(depth + 1), 0.0) {
    if (neurons == 0) throw InputError("history segment needs at least one component");
    if (depth < 0) throw InputError("history depth must be nonnegative (r <= 0)");
  }

  /// Build from rows ordered by offset r, r+1, ..., 0.
  static HistorySegment from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw InputError("history segment needs at least one offset");
    HistorySegment seg(rows.front().size(), static_cast<int>(rows.size()) - 1);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k].size() != seg.neurons_) throw InputError("ragged history rows");
      for (std::size_t i = 0; i < seg.neurons_; ++i) {
        if (!std::isfinite(rows[k][i])) throw InputError("history entries must be finite");
        seg.data_[k * seg.neurons_ + i] = rows[k][i];
      }
    }
    return seg;
  }

  static HistorySegment filled(std::size_t neurons, int depth, double value) {
    HistorySegment seg(neurons, depth);
    std::fill(seg.data_.begin(), seg.data_.end(), value);
    return seg;
  }

  std::size_t neurons() const { return neurons_; }
  int depth() const { return depth_; }
  int lower() const { return -depth_; }

  double& operator()(int offset, std::size_t i) { return data_[slot(offset, i)]; }
  double operator()(int offset, std::size_t i) const { return data_[slot(offset, i)]; }

  std::span<const double> at(int offset) const {
    return {data_.data() + slot(offset, 0), neurons_};
  }

  /// Values of component i ordered by offset r..0.
  std::vector<double> component(std::size_t i) const {
    std::vector<double> out(static_cast<std::size_t>(depth_ + 1));
    for (int j = -depth_; j <= 0; ++j) out[static_cast<std::size_t>(j + depth_)] = (*this)(j, i);
    return out;
  }

  void set_component(std::size_t i, std::span<const double> values) {
    if (values.size() != static_cast<std::size_t>(depth_ + 1)) throw InputError("component length mismatch");
    for (int j = -depth_; j <= 0; ++j) (*this)(j, i) = values[static_cast<std::size_t>(j + depth_)];
  }

  std::span<const double> raw() const { return data_; }

  /// max over components and offsets of |value|.
  double sup_norm() const {
    double s = 0.0;
    for (double v : data_) s = std::max(s, std::abs(v));
    return s;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  HistorySegment& operator+=(const HistorySegment& o) {
    check_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  HistorySegment& operator-=(const HistorySegment& o) {
    check_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  HistorySegment& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  friend HistorySegment operator+(HistorySegment a, const HistorySegment& b) { return a += b; }
  friend HistorySegment operator-(HistorySegment a, const HistorySegment& b) { return a -= b; }
  friend HistorySegment operator*(double s, HistorySegment a) { return a *= s; }
  friend HistorySegment operator*(HistorySegment a, double s) { return a *= s; }

  friend bool operator==(const HistorySegment&, const HistorySegment&) = default;

 private:
  std::size_t slot(int offset, std::size_t i) const {
    if (offset > 0 || offset < -depth_ || i >= neurons_) throw InputError("history index out of range");
    return static_cast<std::size_t>(offset + depth_) * neurons_ + i;
  }

  void check_shape(const HistorySegment& o) const {
    if (o.neurons_ != neurons_ || o.depth_ != depth_) throw InputError("history shape mismatch");
  }

  std::size_t neurons_ = 0;
  int depth_ = 0;
  std::vector<double> data_;
};

inline double sup_norm(const HistorySegment& seg) { return seg.sup_norm(); }

}  // namespace delaynet
