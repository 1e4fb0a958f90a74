#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ivri/errors.hpp"

namespace ivri {

struct TrajectoryMetadata {
  std::string model;
  std::string integrator;
  double step = 0.0;
};

/// Time-stamped states of fixed dimension, stored row-major.
class Trajectory {
 public:
  using Metadata = TrajectoryMetadata;

  Trajectory() = default;
  explicit Trajectory(std::size_t dimension, Metadata meta = {})
      : dim_(dimension), meta_(std::move(meta)) {}

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& data() const noexcept { return data_; }
  const Metadata& metadata() const noexcept { return meta_; }
  Metadata& metadata() noexcept { return meta_; }

  double time(std::size_t i) const { return times_[i]; }
  std::span<const double> state(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const double> back() const { return state(size() - 1); }

  /// Appends a sample; times must increase strictly and states be finite.
  void push_back(double t, std::span<const double> x) {
    if (x.size() != dim_) throw DomainError("Trajectory: state dimension mismatch");
    if (!times_.empty() && !(t > times_.back()))
      throw DomainError("Trajectory: times must be strictly increasing");
    for (double v : x)
      if (std::isnan(v)) throw NumericError("Trajectory: NaN state");
    times_.push_back(t);
    data_.insert(data_.end(), x.begin(), x.end());
  }

  void reserve(std::size_t n) {
    times_.reserve(n);
    data_.reserve(n * dim_);
  }

  /// Column `k` as a vector.
  std::vector<double> component(std::size_t k) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = data_[i * dim_ + k];
    return out;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<double> times_;
  std::vector<double> data_;
  Metadata meta_;
};

}  // namespace ivri
