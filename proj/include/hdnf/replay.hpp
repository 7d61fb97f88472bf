#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

namespace hdnf::replay {

// Binary indexed tree over fixed-capacity leaves supporting prefix-mass
// lookup in O(log n). Leaves hold priority^alpha.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);

  void set(std::size_t idx, double value);
  double get(std::size_t idx) const;
  double total() const;
  // Returns the leaf index whose cumulative interval contains mass,
  // clamping mass into [0, total).
  std::size_t find_prefix(double mass) const;

 private:
  std::size_t capacity_;
  std::size_t base_;
  std::vector<double> tree_;
};

// Companion structure tracking the minimum leaf value (for the max
// importance-weight normalizer). Unset leaves are +inf.
class MinTree {
 public:
  explicit MinTree(std::size_t capacity);

  void set(std::size_t idx, double value);
  double min() const;

 private:
  std::size_t base_;
  std::vector<double> tree_;
};

struct PerConfig {
  std::size_t capacity = 1000000;
  double alpha = 0.6;
  double epsilon = 1e-6;
  bool uniform = false;  // ablation: plain uniform replay, unit weights
};

struct SampleInfo {
  std::vector<std::size_t> indices;
  std::vector<double> weights;  // max-normalized, all <= 1
};

// Ring buffer with proportional prioritized sampling. New entries receive
// the running maximum raw priority so they are replayed at least once with
// high probability. beta (importance-sampling exponent) is supplied per
// sample call so the trainer can anneal it.
template <class T>
class PerBuffer {
 public:
  explicit PerBuffer(const PerConfig& config)
      : config_(config),
        sum_(config.capacity),
        min_(config.capacity),
        data_(config.capacity) {
    if (config.capacity == 0) {
      throw std::invalid_argument("PerBuffer capacity must be positive");
    }
    if (config.alpha <= 0.0 || config.epsilon <= 0.0) {
      throw std::invalid_argument("PerBuffer: alpha > 0 and epsilon > 0 required");
    }
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return config_.capacity; }

  void insert(T transition) {
    data_[next_] = std::move(transition);
    set_raw_priority(next_, max_raw_priority_);
    next_ = (next_ + 1) % config_.capacity;
    if (size_ < config_.capacity) ++size_;
  }

  const T& at(std::size_t idx) const { return data_.at(idx); }

  SampleInfo sample(std::size_t batch_size, double beta,
                    std::mt19937_64& rng) {
    if (size_ == 0) throw std::logic_error("PerBuffer: sample from empty buffer");
    if (batch_size == 0) throw std::invalid_argument("PerBuffer: batch_size must be positive");
    SampleInfo info;
    info.indices.resize(batch_size);
    info.weights.assign(batch_size, 1.0);
    if (config_.uniform) {
      std::uniform_int_distribution<std::size_t> dist(0, size_ - 1);
      for (std::size_t j = 0; j < batch_size; ++j) info.indices[j] = dist(rng);
      return info;
    }
    const double total = sum_.total();
    const double segment = total / static_cast<double>(batch_size);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double n = static_cast<double>(size_);
    const double min_prob = min_.min() / total;
    const double max_weight = std::pow(n * min_prob, -beta);
    for (std::size_t j = 0; j < batch_size; ++j) {
      const double mass = (static_cast<double>(j) + unit(rng)) * segment;
      const std::size_t idx = sum_.find_prefix(mass);
      const double prob = sum_.get(idx) / total;
      info.indices[j] = idx;
      info.weights[j] = std::pow(n * prob, -beta) / max_weight;
    }
    return info;
  }

  void update_priorities(const std::vector<std::size_t>& indices,
                         const std::vector<double>& td_errors) {
    if (indices.size() != td_errors.size()) {
      throw std::invalid_argument("PerBuffer: indices/td_errors length mismatch");
    }
    for (std::size_t j = 0; j < indices.size(); ++j) {
      const double raw = std::abs(td_errors[j]) + config_.epsilon;
      set_raw_priority(indices[j], raw);
      if (raw > max_raw_priority_) max_raw_priority_ = raw;
    }
  }

  double raw_priority(std::size_t idx) const {
    return std::pow(sum_.get(idx), 1.0 / config_.alpha);
  }

 private:
  void set_raw_priority(std::size_t idx, double raw) {
    const double p = std::pow(raw, config_.alpha);
    sum_.set(idx, p);
    min_.set(idx, p);
  }

  PerConfig config_;
  SumTree sum_;
  MinTree min_;
  std::vector<T> data_;
  std::size_t next_ = 0;
  std::size_t size_ = 0;
  double max_raw_priority_ = 1.0;
};

}  // namespace hdnf::replay
