#include "hdnf/replay.hpp"

#include <algorithm>
#include <limits>

namespace hdnf::replay {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

SumTree::SumTree(std::size_t capacity)
    : capacity_(capacity),
      base_(next_pow2(std::max<std::size_t>(capacity, 1))),
      tree_(2 * base_, 0.0) {}

void SumTree::set(std::size_t idx, double value) {
  std::size_t node = base_ + idx;
  tree_[node] = value;
  while (node > 1) {
    node >>= 1;
    tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
  }
}

double SumTree::get(std::size_t idx) const { return tree_[base_ + idx]; }

double SumTree::total() const { return tree_[1]; }

std::size_t SumTree::find_prefix(double mass) const {
  mass = std::clamp(mass, 0.0, std::nextafter(total(), 0.0));
  std::size_t node = 1;
  while (node < base_) {
    const std::size_t left = 2 * node;
    if (mass < tree_[left] || tree_[left + 1] == 0.0) {
      node = left;
    } else {
      mass -= tree_[left];
      node = left + 1;
    }
  }
  return std::min(node - base_, capacity_ - 1);
}

MinTree::MinTree(std::size_t capacity)
    : base_(next_pow2(std::max<std::size_t>(capacity, 1))),
      tree_(2 * base_, std::numeric_limits<double>::infinity()) {}

void MinTree::set(std::size_t idx, double value) {
  std::size_t node = base_ + idx;
  tree_[node] = value;
  while (node > 1) {
    node >>= 1;
    tree_[node] = std::min(tree_[2 * node], tree_[2 * node + 1]);
  }
}

double MinTree::min() const { return tree_[1]; }

}  // namespace hdnf::replay
