#pragma once

#include <numeric>
#include <vector>

#include "loopsoup/graph.hpp"

namespace loopsoup {

/// Disjoint sets with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(Index count = 0) { reset(count); }

  void reset(Index count) {
    parent_.resize(count);
    size_.assign(count, 1);
    std::iota(parent_.begin(), parent_.end(), Index{0});
    sets_ = count;
  }
  /// Appends a new singleton and returns its id.
  Index add() {
    parent_.push_back(static_cast<Index>(parent_.size()));
    size_.push_back(1);
    ++sets_;
    return parent_.back();
  }
  Index find(Index x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    --sets_;
    return true;
  }
  bool same(Index a, Index b) { return find(a) == find(b); }
  Index set_size(Index x) { return size_[find(x)]; }
  Index element_count() const { return static_cast<Index>(parent_.size()); }
  Index set_count() const { return sets_; }

  /// Dense labels 0..k-1 in order of first appearance.
  std::vector<Index> labels() {
    std::vector<Index> root_label(parent_.size(), -1), out(parent_.size());
    Index next = 0;
    for (Index x = 0; x < element_count(); ++x) {
      const Index r = find(x);
      if (root_label[r] < 0) root_label[r] = next++;
      out[x] = root_label[r];
    }
    return out;
  }

 private:
  std::vector<Index> parent_;
  std::vector<Index> size_;
  Index sets_ = 0;
};

}  // namespace loopsoup
