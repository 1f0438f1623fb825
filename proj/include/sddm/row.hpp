#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "sddm/core.hpp"

namespace sddm {

// Row of a matrix power with explicit support. Keeps (index, value) pairs
// while the support is small and switches to a dense array once it exceeds
// half the dimension. Exact zeros are never part of the support.
class SparseRow {
 public:
  SparseRow() = default;

  // items must be sorted by index with no duplicates
  SparseRow(int dim, std::vector<std::pair<int, double>> items) : dim_(dim) {
    items.erase(std::remove_if(items.begin(), items.end(),
                               [](const auto& p) { return p.second == 0.0; }),
                items.end());
    nnz_ = static_cast<int>(items.size());
    if (nnz_ > dim_ / 2) {
      dense_.assign(dim_, 0.0);
      for (const auto& [j, v] : items) dense_[j] = v;
    } else {
      items_ = std::move(items);
    }
  }

  int dim() const { return dim_; }
  int nnz() const { return nnz_; }
  bool empty() const { return nnz_ == 0; }

  double get(int j) const {
    if (!dense_.empty()) return dense_[j];
    auto it = std::lower_bound(
        items_.begin(), items_.end(), j,
        [](const auto& p, int key) { return p.first < key; });
    return (it != items_.end() && it->first == j) ? it->second : 0.0;
  }

  // ascending index, nonzeros only
  template <class F>
  void for_each(F&& f) const {
    if (!dense_.empty()) {
      for (int j = 0; j < dim_; ++j)
        if (dense_[j] != 0.0) f(j, dense_[j]);
    } else {
      for (const auto& [j, v] : items_) f(j, v);
    }
  }

  Vector to_dense() const {
    Vector out = Vector::Zero(dim_);
    for_each([&](int j, double v) { out(j) = v; });
    return out;
  }

 private:
  int dim_ = 0;
  int nnz_ = 0;
  std::vector<std::pair<int, double>> items_;
  std::vector<double> dense_;
};

}  // namespace sddm
