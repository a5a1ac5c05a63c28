#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace bdgraphtv {

/// Uniform-grid bucketing of a d×n point set with cubic cells of side h.
/// Cells are stored in lexicographic order of their integer coordinates, so
/// any traversal in cell index order is deterministic.
class CellList {
 public:
  CellList(const Eigen::MatrixXd& points, double h);

  std::size_t cell_count() const { return begin_.size(); }
  int dim() const { return dim_; }
  /// Point indices in cell c.
  std::span<const Eigen::Index> members(std::size_t c) const {
    return {order_.data() + begin_[c], static_cast<std::size_t>(end_[c] - begin_[c])};
  }
  /// Non-empty cells adjacent to c (including c itself when `include_self`).
  /// With `half`, only neighbours with a lexicographically larger offset are
  /// returned, so every unordered cell pair is visited once.
  void neighbours(std::size_t c, bool half, bool include_self,
                  std::vector<std::size_t>& out) const;

 private:
  std::span<const std::int64_t> key(std::size_t c) const {
    return {keys_.data() + c * dim_, static_cast<std::size_t>(dim_)};
  }
  std::ptrdiff_t find(std::span<const std::int64_t> k) const;

  int dim_;
  std::vector<Eigen::Index> order_;
  std::vector<std::int64_t> keys_;  // cell_count × dim
  std::vector<std::int64_t> begin_, end_;
  std::vector<std::vector<int>> stencil_;      // all offsets except 0
  std::vector<std::vector<int>> half_stencil_; // lexicographically positive
};

}  // namespace bdgraphtv
