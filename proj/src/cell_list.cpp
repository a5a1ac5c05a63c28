#include "bdgraphtv/cell_list.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bdgraphtv/errors.hpp"

namespace bdgraphtv {

CellList::CellList(const Eigen::MatrixXd& points, double h)
    : dim_(static_cast<int>(points.rows())) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ArgumentError("cell size must be positive");
  const Eigen::Index n = points.cols();
  if (n == 0) return;
  const Eigen::VectorXd lo = points.rowwise().minCoeff();
  std::vector<std::int64_t> pk(static_cast<std::size_t>(n) * dim_);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < dim_; ++k) {
      const double q = std::floor((points(k, i) - lo[k]) / h);
      if (!(q < 4e18)) throw ArgumentError("cell size too small for the point extent");
      pk[i * dim_ + k] = static_cast<std::int64_t>(q);
    }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), Eigen::Index{0});
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (int k = 0; k < dim_; ++k) {
      const auto ka = pk[a * dim_ + k], kb = pk[b * dim_ + k];
      if (ka != kb) return ka < kb;
    }
    return a < b;
  };
  std::sort(order_.begin(), order_.end(), less);
  auto same = [&](Eigen::Index a, Eigen::Index b) {
    for (int k = 0; k < dim_; ++k)
      if (pk[a * dim_ + k] != pk[b * dim_ + k]) return false;
    return true;
  };
  for (Eigen::Index s = 0; s < n; ++s) {
    if (s == 0 || !same(order_[s - 1], order_[s])) {
      if (s > 0) end_.push_back(s);
      begin_.push_back(s);
      for (int k = 0; k < dim_; ++k) keys_.push_back(pk[order_[s] * dim_ + k]);
    }
  }
  end_.push_back(n);

  std::vector<int> off(dim_, -1);
  while (true) {
    bool zero = true;
    int first_nonzero = 0;
    for (int k = 0; k < dim_; ++k)
      if (off[k] != 0) {
        zero = false;
        first_nonzero = off[k];
        break;
      }
    if (!zero) {
      stencil_.push_back(off);
      if (first_nonzero > 0) half_stencil_.push_back(off);
    }
    int k = dim_ - 1;
    while (k >= 0 && ++off[k] == 2) off[k--] = -1;
    if (k < 0) break;
  }
}

std::ptrdiff_t CellList::find(std::span<const std::int64_t> k) const {
  std::size_t lo = 0, hi = cell_count();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const auto km = key(mid);
    if (std::lexicographical_compare(km.begin(), km.end(), k.begin(), k.end()))
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo < cell_count()) {
    const auto kl = key(lo);
    if (std::equal(kl.begin(), kl.end(), k.begin())) return static_cast<std::ptrdiff_t>(lo);
  }
  return -1;
}

void CellList::neighbours(std::size_t c, bool half, bool include_self,
                          std::vector<std::size_t>& out) const {
  out.clear();
  if (include_self) out.push_back(c);
  const auto base = key(c);
  std::int64_t probe[16];
  std::vector<std::int64_t> heap;
  std::int64_t* buf = probe;
  if (dim_ > 16) {
    heap.resize(dim_);
    buf = heap.data();
  }
  for (const auto& off : half ? half_stencil_ : stencil_) {
    for (int k = 0; k < dim_; ++k) buf[k] = base[k] + off[k];
    const auto f = find({buf, static_cast<std::size_t>(dim_)});
    if (f >= 0) out.push_back(static_cast<std::size_t>(f));
  }
}

}  // namespace bdgraphtv
