#pragma once

// Windowed double sums over ordered zero pairs, shared by pair_stats and
// kernels. Rows are grouped in fixed-size blocks (independent of the worker
// count); each block reduces its rows with compensated summation and blocks
// are combined in index order, so results are bitwise stable for any k.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "zpc/common.hpp"
#include "zpc/zero_multiset.hpp"

namespace zpc::detail {

inline constexpr std::size_t kRowBlock = 256;

/// Indices [lo, hi) of zeros with |gamma_j - gamma_i| <= U.
struct RowWindow {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

inline RowWindow row_window(std::span<const Zero> zs, std::size_t i, double U) {
  const double g = zs[i].gamma;
  const auto lo = std::lower_bound(zs.begin(), zs.end(), g - U,
                                   [](const Zero& z, double t) { return z.gamma < t; });
  const auto hi = std::upper_bound(lo, zs.end(), g + U,
                                   [](double t, const Zero& z) { return t < z.gamma; });
  return {static_cast<std::size_t>(lo - zs.begin()), static_cast<std::size_t>(hi - zs.begin())};
}

/// Calls row(i, window, out) for every zero, where `out` has `width` complex
/// slots the row adds into. Returns the per-slot totals.
inline std::vector<cplx> sum_rows(
    std::span<const Zero> zs, double U, std::size_t width, int workers,
    const std::function<void(std::size_t, RowWindow, std::vector<cplx>&)>& row) {
  const std::size_t n_blocks = (zs.size() + kRowBlock - 1) / kRowBlock;
  std::vector<std::vector<CompensatedComplexSum>> partial(
      n_blocks, std::vector<CompensatedComplexSum>(width));
  parallel_blocks(n_blocks, workers, [&](std::size_t b) {
    std::vector<cplx> scratch(width);
    const std::size_t end = std::min(zs.size(), (b + 1) * kRowBlock);
    for (std::size_t i = b * kRowBlock; i < end; ++i) {
      std::fill(scratch.begin(), scratch.end(), cplx{});
      row(i, row_window(zs, i, U), scratch);
      for (std::size_t k = 0; k < width; ++k) partial[b][k].add(scratch[k]);
    }
  });
  std::vector<CompensatedComplexSum> total(width);
  for (const auto& blk : partial) {
    for (std::size_t k = 0; k < width; ++k) total[k].add(blk[k]);
  }
  std::vector<cplx> out(width);
  for (std::size_t k = 0; k < width; ++k) out[k] = total[k].value();
  return out;
}

/// Certified bound on sum over ordered pairs with |gamma - gamma'| > U of
/// m m' envelope(|gamma - gamma'|), for a nonincreasing envelope. Pairs are
/// counted exactly in dyadic shells (U 2^k, U 2^{k+1}] and each shell is
/// charged envelope(U 2^k).
inline double shell_tail_bound(std::span<const Zero> zs, double U,
                               const std::function<double(double)>& envelope) {
  if (zs.empty()) return 0.0;
  const double span = zs.back().gamma - zs.front().gamma;
  if (U >= span) return 0.0;
  std::vector<double> prefix(zs.size() + 1, 0.0);
  for (std::size_t i = 0; i < zs.size(); ++i) prefix[i + 1] = prefix[i] + zs[i].mult;
  auto mass_within = [&](double g, double r) {
    const auto lo = std::lower_bound(zs.begin(), zs.end(), g - r,
                                     [](const Zero& z, double t) { return z.gamma < t; });
    const auto hi = std::upper_bound(zs.begin(), zs.end(), g + r,
                                     [](double t, const Zero& z) { return t < z.gamma; });
    return prefix[hi - zs.begin()] - prefix[lo - zs.begin()];
  };
  CompensatedSum total;
  for (const auto& z : zs) {
    double inner = mass_within(z.gamma, U);
    for (double r = U; r < span; r *= 2.0) {
      const double outer = mass_within(z.gamma, 2.0 * r);
      total.add(z.mult * (outer - inner) * envelope(r));
      inner = outer;
    }
  }
  return total.value();
}

/// Whether the grid is an arithmetic progression (to use phase rotation).
inline bool is_arithmetic(const std::vector<double>& grid) {
  if (grid.size() < 3) return grid.size() == 2;
  const double step = grid[1] - grid[0];
  for (std::size_t k = 2; k < grid.size(); ++k) {
    if (std::abs((grid[k] - grid[k - 1]) - step) > 1e-12 * std::max(1.0, std::abs(step))) return false;
  }
  return true;
}

}  // namespace zpc::detail
