#include "amab/mutual_information.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace amab {
namespace {

double mi_from_indices(std::span<const int> x, std::span<const std::uint32_t> y, std::span<const std::size_t> idx,
                       int n_x, std::uint32_t n_y, std::vector<long>& cx, std::vector<long>& cy,
                       std::vector<long>& cxy) {
  std::fill(cx.begin(), cx.end(), 0);
  std::fill(cy.begin(), cy.end(), 0);
  std::fill(cxy.begin(), cxy.end(), 0);
  for (std::size_t i : idx) {
    ++cx[static_cast<std::size_t>(x[i])];
    ++cy[y[i]];
    ++cxy[static_cast<std::size_t>(y[i]) * static_cast<std::size_t>(n_x) + static_cast<std::size_t>(x[i])];
  }
  const auto total = static_cast<long>(idx.size());
  (void)n_y;
  const double mi = miller_madow_entropy(cx, total) + miller_madow_entropy(cy, total) -
                    miller_madow_entropy(cxy, total);
  return std::max(0.0, mi);
}

}  // namespace

double miller_madow_entropy(std::span<const long> counts, long total) {
  if (total <= 0) return 0.0;
  const double n = static_cast<double>(total);
  double h = 0.0;
  long occupied = 0;
  for (long c : counts) {
    if (c == 0) continue;
    ++occupied;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h + static_cast<double>(occupied - 1) / (2.0 * n * std::numbers::ln2);
}

MIEstimate plug_in_mutual_information(std::span<const int> x, std::span<const std::uint32_t> y, int n_x,
                                      std::uint32_t n_y, RandomStream& rng, int n_bootstrap) {
  if (x.size() != y.size()) throw std::invalid_argument("x and y differ in length");
  if (x.empty()) throw std::invalid_argument("mutual information needs samples");
  for (int v : x) {
    if (v < 0 || v >= n_x) throw std::out_of_range("x label out of range");
  }
  for (auto v : y) {
    if (v >= n_y) throw std::out_of_range("y label out of range");
  }
  std::vector<long> cx(static_cast<std::size_t>(n_x));
  std::vector<long> cy(n_y);
  std::vector<long> cxy(static_cast<std::size_t>(n_y) * static_cast<std::size_t>(n_x));
  std::vector<std::size_t> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  MIEstimate est;
  est.samples = static_cast<long>(x.size());
  est.bits = mi_from_indices(x, y, idx, n_x, n_y, cx, cy, cxy);
  if (n_bootstrap > 1) {
    double s = 0.0;
    double s2 = 0.0;
    const int n = static_cast<int>(x.size());
    for (int b = 0; b < n_bootstrap; ++b) {
      for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_int(n));
      const double v = mi_from_indices(x, y, idx, n_x, n_y, cx, cy, cxy);
      s += v;
      s2 += v * v;
    }
    const double mean = s / n_bootstrap;
    est.se = std::sqrt(std::max(0.0, (s2 - n_bootstrap * mean * mean) / (n_bootstrap - 1)));
  }
  return est;
}

}  // namespace amab
