#include "amab/beta_math.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

namespace amab {
namespace {

constexpr int kNodes = 64;
constexpr int kGridCells = 1024;

struct Quadrature {
  std::array<double, kNodes> x{};
  std::array<double, kNodes> w{};
};

// Gauss-Legendre nodes mapped to [0, 1], by Newton iteration on P_n.
Quadrature make_quadrature() {
  Quadrature q;
  const int n = kNodes;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    const double weight = 2.0 / ((1.0 - z * z) * pp * pp);
    q.x[static_cast<std::size_t>(i)] = 0.5 * (1.0 - z);
    q.x[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + z);
    q.w[static_cast<std::size_t>(i)] = 0.5 * weight;
    q.w[static_cast<std::size_t>(n - 1 - i)] = 0.5 * weight;
  }
  return q;
}

const Quadrature& quadrature() {
  static const Quadrature q = make_quadrature();
  return q;
}

struct PairKey {
  std::uint64_t a;
  std::uint64_t b;
  bool operator==(const PairKey&) const = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const {
    return static_cast<std::size_t>(k.a * 0x9e3779b97f4a7c15ULL ^ (k.b + 0x632be59bd9b4e019ULL));
  }
};

PairKey key_of(double a, double b) {
  return {std::bit_cast<std::uint64_t>(a), std::bit_cast<std::uint64_t>(b)};
}

struct NodeValues {
  std::array<double, kNodes> pdf{};
  std::array<double, kNodes> cdf{};
};

const NodeValues& node_values(double a, double b) {
  thread_local std::unordered_map<PairKey, NodeValues, PairKeyHash> cache;
  const PairKey key = key_of(a, b);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  if (cache.size() > 200000) cache.clear();
  const auto& q = quadrature();
  NodeValues v;
  for (int i = 0; i < kNodes; ++i) {
    const double x = q.x[static_cast<std::size_t>(i)];
    v.pdf[static_cast<std::size_t>(i)] = boost::math::ibeta_derivative(a, b, x);
    v.cdf[static_cast<std::size_t>(i)] = boost::math::ibeta(a, b, x);
  }
  return cache.emplace(key, v).first->second;
}

using GridCdf = std::array<double, kGridCells + 1>;

const GridCdf& grid_cdf(double a, double b) {
  thread_local std::unordered_map<PairKey, GridCdf, PairKeyHash> cache;
  const PairKey key = key_of(a, b);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  if (cache.size() > 50000) cache.clear();
  GridCdf g{};
  for (int i = 0; i <= kGridCells; ++i) {
    g[static_cast<std::size_t>(i)] =
        boost::math::ibeta(a, b, static_cast<double>(i) / kGridCells);
  }
  return cache.emplace(key, g).first->second;
}

void check_sizes(std::size_t a, std::size_t b, std::size_t out) {
  if (a != b || a != out || a == 0) {
    throw std::invalid_argument("argmax probabilities: size mismatch");
  }
}

void normalize(std::span<double> out) {
  double s = 0.0;
  for (double v : out) s += v;
  if (s > 0.0) {
    for (auto& v : out) v /= s;
  } else {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
  }
}

}  // namespace

double beta_cdf(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

double beta_quantile(double a, double b, double p) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta_quantile: bad parameters");
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return boost::math::ibeta_inv(a, b, p);
}

void beta_argmax_probabilities(std::span<const double> alpha, std::span<const double> beta,
                               std::span<double> out) {
  check_sizes(alpha.size(), beta.size(), out.size());
  const std::size_t n = alpha.size();
  const auto& q = quadrature();
  thread_local std::vector<const NodeValues*> arms;
  arms.resize(n);
  for (std::size_t k = 0; k < n; ++k) arms[k] = &node_values(alpha[k], beta[k]);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t m = 0; m < static_cast<std::size_t>(kNodes); ++m) {
      double term = q.w[m] * arms[i]->pdf[m];
      for (std::size_t j = 0; j < n && term != 0.0; ++j) {
        if (j != i) term *= arms[j]->cdf[m];
      }
      acc += term;
    }
    out[i] = acc;
  }
  normalize(out);
}

void beta_mean_argmax_probabilities(std::span<const double> alpha,
                                    std::span<const double> beta, int n_draws,
                                    std::span<double> out) {
  check_sizes(alpha.size(), beta.size(), out.size());
  if (n_draws < 1) throw std::invalid_argument("n_draws must be at least 1");
  const std::size_t n = alpha.size();
  thread_local std::vector<const GridCdf*> arms;
  arms.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = alpha[k];
    const double b = beta[k];
    const double mean = a / (a + b);
    const double concentration = n_draws * (a + b + 1.0) - 1.0;
    arms[k] = &grid_cdf(mean * concentration, (1.0 - mean) * concentration);
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t c = 0; c < static_cast<std::size_t>(kGridCells); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      const double mass = (*arms[i])[c + 1] - (*arms[i])[c];
      if (mass <= 0.0) continue;
      double term = mass;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) term *= 0.5 * ((*arms[j])[c] + (*arms[j])[c + 1]);
      }
      out[i] += term;
    }
  }
  normalize(out);
}

void softmax(std::span<const double> values, double inverse_temperature, std::span<double> out) {
  if (values.size() != out.size() || values.empty()) {
    throw std::invalid_argument("softmax: size mismatch");
  }
  double hi = -INFINITY;
  for (double v : values) hi = std::max(hi, inverse_temperature * v);
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp(inverse_temperature * values[i] - hi);
    s += out[i];
  }
  for (auto& v : out) v /= s;
}

}  // namespace amab
