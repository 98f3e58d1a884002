#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace amab {

// Stateless 64-bit finalizer (SplitMix64 / Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a, used to turn experiment names into derivation ids.
constexpr std::uint64_t hash_name(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Counter-based random stream: draw i is mix(key, i). A stream is fully
// described by (key, counter), so any stream can be re-created in isolation
// and child streams can be split off without touching the parent.
//
// Distributions are implemented here rather than taken from <random> because
// the standard distributions are implementation-defined and we want
// bit-identical outputs across standard libraries.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key = 0) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return mix64(key_ ^ mix64(counter_++)); }

  // Child stream identified by `id`; independent of the parent's counter.
  RandomStream split(std::uint64_t id) const {
    return RandomStream(mix64(mix64(key_) ^ mix64(id + 0x2545f4914f6cdd1dULL)));
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n). n must be positive.
  int uniform_int(int n);

  double normal();

  // Gamma(shape, 1) by Marsaglia-Tsang.
  double gamma(double shape);

  double beta(double a, double b);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream roles within one episode. Values are part of the reproducibility
// contract; do not renumber.
enum class StreamRole : std::uint64_t {
  kInstance = 1,
  kEnvironment = 2,
  kHuman = 3,
  kRobot = 4,
  kParticles = 5,
  kInference = 6,
  kBootstrap = 7,
};

// Derives streams from (master seed, experiment id, episode index, role).
class SeedTree {
 public:
  explicit SeedTree(std::uint64_t master_seed) : master_(master_seed) {}

  std::uint64_t master_seed() const { return master_; }

  std::uint64_t derive_key(std::uint64_t experiment, std::uint64_t episode,
                           StreamRole role) const {
    std::uint64_t k = mix64(master_ ^ 0x6a09e667f3bcc909ULL);
    k = mix64(k ^ experiment);
    k = mix64(k ^ mix64(episode));
    return mix64(k ^ static_cast<std::uint64_t>(role));
  }

  RandomStream stream(std::uint64_t experiment, std::uint64_t episode,
                      StreamRole role) const {
    return RandomStream(derive_key(experiment, episode, role));
  }

  RandomStream stream(std::string_view experiment, std::uint64_t episode,
                      StreamRole role) const {
    return stream(hash_name(experiment), episode, role);
  }

 private:
  std::uint64_t master_;
};

}  // namespace amab
