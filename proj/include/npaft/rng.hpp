#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace npaft {

// Sub-stream identifiers. A chain's generator for a given component is
// derived from (root seed, chain, component), so adding or removing one
// component's draws never shifts another component's sequence.
enum class StreamId : std::uint64_t {
  kCalibration = 1,
  kTreeMoves = 2,
  kLeafValues = 3,
  kLabels = 4,
  kSticks = 5,
  kLocations = 6,
  kMassScale = 7,
  kImputation = 8,
  kSimulation = 9,
  kFolds = 10,
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  // Independent generator keyed by a root seed and a path of integers.
  static Rng derive(std::uint64_t root, std::initializer_list<std::uint64_t> path);
  static Rng stream(std::uint64_t root, std::uint64_t chain, StreamId id) {
    return derive(root, {chain, static_cast<std::uint64_t>(id)});
  }

  double uniform();       // [0, 1)
  double uniform_open();  // (0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double gamma(double shape, double rate = 1.0);
  double beta(double a, double b);
  double exponential(double rate);
  double chi_square(double df) { return 2.0 * gamma(0.5 * df); }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace npaft
