#pragma once

// Portable random streams for the problem generators.
//
// The generator is xoshiro256** seeded through splitmix64 from the pair
// (seed, stream). Every matrix or vector of an instance draws from its own
// stream, so adding a field to a generator never shifts the others. Normals
// come from Box-Muller on this generator, never from the standard library
// distributions, whose output is implementation defined.

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace powalm {

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi], inclusive, by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal(double mean = 0.0, double stddev = 1.0);

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, double mean = 0.0,
                                double stddev = 1.0);
  Eigen::VectorXd normal_vector(Eigen::Index size, double mean = 0.0, double stddev = 1.0);
  Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi);
  Eigen::VectorXd uniform_vector(Eigen::Index size, double lo, double hi);

  /// k distinct indices from [0, n), chosen by a partial Fisher-Yates shuffle.
  std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n, Eigen::Index k);

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace powalm
