#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace ctf {

// Seeded random stream with hierarchical child derivation.
//
// child(i) derives an independent stream from (seed, i) alone, so a stream
// tree rebuilt from the same root seed reproduces every draw regardless of
// construction order or thread placement. Gaussian variates use an explicit
// Box-Muller recipe rather than std::normal_distribution, which keeps the
// byte-level output identical across standard library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  RandomStream child(std::uint64_t stream_id) const;
  std::uint64_t seed() const { return seed_; }

  // Uniform on [0, 1).
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal.
  double normal();

  Eigen::VectorXd normal_vector(int n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace ctf
