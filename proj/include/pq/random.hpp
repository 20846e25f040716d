#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace pq {

using Rng = std::mt19937_64;

/// Independent generator for stream `stream` under a master seed. Streams are
/// derived through std::seed_seq, so replication r of a study always sees the
/// same numbers no matter how replications are scheduled across workers.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return Rng(seq);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline Eigen::VectorXd standard_normal(Eigen::Index size, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(size);
  for (Eigen::Index i = 0; i < size; ++i) z[i] = normal(rng);
  return z;
}

}  // namespace pq
