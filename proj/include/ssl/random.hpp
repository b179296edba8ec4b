#ifndef SSL_RANDOM_HPP
#define SSL_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "ssl/types.hpp"

namespace ssl {

// Deterministic normal deviates: fixed Box-Muller on mt19937_64 so noisy
// synthetic data is reproducible independent of the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // (0, 1]
    return (static_cast<double>(gen_()) + 1.0) * 0x1.0p-64;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ssl

#endif
