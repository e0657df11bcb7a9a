#ifndef WISENSE_COMMON_HPP
#define WISENSE_COMMON_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wisense {

using cplx = std::complex<double>;

// exact SI value
inline constexpr double kSpeedOfLight = 299'792'458.0;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Thrown when a closed-form expression is evaluated at (or numerically too
// close to) a pole, e.g. theta_r -> +-pi/2 in the angular resolution.
class singularity_error : public std::domain_error {
 public:
  explicit singularity_error(const std::string& what) : std::domain_error(what) {}
};

class enumeration_budget_error : public std::runtime_error {
 public:
  explicit enumeration_budget_error(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace wisense

#endif  // WISENSE_COMMON_HPP
