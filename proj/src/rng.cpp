#include "simbench/rng.hpp"

#include <cmath>

namespace simbench {

double Rng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller transform on (0,1] x [0,1) uniforms.
    const double u1 = uniform01_open_low();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

} // namespace simbench
