#include "lam/prng.hpp"

#include <cmath>

namespace lam {

double Prng::normal() {
    // Box-Muller: u1 in (0,1] so the log is finite, u2 in [0,1).
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

}  // namespace lam
