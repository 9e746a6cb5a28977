#include "gcon/constants.hpp"

#include <cmath>

#include "gcon/error.hpp"

namespace gcon {

void PhysicalConstants::validate() const {
  if (!(hbar > 0 && e_charge > 0 && h > 0 && v_fermi > 0 && g_factor > 0 && mu_b > 0 && k_b > 0)) {
    throw ValidationError("physical constants must all be positive");
  }
  if (std::abs(h - 2.0 * std::numbers::pi * hbar) > 1e-12 * h) {
    throw ValidationError("physical constants violate h = 2 pi hbar");
  }
}

}  // namespace gcon
