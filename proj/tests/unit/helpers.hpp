#pragma once

#include <vector>

#include "gcon/lattice.hpp"

namespace testutil {

inline gcon::LatticeParams scaled(double s = 20) {
  gcon::LatticeParams p;
  p.scaling_factor = s;
  return p;
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

inline double lead_centre_y(const gcon::DeviceLattice& d) {
  double y = 0;
  for (const auto& q : d.left_lead.positions) y += q.y;
  return y / static_cast<double>(d.left_lead.size());
}

}  // namespace testutil
