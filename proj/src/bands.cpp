#include "gcon/bands.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gcon/error.hpp"

namespace gcon {

namespace {

Eigen::MatrixXcd bloch_matrix(const LeadCell& cell, double k) {
  const auto n = static_cast<Eigen::Index>(cell.size());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) h(i, i) = cell.onsite[static_cast<std::size_t>(i)];
  for (const auto& hop : cell.intra) {
    h(static_cast<Eigen::Index>(hop.i), static_cast<Eigen::Index>(hop.j)) += hop.amplitude;
  }
  // coupling: H(cell n, cell n+1) with cell n+1 displaced by shift
  const cplx bloch = std::polar(1.0, k * cell.shift_x_nm);
  for (const auto& hop : cell.coupling) {
    const auto i = static_cast<Eigen::Index>(hop.i);
    const auto j = static_cast<Eigen::Index>(hop.j);
    h(i, j) += hop.amplitude * bloch;
    h(j, i) += std::conj(hop.amplitude * bloch);
  }
  return h;
}

}  // namespace

BandStructure ribbon_bands(const LeadCell& cell, int k_count, EdgeType edge,
                           double velocity_scale) {
  if (k_count < 16) throw ValidationError("k_count must be >= 16");
  if (cell.size() == 0) throw ValidationError("empty unit cell");
  BandStructure out;
  out.edge_type = edge;
  out.period_nm = std::abs(cell.shift_x_nm);
  out.velocity_scale = velocity_scale;
  double ymin = cell.positions.front().y, ymax = ymin;
  for (const auto& p : cell.positions) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  out.unit_cell_width_nm = ymax - ymin;
  const double kmax = std::numbers::pi / out.period_nm;
  out.k_per_nm.resize(static_cast<std::size_t>(k_count));
  out.energies.resize(static_cast<std::size_t>(k_count));
  for (int q = 0; q < k_count; ++q) {
    const double k = -kmax + 2.0 * kmax * q / (k_count - 1);
    out.k_per_nm[static_cast<std::size_t>(q)] = k;
    const auto h = bloch_matrix(cell, k);
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
      throw PhysicsError("non-hermitian Bloch matrix");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    out.energies[static_cast<std::size_t>(q)].assign(ev.data(), ev.data() + ev.size());
  }
  return out;
}

BandStructure ribbon_bands(const DeviceLattice& lattice, int k_count) {
  return ribbon_bands(lattice.right_lead, k_count, lattice.geometry.edge_type,
                      lattice.params.t() * lattice.params.a());
}

ModeCount count_propagating_modes(const BandStructure& bands, double energy) {
  const std::size_t nk = bands.k_per_nm.size();
  const std::size_t nb = bands.band_count();
  const double dk = bands.k_per_nm[1] - bands.k_per_nm[0];
  // |dE/dk| below this is treated as a band extremum (eV nm)
  const double vmin = 1e-6 * (bands.velocity_scale > 0 ? bands.velocity_scale : 1.0);
  auto count_at = [&](double e, bool& touched) {
    int count = 0;
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t q = 0; q + 1 < nk; ++q) {
        const double e0 = bands.energies[q][b];
        const double e1 = bands.energies[q + 1][b];
        const double lo = std::min(e0, e1), hi = std::max(e0, e1);
        if (e < lo || e >= hi) continue;
        const double slope = (e1 - e0) / dk;
        if (std::abs(slope) <= vmin) {
          touched = true;
          continue;
        }
        if (slope > 0) ++count;
      }
    }
    return count;
  };
  auto near_extremum = [&](double e) {
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t q = 1; q + 1 < nk; ++q) {
        const double em = bands.energies[q - 1][b];
        const double e0 = bands.energies[q][b];
        const double ep = bands.energies[q + 1][b];
        const bool extremum = (e0 - em) * (ep - e0) <= 0;
        if (!extremum) continue;
        const double step = std::max(std::abs(e0 - em), std::abs(ep - e0));
        if (std::abs(e - e0) <= step) return true;
      }
    }
    return false;
  };
  ModeCount mc;
  bool touched = false;
  mc.count = count_at(energy, touched);
  if (touched || near_extremum(energy)) {
    mc.ambiguous = true;
    double step = 0;
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t q = 0; q + 1 < nk; ++q) {
        step = std::max(step, std::abs(bands.energies[q + 1][b] - bands.energies[q][b]));
      }
    }
    bool dummy = false;
    mc.count_below = count_at(energy - step, dummy);
    mc.count_above = count_at(energy + step, dummy);
  }
  return mc;
}

double landau_level(const PhysicalConstants& c, double b_tesla, int n) {
  if (n < 0) throw ValidationError("Landau index must be >= 0");
  if (b_tesla < 0) throw ValidationError("field must be >= 0");
  return c.v_fermi * std::sqrt(2.0 * c.hbar * c.e_charge * b_tesla * n) / c.e_charge;
}

double hard_wall_subband_spacing(const PhysicalConstants& c, double width_nm) {
  if (!(width_nm > 0)) throw ValidationError("width must be positive");
  return c.hbar_vf_ev_nm() * std::numbers::pi / width_nm;
}

PlateauRegime plateau_regime_from_string(const std::string& s) {
  if (s == "armchair") return PlateauRegime::armchair;
  if (s == "zigzag") return PlateauRegime::zigzag;
  if (s == "qhe") return PlateauRegime::qhe;
  throw ValidationError("unknown plateau regime '" + s + "'");
}

std::vector<int> expected_plateau_sequence(PlateauRegime regime, int count) {
  if (count < 1) throw ValidationError("count must be >= 1");
  std::vector<int> out;
  for (int k = 0; k < count; ++k) {
    out.push_back(regime == PlateauRegime::armchair ? k + 1 : 2 * k + 1);
  }
  return out;
}

std::string bands_csv(const BandStructure& bands) {
  std::ostringstream os;
  os.precision(12);
  os << "k_per_nm";
  for (std::size_t b = 0; b < bands.band_count(); ++b) os << ",E_" << b + 1;
  os << '\n';
  for (std::size_t q = 0; q < bands.k_per_nm.size(); ++q) {
    os << bands.k_per_nm[q];
    for (double e : bands.energies[q]) os << ',' << e;
    os << '\n';
  }
  return os.str();
}

}  // namespace gcon
