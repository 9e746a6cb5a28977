#include "gcon/transport.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "gcon/constants.hpp"
#include "gcon/error.hpp"
#include "gcon/parallel.hpp"

namespace gcon {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;

// Zigzag-terminated lead ends carry zero-energy surface states, so at E = 0
// the surface Green's function is ~1/eta and everything built on it is
// round-off. T(E) is continuous there; work just off the band centre instead.
constexpr double kBandCentreOffsetEv = 1e-6;

double off_band_centre(double energy) {
  return std::abs(energy) < kBandCentreOffsetEv ? std::copysign(kBandCentreOffsetEv, energy) : energy;
}

MatrixXcd cell_hamiltonian(const LeadCell& lead) {
  const auto n = static_cast<Index>(lead.size());
  MatrixXcd h = MatrixXcd::Zero(n, n);
  for (Index i = 0; i < n; ++i) h(i, i) = lead.onsite[static_cast<std::size_t>(i)];
  for (const auto& hop : lead.intra) {
    h(static_cast<Index>(hop.i), static_cast<Index>(hop.j)) += hop.amplitude;
  }
  return h;
}

MatrixXcd cell_coupling(const LeadCell& lead) {
  const auto n = static_cast<Index>(lead.size());
  MatrixXcd t = MatrixXcd::Zero(n, n);
  for (const auto& hop : lead.coupling) {
    t(static_cast<Index>(hop.i), static_cast<Index>(hop.j)) += hop.amplitude;
  }
  return t;
}

MatrixXcd invert(const MatrixXcd& m) { return m.partialPivLu().inverse(); }

double trace_formula(const MatrixXcd& gamma_in, const MatrixXcd& g, const MatrixXcd& gamma_out) {
  const MatrixXcd a = gamma_in * g;
  const MatrixXcd b = gamma_out * g.adjoint();
  // Tr[A B] without forming the product
  return (a.transpose().cwiseProduct(b)).sum().real();
}

}  // namespace

LeadSelfEnergy lead_self_energy(const LeadCell& lead, double energy, const TransportOptions& opts) {
  const MatrixXcd h00 = cell_hamiltonian(lead);
  const MatrixXcd t = cell_coupling(lead);
  const auto n = h00.rows();
  const cplx z(off_band_centre(energy), opts.eta_ev);
  const MatrixXcd zi = z * MatrixXcd::Identity(n, n);
  const double scale = std::max(t.cwiseAbs().maxCoeff(), 1e-300);

  MatrixXcd eps_s = h00;
  MatrixXcd eps = h00;
  MatrixXcd alpha = t;
  MatrixXcd beta = t.adjoint();
  int it = 0;
  int extra = -1;
  for (; it < opts.max_iterations; ++it) {
    const MatrixXcd g = invert(zi - eps);
    const MatrixXcd ag = alpha * g;
    const MatrixXcd bg = beta * g;
    const MatrixXcd agb = ag * beta;
    eps_s += agb;
    eps += agb + bg * alpha;
    alpha = ag * alpha;
    beta = bg * beta;
    const double residual = std::max(alpha.cwiseAbs().maxCoeff(), beta.cwiseAbs().maxCoeff());
    if (extra < 0 && residual < opts.tolerance * scale) extra = opts.extra_iterations;
    if (extra >= 0 && extra-- == 0) break;
  }
  if (it >= opts.max_iterations) {
    std::ostringstream os;
    os << "lead decimation did not converge at E = " << energy << " eV, eta = " << opts.eta_ev
       << " eV";
    throw ConvergenceError(os.str(), energy, opts.eta_ev);
  }
  const MatrixXcd gs = invert(zi - eps_s);
  LeadSelfEnergy out;
  out.sigma = t * gs * t.adjoint();
  out.gamma = cplx(0, 1) * (out.sigma - out.sigma.adjoint());
  out.iterations = it + 1;
  return out;
}

TransportSystem::TransportSystem(const DeviceLattice& lattice, TransportOptions opts)
    : lattice_(lattice), opts_(opts) {
  const auto slices = lattice_.slices();
  const auto s_count = slices.size();
  if (s_count == 0) throw ValidationError("device has no slices");
  std::vector<Index> local(lattice_.size(), 0);
  for (const auto& sl : slices) {
    if (sl.empty()) throw DisconnectedDeviceError("device has an empty slice");
    for (std::size_t k = 0; k < sl.size(); ++k) local[sl[k]] = static_cast<Index>(k);
  }
  onsite_blocks_.resize(s_count);
  couplings_.resize(s_count > 0 ? s_count - 1 : 0);
  for (std::size_t s = 0; s < s_count; ++s) {
    const auto n = static_cast<Index>(slices[s].size());
    onsite_blocks_[s] = MatrixXcd::Zero(n, n);
    for (std::size_t k = 0; k < slices[s].size(); ++k) {
      onsite_blocks_[s](static_cast<Index>(k), static_cast<Index>(k)) =
          lattice_.onsite[slices[s][k]];
    }
    if (s + 1 < s_count) {
      couplings_[s] = MatrixXcd::Zero(n, static_cast<Index>(slices[s + 1].size()));
    }
  }
  for (const auto& h : lattice_.hoppings) {
    const int si = lattice_.sites[h.i].slice;
    const int sj = lattice_.sites[h.j].slice;
    if (si == sj) {
      onsite_blocks_[static_cast<std::size_t>(si)](local[h.i], local[h.j]) += h.amplitude;
    } else if (sj == si + 1) {
      couplings_[static_cast<std::size_t>(si)](local[h.i], local[h.j]) += h.amplitude;
    } else if (std::abs(si - sj) != 1) {
      throw ValidationError("hopping spans non-adjacent slices");
    }
  }
  for (std::size_t s = 0; s < couplings_.size(); ++s) {
    if (couplings_[s].cwiseAbs().maxCoeff() == 0.0) {
      throw DisconnectedDeviceError("device is disconnected between slices " + std::to_string(s) +
                                    " and " + std::to_string(s + 1));
    }
  }
  for (const auto* lead : {&lattice_.left_lead, &lattice_.right_lead}) {
    if (lead->coupling.empty()) throw DisconnectedDeviceError("lead has no coupling");
  }
  if (lattice_.left_lead.size() != slices.front().size() ||
      lattice_.right_lead.size() != slices.back().size()) {
    throw ValidationError("lead unit cell does not match the boundary slice");
  }
}

double TransportSystem::sweep(double energy, bool reversed) const {
  energy = off_band_centre(energy);
  // A flat lead band (zeroth Landau level) near E can still leave round-off
  // in the trace formula; retry with a larger eta when it shows.
  TransportOptions o = opts_;
  for (int attempt = 0;; ++attempt) {
    const double t = sweep_once(energy, reversed, o);
    if (t >= 0) return t;
    if (t > -1e-8) return 0.0;
    if (attempt == 6) {
      throw PhysicsError("negative transmission " + std::to_string(t) + " at E = " +
                         std::to_string(energy) + " eV, eta = " + std::to_string(o.eta_ev));
    }
    o.eta_ev *= 10.0;
  }
}

double TransportSystem::sweep_once(double energy, bool reversed, const TransportOptions& o) const {
  const auto left = lead_self_energy(lattice_.left_lead, energy, o);
  const auto right = lead_self_energy(lattice_.right_lead, energy, o);
  // No broadening inside the device: any absorption there breaks current
  // conservation (T_LR != T_RL) at O(eta). The lead self-energies already
  // make the block resolvents well defined.
  const double z = energy;
  const std::size_t n = onsite_blocks_.size();
  const auto& first = reversed ? right : left;
  const auto& last = reversed ? left : right;

  auto block = [&](std::size_t k) -> const MatrixXcd& {
    return onsite_blocks_[reversed ? n - 1 - k : k];
  };
  // coupling from step k to step k+1 in sweep order
  auto hop = [&](std::size_t k) -> MatrixXcd {
    return reversed ? MatrixXcd(couplings_[n - 2 - k].adjoint()) : couplings_[k];
  };
  auto resolvent = [&](std::size_t k, const MatrixXcd& extra) {
    const auto& h = block(k);
    MatrixXcd m = -h - extra;
    m.diagonal().array() += z;
    if (k == 0) m -= first.sigma;
    if (k == n - 1) m -= last.sigma;
    return invert(m);
  };

  MatrixXcd g = resolvent(0, MatrixXcd::Zero(block(0).rows(), block(0).cols()));
  MatrixXcd g_first_k = g;
  for (std::size_t k = 1; k < n; ++k) {
    const MatrixXcd v = hop(k - 1);
    const MatrixXcd vg = v.adjoint() * g;
    g = resolvent(k, vg * v);
    g_first_k = (g_first_k * v) * g;
  }
  return trace_formula(first.gamma, g_first_k, last.gamma);
}

double TransportSystem::transmission(double energy) const { return sweep(energy, false); }

double TransportSystem::transmission_right_to_left(double energy) const {
  return sweep(energy, true);
}

double transmission(const DeviceLattice& device, double energy, TransportOptions opts) {
  return TransportSystem(device, opts).transmission(energy);
}

double TransmissionCurve::at(double energy) const {
  if (energies.empty()) throw ValidationError("empty transmission curve");
  if (energy < energies.front() || energy > energies.back()) {
    throw ValidationError("energy outside transmission curve range");
  }
  const auto it = std::lower_bound(energies.begin(), energies.end(), energy);
  const auto k = static_cast<std::size_t>(it - energies.begin());
  if (*it == energy) return transmission[k];
  const double e0 = energies[k - 1], e1 = energies[k];
  const double w = (energy - e0) / (e1 - e0);
  return (1.0 - w) * transmission[k - 1] + w * transmission[k];
}

TransmissionCurve transmission_curve(const TransportSystem& system, std::vector<double> energies) {
  std::sort(energies.begin(), energies.end());
  energies.erase(std::unique(energies.begin(), energies.end()), energies.end());
  TransmissionCurve curve;
  curve.energies = energies;
  curve.transmission.assign(energies.size(), 0.0);
  parallel_for(energies.size(), system.options().threads,
               [&](std::size_t i) { curve.transmission[i] = system.transmission(energies[i]); });
  curve.fingerprint = system.lattice().fingerprint_hex();
  curve.b_tesla = system.lattice().field_tesla;
  return curve;
}

double thermal_broadening(const TransmissionCurve& curve, double temperature_k, double fermi_ev) {
  if (temperature_k < 1e-3) return curve.at(fermi_ev);
  const double kt = si::k_b_ev_per_k * temperature_k;
  const double lo = fermi_ev - 10.0 * kt;
  const double hi = fermi_ev + 10.0 * kt;
  if (curve.energies.empty() || lo < curve.energies.front() || hi > curve.energies.back()) {
    throw ValidationError("thermal window exceeds transmission curve range");
  }
  std::vector<double> es{lo};
  for (double e : curve.energies) {
    if (e > lo && e < hi) es.push_back(e);
  }
  es.push_back(hi);
  double worst = 0;
  for (std::size_t k = 1; k < es.size(); ++k) worst = std::max(worst, es[k] - es[k - 1]);
  if (worst >= kt / 4.0) {
    throw ValidationError("transmission curve too coarse for thermal broadening (step >= kT/4)");
  }
  auto kernel = [&](double e) {
    const double c = std::cosh((e - fermi_ev) / (2.0 * kt));
    return 1.0 / (4.0 * kt * c * c);
  };
  double num = 0, norm = 0;
  for (std::size_t k = 1; k < es.size(); ++k) {
    const double h = es[k] - es[k - 1];
    const double w0 = kernel(es[k - 1]), w1 = kernel(es[k]);
    num += 0.5 * h * (w0 * curve.at(es[k - 1]) + w1 * curve.at(es[k]));
    norm += 0.5 * h * (w0 + w1);
  }
  return num / norm;
}

double GateMapping::density_per_m2(double vg) const {
  return alpha_f_per_m2 * (vg - dirac_point_v) / si::e_charge;
}

double GateMapping::fermi_energy_ev(double vg) const {
  const double n = density_per_m2(vg);
  const double kf_per_nm = std::sqrt(std::numbers::pi * std::abs(n)) * 1e-9;
  return std::copysign(hbar_vf_ev_nm * kf_per_nm, n);
}

std::size_t ConductanceTrace::flagged_count() const {
  return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), 1));
}

void ConductanceTrace::validate() const {
  if (gate_v.size() != conductance.size()) throw ValidationError("trace arrays differ in length");
  if (!(alpha_f_per_m2 > 0)) throw ValidationError("alpha must be positive");
  for (double g : conductance) {
    if (!(g >= 0)) throw ValidationError("negative conductance in trace");
  }
}

namespace {

void check_monotone(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw ValidationError(std::string(what) + " grid is empty");
  bool up = true, down = true;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    up = up && grid[k] > grid[k - 1];
    down = down && grid[k] < grid[k - 1];
  }
  if (!up && !down) throw ValidationError(std::string(what) + " grid is not monotone");
}

GateMapping mapping_for(const TransportSystem& system, double alpha, double vd) {
  if (!(alpha > 0)) throw ValidationError("alpha must be positive");
  return {alpha, vd, system.lattice().params.hbar_vf_ev_nm()};
}

}  // namespace

ConductanceTrace conductance_vs_gate(const TransportSystem& system, const std::vector<double>& gates,
                                     double alpha, double vd, double temperature_k) {
  check_monotone(gates, "gate");
  const auto map = mapping_for(system, alpha, vd);
  ConductanceTrace tr;
  tr.gate_v = gates;
  tr.alpha_f_per_m2 = alpha;
  tr.dirac_point_v = vd;
  tr.b_tesla = system.lattice().field_tesla;
  tr.temperature_k = temperature_k;
  tr.hbar_vf_ev_nm = map.hbar_vf_ev_nm;
  tr.validity_window_ev = system.validity_window_ev();
  tr.fingerprint = system.lattice().fingerprint_hex();
  std::vector<double> ef(gates.size());
  for (std::size_t k = 0; k < gates.size(); ++k) {
    ef[k] = map.fermi_energy_ev(gates[k]);
    tr.flagged.push_back(std::abs(ef[k]) > system.validity_window_ev() ? 1 : 0);
  }
  tr.conductance.assign(gates.size(), 0.0);
  if (temperature_k < 1e-3) {
    parallel_for(gates.size(), system.options().threads,
                 [&](std::size_t k) { tr.conductance[k] = system.transmission(ef[k]); });
    return tr;
  }
  // shared grid of step kT/5 around every E_F
  const double kt = si::k_b_ev_per_k * temperature_k;
  const double step = kt / 5.0;
  std::set<long> nodes;
  for (double e : ef) {
    const long lo = static_cast<long>(std::floor((e - 10.5 * kt) / step));
    const long hi = static_cast<long>(std::ceil((e + 10.5 * kt) / step));
    for (long q = lo; q <= hi; ++q) nodes.insert(q);
  }
  std::vector<double> energies;
  for (long q : nodes) energies.push_back(static_cast<double>(q) * step);
  const auto curve = transmission_curve(system, energies);
  for (std::size_t k = 0; k < gates.size(); ++k) {
    tr.conductance[k] = thermal_broadening(curve, temperature_k, ef[k]);
  }
  return tr;
}

BiasMap bias_map(const TransportSystem& system, const std::vector<double>& gates,
                 const std::vector<double>& biases, double alpha, double vd,
                 double energy_step_ev) {
  check_monotone(gates, "gate");
  check_monotone(biases, "bias");
  const auto map = mapping_for(system, alpha, vd);
  if (energy_step_ev <= 0) energy_step_ev = system.lattice().params.t() / 4000.0;
  BiasMap out;
  out.gate_v = gates;
  out.bias_v = biases;
  out.alpha_f_per_m2 = alpha;
  out.dirac_point_v = vd;
  out.b_tesla = system.lattice().field_tesla;
  out.hbar_vf_ev_nm = map.hbar_vf_ev_nm;
  out.validity_window_ev = system.validity_window_ev();
  out.fingerprint = system.lattice().fingerprint_hex();

  std::vector<double> ef(gates.size());
  double half_bias = 0;
  for (double v : biases) half_bias = std::max(half_bias, 0.5 * std::abs(v));
  for (std::size_t k = 0; k < gates.size(); ++k) {
    ef[k] = map.fermi_energy_ev(gates[k]);
    out.flagged.push_back(std::abs(ef[k]) > system.validity_window_ev() ? 1 : 0);
  }
  const auto [emin_it, emax_it] = std::minmax_element(ef.begin(), ef.end());
  std::vector<double> energies = ef;
  const long lo = static_cast<long>(std::floor((*emin_it - half_bias) / energy_step_ev)) - 1;
  const long hi = static_cast<long>(std::ceil((*emax_it + half_bias) / energy_step_ev)) + 1;
  for (long q = lo; q <= hi; ++q) energies.push_back(static_cast<double>(q) * energy_step_ev);
  const auto curve = transmission_curve(system, energies);

  out.g_diff.assign(gates.size(), std::vector<double>(biases.size(), 0.0));
  for (std::size_t k = 0; k < gates.size(); ++k) {
    for (std::size_t b = 0; b < biases.size(); ++b) {
      const double half = 0.5 * biases[b];  // eV per volt of bias for unit charge
      out.g_diff[k][b] = 0.5 * (curve.at(ef[k] + half) + curve.at(ef[k] - half));
    }
  }
  return out;
}

namespace {

void write_header(std::ostream& os, const std::string& fp, double b, double t, double alpha,
                  double vd, double r_series, double hbar_vf, double window) {
  os << "# device_fingerprint = " << fp << '\n';
  os << "# B_T = " << b << '\n';
  os << "# temperature_K = " << t << '\n';
  os << "# alpha_F_per_m2 = " << alpha << '\n';
  os << "# dirac_point_V = " << vd << '\n';
  os << "# R_series_ohm = " << r_series << '\n';
  os << "# hbar_vF_eV_nm = " << hbar_vf << '\n';
  os << "# validity_window_eV = " << window << '\n';
}

}  // namespace

std::string trace_csv(const ConductanceTrace& tr) {
  std::ostringstream os;
  os.precision(17);
  write_header(os, tr.fingerprint, tr.b_tesla, tr.temperature_k, tr.alpha_f_per_m2,
               tr.dirac_point_v, tr.series_resistance_ohm, tr.hbar_vf_ev_nm, tr.validity_window_ev);
  os << "Vg_V,G_2e2_over_h\n";
  for (std::size_t k = 0; k < tr.gate_v.size(); ++k) {
    os << tr.gate_v[k] << ',' << tr.conductance[k] << '\n';
  }
  return os.str();
}

std::string bias_map_csv(const BiasMap& m) {
  std::ostringstream os;
  os.precision(17);
  write_header(os, m.fingerprint, m.b_tesla, 0.0, m.alpha_f_per_m2, m.dirac_point_v, 0.0,
               m.hbar_vf_ev_nm, m.validity_window_ev);
  os << "Vg_V,Vsd_V,Gdiff_2e2_over_h\n";
  for (std::size_t k = 0; k < m.gate_v.size(); ++k) {
    for (std::size_t b = 0; b < m.bias_v.size(); ++b) {
      os << m.gate_v[k] << ',' << m.bias_v[b] << ',' << m.g_diff[k][b] << '\n';
    }
  }
  return os.str();
}

}  // namespace gcon
