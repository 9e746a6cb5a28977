#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gcon {

using cplx = std::complex<double>;

struct Vec2 {
  double x = 0;
  double y = 0;
};

enum class EdgeType { armchair, zigzag };
enum class Profile { abrupt, wedge, smooth_cosine };
enum class Sublattice : std::uint8_t { A, B };

std::string to_string(EdgeType e);
std::string to_string(Profile p);
EdgeType edge_type_from_string(const std::string& s);
Profile profile_from_string(const std::string& s);

/// Nearest-neighbour graphene parameters with optional lattice scaling
/// (a' = s a, t' = t / s keeps a t, hence hbar v_F = 3/2 a t, fixed).
struct LatticeParams {
  double cc_distance_nm = 0.142;
  double hopping_ev = 2.7;
  double scaling_factor = 1.0;

  double a() const { return cc_distance_nm * scaling_factor; }
  double t() const { return hopping_ev / scaling_factor; }
  double hbar_vf_ev_nm() const { return 1.5 * a() * t(); }
  /// Fermi velocity implied by the lattice (m/s).
  double fermi_velocity() const;
  void validate() const;
};

struct GeometrySpec {
  EdgeType edge_type = EdgeType::armchair;
  double lead_width_nm = 0;
  double constriction_width_nm = 0;
  double constriction_length_nm = 0;
  Profile profile = Profile::smooth_cosine;
  double total_length_nm = 0;
  bool metallic_snap = true;

  // Filled in by the builders.
  int lead_rows = 0;
  int constriction_rows = 0;
  double actual_lead_width_nm = 0;
  double actual_constriction_width_nm = 0;
  int slice_count = 0;

  void validate() const;
};

struct DisorderSpec {
  double edge_removal_probability = 0;
  std::uint64_t rng_seed = 0;
  int edge_depth = 1;

  void validate() const;
};

struct Site {
  Vec2 pos;
  Sublattice sublattice = Sublattice::A;
  int slice = 0;
  int row = 0;
};

/// Directed hopping: H(i, j) = amplitude. Lists always carry both directions.
struct Hopping {
  std::size_t i = 0;
  std::size_t j = 0;
  cplx amplitude;
};

/// Semi-infinite lead described by one unit cell. The cell is a copy of the
/// device slice it attaches to (same orbital order). `coupling` holds
/// H(inner cell, outer cell); the device boundary slice acts as the inner cell
/// of the first lead cell.
struct LeadCell {
  std::vector<Vec2> positions;
  std::vector<double> onsite;
  std::vector<Hopping> intra;
  std::vector<Hopping> coupling;
  double shift_x_nm = 0;  // displacement inner -> outer cell
  std::vector<std::size_t> device_sites;

  std::size_t size() const { return positions.size(); }
};

class DeviceLattice {
 public:
  std::vector<Site> sites;
  std::vector<Hopping> hoppings;
  std::vector<double> onsite;
  LeadCell left_lead;
  LeadCell right_lead;
  GeometrySpec geometry;
  LatticeParams params;
  int slice_count = 0;
  double slice_period_nm = 0;
  double field_tesla = 0;
  double gauge_origin_y_nm = 0;
  std::vector<std::string> warnings;

  std::size_t size() const { return sites.size(); }
  /// Site indices grouped by slice, ordered as stored.
  std::vector<std::vector<std::size_t>> slices() const;
  /// Coordination including bonds into the leads.
  std::vector<int> coordination() const;
  /// Stable 64-bit digest of geometry, amplitudes and onsite energies.
  std::uint64_t fingerprint() const;
  std::string fingerprint_hex() const;
};

/// Row pitch perpendicular to the transport axis (nm).
double row_pitch_nm(EdgeType e, const LatticeParams& p);
/// Lead unit-cell length along the transport axis (nm).
double cell_period_nm(EdgeType e, const LatticeParams& p);

struct RibbonOptions {
  bool metallic_snap = false;
};

DeviceLattice build_ribbon(const LatticeParams& params, EdgeType edge, double width_nm,
                           double length_nm, RibbonOptions opts = {});
DeviceLattice build_constriction(const LatticeParams& params, GeometrySpec geometry);
DeviceLattice apply_edge_disorder(const DeviceLattice& lattice, const DisorderSpec& spec);
/// Landau gauge A = (-B (y - y0), 0); phases multiply existing amplitudes.
DeviceLattice apply_peierls(const DeviceLattice& lattice, double b_tesla,
                            double gauge_origin_y_nm = 0);
using PotentialProfile = std::function<double(Vec2)>;
DeviceLattice apply_onsite_potential(const DeviceLattice& lattice, const PotentialProfile& profile);

/// Peierls phase (rad) for H(i, j) in the Landau gauge with origin y0.
double peierls_phase(Vec2 ri, Vec2 rj, double b_tesla, double gauge_origin_y_nm = 0);

/// Largest |H(i,j) - conj(H(j,i))| over all hopping lists (device and leads).
double hermiticity_defect(const DeviceLattice& lattice);

/// JSON export (sites, hoppings, onsite, geometry, params).
std::string export_json(const DeviceLattice& lattice, int indent = 1);

}  // namespace gcon
