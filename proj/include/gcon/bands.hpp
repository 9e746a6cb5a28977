#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gcon/constants.hpp"
#include "gcon/lattice.hpp"

namespace gcon {

struct BandStructure {
  std::vector<double> k_per_nm;                 // uniform grid, both zone edges included
  std::vector<std::vector<double>> energies;    // [k][band], ascending
  double period_nm = 0;
  double unit_cell_width_nm = 0;
  EdgeType edge_type = EdgeType::armchair;
  /// Energy scale t' a' used for the group-velocity threshold (eV nm).
  double velocity_scale = 0;

  std::size_t band_count() const { return energies.empty() ? 0 : energies.front().size(); }
};

BandStructure ribbon_bands(const LeadCell& cell, int k_count, EdgeType edge = EdgeType::armchair,
                           double velocity_scale = 0);
BandStructure ribbon_bands(const DeviceLattice& lattice, int k_count);

struct ModeCount {
  int count = 0;
  bool ambiguous = false;
  // Counts at E -/+ one grid step, filled when ambiguous.
  int count_below = 0;
  int count_above = 0;
};

/// Right-moving channels at energy E (each spin-degenerate orbital channel once).
ModeCount count_propagating_modes(const BandStructure& bands, double energy);

/// E_n = v_F sqrt(2 hbar e B n), in eV.
double landau_level(const PhysicalConstants& c, double b_tesla, int n);

/// hbar v_F pi / W, in eV.
double hard_wall_subband_spacing(const PhysicalConstants& c, double width_nm);

enum class PlateauRegime { armchair, zigzag, qhe };
PlateauRegime plateau_regime_from_string(const std::string& s);

/// Expected conductance plateaus in units of 2e^2/h.
std::vector<int> expected_plateau_sequence(PlateauRegime regime, int count);

std::string bands_csv(const BandStructure& bands);

}  // namespace gcon
