#include "gcon/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <deque>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "gcon/constants.hpp"
#include "gcon/error.hpp"

namespace gcon {

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;
// e / hbar in 1 / (T nm^2)
constexpr double kEOverHbar = si::e_charge / si::hbar * 1e-18;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < n; ++k) {
    h ^= p[k];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t mix(std::uint64_t h, double v) {
  if (v == 0.0) v = 0.0;  // fold -0
  return fnv1a(h, &v, sizeof v);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return fnv1a(h, &v, sizeof v); }

// Spatial hash for nearest-neighbour search.
class PointIndex {
 public:
  PointIndex(const std::vector<Vec2>& pts, double cell) : pts_(pts), cell_(cell) {
    for (std::size_t k = 0; k < pts.size(); ++k) buckets_[key(pts[k].x, pts[k].y)].push_back(k);
  }

  template <class F>
  void neighbours(Vec2 p, double dist, F&& f) const {
    const long cx = std::lround(std::floor(p.x / cell_));
    const long cy = std::lround(std::floor(p.y / cell_));
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = buckets_.find(pack(cx + dx, cy + dy));
        if (it == buckets_.end()) continue;
        for (std::size_t k : it->second) {
          const double d = std::hypot(pts_[k].x - p.x, pts_[k].y - p.y);
          if (std::abs(d - dist) < 1e-6 * dist) f(k);
        }
      }
    }
  }

 private:
  static std::uint64_t pack(long x, long y) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
           static_cast<std::uint32_t>(y);
  }
  std::uint64_t key(double x, double y) const {
    return pack(std::lround(std::floor(x / cell_)), std::lround(std::floor(y / cell_)));
  }

  const std::vector<Vec2>& pts_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

std::vector<Vec2> positions_of(const std::vector<Site>& sites) {
  std::vector<Vec2> out;
  out.reserve(sites.size());
  for (const auto& s : sites) out.push_back(s.pos);
  return out;
}

// All sites of a pristine strip with `rows` rows and `slices` unit cells.
std::vector<Site> strip_sites(EdgeType edge, const LatticeParams& p, int rows, int slices) {
  const double a = p.a();
  std::vector<Site> out;
  for (int c = 0; c < slices; ++c) {
    for (int j = 0; j < rows; ++j) {
      if (edge == EdgeType::armchair) {
        const double x0 = 3.0 * a * c + ((j % 2) ? 1.5 * a : 0.0);
        const double y = j * 0.5 * kSqrt3 * a;
        out.push_back({{x0, y}, Sublattice::A, c, j});
        out.push_back({{x0 + a, y}, Sublattice::B, c, j});
      } else {
        for (int m = 2 * c; m <= 2 * c + 1; ++m) {
          const bool odd = ((m + j) % 2) != 0;
          const double x = m * 0.5 * kSqrt3 * a;
          const double y = 1.5 * a * j + (odd ? 0.5 * a : 0.0);
          out.push_back({{x, y}, odd ? Sublattice::B : Sublattice::A, c, j});
        }
      }
    }
  }
  return out;
}

std::vector<Hopping> bonds(const std::vector<Site>& sites, double a, double t) {
  const auto pts = positions_of(sites);
  PointIndex index(pts, a * 1.01);
  std::vector<Hopping> out;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    index.neighbours(pts[i], a, [&](std::size_t j) {
      if (j != i) out.push_back({i, j, cplx(-t, 0.0)});
    });
  }
  std::sort(out.begin(), out.end(), [](const Hopping& l, const Hopping& r) {
    return l.i != r.i ? l.i < r.i : l.j < r.j;
  });
  return out;
}

LeadCell make_lead(const std::vector<Site>& sites, const std::vector<double>& onsite,
                   int slice, double shift, double a, double t) {
  LeadCell lead;
  lead.shift_x_nm = shift;
  std::vector<Vec2> inner;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (sites[k].slice != slice) continue;
    lead.device_sites.push_back(k);
    inner.push_back(sites[k].pos);
    lead.onsite.push_back(onsite[k]);
  }
  for (const auto& r : inner) lead.positions.push_back({r.x + shift, r.y});
  PointIndex idx_inner(inner, a * 1.01);
  for (std::size_t i = 0; i < inner.size(); ++i) {
    idx_inner.neighbours(inner[i], a, [&](std::size_t j) {
      if (j != i) lead.intra.push_back({i, j, cplx(-t, 0.0)});
    });
  }
  PointIndex idx_outer(lead.positions, a * 1.01);
  for (std::size_t i = 0; i < inner.size(); ++i) {
    idx_outer.neighbours(inner[i], a, [&](std::size_t j) {
      lead.coupling.push_back({i, j, cplx(-t, 0.0)});
    });
  }
  return lead;
}

// Keeps `keep[k]` sites, remaps hoppings and lead attachments.
DeviceLattice compact(const DeviceLattice& in, const std::vector<char>& keep) {
  DeviceLattice out = in;
  std::vector<std::size_t> remap(in.size(), static_cast<std::size_t>(-1));
  out.sites.clear();
  out.onsite.clear();
  for (std::size_t k = 0; k < in.size(); ++k) {
    if (!keep[k]) continue;
    remap[k] = out.sites.size();
    out.sites.push_back(in.sites[k]);
    out.onsite.push_back(in.onsite[k]);
  }
  out.hoppings.clear();
  for (const auto& h : in.hoppings) {
    if (keep[h.i] && keep[h.j]) out.hoppings.push_back({remap[h.i], remap[h.j], h.amplitude});
  }
  for (auto* lead : {&out.left_lead, &out.right_lead}) {
    for (auto& d : lead->device_sites) {
      if (remap[d] == static_cast<std::size_t>(-1)) {
        throw PhysicsError("lead attachment site removed");
      }
      d = remap[d];
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> adjacency(const DeviceLattice& lat) {
  std::vector<std::vector<std::size_t>> adj(lat.size());
  for (const auto& h : lat.hoppings) adj[h.i].push_back(h.j);
  return adj;
}

// Iteratively drops unprotected sites with fewer than two bonds, then any
// fragment not connected to the left lead. Throws if the right lead becomes
// unreachable.
DeviceLattice prune(const DeviceLattice& in) {
  const int last = in.slice_count - 1;
  std::vector<char> keep(in.size(), 1);
  auto coord = in.coordination();
  const auto adj = adjacency(in);
  std::deque<std::size_t> queue;
  auto protected_site = [&](std::size_t k) {
    return in.sites[k].slice == 0 || in.sites[k].slice == last;
  };
  for (std::size_t k = 0; k < in.size(); ++k) {
    if (!protected_site(k) && coord[k] < 2) queue.push_back(k);
  }
  while (!queue.empty()) {
    const auto k = queue.front();
    queue.pop_front();
    if (!keep[k]) continue;
    keep[k] = 0;
    for (auto n : adj[k]) {
      if (!keep[n]) continue;
      if (--coord[n] < 2 && !protected_site(n)) queue.push_back(n);
    }
  }
  std::vector<char> seen(in.size(), 0);
  std::deque<std::size_t> bfs;
  for (std::size_t k = 0; k < in.size(); ++k) {
    if (keep[k] && in.sites[k].slice == 0) {
      seen[k] = 1;
      bfs.push_back(k);
    }
  }
  while (!bfs.empty()) {
    const auto k = bfs.front();
    bfs.pop_front();
    for (auto n : adj[k]) {
      if (keep[n] && !seen[n]) {
        seen[n] = 1;
        bfs.push_back(n);
      }
    }
  }
  bool right_reached = false;
  for (std::size_t k = 0; k < in.size(); ++k) {
    if (in.sites[k].slice == last && seen[k]) right_reached = true;
    if (!seen[k]) keep[k] = 0;
  }
  if (!right_reached) {
    throw DisconnectedDeviceError("device is disconnected: right lead unreachable from left lead");
  }
  for (std::size_t k = 0; k < in.size(); ++k) {
    if ((in.sites[k].slice == 0 || in.sites[k].slice == last) && !keep[k]) {
      throw DisconnectedDeviceError("device is disconnected: lead slice site isolated");
    }
  }
  return compact(in, keep);
}

int rows_for_width(double width_nm, double pitch) {
  return static_cast<int>(std::lround(width_nm / pitch));
}

int snap_metallic(int rows) {
  // nearest count with rows % 3 == 2, preferring the narrower on ties
  for (int d = 0; d <= 1; ++d) {
    if ((rows - d) % 3 == 2 && rows - d >= 2) return rows - d;
    if ((rows + d) % 3 == 2) return rows + d;
  }
  return rows;
}

DeviceLattice assemble(const LatticeParams& params, GeometrySpec geo,
                       const std::function<bool(const Site&)>& keep_site) {
  const int slices = geo.slice_count;
  auto all = strip_sites(geo.edge_type, params, geo.lead_rows, slices);
  DeviceLattice lat;
  lat.params = params;
  lat.slice_count = slices;
  lat.slice_period_nm = cell_period_nm(geo.edge_type, params);
  for (auto& s : all) {
    if (keep_site(s)) lat.sites.push_back(s);
  }
  lat.onsite.assign(lat.sites.size(), 0.0);
  lat.hoppings = bonds(lat.sites, params.a(), params.t());
  lat.left_lead = make_lead(lat.sites, lat.onsite, 0, -lat.slice_period_nm, params.a(), params.t());
  lat.right_lead =
      make_lead(lat.sites, lat.onsite, slices - 1, lat.slice_period_nm, params.a(), params.t());
  lat.geometry = geo;
  return prune(lat);
}

}  // namespace

std::string to_string(EdgeType e) { return e == EdgeType::armchair ? "armchair" : "zigzag"; }

std::string to_string(Profile p) {
  switch (p) {
    case Profile::abrupt: return "abrupt";
    case Profile::wedge: return "wedge";
    case Profile::smooth_cosine: return "smooth-cosine";
  }
  return "?";
}

EdgeType edge_type_from_string(const std::string& s) {
  if (s == "armchair") return EdgeType::armchair;
  if (s == "zigzag") return EdgeType::zigzag;
  throw ValidationError("unknown edge type '" + s + "'");
}

Profile profile_from_string(const std::string& s) {
  if (s == "abrupt") return Profile::abrupt;
  if (s == "wedge") return Profile::wedge;
  if (s == "smooth-cosine" || s == "smooth_cosine") return Profile::smooth_cosine;
  throw ValidationError("unknown profile '" + s + "'");
}

double LatticeParams::fermi_velocity() const {
  return hbar_vf_ev_nm() * 1e-9 / si::hbar_ev_s;
}

void LatticeParams::validate() const {
  if (!(cc_distance_nm > 0)) throw ValidationError("cc_distance must be positive");
  if (!(hopping_ev > 0)) throw ValidationError("hopping_t must be positive");
  if (!(scaling_factor >= 1.0)) throw ValidationError("scaling_factor must be >= 1");
}

void GeometrySpec::validate() const {
  std::vector<std::string> errs;
  if (!(lead_width_nm > 0)) errs.push_back("lead_width must be positive");
  if (!(constriction_width_nm > 0)) errs.push_back("constriction_width must be positive");
  if (!(constriction_length_nm > 0)) errs.push_back("constriction_length must be positive");
  if (!(total_length_nm > 0)) errs.push_back("total_length must be positive");
  if (constriction_width_nm > lead_width_nm) errs.push_back("constriction_width exceeds lead_width");
  if (constriction_length_nm > total_length_nm)
    errs.push_back("constriction_length exceeds total_length");
  if (!errs.empty()) throw ValidationError("invalid geometry: " + errs.front(), errs);
}

void DisorderSpec::validate() const {
  if (!(edge_removal_probability >= 0.0 && edge_removal_probability <= 1.0)) {
    throw ValidationError("edge_removal_probability must lie in [0, 1]");
  }
  if (edge_depth < 1) throw ValidationError("edge_depth must be >= 1");
}

double row_pitch_nm(EdgeType e, const LatticeParams& p) {
  return e == EdgeType::armchair ? 0.5 * kSqrt3 * p.a() : 1.5 * p.a();
}

double cell_period_nm(EdgeType e, const LatticeParams& p) {
  return e == EdgeType::armchair ? 3.0 * p.a() : kSqrt3 * p.a();
}

std::vector<std::vector<std::size_t>> DeviceLattice::slices() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(slice_count));
  for (std::size_t k = 0; k < sites.size(); ++k) {
    out[static_cast<std::size_t>(sites[k].slice)].push_back(k);
  }
  return out;
}

std::vector<int> DeviceLattice::coordination() const {
  std::vector<int> c(sites.size(), 0);
  for (const auto& h : hoppings) ++c[h.i];
  for (const auto* lead : {&left_lead, &right_lead}) {
    for (const auto& h : lead->coupling) ++c[lead->device_sites[h.i]];
  }
  return c;
}

std::uint64_t DeviceLattice::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  h = mix(h, static_cast<std::uint64_t>(sites.size()));
  for (const auto& s : sites) {
    h = mix(h, s.pos.x);
    h = mix(h, s.pos.y);
    h = mix(h, static_cast<std::uint64_t>(s.slice));
  }
  for (double e : onsite) h = mix(h, e);
  auto mix_hops = [&](const std::vector<Hopping>& hs) {
    h = mix(h, static_cast<std::uint64_t>(hs.size()));
    for (const auto& hop : hs) {
      h = mix(h, static_cast<std::uint64_t>(hop.i));
      h = mix(h, static_cast<std::uint64_t>(hop.j));
      h = mix(h, hop.amplitude.real());
      h = mix(h, hop.amplitude.imag());
    }
  };
  mix_hops(hoppings);
  for (const auto* lead : {&left_lead, &right_lead}) {
    mix_hops(lead->intra);
    mix_hops(lead->coupling);
    for (double e : lead->onsite) h = mix(h, e);
  }
  return h;
}

std::string DeviceLattice::fingerprint_hex() const {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fingerprint();
  return os.str();
}

DeviceLattice build_ribbon(const LatticeParams& params, EdgeType edge, double width_nm,
                           double length_nm, RibbonOptions opts) {
  params.validate();
  const double pitch = row_pitch_nm(edge, params);
  const double period = cell_period_nm(edge, params);
  int rows = rows_for_width(width_nm, pitch);
  if (rows < 3) {
    throw ValidationError("ribbon width " + std::to_string(width_nm) +
                          " nm is below the minimum of 3 transverse rows");
  }
  const int slices = static_cast<int>(std::lround(length_nm / period));
  if (slices < 2) throw ValidationError("ribbon length must cover at least 2 unit cells");
  std::vector<std::string> notes;
  if (opts.metallic_snap && edge == EdgeType::armchair) {
    const int snapped = snap_metallic(rows);
    if (snapped != rows) {
      notes.push_back("armchair width snapped from " + std::to_string(rows) + " to " +
                      std::to_string(snapped) + " dimer lines (" +
                      std::to_string(snapped * pitch) + " nm) for a metallic channel");
    }
    rows = snapped;
  }
  GeometrySpec geo;
  geo.edge_type = edge;
  geo.lead_width_nm = width_nm;
  geo.constriction_width_nm = width_nm;
  geo.constriction_length_nm = length_nm;
  geo.total_length_nm = length_nm;
  geo.profile = Profile::smooth_cosine;
  geo.metallic_snap = opts.metallic_snap;
  geo.lead_rows = rows;
  geo.constriction_rows = rows;
  geo.actual_lead_width_nm = rows * pitch;
  geo.actual_constriction_width_nm = rows * pitch;
  geo.slice_count = slices;
  auto lat = assemble(params, geo, [](const Site&) { return true; });
  lat.warnings = notes;
  return lat;
}

DeviceLattice build_constriction(const LatticeParams& params, GeometrySpec geo) {
  params.validate();
  geo.validate();
  const double pitch = row_pitch_nm(geo.edge_type, params);
  const double period = cell_period_nm(geo.edge_type, params);
  const int lead_rows = rows_for_width(geo.lead_width_nm, pitch);
  int narrow_rows = rows_for_width(geo.constriction_width_nm, pitch);
  if (lead_rows < 3) throw ValidationError("lead narrower than 3 rows");
  std::vector<std::string> notes;
  if (geo.metallic_snap && geo.edge_type == EdgeType::armchair) {
    int snapped = snap_metallic(narrow_rows);
    if (snapped > lead_rows) snapped -= 3;
    if (snapped != narrow_rows) {
      notes.push_back("constriction snapped from " + std::to_string(narrow_rows) + " to " +
                      std::to_string(snapped) + " dimer lines (" +
                      std::to_string(snapped * pitch) + " nm) for a metallic channel");
    }
    narrow_rows = snapped;
  }
  narrow_rows = std::min(narrow_rows, lead_rows);
  if (narrow_rows < 3) {
    throw ValidationError("constriction narrower than 3 rows");
  }
  const int slices = static_cast<int>(std::lround(geo.total_length_nm / period));
  if (slices < 2) throw ValidationError("total_length must cover at least 2 unit cells");

  geo.lead_rows = lead_rows;
  geo.constriction_rows = narrow_rows;
  geo.actual_lead_width_nm = lead_rows * pitch;
  geo.actual_constriction_width_nm = narrow_rows * pitch;
  geo.slice_count = slices;

  const double total = slices * period;
  const double mid = 0.5 * total;
  const double half_narrow = 0.5 * geo.constriction_length_nm;
  // two pristine lead-copy slices at each end
  const double ramp_start = std::min(2.0 * period, mid - half_narrow);
  const double ramp_len = std::max(mid - half_narrow - ramp_start, 0.0);
  const int cut_bottom = (lead_rows - narrow_rows) / 2;
  const int cut_top = lead_rows - narrow_rows - cut_bottom;
  const Profile profile = geo.profile;

  auto fraction = [=](double x) {
    const double d = std::abs(x - mid);  // distance from the centre
    if (d <= half_narrow) return 1.0;
    if (profile == Profile::abrupt || ramp_len <= 0) return 0.0;
    const double u = 1.0 - (d - half_narrow) / ramp_len;
    if (u <= 0) return 0.0;
    return profile == Profile::wedge ? u : 0.5 * (1.0 - std::cos(std::numbers::pi * u));
  };
  auto keep = [=](const Site& s) {
    if (s.slice == 0 || s.slice == slices - 1) return true;
    const double f = fraction(s.pos.x);
    const int lo = static_cast<int>(std::lround(f * cut_bottom));
    const int hi = lead_rows - 1 - static_cast<int>(std::lround(f * cut_top));
    return s.row >= lo && s.row <= hi;
  };
  auto lat = assemble(params, geo, keep);
  lat.warnings = notes;
  return lat;
}

DeviceLattice apply_edge_disorder(const DeviceLattice& lattice, const DisorderSpec& spec) {
  spec.validate();
  if (spec.edge_removal_probability == 0.0) return lattice;
  const int last = lattice.slice_count - 1;
  const auto coord = lattice.coordination();
  const auto adj = adjacency(lattice);
  // graph distance from the under-coordinated boundary set
  std::vector<int> depth(lattice.size(), -1);
  std::deque<std::size_t> bfs;
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    if (coord[k] < 3) {
      depth[k] = 0;
      bfs.push_back(k);
    }
  }
  while (!bfs.empty()) {
    const auto k = bfs.front();
    bfs.pop_front();
    for (auto n : adj[k]) {
      if (depth[n] < 0) {
        depth[n] = depth[k] + 1;
        bfs.push_back(n);
      }
    }
  }
  std::mt19937_64 rng(spec.rng_seed);
  std::vector<char> keep(lattice.size(), 1);
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const auto& s = lattice.sites[k];
    if (s.slice == 0 || s.slice == last) continue;
    if (depth[k] < 0 || depth[k] >= spec.edge_depth) continue;
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u < spec.edge_removal_probability) keep[k] = 0;
  }
  auto out = prune(compact(lattice, keep));
  return out;
}

double peierls_phase(Vec2 ri, Vec2 rj, double b_tesla, double gauge_origin_y_nm) {
  const double ymid = 0.5 * (ri.y + rj.y) - gauge_origin_y_nm;
  return -kEOverHbar * b_tesla * (ri.x - rj.x) * ymid;
}

DeviceLattice apply_peierls(const DeviceLattice& lattice, double b_tesla,
                            double gauge_origin_y_nm) {
  DeviceLattice out = lattice;
  if (b_tesla == 0.0) return out;
  auto phase = [&](Vec2 ri, Vec2 rj) {
    return std::polar(1.0, peierls_phase(ri, rj, b_tesla, gauge_origin_y_nm));
  };
  for (auto& h : out.hoppings) {
    h.amplitude *= phase(out.sites[h.i].pos, out.sites[h.j].pos);
  }
  for (auto* lead : {&out.left_lead, &out.right_lead}) {
    for (auto& h : lead->intra) h.amplitude *= phase(lead->positions[h.i], lead->positions[h.j]);
    for (auto& h : lead->coupling) {
      Vec2 inner = lead->positions[h.i];
      inner.x -= lead->shift_x_nm;
      h.amplitude *= phase(inner, lead->positions[h.j]);
    }
  }
  out.field_tesla += b_tesla;
  out.gauge_origin_y_nm = gauge_origin_y_nm;
  const double l_b = std::sqrt(si::hbar / (si::e_charge * std::abs(out.field_tesla))) * 1e9;
  if (l_b <= 4.0 * out.params.a()) {
    out.warnings.push_back("magnetic length " + std::to_string(l_b) +
                           " nm is below 4 scaled lattice constants; lattice artefacts expected");
  }
  return out;
}

DeviceLattice apply_onsite_potential(const DeviceLattice& lattice,
                                     const PotentialProfile& profile) {
  DeviceLattice out = lattice;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double v = profile(out.sites[k].pos);
    if (!std::isfinite(v)) throw ValidationError("onsite profile is not finite on the device");
    out.onsite[k] = v;
  }
  for (auto* lead : {&out.left_lead, &out.right_lead}) {
    for (std::size_t k = 0; k < lead->size(); ++k) {
      lead->onsite[k] = out.onsite[lead->device_sites[k]];
    }
  }
  return out;
}

double hermiticity_defect(const DeviceLattice& lattice) {
  auto defect = [](const std::vector<Hopping>& hs) {
    std::unordered_map<std::uint64_t, cplx> m;
    for (const auto& h : hs) m[(static_cast<std::uint64_t>(h.i) << 32) | h.j] = h.amplitude;
    double worst = 0;
    for (const auto& h : hs) {
      auto it = m.find((static_cast<std::uint64_t>(h.j) << 32) | h.i);
      if (it == m.end()) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, std::abs(h.amplitude - std::conj(it->second)));
    }
    return worst;
  };
  return std::max({defect(lattice.hoppings), defect(lattice.left_lead.intra),
                   defect(lattice.right_lead.intra)});
}

std::string export_json(const DeviceLattice& lat, int indent) {
  using nlohmann::json;
  json j;
  auto& sites = j["sites"] = json::array();
  for (std::size_t k = 0; k < lat.size(); ++k) {
    const auto& s = lat.sites[k];
    sites.push_back({{"id", k},
                     {"x_nm", s.pos.x},
                     {"y_nm", s.pos.y},
                     {"sublattice", s.sublattice == Sublattice::A ? "A" : "B"},
                     {"slice", s.slice}});
  }
  auto& hops = j["hoppings"] = json::array();
  for (const auto& h : lat.hoppings) {
    hops.push_back({{"i", h.i}, {"j", h.j}, {"re", h.amplitude.real()}, {"im", h.amplitude.imag()}});
  }
  j["onsite"] = lat.onsite;
  const auto& g = lat.geometry;
  j["geometry"] = {{"edge_type", to_string(g.edge_type)},
                   {"lead_width_nm", g.lead_width_nm},
                   {"constriction_width_nm", g.constriction_width_nm},
                   {"constriction_length_nm", g.constriction_length_nm},
                   {"profile", to_string(g.profile)},
                   {"total_length_nm", g.total_length_nm},
                   {"metallic_snap", g.metallic_snap},
                   {"lead_rows", g.lead_rows},
                   {"constriction_rows", g.constriction_rows},
                   {"actual_lead_width_nm", g.actual_lead_width_nm},
                   {"actual_constriction_width_nm", g.actual_constriction_width_nm},
                   {"slice_count", lat.slice_count},
                   {"slice_period_nm", lat.slice_period_nm},
                   {"field_T", lat.field_tesla}};
  j["params"] = {{"cc_distance_nm", lat.params.cc_distance_nm},
                 {"hopping_eV", lat.params.hopping_ev},
                 {"scaling_factor", lat.params.scaling_factor}};
  j["fingerprint"] = lat.fingerprint_hex();
  return j.dump(indent);
}

}  // namespace gcon
