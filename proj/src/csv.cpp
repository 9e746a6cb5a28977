#include "gcon/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "gcon/constants.hpp"
#include "gcon/error.hpp"

namespace gcon {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto p = line.find(sep, start);
    out.push_back(trim(line.substr(start, p == std::string_view::npos ? p : p - start)));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  double v = 0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct Table {
  std::map<std::string, std::string> meta;
  std::map<std::string, int> meta_line;
  std::vector<std::string> columns;
  int header_line = 0;
  std::vector<std::vector<double>> rows;
  std::vector<int> row_lines;
};

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
  const std::string where = line > 0 ? source + ":" + std::to_string(line) : source;
  throw ValidationError(where + ": " + what, {where + ": " + what});
}

Table read_table(std::string_view text, const std::string& source) {
  Table t;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;  // free-form comment
      const std::string key(trim(body.substr(0, eq)));
      if (key.empty()) fail(source, line_no, "metadata line without a key");
      if (!t.columns.empty()) fail(source, line_no, "metadata after the column header");
      if (t.meta.count(key)) fail(source, line_no, "duplicate metadata key '" + key + "'");
      t.meta[key] = std::string(trim(body.substr(eq + 1)));
      t.meta_line[key] = line_no;
      continue;
    }
    const auto cells = split(line, ',');
    if (t.columns.empty()) {
      for (auto c : cells) t.columns.emplace_back(c);
      t.header_line = line_no;
      continue;
    }
    if (cells.size() != t.columns.size()) {
      fail(source, line_no,
           "expected " + std::to_string(t.columns.size()) + " columns, got " +
               std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = to_double(cells[c]);
      if (!v) fail(source, line_no, "column " + t.columns[c] + ": not a finite number '" +
                                        std::string(cells[c]) + "'");
      row.push_back(*v);
    }
    t.rows.push_back(std::move(row));
    t.row_lines.push_back(line_no);
  }
  if (t.columns.empty()) fail(source, 0, "empty CSV: no column header");
  if (t.rows.empty()) fail(source, t.header_line, "no data rows");
  return t;
}

std::optional<double> meta_number(const Table& t, const std::string& key,
                                  const std::string& source) {
  const auto it = t.meta.find(key);
  if (it == t.meta.end() || it->second.empty()) return std::nullopt;
  const auto v = to_double(it->second);
  if (!v) fail(source, t.meta_line.at(key), "metadata " + key + ": not a number '" + it->second + "'");
  return v;
}

double require_meta(const Table& t, const std::string& key, const std::string& source) {
  const auto v = meta_number(t, key, source);
  if (!v) fail(source, 0, "missing metadata '# " + key + " = ...'");
  return *v;
}

void check_header(const Table& t, const std::vector<std::string>& want, const std::string& source) {
  if (t.columns != want) {
    std::string w;
    for (const auto& c : want) w += (w.empty() ? "" : ",") + c;
    fail(source, t.header_line, "column header must be " + w);
  }
}

void fill_common(const Table& t, const std::string& source, double& alpha, double& vd, double& b,
                 double& hbar_vf, double& window, std::string& fp) {
  alpha = require_meta(t, "alpha_F_per_m2", source);
  if (!(alpha > 0)) fail(source, t.meta_line.at("alpha_F_per_m2"), "alpha_F_per_m2 must be positive");
  vd = require_meta(t, "dirac_point_V", source);
  b = meta_number(t, "B_T", source).value_or(0.0);
  hbar_vf = meta_number(t, "hbar_vF_eV_nm", source).value_or(0.0);
  window = meta_number(t, "validity_window_eV", source).value_or(0.0);
  if (auto it = t.meta.find("device_fingerprint"); it != t.meta.end()) fp = it->second;
}

char outside_window(double vg, double alpha, double vd, double hbar_vf, double window) {
  if (!(hbar_vf > 0) || !(window > 0)) return 0;
  const double n = alpha * (vg - vd) / si::e_charge;
  const double ef = hbar_vf * std::sqrt(std::numbers::pi * std::abs(n)) * 1e-9;
  return ef > window ? 1 : 0;
}

}  // namespace

CsvKind sniff_csv_kind(std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    return split(l, ',').size() == 3 ? CsvKind::bias_map : CsvKind::trace;
  }
  fail(source, 0, "empty CSV: no column header");
}

IngestedTrace parse_trace_csv(std::string_view text, const std::string& source) {
  const Table t = read_table(text, source);
  if (t.columns.size() != 2 || t.columns[0] != "Vg_V" ||
      (t.columns[1] != "G_siemens" && t.columns[1] != "G_2e2_over_h")) {
    fail(source, t.header_line, "column header must be Vg_V,G_siemens or Vg_V,G_2e2_over_h");
  }
  const bool siemens = t.columns[1] == "G_siemens";
  if (auto it = t.meta.find("G_unit"); it != t.meta.end()) {
    const std::string declared = it->second;
    if (declared != "siemens" && declared != "2e2_over_h") {
      fail(source, t.meta_line.at("G_unit"), "G_unit must be siemens or 2e2_over_h");
    }
    if ((declared == "siemens") != siemens) {
      fail(source, t.header_line, "column unit disagrees with G_unit = " + declared);
    }
  }
  IngestedTrace out;
  out.source = source;
  out.metadata = t.meta;
  auto& tr = out.trace;
  fill_common(t, source, tr.alpha_f_per_m2, tr.dirac_point_v, tr.b_tesla, tr.hbar_vf_ev_nm,
              tr.validity_window_ev, tr.fingerprint);
  tr.temperature_k = meta_number(t, "temperature_K", source).value_or(0.0);
  tr.series_resistance_ohm = meta_number(t, "R_series_ohm", source).value_or(0.0);
  out.length_nm = meta_number(t, "L_nm", source);
  out.width_nm = meta_number(t, "W_nm", source);
  if (out.length_nm && !(*out.length_nm > 0)) fail(source, t.meta_line.at("L_nm"), "L_nm must be positive");
  if (out.width_nm && !(*out.width_nm > 0)) fail(source, t.meta_line.at("W_nm"), "W_nm must be positive");
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const double vg = t.rows[k][0];
    double g = t.rows[k][1];
    if (g < 0) fail(source, t.row_lines[k], "negative conductance");
    if (siemens) g /= si::conductance_quantum;
    if (k > 0) {
      const double prev = tr.gate_v.back();
      const bool up = t.rows.size() > 1 && t.rows[1][0] > t.rows[0][0];
      if (vg == prev || (vg > prev) != up) fail(source, t.row_lines[k], "gate column is not strictly monotone");
    }
    tr.gate_v.push_back(vg);
    tr.conductance.push_back(g);
    tr.flagged.push_back(outside_window(vg, tr.alpha_f_per_m2, tr.dirac_point_v, tr.hbar_vf_ev_nm,
                                        tr.validity_window_ev));
  }
  return out;
}

IngestedBiasMap parse_bias_map_csv(std::string_view text, const std::string& source) {
  const Table t = read_table(text, source);
  check_header(t, {"Vg_V", "Vsd_V", "Gdiff_2e2_over_h"}, source);
  IngestedBiasMap out;
  out.source = source;
  out.metadata = t.meta;
  auto& m = out.map;
  fill_common(t, source, m.alpha_f_per_m2, m.dirac_point_v, m.b_tesla, m.hbar_vf_ev_nm,
              m.validity_window_ev, m.fingerprint);
  std::vector<double> gates, biases;
  for (const auto& r : t.rows) {
    if (std::find(gates.begin(), gates.end(), r[0]) == gates.end()) gates.push_back(r[0]);
    if (std::find(biases.begin(), biases.end(), r[1]) == biases.end()) biases.push_back(r[1]);
  }
  if (gates.size() * biases.size() != t.rows.size()) {
    fail(source, t.header_line,
         "bias map is not a complete grid (" + std::to_string(gates.size()) + " gates x " +
             std::to_string(biases.size()) + " biases vs " + std::to_string(t.rows.size()) + " rows)");
  }
  std::sort(gates.begin(), gates.end());
  std::sort(biases.begin(), biases.end());
  m.gate_v = gates;
  m.bias_v = biases;
  m.g_diff.assign(gates.size(), std::vector<double>(biases.size(), -1.0));
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& r = t.rows[k];
    if (r[2] < 0) fail(source, t.row_lines[k], "negative differential conductance");
    const auto gi = static_cast<std::size_t>(std::lower_bound(gates.begin(), gates.end(), r[0]) - gates.begin());
    const auto bi = static_cast<std::size_t>(std::lower_bound(biases.begin(), biases.end(), r[1]) - biases.begin());
    if (m.g_diff[gi][bi] >= 0) fail(source, t.row_lines[k], "duplicate (Vg, Vsd) point");
    m.g_diff[gi][bi] = r[2];
  }
  for (double vg : gates) {
    m.flagged.push_back(outside_window(vg, m.alpha_f_per_m2, m.dirac_point_v, m.hbar_vf_ev_nm,
                                       m.validity_window_ev));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace gcon
