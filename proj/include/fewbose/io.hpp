#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fewbose/trimers.hpp"
#include "fewbose/twobody.hpp"

namespace fewbose {

inline constexpr const char* kVersion = "0.1.0";

// Fixed-format floating point cell so identical configs give bit-identical
// CSV files on the same build.
inline std::string csv_cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline void write_dimer_scan_csv(std::ostream& os,
                                 const std::vector<DimerPoint>& rows) {
  os << "B_gauss,a_over_a0,E_dim_reduced,E_dim_over_h_MHz,branch,p_closed\n";
  for (const auto& r : rows) {
    os << csv_cell(r.B_gauss) << ',' << csv_cell(r.a_over_a0) << ',';
    if (r.has_dimer) {
      os << csv_cell(r.E) << ',' << csv_cell(r.E_h_mhz) << ','
         << to_string(r.branch) << ',' << csv_cell(r.p_closed);
    } else {
      os << ",,,";  // no dimer at this field
    }
    os << '\n';
  }
}

// E_minus_Edim is the distance to the atom-dimer threshold, blank when no
// dimer exists at that field.
inline void write_trimer_branches_csv(std::ostream& os, const Model& m,
                                      const std::vector<TrimerBranch>& brs) {
  os << "B_gauss,E_reduced,E_minus_Edim_reduced,branch_index,"
        "qualitative_flag\n";
  for (const auto& br : brs) {
    for (const auto& p : br.points) {
      os << csv_cell(p.B) << ',' << csv_cell(p.E) << ',';
      const auto ds = find_dimers(m, m.nu(p.B));
      if (!ds.empty()) os << csv_cell(p.E + ds.back().E_dim);
      os << ',' << br.index << ',' << (p.qualitative ? 1 : 0) << '\n';
    }
  }
}

inline nlohmann::json thresholds_json(
    const std::vector<std::pair<int, ThresholdField>>& ths) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [branch, t] : ths) {
    arr.push_back({{"branch", branch},
                   {"kind", to_string(t.kind)},
                   {"B_star_gauss", t.B_star},
                   {"uncertainty_gauss", t.uncertainty}});
  }
  return arr;
}

struct RecombRow {
  double B_gauss = 0.0;
  bool ok = true;
  std::string error;  // per-field failure recorded in-row, scan continues
  double alpha_cm6_s = 0.0;
  std::string regime;
  double gamma_abs = 0.0;
  double p_closed = 0.0;
  double P_less = 0.0;
  double a_over_a0 = 0.0;
  double alpha_ref_cm6_s = 0.0;  // effective-range reference, 0 if n/a
};

inline void write_recomb_csv(std::ostream& os,
                             const std::vector<RecombRow>& rows) {
  os << "B_gauss,alpha_cm6_per_s,regime,gamma_abs,p_closed,P_less,"
        "a_over_a0,alpha_ref_cm6_per_s\n";
  for (const auto& r : rows) {
    os << csv_cell(r.B_gauss) << ',';
    if (r.ok) {
      os << csv_cell(r.alpha_cm6_s) << ',' << r.regime << ','
         << csv_cell(r.gamma_abs) << ',' << csv_cell(r.p_closed) << ','
         << csv_cell(r.P_less) << ',' << csv_cell(r.a_over_a0) << ','
         << csv_cell(r.alpha_ref_cm6_s);
    } else {
      os << ",error:" << r.error << ",,,," << csv_cell(r.a_over_a0) << ',';
    }
    os << '\n';
  }
}

// FNV-1a over the canonical dump; enough to tie an output to its config.
inline std::uint64_t config_hash(const nlohmann::json& config) {
  const std::string s = config.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline nlohmann::json make_manifest(const nlohmann::json& config) {
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  return {{"version", kVersion}, {"config", config}, {"config_hash", hex}};
}

}  // namespace fewbose
