// Command-line front end: calibration reports, dimer/trimer/recombination
// scans over magnetic field, and grid-convergence studies. Outputs are CSV
// plus a JSON manifest embedding the full config and its hash, so every file
// can be reproduced. Exit codes: 0 success, 2 config error, 3 numerical
// failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fewbose/fewbose.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fewbose;

namespace {

struct RunConfig {
  json raw;  // merged config document (file fields overridden by flags)

  std::string resonance_label = "Cs";
  std::optional<json> resonance_inline;
  std::string catalog_path;
  double b_over_rvdw = 0.0;  // 0 = keep catalog b
  std::size_t grid_n = 400;
  double K_min = 0.0, K_max = 0.0;  // 0 = module defaults
  int angular_order = 40;
  int threads = 0;
  std::string out_dir = ".";
  double B_from = 0.0, B_to = 0.0;
  int nB = 0;
};

RunConfig merge_config(const std::string& config_path,
                       const std::string& resonance_flag,
                       const std::string& out_flag, int threads_flag,
                       int grid_n_flag, double b_over_rvdw_flag) {
  RunConfig c;
  c.raw = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config " + config_path);
    try {
      in >> c.raw;
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
  }
  if (c.raw.contains("resonance")) {
    if (c.raw["resonance"].is_string())
      c.resonance_label = c.raw["resonance"].get<std::string>();
    else
      c.resonance_inline = c.raw["resonance"];
  }
  c.catalog_path = c.raw.value("catalog", std::string());
  c.b_over_rvdw = c.raw.value("b_over_rvdw", 0.0);
  if (c.raw.contains("grid")) {
    const auto& g = c.raw["grid"];
    c.grid_n = g.value("n", 400);
    c.K_min = g.value("K_min", 0.0);
    c.K_max = g.value("K_max", 0.0);
    c.angular_order = g.value("angular_order", 40);
  }
  c.threads = c.raw.value("threads", 0);
  c.out_dir = c.raw.value("out", std::string("."));
  if (c.raw.contains("scan")) {
    const auto& s = c.raw["scan"];
    c.B_from = s.value("B_from", 0.0);
    c.B_to = s.value("B_to", 0.0);
    c.nB = s.value("nB", 0);
  }
  // CLI flags override file fields
  if (!resonance_flag.empty()) {
    c.resonance_label = resonance_flag;
    c.resonance_inline.reset();
    c.raw["resonance"] = resonance_flag;
  }
  if (!out_flag.empty()) {
    c.out_dir = out_flag;
    c.raw["out"] = out_flag;
  }
  if (threads_flag > 0) {
    c.threads = threads_flag;
    c.raw["threads"] = threads_flag;
  }
  if (grid_n_flag > 0) {
    c.grid_n = static_cast<std::size_t>(grid_n_flag);
    c.raw["grid"]["n"] = grid_n_flag;
  }
  if (b_over_rvdw_flag > 0.0) {
    c.b_over_rvdw = b_over_rvdw_flag;
    c.raw["b_over_rvdw"] = b_over_rvdw_flag;
  }
  if (c.grid_n < 8) throw ConfigError("grid.n too small");
  if (c.angular_order < 2) throw ConfigError("grid.angular_order too small");
  return c;
}

ResonanceParams resolve_resonance(const RunConfig& c) {
  ResonanceParams r;
  if (c.resonance_inline) {
    r = parse_resonance(*c.resonance_inline);
  } else {
    const auto cat = c.catalog_path.empty() ? builtin_catalog()
                                            : load_catalog(c.catalog_path);
    r = find_resonance(cat, c.resonance_label);
  }
  if (c.b_over_rvdw > 0.0) r.b_a0 = c.b_over_rvdw * r.R_vdW_a0;
  r.validate();
  return r;
}

void require_scan_range(const RunConfig& c) {
  if (c.nB < 1 || c.B_to < c.B_from)
    throw ConfigError("scan: need nonempty B range (B_from <= B_to, nB >= 1)");
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << text;
}

void write_manifest(const RunConfig& c, const std::string& stem) {
  const json m = make_manifest(c.raw);
  write_text(fs::path(c.out_dir) / (stem + "_manifest.json"), m.dump(2) + "\n");
}

int cmd_calibrate(const RunConfig& c) {
  const ResonanceParams res = resolve_resonance(c);
  const Model m = Model::from_resonance(res);
  const auto& cp = m.couplings;
  std::cout << "resonance: " << res.label << "\n"
            << "  B0 = " << res.B0_gauss << " G, DeltaB = " << res.delta_B_gauss
            << " G, delta_mu = " << res.delta_mu_muB << " |mu_B|\n"
            << "  a_bg = " << res.a_bg_a0 << " a0 (" << m.a_bg << " b)\n"
            << "  b = " << res.effective_b_a0() << " a0 ("
            << res.effective_b_a0() / res.R_vdW_a0 << " R_vdW)\n"
            << "couplings (reduced, hbar = m = 1, length = b):\n"
            << "  g0 = " << cp.g0 << ", g0_crit = " << cp.g0_crit
            << ", lambda = " << cp.lambda << "\n"
            << "  W = delta_mu*DeltaB = " << m.W
            << ", E_mol - nu = " << cp.nu_offset << "\n"
            << "  round-trip a_bg: " << a_bg_from_couplings(cp) * res.effective_b_a0()
            << " a0, DeltaB: "
            << delta_B_from_couplings(cp, m.a_bg, m.delta_mu) << " G\n"
            << "derived scales:\n"
            << "  R* = " << m.r_star() << " b = "
            << m.r_star() * res.effective_b_a0() << " a0\n"
            << "  r_e(B0) = " << effective_range(m, 0.0) << " b, -2R* = "
            << -2.0 * m.r_star() << " b\n"
            << "  energy unit = " << m.units.energy_h_mhz() << " MHz*h\n"
            << "sign rule (delta_mu*DeltaB vs a_bg): ok\n";
  return 0;
}

int cmd_dimer_scan(const RunConfig& c) {
  require_scan_range(c);
  const Model m = Model::from_resonance(resolve_resonance(c));
  const auto rows = dimer_spectrum_scan(m, c.B_from, c.B_to, c.nB);
  fs::create_directories(c.out_dir);
  std::ofstream out(fs::path(c.out_dir) / "dimer_scan.csv");
  write_dimer_scan_csv(out, rows);
  write_manifest(c, "dimer_scan");
  std::cout << "wrote " << (fs::path(c.out_dir) / "dimer_scan.csv").string()
            << " (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_trimer_scan(const RunConfig& c) {
  require_scan_range(c);
  const Model m = Model::from_resonance(resolve_resonance(c));
  TrimerSolver solver =
      TrimerSolver::standard(m, c.grid_n, c.K_min, c.K_max, c.threads);
  solver.angular_order = c.angular_order;
  const double E_floor = c.raw.value("E_floor", -10.0) / (m.b * m.b);

  // seed branches at the resonance field (nu = 0), where the Efimov
  // attachment guarantees states, unless the config pins seeds explicitly
  std::vector<std::pair<double, double>> seeds;
  if (c.raw.contains("seeds")) {
    for (const auto& s : c.raw["seeds"])
      seeds.emplace_back(s.at("B").get<double>(), s.at("E").get<double>());
  } else {
    double B_seed = m.B0;
    if (B_seed < c.B_from || B_seed > c.B_to)
      B_seed = 0.5 * (c.B_from + c.B_to);
    for (double E : find_trimers(solver, B_seed, E_floor, -1e-8))
      seeds.emplace_back(B_seed, E);
  }
  if (seeds.empty()) throw NumericalError("trimer-scan: no seed states found");

  std::vector<TrimerBranch> branches;
  std::vector<std::pair<int, ThresholdField>> ths;
  int idx = 0;
  for (const auto& [Bs, Es] : seeds) {
    TrimerBranch br = trace_branch(solver, Bs, Es, c.B_from, c.B_to);
    br.index = idx;
    for (const auto& t : threshold_fields(m, br)) ths.emplace_back(idx, t);
    branches.push_back(std::move(br));
    ++idx;
  }
  fs::create_directories(c.out_dir);
  {
    std::ofstream out(fs::path(c.out_dir) / "trimer_branches.csv");
    write_trimer_branches_csv(out, m, branches);
  }
  write_text(fs::path(c.out_dir) / "thresholds.json",
             thresholds_json(ths).dump(2) + "\n");
  write_manifest(c, "trimer_scan");
  std::cout << "traced " << branches.size() << " branches, "
            << ths.size() << " thresholds\n";
  for (const auto& [i, t] : ths)
    std::cout << "  branch " << i << " " << to_string(t.kind) << " at B* = "
              << t.B_star << " +- " << t.uncertainty << " G\n";
  return 0;
}

int cmd_recomb_scan(const RunConfig& c) {
  require_scan_range(c);
  const Model m = Model::from_resonance(resolve_resonance(c));
  const double Rs = m.r_star();
  std::vector<RecombRow> rows(c.nB);
  detail::parallel_for(c.nB, c.threads, [&](std::size_t i) {
    const double B = c.nB == 1
                         ? c.B_from
                         : c.B_from + (c.B_to - c.B_from) * i / (c.nB - 1.0);
    RecombRow& r = rows[i];
    r.B_gauss = B;
    try {
      r.a_over_a0 = m.scattering_length(B) * m.units.length_a0;
      const double a = m.scattering_length(B);
      const auto ds = find_dimers(m, m.nu(B));
      RecombinationResult rr;
      if (!ds.empty()) {
        rr = alpha_feshbach(m, B, c.grid_n, c.K_min, c.K_max);
      } else {
        rr = alpha_deep(m, B, c.raw.value("r_cut_factor", 1.0), c.grid_n);
      }
      r.alpha_cm6_s = rr.alpha_cm6_s;
      r.regime = to_string(rr.regime);
      r.gamma_abs = rr.gamma_abs;
      r.p_closed = rr.p_closed;
      r.P_less = rr.P_less;
      if (a > 0.0)
        r.alpha_ref_cm6_s =
            alpha_effective_range_reference(a, Rs) * m.units.alpha_cm6_s();
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
  });
  fs::create_directories(c.out_dir);
  {
    std::ofstream out(fs::path(c.out_dir) / "recomb_scan.csv");
    write_recomb_csv(out, rows);
  }
  write_manifest(c, "recomb_scan");
  std::cout << "wrote " << (fs::path(c.out_dir) / "recomb_scan.csv").string()
            << " (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_converge(const RunConfig& c, const std::string& observable,
                 std::vector<int> ladder) {
  const Model m = Model::from_resonance(resolve_resonance(c));
  if (ladder.empty()) ladder = {200, 400, 600};
  std::vector<double> vals;
  std::cout << "observable: " << observable << "\n";
  for (int n : ladder) {
    double v = 0.0;
    if (observable == "efimov_ratio") {
      const auto es = efimov_spectrum(m, n, -10.0 / (m.b * m.b), -1e-8,
                                      c.threads);
      if (es.size() < 3)
        throw NumericalError("converge: fewer than 3 trimers resolved");
      // first excited pair (ground pair is non-universal)
      v = es[es.size() - 2] / es[es.size() - 1];
    } else if (observable == "trimer_ground") {
      TrimerSolver s = TrimerSolver::standard(m, c.grid_n, c.K_min,
                                              n / (10.0 * m.b), c.threads);
      // here the ladder entry is 10*K_max*b; fixed n, growing cutoff
      const auto roots = find_trimers(s, m.B0, -10.0 / (m.b * m.b), -1e-3);
      if (roots.empty()) throw NumericalError("converge: no trimer found");
      v = roots.front();
    } else if (observable == "alpha") {
      const double B = c.raw.value("B", m.B0 - 0.5 * m.delta_B);
      v = alpha_feshbach(m, B, n, c.K_min, c.K_max).alpha;
    } else {
      throw ConfigError("converge: unknown observable '" + observable + "'");
    }
    vals.push_back(v);
    std::cout << "  ladder=" << n << "  value=" << csv_cell(v);
    if (vals.size() > 1) {
      const double prev = vals[vals.size() - 2];
      std::cout << "  rel_change="
                << csv_cell(std::abs(v - prev) / std::abs(v));
    }
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-channel few-boson solver suite"};
  app.require_subcommand(1);

  std::string config_path, resonance, out_dir;
  int threads = 0, grid_n = 0;
  double b_over_rvdw = 0.0;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--resonance", resonance, "catalog label");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_option("--grid-n", grid_n, "momentum grid size");
  app.add_option("--b-over-rvdw", b_over_rvdw, "override b/R_vdW");

  auto* cal = app.add_subcommand("calibrate", "derive and report couplings");
  auto* dsc = app.add_subcommand("dimer-scan", "dimer spectrum vs field");
  auto* tsc = app.add_subcommand("trimer-scan", "trimer branches vs field");
  auto* rsc = app.add_subcommand("recomb-scan", "recombination vs field");
  auto* cvg = app.add_subcommand("converge", "grid convergence report");

  double B_from = 0.0, B_to = 0.0;
  int nB = 0;
  for (auto* sc : {dsc, tsc, rsc}) {
    sc->add_option("--b-from", B_from, "scan start, gauss");
    sc->add_option("--b-to", B_to, "scan end, gauss");
    sc->add_option("--nb", nB, "number of fields");
  }
  std::string observable = "efimov_ratio";
  std::vector<int> ladder;
  cvg->add_option("--observable", observable,
                  "efimov_ratio | trimer_ground | alpha");
  cvg->add_option("--ladder", ladder, "ladder of grid sizes");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig c = merge_config(config_path, resonance, out_dir, threads,
                               grid_n, b_over_rvdw);
    if (nB > 0) {
      c.B_from = B_from;
      c.B_to = B_to;
      c.nB = nB;
      c.raw["scan"] = {{"B_from", B_from}, {"B_to", B_to}, {"nB", nB}};
    }
    if (cal->parsed()) return cmd_calibrate(c);
    if (dsc->parsed()) return cmd_dimer_scan(c);
    if (tsc->parsed()) return cmd_trimer_scan(c);
    if (rsc->parsed()) return cmd_recomb_scan(c);
    if (cvg->parsed()) return cmd_converge(c, observable, ladder);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
