#include "fpp/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fpp/experiments.hpp"
#include "fpp/io.hpp"
#include "fpp/params.hpp"

namespace fpp {

namespace {

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// flags shared by every subcommand; they override the config file
struct GlobalOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  int threads = 0;
  std::string format = "csv";
};

ExperimentConfig load_config(const GlobalOpts& g) {
  ExperimentConfig cfg;
  if (!g.config_path.empty()) cfg = parse_config_file(g.config_path);
  if (g.seed_set) cfg.seeds = {g.seed};
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (g.threads > 0) cfg.threads = g.threads;
  return cfg;
}

ExperimentConfig load_config(const GlobalOpts& g, ExperimentKind kind) {
  ExperimentConfig cfg = load_config(g);
  if (cfg.kind_set && cfg.kind != kind)
    throw std::invalid_argument(std::string("config: kind '") +
                                to_string(cfg.kind) +
                                "' does not match this subcommand");
  cfg.kind = kind;
  cfg.kind_set = true;
  cfg.validate();
  return cfg;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << content;
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

// every data run gets a manifest that re-parses into the same config
void start_run(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  std::ostringstream os;
  write_manifest(os, cfg, now_utc());
  write_text_file(cfg.out_dir + "/manifest.txt", os.str());
}

void emit_table(const ExperimentConfig& cfg, const std::string& name,
                const Table& table, const std::string& format) {
  write_text_file(cfg.out_dir + "/" + name + "." + format, table.render(format));
}

std::string fit_line(const ScalingFit& fit) {
  std::ostringstream os;
  os << "model=" << to_string(fit.model) << " points=" << fit.points
     << " slope=" << fmt_g17(fit.slope) << " conf_half_width="
     << fmt_g17(fit.conf_half_width) << " r2=" << fmt_g17(fit.r2);
  return os.str();
}

void run_phase(const ModelParams& par, const std::string& format) {
  const auto msgs = validate_params(par);
  if (!msgs.empty()) {
    std::string joined;
    for (const auto& m : msgs) joined += (joined.empty() ? "" : "; ") + m;
    throw std::invalid_argument(joined);
  }
  const PhaseReport report = compute_thresholds(par);
  if (format == "json") {
    nlohmann::ordered_json j;
    j["mu_log"] = report.mu_log;
    j["mu_pol"] = report.mu_pol;
    j["mu_pol_alpha"] = report.mu_pol_alpha;
    j["eta_0"] = report.eta_0;
    j["explosion"] = report.explosion_threshold;
    j["phase"] = to_string(report.phase);
    std::cout << j.dump(1) << "\n";
    return;
  }
  std::cout << "mu_log = " << fmt_g17(report.mu_log) << "\n"
            << "mu_pol = " << fmt_g17(report.mu_pol) << "\n"
            << "mu_pol_alpha = " << fmt_g17(report.mu_pol_alpha) << "\n"
            << "eta_0 = " << fmt_g17(report.eta_0) << "\n"
            << "explosion = " << fmt_g17(report.explosion_threshold) << "\n"
            << "phase = " << to_string(report.phase) << "\n";
}

void run_generate(const GlobalOpts& g) {
  ExperimentConfig cfg = load_config(g);
  cfg.validate_base();
  start_run(cfg);
  GenerateOptions opt;
  opt.mode = cfg.mode;
  opt.root = RootConditioning::RootAtOrigin;
  opt.intensity = cfg.intensity;
  run_tasks(static_cast<int>(cfg.seeds.size()), cfg.threads, [&](int i) {
    const std::uint64_t seed = cfg.seeds[static_cast<std::size_t>(i)];
    const SpatialGraph graph =
        generate_graph(cfg.domain, cfg.par, cfg.l_spec, seed, opt);
    write_graph_file(cfg.out_dir + "/graph_" + std::to_string(seed) + ".txt",
                     graph);
    emit_table(cfg, "points_" + std::to_string(seed), points_table(graph),
               g.format);
  });
  std::cout << "graphs = " << cfg.seeds.size() << "\n";
}

void run_distance(const GlobalOpts& g, bool with_fit) {
  const ExperimentConfig cfg =
      load_config(g, ExperimentKind::DistanceScaling);
  start_run(cfg);
  const DistanceScalingResult res = run_distance_scaling(cfg);
  emit_table(cfg, "samples", distance_samples_table(res.samples), g.format);
  int found = 0;
  for (const auto& s : res.samples) found += s.found ? 1 : 0;
  std::cout << "samples = " << res.samples.size() << "\n"
            << "found = " << found << "\n";
  if (with_fit) {
    emit_table(cfg, "fit", fit_table({{cfg.par.mu, res.fit}}, false), g.format);
    std::cout << fit_line(res.fit) << "\n";
  }
}

void run_sweep(const GlobalOpts& g) {
  const ExperimentConfig cfg = load_config(g, ExperimentKind::MuSweep);
  start_run(cfg);
  const MuSweepResult res = run_mu_sweep(cfg);
  emit_table(cfg, "samples", mu_samples_table(res), g.format);
  std::vector<std::pair<double, ScalingFit>> fits;
  for (std::size_t i = 0; i < res.mu.size(); ++i)
    fits.emplace_back(res.mu[i], res.fits[i]);
  emit_table(cfg, "fits", fit_table(fits, true), g.format);
  std::cout << "monotone_violations = " << res.monotone_violations << "\n"
            << "worst_violation = " << fmt_g17(res.worst_violation) << "\n";
  for (std::size_t i = 0; i < res.mu.size(); ++i)
    std::cout << "mu = " << fmt_g17(res.mu[i]) << " " << fit_line(res.fits[i])
              << "\n";
}

void run_census_cmd(const GlobalOpts& g) {
  const ExperimentConfig cfg = load_config(g, ExperimentKind::Census);
  start_run(cfg);
  const CensusTable table = run_census(cfg);
  emit_table(cfg, "census", census_csv_table(table, cfg.census_a, cfg.par.mu),
             g.format);
  std::cout << "n_min_bound_holds = " << fmt_g17(table.n_min_bound_holds) << "\n";
}

void run_blocks(const GlobalOpts& g) {
  const ExperimentConfig cfg = load_config(g, ExperimentKind::BlockScan);
  start_run(cfg);
  const BlockScanResult res = run_block_scan(cfg);
  emit_table(cfg, "blocks", blocks_table(res.rows), g.format);
  std::cout << "certified = " << res.certified_roots << "/" << res.roots << "\n";
}

void run_perc(const GlobalOpts& g) {
  const ExperimentConfig cfg = load_config(g, ExperimentKind::PercCheck);
  start_run(cfg);
  const auto rows = run_perc_check(cfg);
  emit_table(cfg, "perc", perc_table(rows), g.format);
  double min_fraction = 1.0, min_density = 1.0;
  for (const auto& row : rows) {
    min_fraction = std::min(min_fraction, row.largest_fraction);
    min_density = std::min(min_density, row.local_density);
  }
  std::cout << "seeds = " << rows.size() << "\n"
            << "min_largest_fraction = " << fmt_g17(min_fraction) << "\n"
            << "min_local_density = " << fmt_g17(min_density) << "\n";
}

void run_ball(const GlobalOpts& g) {
  const ExperimentConfig cfg = load_config(g, ExperimentKind::BallGrowth);
  start_run(cfg);
  const BallGrowthResult res = run_ball_growth(cfg);
  emit_table(cfg, "ball", ball_table(res), g.format);
  emit_table(cfg, "fit", fit_table({{cfg.par.mu, res.fit}}, false), g.format);
  std::cout << "rows = " << res.rows.size() << "\n" << fit_line(res.fit) << "\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"one-dependent first passage percolation on spatial random graphs"};
  app.require_subcommand(1);
  app.fallthrough(true);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "experiment config file");
  app.add_option("--seed", g.seed, "replace the seed list")
      ->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--out", g.out, "output directory");
  app.add_option("--threads", g.threads, "worker threads");
  app.add_option("--format", g.format, "table output format")
      ->check(CLI::IsMember({"csv", "json"}));

  ModelParams phase_par;
  phase_par.mu = 0.8;
  auto* phase = app.add_subcommand("phase", "phase diagram thresholds");
  phase->add_option("--d", phase_par.d, "dimension");
  phase->add_option("--tau", phase_par.tau, "degree power-law exponent");
  phase->add_option("--alpha", phase_par.alpha, "kernel decay (inf allowed)");
  phase->add_option("--beta", phase_par.beta, "cost CDF exponent (inf allowed)");
  phase->add_option("--mu", phase_par.mu, "cost penalty exponent");
  phase->add_option("--c-prime", phase_par.c_prime, "threshold kernel constant")
      ->each([&](const std::string&) { phase_par.c_prime_set = true; });
  phase->callback([&] { run_phase(phase_par, g.format); });

  app.add_subcommand("generate", "sample graphs and write them to disk")
      ->callback([&] { run_generate(g); });
  app.add_subcommand("distance", "cost-distance samples")
      ->callback([&] { run_distance(g, false); });
  app.add_subcommand("scaling", "cost-distance samples plus exponent fit")
      ->callback([&] { run_distance(g, true); });
  app.add_subcommand("mu-sweep", "distance scaling across mu on fixed graphs")
      ->callback([&] { run_sweep(g); });
  app.add_subcommand("census", "long-cheap-edge census against theory")
      ->callback([&] { run_census_cmd(g); });
  app.add_subcommand("blocks", "good-block certification scan")
      ->callback([&] { run_blocks(g); });
  app.add_subcommand("perc", "bond percolation cluster checks")
      ->callback([&] { run_perc(g); });
  app.add_subcommand("ball-growth", "cost-ball growth profile and fit")
      ->callback([&] { run_ball(g); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace fpp
