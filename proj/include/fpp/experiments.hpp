#pragma once
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fpp/census.hpp"
#include "fpp/domain.hpp"
#include "fpp/graph.hpp"
#include "fpp/params.hpp"
#include "fpp/renorm.hpp"

namespace fpp {

enum class ExperimentKind {
  DistanceScaling,
  MuSweep,
  Census,
  BlockScan,
  PercCheck,
  BallGrowth,
};
enum class PairRule { RootToShell, UniformPairsInGiant };
enum class FitModel { LogLog, LogLogLog };

const char* to_string(ExperimentKind k);
const char* to_string(PairRule r);
const char* to_string(FitModel m);

// Flat key=value experiment description; the manifest written next to every
// output re-parses into the same config.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::DistanceScaling;
  bool kind_set = false;

  ModelParams par;
  LDistributionSpec l_spec;
  Domain domain;
  GenMode mode = GenMode::CellAccelerated;
  double intensity = 1.0;
  std::vector<std::uint64_t> seeds{1};

  PairRule pair_rule = PairRule::RootToShell;
  std::vector<double> radii;
  int pair_count = 200;
  FitModel fit = FitModel::LogLog;

  std::vector<double> mu_list;

  std::vector<double> census_N;
  double census_a = 0.5;
  double census_eps = 0.1;
  std::int64_t census_samples = 100000;

  BlockGeometry block_geom;
  double block_eta = 0.8;
  double block_u = 0.0;  // 0: derive a certifying u from each instance
  int block_level = 1;

  double perc_p = 0.5;
  int perc_side = 64;
  double perc_r = 4.0;
  double perc_rho = 2.0;
  double perc_kappa = 1.5;
  double perc_zeta = 0.5;
  int perc_pairs = 100;
  double perc_min_separation = 0.0;

  double ball_radius = kInfinite;
  std::int64_t ball_max_count = -1;

  std::string out_dir = "out";
  int threads = 1;

  void validate() const;       // validate_base plus the kind-specific block
  void validate_base() const;  // model, domain, seeds; enough to generate
};

// key = value lines, full-line # comments. Unknown keys are rejected;
// `seed`, `version` and `started_at` are accepted so manifests re-parse.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);
void write_config(std::ostream& os, const ExperimentConfig& cfg);
void write_manifest(std::ostream& os, const ExperimentConfig& cfg,
                    const std::string& started_at);

// Least-squares exponent fit of y against x on transformed axes:
// LogLog regresses log y on log x, LogLogLog on log log x (needs x > 1).
struct ScalingFit {
  FitModel model = FitModel::LogLog;
  int points = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double conf_half_width = 0.0;  // 1.96 standard errors of the slope
  double r2 = 0.0;
};

ScalingFit estimate_exponent(const std::vector<std::pair<double, double>>& samples,
                             FitModel model);

// Hill tail-index over the k largest values: k / sum log(x_(i) / x_(k+1)).
double hill_tail_exponent(std::vector<double> values, int k);

struct DistanceSample {
  std::uint64_t seed = 0;
  double radius = 0.0;  // requested shell radius; 0 under UniformPairsInGiant
  std::int32_t source = -1;
  std::int32_t target = -1;
  double euclid = 0.0;
  double cost_distance = 0.0;
  std::int64_t hops = 0;
  double deviation = 0.0;
  bool found = false;
};

struct DistanceScalingResult {
  std::vector<DistanceSample> samples;  // (seed, radius) order
  ScalingFit fit;                       // over found samples; NaN if < 3
};

// Per seed: one rooted graph, one Dijkstra/BFS pass, one sample per radius
// (vertex of the largest component nearest to a uniform point of the radius
// shell) or pair_count uniform pairs of the largest component.
DistanceScalingResult run_distance_scaling(const ExperimentConfig& cfg);

struct MuSweepResult {
  std::vector<double> mu;
  std::vector<std::vector<DistanceSample>> samples;  // [mu][sample]
  std::vector<ScalingFit> fits;
  // pointwise d_C coupling violations across consecutive mu (exact check)
  std::int64_t monotone_violations = 0;
  double worst_violation = 0.0;
};

// Same pairs and the same (W, L) draw for every mu: only the cost exponent
// changes between sweep points.
MuSweepResult run_mu_sweep(const ExperimentConfig& cfg);

CensusTable run_census(const ExperimentConfig& cfg);

struct BlockScanRow {
  std::uint64_t seed = 0;
  double u_used = 0.0;
  BlockStatus status;
};

struct BlockScanResult {
  std::vector<BlockScanRow> rows;  // every evaluated block, root last per seed
  int roots = 0;
  int certified_roots = 0;
};

BlockScanResult run_block_scan(const ExperimentConfig& cfg);

struct PercCheckRow {
  std::uint64_t seed = 0;
  int side = 0;
  double p = 0.0;
  double largest_fraction = 0.0;
  double local_density = 0.0;
  int pairs = 0;
  double mean_hop_ratio = 0.0;
  double max_hop_ratio = 0.0;
  double frac_within_kappa = 0.0;
  double mean_deviation_ratio = 0.0;
  double frac_within_zeta = 0.0;
};

std::vector<PercCheckRow> run_perc_check(const ExperimentConfig& cfg);

struct BallGrowthRow {
  std::uint64_t seed = 0;
  double radius = 0.0;
  std::int64_t count = 0;
};

struct BallGrowthResult {
  std::vector<BallGrowthRow> rows;
  ScalingFit fit;  // pooled |B_r| vs r on positive radii
};

BallGrowthResult run_ball_growth(const ExperimentConfig& cfg);

// Typed table rendered to CSV or JSON (an array of records mirroring the CSV
// rows). Cells are pre-formatted; Real cells use fmt_g17, so both encodings
// round-trip doubles exactly. Non-finite Real cells become JSON null.
enum class ColType { Text, Real, Int, Bool };

struct Table {
  std::vector<std::pair<std::string, ColType>> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
  std::string to_csv() const;
  std::string to_json() const;
  std::string render(const std::string& format) const;  // "csv" or "json"
};

Table distance_samples_table(const std::vector<DistanceSample>& samples);
Table mu_samples_table(const MuSweepResult& result);
Table fit_table(const std::vector<std::pair<double, ScalingFit>>& fits,
                bool with_mu);
Table census_csv_table(const CensusTable& table, double a, double mu);
Table blocks_table(const std::vector<BlockScanRow>& rows);
Table perc_table(const std::vector<PercCheckRow>& rows);
Table ball_table(const BallGrowthResult& result);
Table points_table(const SpatialGraph& g);

// Runs fn(0..n-1) on `threads` workers; any exception is rethrown once all
// workers finished. Callers write results into per-index slots, so output
// never depends on scheduling.
void run_tasks(int n, int threads, const std::function<void(int)>& fn);

// Connected components over the adjacency lists: per-vertex representative
// (smallest vertex id of the component) and the representative of a largest
// component (ties to the smaller id). -1 on the empty graph.
std::pair<std::vector<std::int32_t>, std::int32_t> largest_component(
    const SpatialGraph& g);

}  // namespace fpp
