#include "fpp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fpp/cost.hpp"
#include "fpp/rng.hpp"

namespace fpp {

namespace {

// experiment-level randomness purposes under kTagExperiment
constexpr std::uint64_t kSaltShell = 0x5348454cULL;
constexpr std::uint64_t kSaltPairs = 0x50414952ULL;
constexpr std::uint64_t kSaltPerc = 0x50455243ULL;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad_config(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf") return kInfinite;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    bad_config("bad number for '" + key + "': '" + v + "'");
  return x;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    bad_config("bad integer for '" + key + "': '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || v.find('-') != std::string::npos)
    bad_config("bad seed for '" + key + "': '" + v + "'");
  return x;
}

// raw key/value store with consumption tracking
struct KeyStore {
  std::map<std::string, std::string> values;
  std::set<std::string> consumed;

  bool has(const std::string& k) const { return values.count(k) > 0; }

  const std::string* take(const std::string& k) {
    auto it = values.find(k);
    if (it == values.end()) return nullptr;
    consumed.insert(k);
    return &it->second;
  }

  void number(const std::string& k, double& slot) {
    if (const auto* v = take(k)) slot = to_double(k, *v);
  }
  void integer(const std::string& k, int& slot) {
    if (const auto* v = take(k)) slot = static_cast<int>(to_int(k, *v));
  }
  void integer64(const std::string& k, std::int64_t& slot) {
    if (const auto* v = take(k)) slot = to_int(k, *v);
  }
  void numbers(const std::string& k, std::vector<double>& slot) {
    if (const auto* v = take(k)) {
      slot.clear();
      for (const auto& tok : split(*v, ','))
        if (!tok.empty()) slot.push_back(to_double(k, tok));
    }
  }

  template <class T>
  void token(const std::string& k,
             const std::vector<std::pair<const char*, T>>& table, T& slot) {
    const auto* v = take(k);
    if (!v) return;
    for (const auto& [name, value] : table)
      if (*v == name) {
        slot = value;
        return;
      }
    std::string allowed;
    for (const auto& [name, value] : table)
      allowed += allowed.empty() ? name : std::string("|") + name;
    bad_config("bad value for '" + k + "': '" + *v + "' (expected " + allowed + ")");
  }

  void finish() const {
    for (const auto& [k, v] : values)
      if (!consumed.count(k)) bad_config("unknown key '" + k + "'");
  }
};

const std::vector<std::pair<const char*, ExperimentKind>>& kind_tokens() {
  static const std::vector<std::pair<const char*, ExperimentKind>> t = {
      {"distance-scaling", ExperimentKind::DistanceScaling},
      {"mu-sweep", ExperimentKind::MuSweep},
      {"census", ExperimentKind::Census},
      {"block-scan", ExperimentKind::BlockScan},
      {"perc-check", ExperimentKind::PercCheck},
      {"ball-growth", ExperimentKind::BallGrowth},
  };
  return t;
}

template <class T>
const char* token_of(const std::vector<std::pair<const char*, T>>& table, T v) {
  for (const auto& [name, value] : table)
    if (value == v) return name;
  return "?";
}

const std::vector<std::pair<const char*, PairRule>>& pair_tokens() {
  static const std::vector<std::pair<const char*, PairRule>> t = {
      {"root-to-shell", PairRule::RootToShell},
      {"uniform-pairs", PairRule::UniformPairsInGiant},
  };
  return t;
}

const std::vector<std::pair<const char*, FitModel>>& fit_tokens() {
  static const std::vector<std::pair<const char*, FitModel>> t = {
      {"loglog", FitModel::LogLog},
      {"logloglog", FitModel::LogLogLog},
  };
  return t;
}

const std::vector<std::pair<const char*, LKind>>& lkind_tokens() {
  static const std::vector<std::pair<const char*, LKind>> t = {
      {"power", LKind::PowerNearZero},
      {"constant", LKind::Constant},
      {"cdf", LKind::ExplicitCDF},
  };
  return t;
}

const std::vector<std::pair<const char*, DomainKind>>& domain_tokens() {
  static const std::vector<std::pair<const char*, DomainKind>> t = {
      {"lattice", DomainKind::LatticeBox},
      {"continuum", DomainKind::ContinuumBox},
  };
  return t;
}

const std::vector<std::pair<const char*, GenMode>>& mode_tokens() {
  static const std::vector<std::pair<const char*, GenMode>> t = {
      {"cell", GenMode::CellAccelerated},
      {"naive", GenMode::Naive},
  };
  return t;
}

const std::vector<std::pair<const char*, BlockSchedule>>& schedule_tokens() {
  static const std::vector<std::pair<const char*, BlockSchedule>> t = {
      {"geometric", BlockSchedule::Geometric},
      {"factorial", BlockSchedule::Factorial},
  };
  return t;
}

std::string join_numbers(const std::vector<double>& xs) {
  std::string out;
  for (double x : xs) {
    if (!out.empty()) out += ",";
    out += fmt_g17(x);
  }
  return out;
}

std::string join_seeds(const std::vector<std::uint64_t>& xs) {
  std::string out;
  for (std::uint64_t x : xs) {
    if (!out.empty()) out += ",";
    out += std::to_string(x);
  }
  return out;
}

}  // namespace

const char* to_string(ExperimentKind k) { return token_of(kind_tokens(), k); }
const char* to_string(PairRule r) { return token_of(pair_tokens(), r); }
const char* to_string(FitModel m) { return token_of(fit_tokens(), m); }

ExperimentConfig parse_config(std::istream& is) {
  KeyStore store;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      bad_config("line " + std::to_string(lineno) + " is not key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) bad_config("empty key on line " + std::to_string(lineno));
    if (!store.values.emplace(key, value).second)
      bad_config("duplicate key '" + key + "'");
  }

  ExperimentConfig cfg;
  // manifest metadata: harmless to re-parse
  store.take("version");
  store.take("started_at");

  if (store.has("kind")) cfg.kind_set = true;
  store.token("kind", kind_tokens(), cfg.kind);

  store.integer("d", cfg.par.d);
  cfg.domain.d = cfg.par.d;
  store.number("tau", cfg.par.tau);
  store.number("alpha", cfg.par.alpha);
  store.number("mu", cfg.par.mu);
  store.number("beta", cfg.par.beta);
  store.number("c_lower", cfg.par.c_lower);
  store.number("c_upper", cfg.par.c_upper);
  store.number("c1", cfg.par.c1);
  store.number("c2", cfg.par.c2);
  store.number("t0", cfg.par.t0);
  if (store.has("c_prime")) {
    cfg.par.c_prime_set = true;
    store.number("c_prime", cfg.par.c_prime);
  }

  store.token("l_kind", lkind_tokens(), cfg.l_spec.kind);
  store.number("l_beta", cfg.l_spec.beta);
  store.number("l_cap", cfg.l_spec.t0_cap);
  if (const auto* v = store.take("l_knots")) {
    cfg.l_spec.cdf_knots.clear();
    for (const auto& part : split(*v, ',')) {
      const auto colon = part.find(':');
      if (colon == std::string::npos)
        bad_config("l_knots entries must look like t:F");
      cfg.l_spec.cdf_knots.emplace_back(
          to_double("l_knots", trim(part.substr(0, colon))),
          to_double("l_knots", trim(part.substr(colon + 1))));
    }
  }

  store.token("domain", domain_tokens(), cfg.domain.kind);
  store.number("half_side", cfg.domain.half_side);
  if (const auto* v = store.take("torus")) {
    if (*v != "0" && *v != "1") bad_config("torus must be 0 or 1");
    cfg.domain.torus_wrap = *v == "1";
  }
  store.number("intensity", cfg.intensity);
  store.token("gen_mode", mode_tokens(), cfg.mode);

  if (const auto* v = store.take("seeds")) {
    cfg.seeds.clear();
    for (const auto& tok : split(*v, ','))
      if (!tok.empty()) cfg.seeds.push_back(to_u64("seeds", tok));
    store.take("seed");  // superseded by the explicit list
  } else if (const auto* s = store.take("seed")) {
    cfg.seeds = {to_u64("seed", *s)};
  }

  store.token("pair_rule", pair_tokens(), cfg.pair_rule);
  store.numbers("radii", cfg.radii);
  store.integer("pair_count", cfg.pair_count);
  store.token("fit", fit_tokens(), cfg.fit);
  store.numbers("mu_list", cfg.mu_list);

  store.numbers("census_N", cfg.census_N);
  store.number("census_a", cfg.census_a);
  store.number("census_eps", cfg.census_eps);
  store.integer64("census_samples", cfg.census_samples);

  store.number("block_A1", cfg.block_geom.A1);
  store.token("block_schedule", schedule_tokens(), cfg.block_geom.schedule);
  store.number("block_gamma", cfg.block_geom.gamma);
  store.integer("block_k0", cfg.block_geom.k0);
  store.number("block_eta", cfg.block_eta);
  store.number("block_u", cfg.block_u);
  store.integer("block_level", cfg.block_level);

  store.number("perc_p", cfg.perc_p);
  store.integer("perc_side", cfg.perc_side);
  store.number("perc_r", cfg.perc_r);
  store.number("perc_rho", cfg.perc_rho);
  store.number("perc_kappa", cfg.perc_kappa);
  store.number("perc_zeta", cfg.perc_zeta);
  store.integer("perc_pairs", cfg.perc_pairs);
  store.number("perc_min_separation", cfg.perc_min_separation);

  store.number("ball_radius", cfg.ball_radius);
  store.integer64("ball_max_count", cfg.ball_max_count);

  if (const auto* v = store.take("out")) cfg.out_dir = *v;
  store.integer("threads", cfg.threads);

  store.finish();
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open '" + path + "'");
  return parse_config(is);
}

void write_config(std::ostream& os, const ExperimentConfig& cfg) {
  os << "kind = " << to_string(cfg.kind) << "\n";
  os << "d = " << cfg.par.d << "\n";
  os << "tau = " << fmt_g17(cfg.par.tau) << "\n";
  os << "alpha = " << (is_infinite(cfg.par.alpha) ? "inf" : fmt_g17(cfg.par.alpha))
     << "\n";
  os << "mu = " << fmt_g17(cfg.par.mu) << "\n";
  os << "beta = " << (is_infinite(cfg.par.beta) ? "inf" : fmt_g17(cfg.par.beta))
     << "\n";
  os << "c_lower = " << fmt_g17(cfg.par.c_lower) << "\n";
  os << "c_upper = " << fmt_g17(cfg.par.c_upper) << "\n";
  os << "c1 = " << fmt_g17(cfg.par.c1) << "\n";
  os << "c2 = " << fmt_g17(cfg.par.c2) << "\n";
  os << "t0 = " << fmt_g17(cfg.par.t0) << "\n";
  if (cfg.par.c_prime_set) os << "c_prime = " << fmt_g17(cfg.par.c_prime) << "\n";

  os << "l_kind = " << token_of(lkind_tokens(), cfg.l_spec.kind) << "\n";
  os << "l_beta = "
     << (is_infinite(cfg.l_spec.beta) ? "inf" : fmt_g17(cfg.l_spec.beta)) << "\n";
  os << "l_cap = " << fmt_g17(cfg.l_spec.t0_cap) << "\n";
  if (!cfg.l_spec.cdf_knots.empty()) {
    os << "l_knots = ";
    bool first = true;
    for (const auto& [t, f] : cfg.l_spec.cdf_knots) {
      if (!first) os << ",";
      os << fmt_g17(t) << ":" << fmt_g17(f);
      first = false;
    }
    os << "\n";
  }

  os << "domain = " << token_of(domain_tokens(), cfg.domain.kind) << "\n";
  os << "half_side = " << fmt_g17(cfg.domain.half_side) << "\n";
  os << "torus = " << (cfg.domain.torus_wrap ? 1 : 0) << "\n";
  os << "intensity = " << fmt_g17(cfg.intensity) << "\n";
  os << "gen_mode = " << token_of(mode_tokens(), cfg.mode) << "\n";
  os << "seeds = " << join_seeds(cfg.seeds) << "\n";

  switch (cfg.kind) {
    case ExperimentKind::DistanceScaling:
    case ExperimentKind::MuSweep:
      os << "pair_rule = " << to_string(cfg.pair_rule) << "\n";
      os << "radii = " << join_numbers(cfg.radii) << "\n";
      os << "pair_count = " << cfg.pair_count << "\n";
      os << "fit = " << to_string(cfg.fit) << "\n";
      if (cfg.kind == ExperimentKind::MuSweep)
        os << "mu_list = " << join_numbers(cfg.mu_list) << "\n";
      break;
    case ExperimentKind::Census:
      os << "census_N = " << join_numbers(cfg.census_N) << "\n";
      os << "census_a = " << fmt_g17(cfg.census_a) << "\n";
      os << "census_eps = " << fmt_g17(cfg.census_eps) << "\n";
      os << "census_samples = " << cfg.census_samples << "\n";
      break;
    case ExperimentKind::BlockScan:
      os << "block_A1 = " << fmt_g17(cfg.block_geom.A1) << "\n";
      os << "block_schedule = " << token_of(schedule_tokens(), cfg.block_geom.schedule)
         << "\n";
      os << "block_gamma = " << fmt_g17(cfg.block_geom.gamma) << "\n";
      os << "block_k0 = " << cfg.block_geom.k0 << "\n";
      os << "block_eta = " << fmt_g17(cfg.block_eta) << "\n";
      os << "block_u = " << fmt_g17(cfg.block_u) << "\n";
      os << "block_level = " << cfg.block_level << "\n";
      break;
    case ExperimentKind::PercCheck:
      os << "perc_p = " << fmt_g17(cfg.perc_p) << "\n";
      os << "perc_side = " << cfg.perc_side << "\n";
      os << "perc_r = " << fmt_g17(cfg.perc_r) << "\n";
      os << "perc_rho = " << fmt_g17(cfg.perc_rho) << "\n";
      os << "perc_kappa = " << fmt_g17(cfg.perc_kappa) << "\n";
      os << "perc_zeta = " << fmt_g17(cfg.perc_zeta) << "\n";
      os << "perc_pairs = " << cfg.perc_pairs << "\n";
      os << "perc_min_separation = " << fmt_g17(cfg.perc_min_separation) << "\n";
      break;
    case ExperimentKind::BallGrowth:
      os << "ball_radius = "
         << (is_infinite(cfg.ball_radius) ? "inf" : fmt_g17(cfg.ball_radius)) << "\n";
      os << "ball_max_count = " << cfg.ball_max_count << "\n";
      break;
  }
}

void write_manifest(std::ostream& os, const ExperimentConfig& cfg,
                    const std::string& started_at) {
  os << "version = " << kVersion << "\n";
  os << "started_at = " << started_at << "\n";
  os << "seed = " << (cfg.seeds.empty() ? 0 : cfg.seeds.front()) << "\n";
  write_config(os, cfg);
}

void ExperimentConfig::validate_base() const {
  require_valid(par);
  l_spec.validate();
  if (domain.d != par.d) bad_config("domain dimension differs from d");
  if (!(domain.half_side > 0)) bad_config("half_side must be positive");
  if (!(intensity > 0)) bad_config("intensity must be positive");
  if (seeds.empty()) bad_config("at least one seed required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    bad_config("seeds must be distinct");
  if (threads < 1) bad_config("threads must be >= 1");
}

void ExperimentConfig::validate() const {
  validate_base();
  switch (kind) {
    case ExperimentKind::DistanceScaling:
    case ExperimentKind::MuSweep:
      if (pair_rule == PairRule::RootToShell) {
        if (radii.empty()) bad_config("radii required for root-to-shell sampling");
        for (std::size_t i = 0; i < radii.size(); ++i) {
          if (!(radii[i] > 0)) bad_config("radii must be positive");
          if (i > 0 && !(radii[i] > radii[i - 1]))
            bad_config("radii must be strictly increasing");
        }
      } else if (pair_count < 1) {
        bad_config("pair_count must be >= 1");
      }
      if (kind == ExperimentKind::MuSweep) {
        if (mu_list.empty()) bad_config("mu_list required for a mu sweep");
        for (std::size_t i = 0; i < mu_list.size(); ++i) {
          if (mu_list[i] < 0) bad_config("mu_list entries must be >= 0");
          if (i > 0 && !(mu_list[i] > mu_list[i - 1]))
            bad_config("mu_list must be strictly increasing");
        }
      }
      break;
    case ExperimentKind::Census: {
      if (census_N.empty()) bad_config("census_N required");
      for (std::size_t i = 1; i < census_N.size(); ++i)
        if (!(census_N[i] > census_N[i - 1]))
          bad_config("census_N must be strictly increasing");
      if (census_samples < 1) bad_config("census_samples must be >= 1");
      CensusQuery probe{domain.side(), census_N.front(), census_a, census_eps};
      probe.validate();
      break;
    }
    case ExperimentKind::BlockScan:
      block_geom.validate();
      if (!(block_eta > 0 && block_eta <= 1)) bad_config("block_eta must be in (0,1]");
      if (block_u < 0 || block_u >= 1) bad_config("block_u must be in [0,1)");
      if (block_level < block_geom.k0) bad_config("block_level below block_k0");
      break;
    case ExperimentKind::PercCheck:
      if (!(perc_p >= 0 && perc_p <= 1)) bad_config("perc_p must be in [0,1]");
      if (perc_side < 2) bad_config("perc_side must be >= 2");
      if (perc_r < 0 || perc_rho < 0) bad_config("perc radii must be >= 0");
      if (perc_pairs < 0) bad_config("perc_pairs must be >= 0");
      if (perc_min_separation < 0) bad_config("perc_min_separation must be >= 0");
      break;
    case ExperimentKind::BallGrowth:
      if (!(ball_radius > 0)) bad_config("ball_radius must be positive");
      break;
  }
}

// ---------------- estimators ----------------

ScalingFit estimate_exponent(const std::vector<std::pair<double, double>>& samples,
                             FitModel model) {
  if (samples.size() < 3)
    throw std::invalid_argument("estimate_exponent: need at least 3 samples");
  std::vector<double> xs, ys;
  xs.reserve(samples.size());
  ys.reserve(samples.size());
  for (const auto& [x, y] : samples) {
    if (!(x > 0) || !(y > 0))
      throw std::invalid_argument("estimate_exponent: coordinates must be positive");
    double tx = std::log(x);
    if (model == FitModel::LogLogLog) {
      if (!(x > 1))
        throw std::invalid_argument("estimate_exponent: log log needs x > 1");
      tx = std::log(tx);
    }
    xs.push_back(tx);
    ys.push_back(std::log(y));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0)
    throw std::invalid_argument("estimate_exponent: degenerate abscissae");

  ScalingFit fit;
  fit.model = model;
  fit.points = static_cast<int>(xs.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0, sst = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ssr += r * r;
    sst += (ys[i] - my) * (ys[i] - my);
  }
  fit.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
  const double var = ssr / (n - 2.0) / sxx;
  fit.conf_half_width = 1.96 * std::sqrt(std::max(var, 0.0));
  return fit;
}

double hill_tail_exponent(std::vector<double> values, int k) {
  if (k < 1) throw std::invalid_argument("hill: k must be >= 1");
  if (static_cast<std::size_t>(k) + 1 > values.size())
    throw std::invalid_argument("hill: k + 1 exceeds the sample size");
  std::sort(values.begin(), values.end(), std::greater<>());
  const double pivot = values[static_cast<std::size_t>(k)];
  if (!(pivot > 0)) throw std::invalid_argument("hill: pivot must be positive");
  double acc = 0.0;
  for (int i = 0; i < k; ++i) acc += std::log(values[static_cast<std::size_t>(i)] / pivot);
  return acc > 0 ? static_cast<double>(k) / acc : kInfinite;
}

// ---------------- shared machinery ----------------

void run_tasks(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::pair<std::vector<std::int32_t>, std::int32_t> largest_component(
    const SpatialGraph& g) {
  const int n = g.n();
  std::vector<std::int32_t> comp(n, -1);
  std::int32_t best = -1;
  std::int64_t best_size = 0;
  std::vector<std::int32_t> stack;
  for (std::int32_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::int64_t size = 0;
    comp[s] = s;
    stack.push_back(s);
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      ++size;
      for (const auto& nb : g.adj[v])
        if (comp[nb.first] < 0) {
          comp[nb.first] = s;
          stack.push_back(nb.first);
        }
    }
    if (size > best_size) {
      best_size = size;
      best = s;
    }
  }
  return {std::move(comp), best};
}

namespace {

// uniform direction on the unit sphere via normalized Gaussians
Point sphere_direction(Rng& rng, int d) {
  Point dir(d);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double u1 = rng.uniform_pos();
      const double u2 = rng.uniform();
      dir[i] = std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
      norm_sq += dir[i] * dir[i];
    }
  } while (!(norm_sq > 0.0));
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (int i = 0; i < d; ++i) dir[i] *= inv;
  return dir;
}

double path_deviation(const SpatialGraph& g, const std::vector<std::int32_t>& path) {
  if (path.empty()) return 0.0;
  std::vector<Point> pts;
  pts.reserve(path.size());
  for (const auto v : path) pts.push_back(g.position(v));
  return deviation_endpoints(pts);
}

// per-seed sampling state reused across the mu sweep
struct SeedSamples {
  std::vector<DistanceSample> samples;
};

GenerateOptions make_options(const ExperimentConfig& cfg) {
  GenerateOptions opt;
  opt.mode = cfg.mode;
  opt.root = RootConditioning::RootAtOrigin;
  opt.intensity = cfg.intensity;
  return opt;
}

struct PairTarget {
  std::int32_t source = -1;
  std::int32_t target = -1;
  double radius = 0.0;  // requested shell radius; 0 for uniform pairs
};

// target list for one seed: RootToShell pairs the root with the largest-
// component vertex nearest a uniform point of each radius shell;
// UniformPairsInGiant draws pair_count distinct uniform giant pairs
std::vector<PairTarget> select_targets(const ExperimentConfig& cfg,
                                       const SpatialGraph& g, std::uint64_t seed,
                                       std::int32_t root,
                                       const std::vector<std::int32_t>& comp,
                                       std::int32_t giant) {
  const int d = g.dim();
  std::vector<PairTarget> targets;
  if (cfg.pair_rule == PairRule::RootToShell) {
    for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
      Rng rng(derive_key(seed, kTagExperiment, kSaltShell, ri));
      const Point dir = sphere_direction(rng, d);
      std::int32_t pick = -1;
      double best = kInfinite;
      for (std::int32_t v = 0; v < g.n(); ++v) {
        if (v == root || comp[v] != giant) continue;
        double sq = 0.0;
        for (int i = 0; i < d; ++i) {
          const double diff = g.pos[static_cast<std::size_t>(v) * d + i] -
                              cfg.radii[ri] * dir[i];
          sq += diff * diff;
        }
        if (sq < best) {
          best = sq;
          pick = v;
        }
      }
      targets.push_back({root, pick, cfg.radii[ri]});
    }
  } else {
    std::vector<std::int32_t> giants;
    for (std::int32_t v = 0; v < g.n(); ++v)
      if (comp[v] == giant) giants.push_back(v);
    if (giants.size() < 2) return targets;
    Rng rng(derive_key(seed, kTagExperiment, kSaltPairs));
    std::int64_t attempts = 100LL * std::max(cfg.pair_count, 1);
    while (static_cast<int>(targets.size()) < cfg.pair_count && attempts-- > 0) {
      const auto a = giants[rng.below(giants.size())];
      const auto b = giants[rng.below(giants.size())];
      if (a != b) targets.push_back({a, b, 0.0});
    }
  }
  return targets;
}

SeedSamples distance_samples_for_seed(const ExperimentConfig& cfg,
                                      const SpatialGraph& g, std::uint64_t seed) {
  const std::int32_t root = g.roots.empty() ? 0 : g.roots.front();
  const auto [comp, giant] = largest_component(g);
  const auto targets = select_targets(cfg, g, seed, root, comp, giant);

  // one Dijkstra + BFS per distinct source; shell sampling has exactly one
  std::vector<std::size_t> order(targets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return targets[a].source < targets[b].source;
  });

  SeedSamples out;
  out.samples.resize(targets.size());
  std::size_t i = 0;
  while (i < order.size()) {
    const std::int32_t src = targets[order[i]].source;
    std::size_t j = i;
    while (j < order.size() && targets[order[j]].source == src) ++j;
    const auto sp = dijkstra(g, src);
    const auto hops = hop_distance(g, src);
    for (; i < j; ++i) {
      const PairTarget& pt = targets[order[i]];
      DistanceSample s;
      s.seed = seed;
      s.radius = pt.radius;
      s.source = pt.source;
      s.target = pt.target;
      if (pt.target >= 0) {
        s.euclid = std::sqrt(g.sq_dist_between(pt.source, pt.target));
        s.cost_distance = sp.dist[pt.target];
        s.hops = hops[pt.target];
        s.found = std::isfinite(s.cost_distance);
        if (s.found) s.deviation = path_deviation(g, path_to(sp, pt.target));
      } else {
        s.cost_distance = kUnreachable;
        s.hops = kUnreachableHops;
      }
      out.samples[order[i]] = s;
    }
  }
  return out;
}

ScalingFit fit_or_nan(const std::vector<DistanceSample>& samples, FitModel model) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : samples) {
    if (!s.found || !(s.euclid > 0) || !(s.cost_distance > 0)) continue;
    if (model == FitModel::LogLogLog && !(s.euclid > 1)) continue;
    pts.emplace_back(s.euclid, s.cost_distance);
  }
  ScalingFit fit;
  fit.model = model;
  fit.points = static_cast<int>(pts.size());
  if (pts.size() < 3) {
    fit.slope = fit.intercept = fit.conf_half_width = fit.r2 =
        std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  return estimate_exponent(pts, model);
}

}  // namespace

DistanceScalingResult run_distance_scaling(const ExperimentConfig& cfg) {
  cfg.validate();
  const GenerateOptions opt = make_options(cfg);
  std::vector<SeedSamples> per_seed(cfg.seeds.size());
  run_tasks(static_cast<int>(cfg.seeds.size()), cfg.threads, [&](int i) {
    const std::uint64_t seed = cfg.seeds[static_cast<std::size_t>(i)];
    const SpatialGraph g =
        generate_graph(cfg.domain, cfg.par, cfg.l_spec, seed, opt);
    per_seed[static_cast<std::size_t>(i)] = distance_samples_for_seed(cfg, g, seed);
  });

  DistanceScalingResult out;
  for (const auto& s : per_seed)
    out.samples.insert(out.samples.end(), s.samples.begin(), s.samples.end());
  out.fit = fit_or_nan(out.samples, cfg.fit);
  return out;
}

MuSweepResult run_mu_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const GenerateOptions opt = make_options(cfg);
  const std::size_t nmu = cfg.mu_list.size();

  struct SeedSweep {
    std::vector<std::vector<DistanceSample>> per_mu;
    std::int64_t violations = 0;
    double worst = 0.0;
  };
  std::vector<SeedSweep> sweeps(cfg.seeds.size());

  run_tasks(static_cast<int>(cfg.seeds.size()), cfg.threads, [&](int i) {
    const std::uint64_t seed = cfg.seeds[static_cast<std::size_t>(i)];
    ModelParams par = cfg.par;
    par.mu = cfg.mu_list.front();
    SpatialGraph g = generate_graph(cfg.domain, par, cfg.l_spec, seed, opt);
    SeedSweep& sweep = sweeps[static_cast<std::size_t>(i)];
    sweep.per_mu.resize(nmu);
    for (std::size_t mi = 0; mi < nmu; ++mi) {
      recompute_costs(g, cfg.mu_list[mi]);
      sweep.per_mu[mi] = distance_samples_for_seed(cfg, g, seed).samples;
      if (mi > 0) {
        const auto& lo = sweep.per_mu[mi - 1];
        const auto& hi = sweep.per_mu[mi];
        for (std::size_t k = 0; k < hi.size(); ++k) {
          if (!lo[k].found || !hi[k].found) continue;
          if (hi[k].cost_distance < lo[k].cost_distance) {
            ++sweep.violations;
            sweep.worst = std::max(
                sweep.worst, lo[k].cost_distance - hi[k].cost_distance);
          }
        }
      }
    }
  });

  MuSweepResult out;
  out.mu = cfg.mu_list;
  out.samples.resize(nmu);
  for (const auto& sweep : sweeps) {
    for (std::size_t mi = 0; mi < nmu; ++mi)
      out.samples[mi].insert(out.samples[mi].end(), sweep.per_mu[mi].begin(),
                             sweep.per_mu[mi].end());
    out.monotone_violations += sweep.violations;
    out.worst_violation = std::max(out.worst_violation, sweep.worst);
  }
  for (std::size_t mi = 0; mi < nmu; ++mi)
    out.fits.push_back(fit_or_nan(out.samples[mi], cfg.fit));
  return out;
}

CensusTable run_census(const ExperimentConfig& cfg) {
  cfg.validate();
  return census_experiment(cfg.par, cfg.l_spec, cfg.domain.side(), cfg.census_N,
                           cfg.census_a, cfg.census_eps,
                           static_cast<int>(cfg.seeds.size()), cfg.seeds.front(),
                           cfg.census_samples, cfg.intensity);
}

BlockScanResult run_block_scan(const ExperimentConfig& cfg) {
  cfg.validate();
  GenerateOptions opt = make_options(cfg);
  opt.root = RootConditioning::None;

  struct SeedScan {
    std::vector<BlockScanRow> rows;
    bool certified = false;
  };
  std::vector<SeedScan> scans(cfg.seeds.size());

  run_tasks(static_cast<int>(cfg.seeds.size()), cfg.threads, [&](int i) {
    const std::uint64_t seed = cfg.seeds[static_cast<std::size_t>(i)];
    const SpatialGraph g =
        generate_graph(cfg.domain, cfg.par, cfg.l_spec, seed, opt);
    double u = cfg.block_u;
    if (u == 0.0)
      u = suggest_block_u(g, cfg.block_geom, cfg.block_eta, cfg.block_level);
    if (!(u > 0.0))
      throw std::runtime_error("block scan: instance admits no certifying u");
    BlockChecker checker(g, cfg.block_geom, cfg.block_eta, u);
    const BlockId root = block_of(Point(cfg.par.d, 0.0), cfg.block_geom,
                                  cfg.block_level, std::vector<int>(cfg.par.d, 0));
    const BlockStatus& root_status = checker.check(root);
    SeedScan& scan = scans[static_cast<std::size_t>(i)];
    scan.certified = root_status.good;
    for (const auto& st : checker.all_statuses())
      scan.rows.push_back(BlockScanRow{seed, u, st});
  });

  BlockScanResult out;
  out.roots = static_cast<int>(cfg.seeds.size());
  for (const auto& scan : scans) {
    out.certified_roots += scan.certified ? 1 : 0;
    out.rows.insert(out.rows.end(), scan.rows.begin(), scan.rows.end());
  }
  return out;
}

std::vector<PercCheckRow> run_perc_check(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<PercCheckRow> rows(cfg.seeds.size());
  run_tasks(static_cast<int>(cfg.seeds.size()), cfg.threads, [&](int i) {
    const std::uint64_t seed = cfg.seeds[static_cast<std::size_t>(i)];
    const PercConfig pc =
        bond_percolation(cfg.par.d, cfg.perc_side, cfg.perc_p, seed);
    PercCheckRow row;
    row.seed = seed;
    row.side = cfg.perc_side;
    row.p = cfg.perc_p;
    row.largest_fraction =
        static_cast<double>(pc.largest_size) / static_cast<double>(pc.n_sites());
    row.local_density = perc_local_density(pc, cfg.perc_r, cfg.perc_rho);

    std::vector<std::int64_t> giant;
    for (std::int64_t s = 0; s < pc.n_sites(); ++s)
      if (pc.label[s] == pc.largest_label) giant.push_back(s);
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    if (giant.size() >= 2) {
      Rng rng(derive_key(seed, kTagExperiment, kSaltPerc));
      const double min_sq = cfg.perc_min_separation * cfg.perc_min_separation;
      int attempts = 0;
      const int limit = 1000 * std::max(cfg.perc_pairs, 1);
      while (static_cast<int>(pairs.size()) < cfg.perc_pairs &&
             attempts++ < limit) {
        const auto a = giant[rng.below(giant.size())];
        const auto b = giant[rng.below(giant.size())];
        if (a == b) continue;
        const auto ca = pc.site_coords(a), cb = pc.site_coords(b);
        double sq = 0.0;
        for (int k = 0; k < cfg.par.d; ++k) {
          const double diff = ca[k] - cb[k];
          sq += diff * diff;
        }
        if (sq < min_sq) continue;
        pairs.emplace_back(a, b);
      }
    }
    row.pairs = static_cast<int>(pairs.size());
    if (!pairs.empty()) {
      const auto stats = perc_linear_paths(pc, pairs, cfg.perc_kappa, cfg.perc_zeta);
      double hop_sum = 0, dev_sum = 0;
      int in_kappa = 0, in_zeta = 0;
      for (const auto& st : stats) {
        hop_sum += st.hop_ratio;
        dev_sum += st.deviation_ratio;
        row.max_hop_ratio = std::max(row.max_hop_ratio, st.hop_ratio);
        in_kappa += st.within_kappa ? 1 : 0;
        in_zeta += st.within_zeta ? 1 : 0;
      }
      const double np = static_cast<double>(stats.size());
      row.mean_hop_ratio = hop_sum / np;
      row.mean_deviation_ratio = dev_sum / np;
      row.frac_within_kappa = in_kappa / np;
      row.frac_within_zeta = in_zeta / np;
    }
    rows[static_cast<std::size_t>(i)] = row;
  });
  return rows;
}

BallGrowthResult run_ball_growth(const ExperimentConfig& cfg) {
  cfg.validate();
  const GenerateOptions opt = make_options(cfg);
  std::vector<std::vector<BallGrowthRow>> per_seed(cfg.seeds.size());
  run_tasks(static_cast<int>(cfg.seeds.size()), cfg.threads, [&](int i) {
    const std::uint64_t seed = cfg.seeds[static_cast<std::size_t>(i)];
    const SpatialGraph g =
        generate_graph(cfg.domain, cfg.par, cfg.l_spec, seed, opt);
    const std::int32_t root = g.roots.empty() ? 0 : g.roots.front();
    const auto profile =
        ball_growth_profile(g, root, cfg.ball_radius, cfg.ball_max_count);
    auto& rows = per_seed[static_cast<std::size_t>(i)];
    rows.reserve(profile.size());
    for (const auto& pt : profile)
      rows.push_back(BallGrowthRow{seed, pt.radius, pt.count});
  });

  BallGrowthResult out;
  std::vector<std::pair<double, double>> pts;
  for (const auto& rows : per_seed)
    for (const auto& row : rows) {
      out.rows.push_back(row);
      if (row.radius > 0 && row.count > 0)
        pts.emplace_back(row.radius, static_cast<double>(row.count));
    }
  out.fit.model = FitModel::LogLog;
  out.fit.points = static_cast<int>(pts.size());
  if (pts.size() >= 3) {
    out.fit = estimate_exponent(pts, FitModel::LogLog);
  } else {
    out.fit.slope = out.fit.intercept = out.fit.conf_half_width = out.fit.r2 =
        std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

// ---------------- tables ----------------

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

bool finite_number_token(const std::string& cell) {
  return cell != "inf" && cell != "-inf" && cell != "nan" && cell != "-nan";
}

std::string bool_cell(bool v) { return v ? "true" : "false"; }

}  // namespace

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns.size())
    throw std::invalid_argument("table row width mismatch");
  rows.push_back(std::move(cells));
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out += ",";
    out += columns[c].first;
  }
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ",";
      out += row[c];
    }
    out += "\n";
  }
  return out;
}

std::string Table::to_json() const {
  std::string out = "[";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += r ? ",\n " : "\n ";
    out += "{";
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ", ";
      out += "\"" + json_escape(columns[c].first) + "\": ";
      const std::string& cell = rows[r][c];
      switch (columns[c].second) {
        case ColType::Text: out += "\"" + json_escape(cell) + "\""; break;
        case ColType::Bool: out += cell; break;
        case ColType::Int:
        case ColType::Real:
          out += finite_number_token(cell) ? cell : "null";
          break;
      }
    }
    out += "}";
  }
  out += rows.empty() ? "]\n" : "\n]\n";
  return out;
}

std::string Table::render(const std::string& format) const {
  if (format == "csv") return to_csv();
  if (format == "json") return to_json();
  throw std::invalid_argument("unknown output format '" + format + "'");
}

namespace {

std::vector<std::string> sample_cells(const DistanceSample& s) {
  return {std::to_string(s.seed),      fmt_g17(s.radius),
          std::to_string(s.source),    std::to_string(s.target),
          fmt_g17(s.euclid),           fmt_g17(s.cost_distance),
          std::to_string(s.hops),      fmt_g17(s.deviation),
          bool_cell(s.found)};
}

const std::vector<std::pair<std::string, ColType>>& sample_columns() {
  static const std::vector<std::pair<std::string, ColType>> cols = {
      {"seed", ColType::Int},          {"radius", ColType::Real},
      {"source", ColType::Int},        {"target", ColType::Int},
      {"euclid", ColType::Real},       {"cost_distance", ColType::Real},
      {"hops", ColType::Int},          {"deviation", ColType::Real},
      {"found", ColType::Bool}};
  return cols;
}

}  // namespace

Table distance_samples_table(const std::vector<DistanceSample>& samples) {
  Table t;
  t.columns = sample_columns();
  for (const auto& s : samples) t.add_row(sample_cells(s));
  return t;
}

Table mu_samples_table(const MuSweepResult& result) {
  Table t;
  t.columns.emplace_back("mu", ColType::Real);
  for (const auto& col : sample_columns()) t.columns.push_back(col);
  for (std::size_t mi = 0; mi < result.mu.size(); ++mi)
    for (const auto& s : result.samples[mi]) {
      auto cells = sample_cells(s);
      cells.insert(cells.begin(), fmt_g17(result.mu[mi]));
      t.add_row(std::move(cells));
    }
  return t;
}

Table fit_table(const std::vector<std::pair<double, ScalingFit>>& fits,
                bool with_mu) {
  Table t;
  if (with_mu) t.columns.emplace_back("mu", ColType::Real);
  t.columns.emplace_back("model", ColType::Text);
  t.columns.emplace_back("points", ColType::Int);
  t.columns.emplace_back("slope", ColType::Real);
  t.columns.emplace_back("intercept", ColType::Real);
  t.columns.emplace_back("conf_half_width", ColType::Real);
  t.columns.emplace_back("r2", ColType::Real);
  for (const auto& [mu, fit] : fits) {
    std::vector<std::string> cells;
    if (with_mu) cells.push_back(fmt_g17(mu));
    cells.push_back(to_string(fit.model));
    cells.push_back(std::to_string(fit.points));
    cells.push_back(fmt_g17(fit.slope));
    cells.push_back(fmt_g17(fit.intercept));
    cells.push_back(fmt_g17(fit.conf_half_width));
    cells.push_back(fmt_g17(fit.r2));
    t.add_row(std::move(cells));
  }
  return t;
}

Table census_csv_table(const CensusTable& table, double a, double mu) {
  Table t;
  t.columns = {{"N", ColType::Real},
               {"a", ColType::Real},
               {"empirical_mean", ColType::Real},
               {"empirical_stderr", ColType::Real},
               {"mc_theory", ColType::Real},
               {"mc_stderr", ColType::Real},
               {"bound_case", ColType::Text},
               {"bound_value", ColType::Real}};
  const char* bound_case = a >= mu ? "a>=mu" : "a<mu";
  for (const auto& row : table.rows)
    t.add_row({fmt_g17(row.N), fmt_g17(a), fmt_g17(row.empirical_mean),
               fmt_g17(row.empirical_stderr), fmt_g17(row.theory.mc_expectation),
               fmt_g17(row.theory.mc_stderr), bound_case,
               fmt_g17(row.theory.closed_form_bound)});
  return t;
}

Table blocks_table(const std::vector<BlockScanRow>& rows) {
  Table t;
  t.columns = {{"seed", ColType::Int},  {"level", ColType::Int},
               {"block", ColType::Text}, {"good", ColType::Bool},
               {"failure", ColType::Text}, {"u", ColType::Real}};
  for (const auto& row : rows) {
    std::string origin;
    for (const auto u : row.status.id.origin_units) {
      if (!origin.empty()) origin += ":";
      origin += std::to_string(u);
    }
    t.add_row({std::to_string(row.seed), std::to_string(row.status.id.level),
               origin, bool_cell(row.status.good), to_string(row.status.failure),
               fmt_g17(row.u_used)});
  }
  return t;
}

Table perc_table(const std::vector<PercCheckRow>& rows) {
  Table t;
  t.columns = {{"seed", ColType::Int},
               {"side", ColType::Int},
               {"p", ColType::Real},
               {"largest_fraction", ColType::Real},
               {"local_density", ColType::Real},
               {"pairs", ColType::Int},
               {"mean_hop_ratio", ColType::Real},
               {"max_hop_ratio", ColType::Real},
               {"frac_within_kappa", ColType::Real},
               {"mean_deviation_ratio", ColType::Real},
               {"frac_within_zeta", ColType::Real}};
  for (const auto& r : rows)
    t.add_row({std::to_string(r.seed), std::to_string(r.side), fmt_g17(r.p),
               fmt_g17(r.largest_fraction), fmt_g17(r.local_density),
               std::to_string(r.pairs), fmt_g17(r.mean_hop_ratio),
               fmt_g17(r.max_hop_ratio), fmt_g17(r.frac_within_kappa),
               fmt_g17(r.mean_deviation_ratio), fmt_g17(r.frac_within_zeta)});
  return t;
}

Table ball_table(const BallGrowthResult& result) {
  Table t;
  t.columns = {{"seed", ColType::Int},
               {"radius", ColType::Real},
               {"count", ColType::Int}};
  for (const auto& r : result.rows)
    t.add_row({std::to_string(r.seed), fmt_g17(r.radius), std::to_string(r.count)});
  return t;
}

Table points_table(const SpatialGraph& g) {
  Table t;
  t.columns.emplace_back("id", ColType::Int);
  for (int i = 0; i < g.dim(); ++i)
    t.columns.emplace_back("x_" + std::to_string(i + 1), ColType::Real);
  for (int v = 0; v < g.n(); ++v) {
    std::vector<std::string> cells{std::to_string(v)};
    for (int i = 0; i < g.dim(); ++i)
      cells.push_back(fmt_g17(g.pos[static_cast<std::size_t>(v) * g.dim() + i]));
    t.add_row(std::move(cells));
  }
  return t;
}

}  // namespace fpp
