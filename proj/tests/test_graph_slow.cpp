#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fpp/graph.hpp"
#include "helpers.hpp"

namespace fpp {
namespace {

Domain lattice_domain(int d, double half) {
  Domain dom;
  dom.d = d;
  dom.kind = DomainKind::LatticeBox;
  dom.half_side = half;
  return dom;
}

// The two generation paths sample from the same distribution: edge counts on
// a side-101 lattice from independent seed ranges must be KS-compatible.
TEST(GenerationEquivalence, EdgeCountDistributionsMatch) {
  ModelParams p;
  p.d = 2;
  p.tau = 2.5;
  p.alpha = 3.5;
  p.mu = 0.8;
  p.beta = 1.0;
  LDistributionSpec l;

  const Domain dom = lattice_domain(2, 50);
  const int per_mode = 200;
  std::vector<double> naive_counts, cell_counts;
  GenerateOptions opt;
  opt.mode = GenMode::Naive;
  for (int s = 0; s < per_mode; ++s)
    naive_counts.push_back(static_cast<double>(
        generate_graph(dom, p, l, 50000 + s, opt).edges.size()));
  opt.mode = GenMode::CellAccelerated;
  for (int s = 0; s < per_mode; ++s)
    cell_counts.push_back(static_cast<double>(
        generate_graph(dom, p, l, 90000 + s, opt).edges.size()));

  const double pval = testutil::ks_two_sample_p(naive_counts, cell_counts);
  EXPECT_GT(pval, 0.01) << "naive mean "
                        << testutil::mean(naive_counts) << ", cell mean "
                        << testutil::mean(cell_counts);
}

// Same check under the threshold kernel, where candidate classes can be
// rejected outright (p_bar = 0) and the capped branch is common.
TEST(GenerationEquivalence, ThresholdKernelEdgeCountsMatch) {
  ModelParams p;
  p.d = 2;
  p.tau = 2.7;
  p.alpha = kInfinite;
  p.c_prime = 0.8;
  p.c_prime_set = true;
  p.mu = 0.5;
  p.beta = 1.0;
  LDistributionSpec l;

  const Domain dom = lattice_domain(2, 20);
  const int per_mode = 300;
  std::vector<double> naive_counts, cell_counts;
  GenerateOptions opt;
  opt.mode = GenMode::Naive;
  for (int s = 0; s < per_mode; ++s)
    naive_counts.push_back(static_cast<double>(
        generate_graph(dom, p, l, 11000 + s, opt).edges.size()));
  opt.mode = GenMode::CellAccelerated;
  for (int s = 0; s < per_mode; ++s)
    cell_counts.push_back(static_cast<double>(
        generate_graph(dom, p, l, 77000 + s, opt).edges.size()));

  EXPECT_GT(testutil::ks_two_sample_p(naive_counts, cell_counts), 0.01);
}

// Pairwise exactness at d = 2: empirical edge frequency of fixed far pairs
// matches the kernel probability under the accelerated generator.
TEST(GenerationEquivalence, FarPairFrequencyMatchesKernel) {
  ModelParams p;
  p.d = 2;
  p.tau = 2.5;
  p.alpha = 3.0;
  p.mu = 0.5;
  p.beta = 1.0;
  p.c_lower = p.c_upper = 0.9;
  LDistributionSpec l;

  const Domain dom = lattice_domain(2, 7);  // 15 x 15
  const int side = 15;
  const auto vid = [side](int x, int y) { return (x + 7) * side + (y + 7); };
  const std::vector<std::pair<int, int>> pairs = {
      {vid(-7, -7), vid(7, 7)},
      {vid(-7, 0), vid(7, 0)},
      {vid(-6, -6), vid(5, 6)},
      {vid(0, -7), vid(0, 7)},
  };
  GenerateOptions opt;
  opt.mode = GenMode::CellAccelerated;
  std::vector<double> diff(pairs.size(), 0.0);
  const int trials = 3000;
  for (int s = 0; s < trials; ++s) {
    const auto g = generate_graph(dom, p, l, 300000 + s, opt);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [a, b] = pairs[k];
      bool found = false;
      for (const auto& [w, e] : g.adj[a])
        if (w == b) { found = true; break; }
      diff[k] += (found ? 1.0 : 0.0) -
                 connection_prob_sq(g.sq_dist_between(a, b), g.weight[a],
                                    g.weight[b], p);
    }
  }
  for (std::size_t k = 0; k < pairs.size(); ++k)
    EXPECT_LT(std::abs(diff[k] / trials), 0.035) << "pair " << k;
}

}  // namespace
}  // namespace fpp
