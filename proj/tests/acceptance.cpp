// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Thresholds are the pre-registered ones; nothing here is
// tuned to the outcome.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include <fmt/format.h>

#include "hypercell/config.hpp"
#include "hypercell/error.hpp"
#include "hypercell/estimators.hpp"
#include "hypercell/experiments.hpp"
#include "hypercell/functionals.hpp"
#include "hypercell/geometry.hpp"
#include "hypercell/runner.hpp"
#include "hypercell/stats.hpp"
#include "oracles.hpp"

using namespace hypercell;
using namespace hypercell::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void require(bool ok, std::string what) {
    pass = pass && ok;
    lines.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
  }
  void note(std::string what) { lines.push_back("     " + what); }
};

std::string r6(double x) { return fmt::format("{:.6g}", x); }

ExperimentConfig shipped(const std::string& name) {
  return config_from_json(read_config_file((fs::path(HYPERCELL_SOURCE_DIR) / "configs" / name).string()));
}

DrawOptions options(std::uint64_t seed, std::uint64_t stream_base = 0) {
  DrawOptions opt;
  opt.seed = seed;
  opt.stream_base = stream_base;
  return opt;
}

std::int64_t total_drops(const DropCounters& drops, const std::string& key) {
  const auto it = drops.find(key);
  return it == drops.end() ? 0 : it->second;
}

/// Two-sided p-value of the binomial score test of p = p0; the Wilson
/// interval at level 1 - alpha contains p0 exactly when this is >= alpha.
double score_p_value(std::int64_t k, std::int64_t n, double p0) {
  const double z = (static_cast<double>(k) - n * p0) / std::sqrt(n * p0 * (1.0 - p0));
  return std::erfc(std::abs(z) / std::numbers::sqrt2);
}

std::vector<double> radii(std::span<const TypicalCellSample> samples) {
  std::vector<double> r;
  r.reserve(samples.size());
  for (const auto& s : samples) r.push_back(s.inball_r);
  return r;
}

const double kA[] = {0.1, 0.3, 1.0};

// Shared across criteria 1-3: the unconditioned isotropic inball sample.
std::vector<TypicalCellSample> g_inball;

Outcome complementary_gamma_law() {
  Outcome o;
  const auto c = shipped("complementary.toml");
  const auto params = params_of(c);
  DropCounters drops;
  g_inball = samples_of(draw_inball(params, 200000, std::nullopt, options(c.seed), drops));
  const auto degenerate = total_drops(drops, "degenerate_sample");
  const double drop_rate = static_cast<double>(degenerate) / static_cast<double>(g_inball.size() + degenerate);
  const double limit[] = {0.01, 0.015};
  for (int n = 3; n <= 4; ++n) {
    const auto phis = phi_given_f(g_inball, n);
    const auto ks = ks_vs_gamma(phis, n - 2, c.gamma);
    o.require(ks.statistic < limit[n - 3],
              fmt::format("f={}: KS(Phi, Gamma({},1)) = {} < {} (n = {})", n, n - 2, r6(ks.statistic), limit[n - 3],
                          phis.size()));
  }
  o.require(drop_rate < 1e-6, fmt::format("drop rate {} < 1e-6 ({} degenerate)", r6(drop_rate), degenerate));
  return o;
}

Outcome complementary_independence() {
  Outcome o;
  const double n_cond = static_cast<double>(phi_given_f(g_inball, 3).size());
  const double bound = 3.0 / std::sqrt(n_cond);
  const double c_iso = corr_phi_given_f(g_inball, 3, &ShapeSummary::iso_ratio);
  const double c_circ = corr_phi_given_f(g_inball, 3, &ShapeSummary::circ_over_in);
  o.require(std::abs(c_iso) < bound, fmt::format("|corr(Phi, iso_ratio)| = {} < {}", r6(std::abs(c_iso)), r6(bound)));
  o.require(std::abs(c_circ) < bound,
            fmt::format("|corr(Phi, circ_over_in)| = {} < {}", r6(std::abs(c_circ)), r6(bound)));
  return o;
}

Outcome exponential_inradius() {
  Outcome o;
  const ProcessParams params(1.0, DirectionalDistribution::isotropic(2));
  DropCounters drops;
  const auto window = samples_of(draw_window_independent(params, 80.0, 10000, options(31), drops));
  const auto window40 = samples_of(draw_window_independent(params, 40.0, 10000, options(32), drops));
  const auto r_in = radii(g_inball);
  const auto r_win = radii(window);
  const auto r_win40 = radii(window40);

  // One family: six Wilson/score checks and the two-sample KS, Holm at 5%.
  std::vector<double> p_values;
  std::vector<std::string> labels;
  for (const auto& [name, r] : {std::pair{"inball", &r_in}, std::pair{"window R=80", &r_win}}) {
    const auto n = static_cast<std::int64_t>(r->size());
    for (double a : kA) {
      const auto k = std::count_if(r->begin(), r->end(), [a](double x) { return x < a; });
      const double p0 = 1.0 - std::exp(-a);
      const auto ci = stats::wilson(k, n);
      p_values.push_back(score_p_value(k, n, p0));
      labels.push_back(fmt::format("{} a={}: P(r<a) = {} Wilson95 [{}, {}] vs 1-e^-a = {}", name, a,
                                   r6(static_cast<double>(k) / n), r6(ci.low), r6(ci.high), r6(p0)));
    }
  }
  const auto ks = stats::ks_two_sample(r_win, r_in);
  p_values.push_back(ks.p_value);
  labels.push_back(fmt::format("two-sample KS window vs inball on r: D = {}", r6(ks.statistic)));
  const auto rejected = stats::holm(p_values, 0.05);
  for (std::size_t i = 0; i < p_values.size(); ++i)
    o.require(!rejected[i], fmt::format("{} (p = {})", labels[i], r6(p_values[i])));

  const auto exp_cdf = [](double x) { return 1.0 - std::exp(-x); };
  const auto mean40 = stats::mean_and_stderr(r_win40);
  const auto mean80 = stats::mean_and_stderr(r_win);
  o.note(fmt::format("edge bias: R=40 KS vs Exp(1) {} mean r {}; R=80 KS {} mean r {}",
                     r6(stats::ks_statistic(r_win40, exp_cdf)), r6(mean40.mean), r6(stats::ks_statistic(r_win, exp_cdf)),
                     r6(mean80.mean)));
  return o;
}

// Conditioned samples for criteria 4 and 5, keyed by functional.
std::map<SizeFunctional, std::vector<std::vector<TypicalCellSample>>> g_grid;

Outcome facet_limit() {
  Outcome o;
  const ProcessParams params(1.0, DirectionalDistribution::isotropic(2));
  const auto grid = default_a_grid(1.0);
  std::uint64_t seed = 41;
  for (auto sigma : {SizeFunctional::Circumradius, SizeFunctional::Volume, SizeFunctional::Inradius}) {
    std::vector<ConditionalEstimate> seq;
    auto& store = g_grid[sigma];
    for (std::size_t j = 0; j < grid.size(); ++j) {
      DropCounters drops;
      store.push_back(samples_of(draw_inball(params, 20000, Conditioning{sigma, grid[j]},
                                             options(seed, static_cast<std::uint64_t>(j) << 32), drops)));
      seq.push_back(estimate_conditional_facet_prob(store.back(), sigma, grid[j], 3));
    }
    ++seed;
    std::string trace;
    for (const auto& e : seq) trace += fmt::format(" {}", r6(e.p_hat));
    o.require(nondecreasing_within_ci(seq), fmt::format("{}: nondecreasing within CI:{}", to_string(sigma), trace));
    o.require(seq.back().p_hat > 0.97,
              fmt::format("{}: P(f=3 | a={}) = {} > 0.97", to_string(sigma), r6(grid.back()), r6(seq.back().p_hat)));
  }
  return o;
}

Outcome speed() {
  Outcome o;
  const auto grid = default_a_grid(1.0);
  for (const auto& [sigma, lo] : {std::pair{SizeFunctional::Circumradius, 0.85}, std::pair{SizeFunctional::Inradius, 0.70}}) {
    std::vector<RatePoint> points;
    for (std::size_t j = 0; j < grid.size(); ++j)
      points.push_back(
          rate_point(estimate_conditional_facet_prob(g_grid.at(sigma)[j], sigma, grid[j], 3, FacetEvent::Greater)));
    const auto fit = fit_decay_rate(points);
    o.require(fit.slope >= lo && fit.slope <= 1.15, fmt::format("{}: slope {} (se {}) in [{}, 1.15]", to_string(sigma),
                                                                r6(fit.slope), r6(fit.slope_stderr), lo));
  }
  return o;
}

Outcome limit_shape() {
  Outcome o;
  const ProcessParams params(1.0, DirectionalDistribution::isotropic(2));
  const double a = 0.02;
  std::uint64_t seed = 51;
  for (auto sigma : {SizeFunctional::Circumradius, SizeFunctional::Volume}) {
    DropCounters drops;
    const auto samples = samples_of(draw_inball(params, 20000, Conditioning{sigma, a}, options(seed), drops));
    RandomStream rng(seed, 1ull << 48);
    const auto draws = limit_shape_draws(params.dist, sigma, 1000000, rng);
    const auto oracle = normalized_oracle(draws, [](const ShapeSummary& s) { return s.iso_ratio; });
    const auto emp = conditional_iso_ratio(samples, sigma, a);
    const double joint = std::hypot(oracle.se, emp.se);
    o.require(std::abs(oracle.value - emp.value) < 3.0 * joint,
              fmt::format("{}: E[iso_ratio | a=0.02] = {} vs oracle {} (3 joint se = {})", to_string(sigma),
                          r6(emp.value), r6(oracle.value), r6(3.0 * joint)));
    ++seed;
  }
  return o;
}

Outcome tail_lemma() {
  Outcome o;
  const auto cos2 = shipped("tail_cos2theta.toml");
  const std::vector<double> t_grid = {2.0, 4.0, 8.0, 16.0, 32.0};
  for (const auto& [name, dist] : {std::pair{std::string("isotropic"), DirectionalDistribution::isotropic(2)},
                                   std::pair{std::string("cos2theta"), params_of(cos2).dist}}) {
    RandomStream rng(61, 0);
    const auto tail = tail_check_phi_T(dist, 1000000, t_grid, rng);
    o.require(tail.exponent <= -0.9, fmt::format("{}: tail exponent {} <= -0.9", name, r6(tail.exponent)));
    o.require(tail.min_phi > 1.0, fmt::format("{}: min Phi(T) = {} > 1 over {} tuples", name, r6(tail.min_phi),
                                              tail.n_samples));
  }
  return o;
}

Outcome atoms() {
  Outcome o;
  const auto c = shipped("atoms.toml");
  const auto params = params_of(c);
  const ProcessParams control(c.gamma, DirectionalDistribution::isotropic(2));
  std::vector<double> grid = c.a_grid;
  std::sort(grid.begin(), grid.end(), std::greater<>());
  std::vector<ConditionalEstimate> seq, control_seq;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    DropCounters drops;
    const auto cells = samples_of(
        draw_window_cells(params, *c.window_R, c.n_samples, options(c.seed, static_cast<std::uint64_t>(j) << 32), drops,
                          grid[j]));
    seq.push_back(estimate_conditional_facet_prob(cells, SizeFunctional::Inradius, grid[j], 3, FacetEvent::Greater));
    const auto control_cells = samples_of(draw_window_cells(
        control, *c.window_R, c.n_samples, options(c.seed, (1ull << 44) + (static_cast<std::uint64_t>(j) << 32)), drops,
        grid[j]));
    control_seq.push_back(
        estimate_conditional_facet_prob(control_cells, SizeFunctional::Inradius, grid[j], 3, FacetEvent::Greater));
  }
  std::string trace, control_trace;
  for (const auto& e : seq) trace += fmt::format(" {}", r6(e.p_hat));
  for (const auto& e : control_seq) control_trace += fmt::format(" {}", r6(e.p_hat));
  o.note("mixture P(f>3 | r<a):" + trace);
  o.note("isotropic control:" + control_trace);
  o.require(seq.back().ci_low > 0.02, fmt::format("ci_low at a=0.025 = {} > 0.02", r6(seq.back().ci_low)));
  o.require(seq.back().p_hat >= 0.5 * seq.front().p_hat,
            fmt::format("non-vanishing: last {} >= half of first {}", r6(seq.back().p_hat), r6(seq.front().p_hat)));
  o.require(control_seq.back().p_hat < 0.05,
            fmt::format("control at a=0.025: {} < 0.05 (n = {})", r6(control_seq.back().p_hat),
                        control_seq.back().denominator_count));
  o.require(control_seq.back().p_hat < control_seq.front().p_hat, "control decreasing");
  return o;
}

Outcome parallelepipeds() {
  Outcome o;
  const auto c = shipped("parallelogram_dump.json");
  const auto params = params_of(c);
  DropCounters drops;
  const auto cells = samples_of(draw_window_cells(params, *c.window_R, 20000, options(c.seed), drops));
  const auto four = std::count_if(cells.begin(), cells.end(), [](const auto& s) { return s.fcount == 4; });
  o.require(four == static_cast<std::ptrdiff_t>(cells.size()),
            fmt::format("{} of {} retained cells have f=4", four, cells.size()));
  const int nm = n_min(params.dist, 2);
  o.require(nm == 4, fmt::format("n_min = {}", nm));
  return o;
}

std::vector<UnitVector> spanning_tuple(int d, RandomStream& rng) {
  for (;;) {
    std::vector<UnitVector> t;
    for (int i = 0; i <= d; ++i) {
      Vec g(d);
      for (int k = 0; k < d; ++k) g[k] = rng.normal();
      t.emplace_back(g);
    }
    if (spanning_margin(t) > 1e-3 && half_sphere_test(t)) return t;
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome geometry_oracles() {
  Outcome o;
  constexpr int kInstances = 1000;
  RandomStream rng(71, 0);
  double clip_dev = 0, vertex_dev = 0, in_dev = 0, circ_dev = 0, delta_dev = 0;
  int clipped = 0;
  for (int dim : {2, 3}) {
    for (int rep = 0; rep < kInstances; ++rep) {
      const auto cell = oracle::random_cell(dim, dim + 2 + rep % 6, rng);
      Vec g(dim);
      for (int k = 0; k < dim; ++k) g[k] = rng.normal();
      const UnitVector u(g);
      const Halfspace cut{u, 0.5 * (rng.uniform() - 0.5)};
      try {
        const auto out = clip(cell, cut);
        auto hs = cell.halfspaces();
        hs.push_back(cut);
        clip_dev = std::max(clip_dev, oracle::hausdorff(out.vertices(), oracle::enumerate_vertices(dim, hs)));
        ++clipped;
      } catch (const Error& e) {
        if (e.code() != Errc::EmptyCell) throw;
      }
      in_dev = std::max(in_dev, std::abs(inradius(cell).radius - oracle::tangent_subset_inradius(cell)));
      const auto vs = cell.vertices();
      circ_dev = std::max(circ_dev, std::abs(circumradius(cell).radius - oracle::exhaustive_circumradius(vs)));

      const auto t = spanning_tuple(dim, rng);
      for (int i = 0; i <= dim; ++i)
        vertex_dev = std::max(vertex_dev, (vertex_v(t, i) - oracle::cramer_vertex(t, i)).norm());
      std::vector<Vec> pts;
      for (const auto& w : t) pts.push_back(w.coords());
      delta_dev = std::max(delta_dev, std::abs(delta_d(t) - oracle::simplex_volume(pts)));
    }
  }
  o.require(clip_dev <= 1e-6, fmt::format("clip: max Hausdorff deviation {} over {} cuts", r6(clip_dev), clipped));
  o.require(vertex_dev <= 1e-6, fmt::format("vertex_v: max deviation {} over {} tuples", r6(vertex_dev), 2 * kInstances));
  o.require(in_dev <= 1e-6, fmt::format("inradius: max deviation {} over {} cells", r6(in_dev), 2 * kInstances));
  o.require(circ_dev <= 1e-6, fmt::format("circumradius: max deviation {} over {} cells", r6(circ_dev), 2 * kInstances));
  o.require(delta_dev <= 1e-6, fmt::format("delta_d: max deviation {} over {} tuples", r6(delta_dev), 2 * kInstances));

  // Replay: the same config twice, and with another worker count.
  const fs::path base = fs::temp_directory_path() / fmt::format("hypercell_acceptance_{}", ::getpid());
  for (const char* dist : {"isotropic", "axes"}) {
    ExperimentConfig c;
    c.experiment = Experiment::SampleDump;
    c.n_samples = 3000;
    c.seed = 73;
    if (std::string(dist) == "axes") c = shipped("parallelogram_dump.json");
    std::vector<std::string> bytes;
    for (int workers : {1, 1, 3}) {
      c.workers = workers;
      c.output_dir = (base / fmt::format("{}_{}", dist, bytes.size())).string();
      run(c);
      bytes.push_back(slurp(fs::path(c.output_dir) / "samples.jsonl"));
    }
    o.require(!bytes[0].empty() && bytes[0] == bytes[1] && bytes[0] == bytes[2],
              fmt::format("{}: samples.jsonl byte-identical across reruns and workers 1/3", dist));
  }
  fs::remove_all(base);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Gamma law of Phi given f (isotropic, d=2)", complementary_gamma_law},
      {"independence of Phi and shape given f=3", complementary_independence},
      {"exponential inradius law, both samplers", exponential_inradius},
      {"facet limit P(f=3 | small) -> 1", facet_limit},
      {"decay speed slopes", speed},
      {"limit shape vs oracle", limit_shape},
      {"tail of Phi(T)", tail_lemma},
      {"atoms keep non-triangles among small cells", atoms},
      {"axis directions give parallelograms only", parallelepipeds},
      {"geometry oracles and replay", geometry_oracles},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, fmt::format("exception: {}", e.what()));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fmt::print("criterion {}: {}  {} ({:.0f} s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, secs);
    for (const auto& l : o.lines) fmt::print("    {}\n", l);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
