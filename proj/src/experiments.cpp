#include "hypercell/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <map>
#include <thread>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "hypercell/error.hpp"
#include "hypercell/stats.hpp"

#ifndef HYPERCELL_VERSION
#define HYPERCELL_VERSION "unknown"
#endif

namespace hypercell::cli {

namespace {

// Stream-id layout: grid point j uses j << 32; the atoms control run and the
// oracle sit far above any block count.
constexpr std::uint64_t kGridShift = 32;
constexpr std::uint64_t kControlBase = 1ull << 44;
constexpr std::uint64_t kOracleStream = 1ull << 48;
constexpr std::uint64_t kPilotStream = 1ull << 52;

constexpr std::int64_t kPilotProposals = 200;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(t));
}

bool needs_inball(Experiment e) {
  return e == Experiment::Complementary || e == Experiment::SmallCells || e == Experiment::Speed ||
         e == Experiment::LimitShape;
}

bool is_conditioned(Experiment e) {
  return e == Experiment::SmallCells || e == Experiment::Speed || e == Experiment::LimitShape;
}

double window_radius(const ExperimentConfig& c) { return c.window_R ? *c.window_R : 40.0 / c.gamma; }

std::string fmt_short(double x) { return fmt::format("{:g}", x); }

std::string sigma_label(SizeFunctional s) { return std::string(to_string(s)); }

/// Writes every block of samples to samples.jsonl as it completes.
BlockSink jsonl_sink(OutputDir& out, std::uint64_t seed) {
  return [&out, seed](const std::vector<Drawn>& block) {
    for (const auto& d : block) out.write_line(canonical_dump(sample_json(d, out.run(), seed)));
  };
}

DrawOptions draw_options(const ExperimentConfig& c, std::uint64_t stream_base, BlockSink sink) {
  DrawOptions opt;
  opt.seed = c.seed;
  opt.stream_base = stream_base;
  opt.workers = c.workers;
  opt.sink = std::move(sink);
  return opt;
}

CheckResult check(std::string name, bool pass, std::string detail) {
  return {std::move(name), pass, std::move(detail)};
}

struct Context {
  const ExperimentConfig& config;
  const ProcessParams& params;
  OutputDir& out;
  RunManifest& manifest;
  std::vector<EstimateRow> rows;

  void add_row(std::string tag, const ConditionalEstimate& e, std::int64_t n_samples) {
    rows.push_back({std::string(to_string(config.experiment)), std::move(tag), e, n_samples, config.seed});
  }
};

void run_complementary(Context& ctx) {
  const auto& c = ctx.config;
  const int d = c.dim;
  ctx.out.open_jsonl("samples.jsonl");
  auto drawn = draw_inball(ctx.params, c.n_samples, std::nullopt, draw_options(c, 0, jsonl_sink(ctx.out, c.seed)),
                           ctx.manifest.drops);
  ctx.out.close_jsonl();
  const auto samples = samples_of(std::move(drawn));

  std::map<int, std::int64_t> by_f;
  for (const auto& s : samples) ++by_f[s.fcount];
  for (const auto& [n, count] : by_f)
    ctx.add_row("facet_law", make_estimate(count, static_cast<std::int64_t>(samples.size()),
                                           std::numeric_limits<double>::infinity(), "none", n),
                static_cast<std::int64_t>(samples.size()));

  std::vector<std::vector<std::string>> cdf_rows;
  for (int n = d + 1; n <= d + 2; ++n) {
    const auto phis = phi_given_f(samples, n);
    if (phis.empty()) {
      ctx.manifest.checks.push_back(check(fmt::format("ks_phi_f{}", n), false, "no cells with this facet count"));
      continue;
    }
    const KSResult ks = ks_vs_gamma(phis, n - d, c.gamma, c.tolerance_factor);
    ctx.manifest.checks.push_back(check(fmt::format("ks_phi_f{}", n), ks.pass,
                                        fmt::format("KS={} threshold={} factor={} n={}", fmt_real(ks.statistic),
                                                    fmt_real(ks.threshold_5pct), fmt_real(c.tolerance_factor),
                                                    ks.n_samples)));
    std::vector<double> sorted = phis;
    std::sort(sorted.begin(), sorted.end());
    for (int q = 1; q < 100; ++q) {
      const auto i = static_cast<std::size_t>(q * static_cast<double>(sorted.size()) / 100.0);
      const double x = sorted[std::min(i, sorted.size() - 1)];
      const double ecdf = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
                          static_cast<double>(sorted.size());
      cdf_rows.push_back({std::to_string(n), fmt_real(x), fmt_real(ecdf), fmt_real(stats::gamma_cdf(x, n - d, c.gamma))});
    }
  }
  ctx.out.write_csv("cdf.csv", {"n", "phi", "ecdf", "gamma_cdf"}, cdf_rows);

  const int n0 = d + 1;
  const auto count = static_cast<double>(phi_given_f(samples, n0).size());
  if (count >= 3) {
    const double bound = 3.0 / std::sqrt(count);
    const double r_iso = corr_phi_given_f(samples, n0, &ShapeSummary::iso_ratio);
    const double r_circ = corr_phi_given_f(samples, n0, &ShapeSummary::circ_over_in);
    ctx.manifest.checks.push_back(check(fmt::format("independence_iso_ratio_f{}", n0), std::abs(r_iso) < bound,
                                        fmt::format("corr={} bound={}", fmt_real(r_iso), fmt_real(bound))));
    ctx.manifest.checks.push_back(check(fmt::format("independence_circ_over_in_f{}", n0), std::abs(r_circ) < bound,
                                        fmt::format("corr={} bound={}", fmt_real(r_circ), fmt_real(bound))));
  }
}

/// Conditioned inball samples at every grid point, streamed to JSONL.
std::vector<std::vector<TypicalCellSample>> conditioned_grid(Context& ctx, std::span<const double> grid) {
  const auto& c = ctx.config;
  std::vector<std::vector<TypicalCellSample>> out;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    auto drawn = draw_inball(ctx.params, c.n_samples, Conditioning{c.sigma, grid[j]},
                             draw_options(c, static_cast<std::uint64_t>(j) << kGridShift, jsonl_sink(ctx.out, c.seed)),
                             ctx.manifest.drops);
    out.push_back(samples_of(std::move(drawn)));
  }
  return out;
}

void run_small_cells(Context& ctx) {
  const auto& c = ctx.config;
  ctx.out.open_jsonl("samples.jsonl");
  const auto grid = conditioned_grid(ctx, c.a_grid);
  ctx.out.close_jsonl();
  std::vector<ConditionalEstimate> seq;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    seq.push_back(estimate_conditional_facet_prob(grid[j], c.sigma, c.a_grid[j], c.dim + 1));
    ctx.add_row("facet_limit", seq.back(), static_cast<std::int64_t>(grid[j].size()));
  }
  std::vector<ConditionalEstimate> ordered = seq;
  std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) { return x.a > y.a; });
  ctx.manifest.checks.push_back(check("nondecreasing_within_ci", nondecreasing_within_ci(ordered),
                                      fmt::format("p_hat at smallest a = {}", fmt_real(ordered.back().p_hat))));
}

void run_speed(Context& ctx) {
  const auto& c = ctx.config;
  ctx.out.open_jsonl("samples.jsonl");
  const auto grid = conditioned_grid(ctx, c.a_grid);
  ctx.out.close_jsonl();
  std::vector<RatePoint> points;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto e = estimate_conditional_facet_prob(grid[j], c.sigma, c.a_grid[j], c.dim + 1, FacetEvent::Greater);
    ctx.add_row("decay_speed", e, static_cast<std::int64_t>(grid[j].size()));
    points.push_back(rate_point(e));
  }
  const RateFit fit = fit_decay_rate(points);
  Json rf;
  rf["run"] = ctx.out.run();
  rf["sigma"] = sigma_label(c.sigma);
  rf["slope"] = fit.slope;
  rf["intercept"] = fit.intercept;
  rf["stderr"] = fit.slope_stderr;
  rf["grid"] = fit.a_grid;
  rf["p_values"] = fit.p_values;
  ctx.out.write_file("ratefit.json", canonical_dump(rf) + "\n");
  // Linear decay is sharp for the circumradius; other functionals may carry
  // the logarithmic factor, which lowers finite-grid slopes.
  const double lo = c.sigma == SizeFunctional::Circumradius ? 0.85 : 0.70;
  const double hi = 1.15;
  ctx.manifest.checks.push_back(check("slope_range", fit.slope >= lo && fit.slope <= hi,
                                      fmt::format("slope={} stderr={} range=[{}, {}]", fmt_real(fit.slope),
                                                  fmt_real(fit.slope_stderr), lo, hi)));
}

void run_limit_shape(Context& ctx) {
  const auto& c = ctx.config;
  const double a = *std::min_element(c.a_grid.begin(), c.a_grid.end());
  ctx.out.open_jsonl("samples.jsonl");
  const std::vector<double> one{a};
  const auto grid = conditioned_grid(ctx, one);
  ctx.out.close_jsonl();
  const auto& samples = grid.front();

  RandomStream rng(c.seed, kOracleStream);
  const auto draws = limit_shape_draws(ctx.params.dist, c.sigma, c.oracle_samples, rng);
  const auto iso = [](const ShapeSummary& s) { return s.iso_ratio; };
  const McEstimate oracle_mean = normalized_oracle(draws, iso);
  const McEstimate emp_mean = conditional_iso_ratio(samples, c.sigma, a);
  const double joint = std::hypot(oracle_mean.se, emp_mean.se);
  ctx.manifest.checks.push_back(
      check("iso_ratio_mean", std::abs(oracle_mean.value - emp_mean.value) < 3.0 * joint,
            fmt::format("empirical={} oracle={} joint_se={}", fmt_real(emp_mean.value), fmt_real(oracle_mean.value),
                        fmt_real(joint))));

  const double median = oracle_weighted_median(draws, iso);
  const McEstimate oracle_half =
      normalized_oracle(draws, [median](const ShapeSummary& s) { return s.iso_ratio > median ? 1.0 : 0.0; });
  std::int64_t above = 0;
  std::int64_t den = 0;
  for (const auto& s : samples) {
    if (!(s.size_root(c.sigma) < a)) continue;
    ++den;
    if (s.summary.iso_ratio > median) ++above;
  }
  const ConditionalEstimate split = make_estimate(above, den, a, sigma_label(c.sigma), 0);
  ctx.add_row("limit_shape", split, static_cast<std::int64_t>(samples.size()));
  const double split_se = std::sqrt(split.p_hat * (1.0 - split.p_hat) / static_cast<double>(den));
  const double split_joint = std::hypot(oracle_half.se, split_se);
  ctx.manifest.checks.push_back(
      check("median_split", std::abs(split.p_hat - oracle_half.value) < 3.0 * split_joint,
            fmt::format("empirical={} oracle={} joint_se={}", fmt_real(split.p_hat), fmt_real(oracle_half.value),
                        fmt_real(split_joint))));

  ctx.out.write_csv("limit_shape.csv", {"quantity", "a", "empirical", "empirical_se", "oracle", "oracle_se"},
                    {{"mean_iso_ratio", fmt_real(a), fmt_real(emp_mean.value), fmt_real(emp_mean.se),
                      fmt_real(oracle_mean.value), fmt_real(oracle_mean.se)},
                     {"p_iso_ratio_above_oracle_median", fmt_real(a), fmt_real(split.p_hat), fmt_real(split_se),
                      fmt_real(oracle_half.value), fmt_real(oracle_half.se)}});
}

void run_atoms(Context& ctx) {
  const auto& c = ctx.config;
  const double R = window_radius(c);
  std::vector<double> grid = c.a_grid;
  std::sort(grid.begin(), grid.end(), std::greater<>());
  const ProcessParams control(c.gamma, DirectionalDistribution::isotropic(c.dim));
  std::vector<UnitVector> atoms;
  for (const auto& u : ctx.params.dist.signed_atoms())
    if (u.coords()(0) > 0.0 || (u.coords()(0) == 0.0 && u.coords()(1) > 0.0)) atoms.push_back(u);

  // Each grid point gets its own windows, conditioned on {r < a}, for both
  // the configured distribution and the isotropic control.
  std::vector<ConditionalEstimate> seq, control_seq;
  ctx.out.open_jsonl("samples.jsonl");
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double a = grid[j];
    DrawOptions opt = draw_options(c, static_cast<std::uint64_t>(j) << kGridShift, jsonl_sink(ctx.out, c.seed));
    opt.keep_cells = true;
    const auto cells = samples_of(draw_window_cells(ctx.params, R, c.n_samples, opt, ctx.manifest.drops, a));
    const auto n = static_cast<std::int64_t>(cells.size());
    seq.push_back(estimate_conditional_facet_prob(cells, SizeFunctional::Inradius, a, c.dim + 1, FacetEvent::Greater));
    ctx.add_row("atoms_nonvanishing", seq.back(), n);
    for (const auto& u : atoms) {
      ConditionalEstimate e = parallel_facet_fraction(cells, u, a);
      e.sigma_name = fmt::format("Inradius;u=({},{})", fmt_real(u.coords()(0)), fmt_real(u.coords()(1)));
      ctx.add_row("parallel_facets", e, n);
    }

    DropCounters control_drops;
    const auto control_cells = samples_of(draw_window_cells(
        control, R, c.n_samples, draw_options(c, kControlBase + (static_cast<std::uint64_t>(j) << kGridShift), {}),
        control_drops, a));
    for (const auto& [k, v] : control_drops) ctx.manifest.drops["control_" + k] += v;
    control_seq.push_back(
        estimate_conditional_facet_prob(control_cells, SizeFunctional::Inradius, a, c.dim + 1, FacetEvent::Greater));
    ctx.add_row("atoms_control", control_seq.back(), static_cast<std::int64_t>(control_cells.size()));
  }
  ctx.out.close_jsonl();

  const auto& first = seq.front();
  const auto& last = seq.back();
  ctx.manifest.checks.push_back(check("ci_low_at_smallest_a", last.ci_low > 0.02,
                                      fmt::format("a={} ci_low={}", fmt_real(last.a), fmt_real(last.ci_low))));
  ctx.manifest.checks.push_back(check("nonvanishing", last.p_hat >= 0.5 * first.p_hat,
                                      fmt::format("first={} last={}", fmt_real(first.p_hat), fmt_real(last.p_hat))));
  const auto& cfirst = control_seq.front();
  const auto& clast = control_seq.back();
  ctx.manifest.checks.push_back(check("control_below_0.05", clast.p_hat < 0.05,
                                      fmt::format("a={} p_hat={}", fmt_real(clast.a), fmt_real(clast.p_hat))));
  ctx.manifest.checks.push_back(check("control_decreasing", clast.p_hat < cfirst.p_hat,
                                      fmt::format("first={} last={}", fmt_real(cfirst.p_hat), fmt_real(clast.p_hat))));
}

void run_tail_lemma(Context& ctx) {
  const auto& c = ctx.config;
  ctx.out.open_jsonl("samples.jsonl");
  ctx.out.close_jsonl();
  RandomStream rng(c.seed, 0);
  const TailCheck tail = tail_check_phi_T(ctx.params.dist, c.n_samples, c.t_grid, rng);
  std::vector<std::vector<std::string>> rows;
  bool all_ok = true;
  for (const auto& r : tail.rows) {
    const auto k = static_cast<std::int64_t>(std::llround(r.survival * static_cast<double>(tail.n_samples)));
    ctx.add_row("tail_bound", make_estimate(k, tail.n_samples, r.t, "PhiContent", c.dim + 1), tail.n_samples);
    rows.push_back({fmt_real(r.t), fmt_real(r.survival), r.bound_ok ? "true" : "false"});
    all_ok = all_ok && r.bound_ok;
  }
  ctx.out.write_csv("tail.csv", {"t", "survival", "bound_ok"}, rows);
  ctx.manifest.checks.push_back(check("tail_exponent", tail.exponent <= -0.9,
                                      fmt::format("exponent={}", fmt_real(tail.exponent))));
  ctx.manifest.checks.push_back(check("phi_above_1", tail.min_phi > 1.0, fmt::format("min={}", fmt_real(tail.min_phi))));
  ctx.manifest.checks.push_back(check("tail_bound", all_ok, "t·S(t) bounded along the grid"));
}

void run_sample_dump(Context& ctx) {
  const auto& c = ctx.config;
  ctx.out.open_jsonl("samples.jsonl");
  const auto sink = jsonl_sink(ctx.out, c.seed);
  if (ctx.params.dist.is_absolutely_continuous()) {
    draw_inball(ctx.params, c.n_samples, std::nullopt, draw_options(c, 0, sink), ctx.manifest.drops);
  } else {
    draw_window_independent(ctx.params, window_radius(c), c.n_samples, draw_options(c, 0, sink), ctx.manifest.drops);
  }
  ctx.out.close_jsonl();
}

void add(std::vector<Diagnostic>& out, Diagnostic::Level l, std::string key, std::string msg) {
  out.push_back({l, std::move(key), std::move(msg)});
}

}  // namespace

std::string_view to_string(Diagnostic::Level l) {
  switch (l) {
    case Diagnostic::Level::Info: return "info";
    case Diagnostic::Level::Warning: return "warning";
    case Diagnostic::Level::Error: return "error";
  }
  return "unknown";
}

std::string code_version() { return HYPERCELL_VERSION; }

ProcessParams params_of(const ExperimentConfig& config) {
  try {
    return ProcessParams(config.gamma, make_distribution(config.dist, config.dim));
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    throw Error(Errc::ConfigError, e.what());
  }
}

std::vector<Diagnostic> validate(const ExperimentConfig& c) {
  using L = Diagnostic::Level;
  std::vector<Diagnostic> out;
  std::optional<ProcessParams> params;
  try {
    params.emplace(params_of(c));
    add(out, L::Info, "distribution", "valid: even, unit mass, support not in a great subsphere");
  } catch (const Error& e) {
    add(out, L::Error, "distribution", e.what());
    return out;
  }
  const auto& dist = params->dist;
  const bool abs_cont = dist.is_absolutely_continuous();
  add(out, L::Info, "absolutely_continuous", abs_cont ? "true" : "false");
  bool atoms_ok = false;
  try {
    add(out, L::Info, "n_min", std::to_string(n_min(dist, c.dim)));
    atoms_ok = supp_condition_atoms(dist, c.dim);
    add(out, L::Info, "supp_condition_atoms", atoms_ok ? "true" : "false");
    add(out, L::Info, "delta_max", fmt_short(delta_max(dist, c.dim)));
  } catch (const Error& e) {
    add(out, L::Error, "support", e.what());
  }

  const auto name = std::string(to_string(c.experiment));
  if (needs_inball(c.experiment) || c.experiment == Experiment::TailLemma) {
    if (!abs_cont)
      add(out, L::Error, "compatibility", fmt::format("{} needs an absolutely continuous distribution", name));
  }
  if (needs_inball(c.experiment) && c.dim != 2 && c.dim != 3)
    add(out, L::Error, "compatibility", fmt::format("{} samples cells, which needs d in {{2, 3}}", name));
  if (c.experiment == Experiment::Atoms) {
    if (c.dim != 2) add(out, L::Error, "compatibility", "atoms uses the window sampler, which needs d = 2");
    if (dist.signed_atoms().empty()) add(out, L::Error, "compatibility", "atoms needs a distribution with an atom");
    if (!atoms_ok)
      add(out, L::Error, "compatibility",
          "atoms needs supp_condition_atoms: with no d+1 support points off every closed half sphere the smallest "
          "cells are not simplices and the experiment has no content");
    if (c.a_grid.size() < 2) add(out, L::Error, "a_grid", "atoms needs at least two grid points");
  }
  if (c.experiment == Experiment::SampleDump && !abs_cont && c.dim != 2)
    add(out, L::Error, "compatibility", "atomic distributions are sampled by the window sampler, which needs d = 2");
  if (c.experiment == Experiment::Speed && c.a_grid.size() < 4)
    add(out, L::Error, "a_grid", "a rate fit needs at least 4 grid points");
  if (c.experiment == Experiment::TailLemma && c.t_grid.size() < 2)
    add(out, L::Error, "t_grid", "a tail fit needs at least 2 grid points");
  if ((c.experiment == Experiment::Atoms || (c.experiment == Experiment::SampleDump && !abs_cont)) &&
      window_radius(c) * c.gamma < 20.0)
    add(out, L::Warning, "window_R", fmt::format("window_R·γ = {} is below the recommended 20", window_radius(c) * c.gamma));

  if (is_conditioned(c.experiment) && abs_cont && (c.dim == 2 || c.dim == 3)) {
    for (double a : c.a_grid) {
      if (a * c.gamma >= 1.0)
        add(out, L::Warning, "a_grid",
            fmt::format("a = {}: a·γ >= 1, conditioning not rare, truncation disabled", fmt_short(a)));
    }
    // Pilot of the Σ-rejection step at each grid point.
    double total = 0.0;
    for (std::size_t j = 0; j < c.a_grid.size(); ++j) {
      const Conditioning cond{c.sigma, c.a_grid[j]};
      RandomStream rng(c.seed, kPilotStream + j);
      std::int64_t hits = 0;
      try {
        const auto cap = truncation_cap(cond, *params);
        for (std::int64_t i = 0; i < kPilotProposals; ++i) {
          try {
            if (sample_typical_cell_inball(*params, cap, rng).size_root(c.sigma) < cond.a) ++hits;
          } catch (const Error& e) {
            if (e.code() != Errc::DegenerateSample) throw;
          }
        }
      } catch (const Error& e) {
        add(out, L::Error, "budget", e.what());
        break;
      }
      if (hits == 0) {
        add(out, L::Warning, "budget",
            fmt::format("a = {}: no pilot proposal hit the event; acceptance below 1/{}", fmt_short(c.a_grid[j]),
                        kPilotProposals));
        continue;
      }
      const double rate = static_cast<double>(hits) / kPilotProposals;
      total += static_cast<double>(c.n_samples) / rate;
      add(out, L::Info, "budget",
          fmt::format("a = {}: pilot acceptance {}, about {} proposals", fmt_short(c.a_grid[j]), fmt_short(rate),
                      std::llround(static_cast<double>(c.n_samples) / rate)));
    }
    if (total > 1e9) add(out, L::Warning, "budget", fmt::format("about {} proposals in total", std::llround(total)));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw > 0 && static_cast<unsigned>(c.workers) > hw)
    add(out, L::Warning, "workers", fmt::format("{} workers on {} hardware threads", c.workers, hw));
  return out;
}

void require_valid(const ExperimentConfig& config) {
  std::string msg;
  for (const auto& d : validate(config)) {
    if (d.level != Diagnostic::Level::Error) continue;
    if (!msg.empty()) msg += "; ";
    msg += d.key + ": " + d.message;
  }
  if (!msg.empty()) throw Error(Errc::ConfigError, msg);
}

bool RunManifest::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

Json manifest_json(const RunManifest& m) {
  Json j;
  j["run"] = m.run;
  j["config_hash"] = m.run;
  j["version"] = m.version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["config"] = m.config;
  j["drops"] = Json::object();
  for (const auto& [k, v] : m.drops) j["drops"][k] = v;
  j["checks"] = Json::array();
  for (const auto& c : m.checks) j["checks"].push_back(Json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["files"] = Json::array();
  for (const auto& f : m.files) j["files"].push_back(Json{{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["all_pass"] = m.all_pass();
  return j;
}

RunManifest run(const ExperimentConfig& config) {
  require_valid(config);
  const ProcessParams params = params_of(config);
  RunManifest manifest;
  manifest.run = config_hash(config);
  manifest.version = code_version();
  manifest.started = utc_now();
  manifest.config = config_to_json(config);
  OutputDir out(config.output_dir, manifest.run);
  Context ctx{config, params, out, manifest, {}};
  switch (config.experiment) {
    case Experiment::Complementary: run_complementary(ctx); break;
    case Experiment::SmallCells: run_small_cells(ctx); break;
    case Experiment::Speed: run_speed(ctx); break;
    case Experiment::LimitShape: run_limit_shape(ctx); break;
    case Experiment::Atoms: run_atoms(ctx); break;
    case Experiment::TailLemma: run_tail_lemma(ctx); break;
    case Experiment::SampleDump: run_sample_dump(ctx); break;
  }
  out.write_estimates(ctx.rows);
  manifest.files = out.files();
  manifest.finished = utc_now();
  // The manifest lists every other file; it cannot list its own hash.
  std::ofstream mf(out.path() / "manifest.json", std::ios::binary | std::ios::trunc);
  mf << canonical_dump(manifest_json(manifest)) << '\n';
  mf.close();
  if (mf.fail()) throw Error(Errc::IoError, "cannot write manifest.json");
  return manifest;
}

std::vector<double> phi_given_f(std::span<const TypicalCellSample> samples, int n) {
  std::vector<double> out;
  for (const auto& s : samples)
    if (s.fcount == n) out.push_back(s.values.phi);
  return out;
}

double corr_phi_given_f(std::span<const TypicalCellSample> samples, int n, double ShapeSummary::*field) {
  std::vector<double> x, y;
  for (const auto& s : samples) {
    if (s.fcount != n) continue;
    x.push_back(s.values.phi);
    y.push_back(s.summary.*field);
  }
  return stats::pearson(x, y);
}

bool nondecreasing_within_ci(std::span<const ConditionalEstimate> seq) {
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size(); ++j)
      if (seq[j].ci_high < seq[i].ci_low) return false;
  return true;
}

RatePoint rate_point(const ConditionalEstimate& e) {
  const double n = static_cast<double>(e.denominator_count);
  return {e.a, e.p_hat, std::sqrt(e.p_hat * (1.0 - e.p_hat) / n)};
}

McEstimate conditional_iso_ratio(std::span<const TypicalCellSample> samples, SizeFunctional sigma, double a) {
  std::vector<double> x;
  for (const auto& s : samples)
    if (s.size_root(sigma) < a) x.push_back(s.summary.iso_ratio);
  if (x.empty()) throw Error(Errc::EmptyCondition, "no sample satisfies the size condition");
  const auto m = stats::mean_and_stderr(x);
  return {m.mean, m.se, static_cast<std::int64_t>(x.size())};
}

}  // namespace hypercell::cli
