#include "pricing/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <optional>
#include <sstream>
#include <tuple>

#include "pricing/evaluation.hpp"

namespace pricing {

namespace {

const std::vector<std::string> kLearnerKinds = {"hinge_cv", "quantile_cv", "eps_cv",     "hinge",     "quantile",
                                                "eps",      "dm_logistic", "dm_kernel", "kernel_ipw", "model_free"};

SolverConfig read_search(const Config& c, const std::string& prefix, SolverConfig s) {
  s.multistarts = static_cast<int>(c.get_int(prefix + ".multistarts", s.multistarts));
  s.ps_min_step = c.get_double(prefix + ".min_step", s.ps_min_step);
  s.ps_max_evals = static_cast<int>(c.get_int(prefix + ".max_evals", s.ps_max_evals));
  s.ps_shrink = c.get_double(prefix + ".shrink", s.ps_shrink);
  if (c.has(prefix + ".initial_step")) s.ps_initial_step = c.get_double(prefix + ".initial_step", 0.0);
  if (s.multistarts < 1) throw Error(prefix + ".multistarts must be >= 1");
  return s;
}

Scenario read_scenario(const Config& c, const std::string& name) {
  const std::string p = "scenario." + name + ".";
  const ValuationFamily fam = parse_valuation_family(c.get_string(p + "family"));
  const GKind g = parse_g_kind(c.get_string(p + "g", "linear"));
  Scenario s;
  switch (fam) {
    case ValuationFamily::shifted_exponential: s = Scenario::shifted_exponential(g); break;
    default: s = Scenario::uniform_band(g); break;
  }
  s.family = fam;
  s.name = name;
  s.feature_dim = static_cast<std::size_t>(c.get_int(p + "dim", 2));
  if (s.feature_dim < 1) throw Error(p + "dim must be >= 1");
  if (c.has(p + "features")) {
    const auto f = c.get_double_list(p + "features");
    if (f.size() != 2 || !(f[1] >= f[0])) throw Error(p + "features must be 'lo, hi' with lo <= hi");
    s.feature_lo = f[0];
    s.feature_hi = f[1];
  }
  if (c.has(p + "price_law")) s.price_law = PropensityModel::parse(c.get_string(p + "price_law"));
  s.band_width = c.get_double(p + "band_width", s.band_width);
  s.location = c.get_double(p + "location", s.location);
  s.constant_value = c.get_double(p + "value", s.constant_value);
  return s;
}

LearnerSpec read_learner(const Config& c, const std::string& name) {
  const std::string p = "learner." + name + ".";
  LearnerSpec l;
  l.name = name;
  l.kind = c.get_string(p + "kind", name);
  if (std::find(kLearnerKinds.begin(), kLearnerKinds.end(), l.kind) == kLearnerKinds.end()) {
    throw Error("learner '" + name + "': unknown kind '" + l.kind + "'");
  }
  l.param = c.get_double(p + "param", l.kind == "quantile" ? 0.209 : 0.8234);
  if (c.has(p + "c1")) {
    const double v = c.get_double(p + "c1", 0.0);
    if (std::isfinite(v)) l.c1 = v;
  }
  if (c.has(p + "c2")) {
    const double v = c.get_double(p + "c2", 0.0);
    if (std::isfinite(v)) l.c2 = v;
  }
  l.bandwidth = c.get_double(p + "bandwidth", l.bandwidth);
  l.grid = c.get_double_list(p + "grid");
  // Fail early on bad parameters.
  if (l.kind == "hinge") (void)LossSpec::hinge(l.param);
  if (l.kind == "quantile") (void)LossSpec::quantile(l.param);
  if (l.kind == "eps") (void)LossSpec::eps_insensitive(l.c1, l.c2);
  if (l.kind == "kernel_ipw") (void)LossSpec::kernel_ipw(l.bandwidth);
  for (double v : l.grid) {
    if (l.kind == "hinge_cv") (void)LossSpec::hinge(v);
    else if (l.kind == "quantile_cv") (void)LossSpec::quantile(v);
    else throw Error("learner '" + name + "': grid is only supported for hinge_cv and quantile_cv");
  }
  return l;
}

std::string sanitize(std::string s) {
  for (auto& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  }
  return s;
}

struct LearnerOutput {
  LinearPolicy policy;
  std::string detail;
};

std::string describe_choice(const CvResult& cv) { return cv.chosen().describe(); }

}  // namespace

ExperimentConfig parse_experiment_config(const Config& c) {
  ExperimentConfig e;
  e.name = c.get_string("name", e.name);
  e.base_seed = static_cast<std::uint64_t>(c.get_int("seed", 0));
  e.replications = static_cast<int>(c.get_int("replications", 1));
  if (e.replications < 1) throw Error("replications must be >= 1");
  for (const auto& s : c.get_list("n_grid")) {
    const long long v = parse_int(s, "n_grid");
    if (v < 1) throw Error("n_grid entries must be positive");
    e.n_grid.push_back(static_cast<std::size_t>(v));
  }
  if (e.n_grid.empty()) throw Error("n_grid must list at least one sample size");
  for (std::size_t i = 1; i < e.n_grid.size(); ++i) {
    if (!(e.n_grid[i] > e.n_grid[i - 1])) throw Error("n_grid must be strictly increasing");
  }
  e.output_dir = c.get_string("output_dir", e.output_dir.string());
  e.test_size = static_cast<std::size_t>(c.get_int("test_size", static_cast<long long>(e.test_size)));
  e.oracle_n = static_cast<std::size_t>(c.get_int("oracle_n", static_cast<long long>(e.oracle_n)));
  if (e.test_size < 2 || e.oracle_n < 1) throw Error("test_size must be >= 2 and oracle_n >= 1");
  e.theta0 = c.get_double("theta0", e.theta0);
  e.timing = c.get_bool("timing", false);

  SolverConfig& cv = e.convex;
  cv.max_iters = static_cast<int>(c.get_int("solver.max_iters", cv.max_iters));
  cv.tol = c.get_double("solver.tol", cv.tol);
  cv.window = static_cast<int>(c.get_int("solver.window", cv.window));
  cv.norm_cap = c.get_double("solver.norm_cap", cv.norm_cap);
  cv.reg_lambda = c.get_double("solver.lambda", cv.reg_lambda);
  cv.weight_cap = c.get_double("solver.weight_cap", cv.weight_cap);
  cv.min_step_ratio = c.get_double("solver.min_step_ratio", cv.min_step_ratio);
  if (c.has("solver.step_scale")) cv.step_scale = c.get_double("solver.step_scale", 1.0);
  if (cv.max_iters < 1 || !(cv.tol > 0.0) || !(cv.norm_cap > 0.0) || !(cv.reg_lambda >= 0.0)) {
    throw Error("invalid solver settings");
  }
  e.search = read_search(c, "search", cv);
  e.oracle = read_search(c, "oracle", cv);

  e.cv_demand = parse_demand_kind(c.get_string("cv.demand", "kernel"));
  e.cv_max_eval_points = static_cast<std::size_t>(c.get_int("cv.max_eval_points", 0));
  e.cv_holdout = c.get_double("cv.holdout", 0.0);
  if (!(e.cv_holdout >= 0.0 && e.cv_holdout < 1.0)) throw Error("cv.holdout must be in [0, 1)");

  for (const auto& s : c.get_list("scenarios")) e.scenarios.push_back(read_scenario(c, s));
  if (e.scenarios.empty()) throw Error("scenarios must list at least one scenario");
  for (const auto& l : c.get_list("learners")) e.learners.push_back(read_learner(c, l));
  if (e.learners.empty()) throw Error("learners must list at least one learner");

  if (auto unused = c.unused_keys(); !unused.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unused) msg += " " + k;
    throw Error(msg);
  }
  return e;
}

std::uint64_t data_seed(std::uint64_t base, std::size_t scenario_index, std::size_t n, int rep) {
  return derive_seed(base, {scenario_index, n, static_cast<std::uint64_t>(rep)});
}

std::uint64_t learner_seed(std::uint64_t dseed, std::size_t learner_index) {
  return derive_seed(dseed, {0x6c6561726eULL, learner_index});
}

namespace {

struct Task {
  std::size_t s, ni;
  int rep;
};

// Demand models are fitted at most once per dataset and shared by learners.
struct DemandCache {
  const Dataset* data;
  std::unique_ptr<KernelDemand> kernel;
  std::unique_ptr<LogisticDemand> logistic;
  const DemandModel& get(DemandKind k) {
    if (k == DemandKind::kernel) {
      if (!kernel) kernel = std::make_unique<KernelDemand>(fit_kernel_demand(*data));
      return *kernel;
    }
    if (!logistic) logistic = std::make_unique<LogisticDemand>(fit_logistic_demand(*data));
    return *logistic;
  }
};

LearnerOutput fit_learner(const LearnerSpec& l, const ExperimentConfig& cfg, const Dataset& data,
                          DemandCache& demand, std::uint64_t seed) {
  const std::size_t m = data.feature_dim();
  const std::vector<double> th0(m, cfg.theta0);
  SolverConfig search = cfg.search;
  search.seed = seed;
  SolverConfig convex = cfg.convex;
  convex.seed = seed;

  auto run_cv = [&](std::vector<LossSpec> grid) {
    CvOptions opt;
    opt.max_eval_points = cfg.cv_max_eval_points;
    opt.seed = seed;
    opt.theta0 = cfg.theta0;
    opt.holdout_fraction = cfg.cv_holdout;
    const CvResult r = cross_validate(grid, data, demand.get(cfg.cv_demand), convex, opt);
    return LearnerOutput{r.chosen_policy(), describe_choice(r)};
  };
  auto custom_grid = [&](LossKind kind) {
    if (l.grid.empty()) return default_cv_grid(kind);
    std::vector<LossSpec> g;
    for (double v : l.grid) g.push_back(kind == LossKind::hinge ? LossSpec::hinge(v) : LossSpec::quantile(v));
    return g;
  };

  if (l.kind == "hinge_cv") return run_cv(custom_grid(LossKind::hinge));
  if (l.kind == "quantile_cv") return run_cv(custom_grid(LossKind::quantile));
  if (l.kind == "eps_cv") return run_cv(default_cv_grid(LossKind::eps_insensitive));
  if (l.kind == "hinge" || l.kind == "quantile" || l.kind == "eps") {
    const LossSpec spec = l.kind == "hinge"      ? LossSpec::hinge(l.param)
                          : l.kind == "quantile" ? LossSpec::quantile(l.param)
                                                 : LossSpec::eps_insensitive(l.c1, l.c2);
    return {fit_convex(spec, data, convex, th0).policy, spec.describe()};
  }
  if (l.kind == "dm_logistic") {
    const auto& d = demand.get(DemandKind::logistic);
    const auto* ld = dynamic_cast<const LogisticDemand*>(&d);
    const std::string note = ld && ld->separation_warning() ? "separation warning" : "";
    return {direct_method_policy(d, data, search, {th0}).policy, note};
  }
  if (l.kind == "dm_kernel") return {direct_method_policy(demand.get(DemandKind::kernel), data, search, {th0}).policy, ""};
  if (l.kind == "kernel_ipw") {
    return {kernel_ipw_policy(data, l.bandwidth, search, {th0}).policy, "h=" + format_double(l.bandwidth)};
  }
  if (l.kind == "model_free") return {model_free_policy(data, search, {th0}).policy, ""};
  throw Error("unknown learner kind " + l.kind);
}

void run_task(const ExperimentConfig& cfg, const Task& t, ResultRow* rows) {
  const Scenario& base = cfg.scenarios[t.s];
  const std::size_t n = cfg.n_grid[t.ni];
  const std::uint64_t dseed = data_seed(cfg.base_seed, t.s, n, t.rep);
  const std::size_t L = cfg.learners.size();
  for (std::size_t l = 0; l < L; ++l) {
    ResultRow& r = rows[l];
    r.scenario_index = t.s;
    r.learner_index = l;
    r.n_index = t.ni;
    r.scenario = base.name;
    r.learner = cfg.learners[l].name;
    r.n = n;
    r.rep = t.rep;
    r.seed = learner_seed(dseed, l);
  }

  Scenario sc = base;
  sc.n = n;
  sc.seed = dseed;
  std::optional<Generated> gen;
  OraclePolicy oracle;
  std::vector<double> test_x;
  try {
    gen = generate(sc);
    oracle = oracle_policy(gen->instance, cfg.oracle_n, dseed, cfg.oracle);
    Rng trng = make_stream(dseed, Stream::test_features);
    test_x = sample_features(sc, cfg.test_size, trng);
  } catch (const std::exception& e) {
    for (std::size_t l = 0; l < L; ++l) rows[l].status = "error: setup: " + sanitize(e.what());
    return;
  }

  DemandCache demand{&gen->data, nullptr, nullptr};
  for (std::size_t l = 0; l < L; ++l) {
    ResultRow& r = rows[l];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const LearnerOutput out = fit_learner(cfg.learners[l], cfg, gen->data, demand, r.seed);
      r.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      r.distance = distance_to_oracle(out.policy, oracle.policy, test_x);
      const RevenueEstimate rev = true_expected_revenue(out.policy, gen->instance, test_x);
      r.revenue = rev.mean;
      r.revenue_se = rev.se;
      r.detail = sanitize(out.detail);
      if (!std::isfinite(r.distance) || !std::isfinite(r.revenue)) r.status = "error: non-finite result";
    } catch (const std::exception& e) {
      r.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      r.status = "error: " + sanitize(e.what());
    }
  }
}

}  // namespace

ExperimentResults run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
      for (int rep = 0; rep < cfg.replications; ++rep) tasks.push_back({s, ni, rep});
    }
  }
  const std::size_t L = cfg.learners.size();
  ExperimentResults res;
  res.rows.resize(tasks.size() * L);
  std::size_t done = 0;
  const auto nt = static_cast<long long>(tasks.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < nt; ++i) {
    const Task& t = tasks[static_cast<std::size_t>(i)];
    run_task(cfg, t, res.rows.data() + static_cast<std::size_t>(i) * L);
#pragma omp critical(experiment_progress)
    {
      ++done;
      if (progress) {
        std::ostringstream os;
        os << "[" << done << "/" << tasks.size() << "] " << cfg.scenarios[t.s].name << " n=" << cfg.n_grid[t.ni]
           << " rep=" << t.rep;
        progress(os.str());
      }
    }
  }
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.scenario_index, a.learner_index, a.n_index, a.rep) <
           std::tie(b.scenario_index, b.learner_index, b.n_index, b.rep);
  });
  res.summary = summarize(res.rows);
  return res;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::size_t i = 0;
  auto mean_se = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) return {std::nan(""), std::nan("")};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    if (v.size() < 2) return {m, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
  };
  while (i < rows.size()) {
    std::size_t j = i;
    std::vector<double> d, r;
    SummaryRow s;
    s.scenario = rows[i].scenario;
    s.learner = rows[i].learner;
    s.n = rows[i].n;
    while (j < rows.size() && rows[j].scenario_index == rows[i].scenario_index &&
           rows[j].learner_index == rows[i].learner_index && rows[j].n_index == rows[i].n_index) {
      ++s.reps;
      if (rows[j].status == "ok") {
        d.push_back(rows[j].distance);
        r.push_back(rows[j].revenue);
      } else {
        ++s.failures;
      }
      ++j;
    }
    std::tie(s.distance_mean, s.distance_se) = mean_se(d);
    std::tie(s.revenue_mean, s.revenue_se) = mean_se(r);
    out.push_back(s);
    i = j;
  }
  return out;
}

namespace {

std::string num(double v) { return std::isfinite(v) ? format_double(v) : "NA"; }

}  // namespace

void write_results_csv(const std::vector<ResultRow>& rows, bool timing, std::ostream& out) {
  out << "# schema: " << kResultsSchema
      << " columns=scenario,learner,n,rep,seed,distance,revenue,revenue_se,fit_seconds,status,detail\n";
  out << "scenario,learner,n,rep,seed,distance,revenue,revenue_se,fit_seconds,status,detail\n";
  for (const auto& r : rows) {
    const bool ok = r.status == "ok";
    out << r.scenario << ',' << r.learner << ',' << r.n << ',' << r.rep << ',' << r.seed << ','
        << (ok ? num(r.distance) : "NA") << ',' << (ok ? num(r.revenue) : "NA") << ','
        << (ok ? num(r.revenue_se) : "NA") << ',' << (timing ? num(r.fit_seconds) : "NA") << ',' << r.status << ','
        << r.detail << '\n';
  }
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << "# schema: " << kResultsSchema << "-summary\n";
  out << "scenario,learner,n,reps,failures,distance_mean,distance_se,revenue_mean,revenue_se\n";
  for (const auto& s : rows) {
    out << s.scenario << ',' << s.learner << ',' << s.n << ',' << s.reps << ',' << s.failures << ','
        << num(s.distance_mean) << ',' << num(s.distance_se) << ',' << num(s.revenue_mean) << ','
        << num(s.revenue_se) << '\n';
  }
}

}  // namespace pricing
