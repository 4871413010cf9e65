// pricing: command-line front end for the surrogate-loss pricing library.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "pricing/bounds.hpp"
#include "pricing/experiment.hpp"
#include "pricing/policies.hpp"
#include "pricing/solver.hpp"
#include "pricing/synthetic.hpp"

using namespace pricing;

namespace {

// Writes to the file when a path is given, else to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw Error("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<double> parse_param_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_double(item, "--params"));
  }
  if (out.empty()) throw Error("--params: expected a comma-separated list of numbers");
  return out;
}

LossSpec make_loss(const std::string& loss, std::optional<double> param, std::optional<double> c1,
                   std::optional<double> c2, double bandwidth) {
  switch (parse_loss_kind(loss)) {
    case LossKind::hinge: return LossSpec::hinge(param.value_or(0.8234));
    case LossKind::quantile: return LossSpec::quantile(param.value_or(0.209));
    case LossKind::eps_insensitive: {
      auto finite = [](std::optional<double> v) { return v && std::isfinite(*v) ? v : std::nullopt; };
      return LossSpec::eps_insensitive(finite(c1), finite(c2));
    }
    case LossKind::model_free: return LossSpec::model_free();
    case LossKind::kernel_ipw: return LossSpec::kernel_ipw(bandwidth);
  }
  throw Error("unknown loss");
}

Dataset load_with_propensity(const std::string& path, const std::string& model) {
  Dataset data = load_csv(path);
  if (model == "lognormal:fit") {
    data.assign_propensities(fit_lognormal_propensity(data.prices()));
  } else if (!model.empty()) {
    data.assign_propensities(PropensityModel::parse(model));
  } else if (!data.has_propensities()) {
    throw Error(path +
                " has no propensity column; pass --propensity-model (e.g. uniform:1,3 or lognormal:fit)");
  }
  return data;
}

void write_policy(std::ostream& out, const LinearPolicy& pol, const std::string& loss, double objective,
                  std::uint64_t seed, int iterations, bool converged) {
  out << "# loss=" << loss << " objective=" << format_double(objective) << " seed=" << seed
      << " iterations=" << iterations << " converged=" << (converged ? "true" : "false") << '\n';
  const std::size_t m = pol.feature_dim();
  for (std::size_t j = 0; j < m; ++j) out << (j ? "," : "") << "theta" << j;
  if (pol.includes_intercept) out << ",intercept";
  out << '\n';
  for (std::size_t j = 0; j < pol.theta.size(); ++j) out << (j ? "," : "") << format_double(pol.theta[j]);
  out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual pricing with convex surrogate losses"};
  app.require_subcommand(1);

  // bounds
  auto* bounds_cmd = app.add_subcommand("bounds", "Revenue-ratio lower bound over a parameter range (CSV)");
  std::string b_kind, b_out;
  double b_min = 0.0, b_max = 0.0;
  int b_steps = 0;
  bounds_cmd->add_option("--kind", b_kind, "hinge or quantile")->required();
  bounds_cmd->add_option("--min", b_min, "Smallest parameter")->required();
  bounds_cmd->add_option("--max", b_max, "Largest parameter")->required();
  bounds_cmd->add_option("--steps", b_steps, "Number of grid points (>= 1)")->required();
  bounds_cmd->add_option("--out", b_out, "Output CSV (default stdout)");

  // tightness
  auto* tight_cmd = app.add_subcommand("tightness", "Bound tightness on the worst-case distributions (CSV)");
  std::string t_kind, t_params, t_out;
  tight_cmd->add_option("--kind", t_kind, "hinge_below, hinge_above, quantile_below or quantile_above")->required();
  tight_cmd->add_option("--params", t_params, "Comma-separated parameters")->required();
  tight_cmd->add_option("--out", t_out, "Output CSV (default stdout)");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a linear pricing policy to a transaction CSV");
  std::string f_data, f_loss, f_out, f_prop;
  std::optional<double> f_param, f_c1, f_c2, f_lambda;
  double f_bw = 0.2, f_cap = 100.0, f_tol = 1e-9, f_wcap = std::numeric_limits<double>::infinity();
  int f_iters = 50000, f_starts = 10;
  std::uint64_t f_seed = 0;
  bool f_intercept = false, f_bound_lambda = false;
  fit_cmd->add_option("--data", f_data, "Transaction CSV")->required();
  fit_cmd->add_option("--loss", f_loss, "hinge, quantile, eps_insensitive, model_free or kernel_ipw")->required();
  fit_cmd->add_option("--param", f_param, "c (hinge) or tau (quantile)");
  fit_cmd->add_option("--c1", f_c1, "eps_insensitive upper factor (omit for +inf)");
  fit_cmd->add_option("--c2", f_c2, "eps_insensitive lower factor (omit for -inf)");
  fit_cmd->add_option("--bandwidth", f_bw, "kernel_ipw bandwidth");
  fit_cmd->add_option("--propensity-model", f_prop,
                      "Fill propensities from a model: uniform:a,b | triangular:l,m,h | exponential:scale[,loc] | "
                      "exponential_rate:rate[,loc] | lognormal:mu,sigma | lognormal:fit");
  fit_cmd->add_option("--lambda", f_lambda, "Ridge weight");
  fit_cmd->add_flag("--bound-lambda", f_bound_lambda, "Use the generalization-bound ridge weight (hinge / quantile)");
  fit_cmd->add_option("--norm-cap", f_cap, "Bound B on ||theta||");
  fit_cmd->add_option("--weight-cap", f_wcap, "Clip on inverse propensity weights");
  fit_cmd->add_option("--max-iters", f_iters, "Iteration budget (convex losses)");
  fit_cmd->add_option("--tol", f_tol, "Relative tolerance (convex losses)");
  fit_cmd->add_option("--multistarts", f_starts, "Starts for pattern search (non-convex losses)");
  fit_cmd->add_option("--seed", f_seed, "Seed");
  fit_cmd->add_flag("--intercept", f_intercept, "Add an intercept (convex losses)");
  fit_cmd->add_option("--out", f_out, "Policy file (default stdout)");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Run a synthetic benchmark described by a config file");
  std::string e_config, e_outdir;
  bool e_timing = false, e_quiet = false;
  exp_cmd->add_option("--config", e_config, "Config file")->required()->check(CLI::ExistingFile);
  exp_cmd->add_option("--out-dir", e_outdir, "Override output_dir from the config");
  exp_cmd->add_flag("--timing", e_timing, "Record fit_seconds (makes output run-dependent)");
  exp_cmd->add_flag("--quiet", e_quiet, "No progress on stderr");

  // crossval
  auto* cv_cmd = app.add_subcommand("crossval", "Cross-validate a convex loss parameter on a transaction CSV");
  std::string cv_data, cv_loss, cv_demand = "kernel", cv_out, cv_prop, cv_grid;
  int cv_iters = 50000;
  std::size_t cv_eval = 0;
  double cv_theta0 = 0.5, cv_holdout = 0.0;
  std::uint64_t cv_seed = 0;
  cv_cmd->add_option("--data", cv_data, "Transaction CSV")->required();
  cv_cmd->add_option("--loss", cv_loss, "hinge, quantile or eps_insensitive")->required();
  cv_cmd->add_option("--demand", cv_demand, "Demand model used to score candidates: kernel or logistic");
  cv_cmd->add_option("--grid", cv_grid, "Comma-separated parameters (hinge / quantile; default grid otherwise)");
  cv_cmd->add_option("--propensity-model", cv_prop, "Fill propensities from a model (see fit)");
  cv_cmd->add_option("--max-iters", cv_iters, "Iteration budget per fit");
  cv_cmd->add_option("--max-eval-points", cv_eval, "Subsample size for revenue estimates (0 = all)");
  cv_cmd->add_option("--holdout", cv_holdout, "Fraction of rows held out for revenue estimates (0 = reuse training rows)");
  cv_cmd->add_option("--theta0", cv_theta0, "Initial value of every coefficient");
  cv_cmd->add_option("--seed", cv_seed, "Seed");
  cv_cmd->add_option("--out", cv_out, "Output CSV (default stdout)");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic transaction CSV");
  std::string s_family = "uniform_band", s_g = "linear", s_price, s_out;
  std::size_t s_n = 1000, s_dim = 2;
  std::uint64_t s_seed = 0;
  std::vector<double> s_features;
  bool s_no_prop = false;
  sim_cmd->add_option("--family", s_family, "uniform_band, shifted_exponential or constant");
  sim_cmd->add_option("--g", s_g, "linear or step");
  sim_cmd->add_option("--n", s_n, "Number of rows");
  sim_cmd->add_option("--dim", s_dim, "Feature dimension");
  sim_cmd->add_option("--features", s_features, "Feature box lo hi")->expected(2);
  sim_cmd->add_option("--price-law", s_price, "Logging price distribution (default per family)");
  sim_cmd->add_option("--seed", s_seed, "Seed");
  sim_cmd->add_flag("--no-propensity", s_no_prop, "Omit the propensity column");
  sim_cmd->add_option("--out", s_out, "Output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bounds_cmd) {
      if (b_steps < 1) {
        std::cerr << "error: --steps must be >= 1\n" << app.help();
        return 2;
      }
      const auto family = bounds::parse_family(b_kind);
      if (b_steps > 1 && !(b_max > b_min)) throw Error("--max must exceed --min");
      std::vector<double> grid(static_cast<std::size_t>(b_steps));
      for (int i = 0; i < b_steps; ++i) {
        grid[static_cast<std::size_t>(i)] = b_steps == 1 ? b_min : b_min + (b_max - b_min) * i / (b_steps - 1);
      }
      const auto curve = bounds::bound_curve(family, grid);
      Output out(b_out);
      out.stream() << "param,value,branch\n";
      for (std::size_t i = 0; i < grid.size(); ++i) {
        out.stream() << format_double(curve.parameter_grid[i]) << ',' << format_double(curve.values[i]) << ','
                     << bounds::to_string(curve.branch[i]) << '\n';
      }
      return 0;
    }

    if (*tight_cmd) {
      const auto kind = bounds::parse_worst_case(t_kind);
      const auto params = parse_param_list(t_params);
      Output out(t_out);
      out.stream() << "param,bound,achieved,gap,case,status\n";
      int failures = 0;
      for (double p : params) {
        try {
          const auto r = bounds::verify_tightness(kind, p);
          out.stream() << format_double(p) << ',' << format_double(r.bound_value) << ','
                       << format_double(r.achieved_ratio) << ',' << format_double(r.gap) << ','
                       << bounds::to_string(kind) << ",ok\n";
        } catch (const Error& e) {
          ++failures;
          std::string msg = e.what();
          for (auto& ch : msg) ch = ch == ',' ? ';' : ch;
          out.stream() << format_double(p) << ",NA,NA,NA," << bounds::to_string(kind) << ",invalid: " << msg
                       << '\n';
        }
      }
      return 0;
    }

    if (*fit_cmd) {
      Dataset data = load_with_propensity(f_data, f_prop);
      if (auto rep = validate_dataset(data); !rep.ok()) throw Error("invalid dataset: " + rep.summary());
      const LossSpec spec = make_loss(f_loss, f_param, f_c1, f_c2, f_bw);
      SolverConfig cfg;
      cfg.max_iters = f_iters;
      cfg.tol = f_tol;
      cfg.norm_cap = f_cap;
      cfg.weight_cap = f_wcap;
      cfg.seed = f_seed;
      cfg.multistarts = f_starts;
      if (f_lambda) cfg.reg_lambda = *f_lambda;
      if (f_bound_lambda) {
        if (spec.kind() != LossKind::hinge && spec.kind() != LossKind::quantile) {
          throw Error("--bound-lambda applies to hinge and quantile losses only");
        }
        double dmin = std::numeric_limits<double>::infinity();
        for (double p : data.propensities()) dmin = std::min(dmin, p);
        cfg.reg_lambda = bound_lambda(spec.param(), dmin, f_cap, data.size());
      }
      FitResult r;
      if (spec.is_convex()) {
        r = fit_convex(spec, data, cfg, std::nullopt, f_intercept);
      } else {
        if (f_intercept) throw Error("--intercept is only supported for convex losses");
        r = spec.kind() == LossKind::model_free ? model_free_policy(data, cfg) : kernel_ipw_policy(data, f_bw, cfg);
      }
      Output out(f_out);
      write_policy(out.stream(), r.policy, spec.describe(), r.objective, f_seed, r.iterations, r.converged);
      return 0;
    }

    if (*exp_cmd) {
      ExperimentConfig cfg = parse_experiment_config(Config::load(e_config));
      if (!e_outdir.empty()) cfg.output_dir = e_outdir;
      if (e_timing) cfg.timing = true;
      ProgressFn progress;
      if (!e_quiet) progress = [](const std::string& s) { std::cerr << s << '\n'; };
      const auto res = run_experiment(cfg, progress);
      std::filesystem::create_directories(cfg.output_dir);
      {
        std::ofstream f(cfg.output_dir / "results.csv");
        write_results_csv(res.rows, cfg.timing, f);
      }
      {
        std::ofstream f(cfg.output_dir / "summary.csv");
        write_summary_csv(res.summary, f);
      }
      std::size_t failed = 0;
      for (const auto& r : res.rows) failed += r.status != "ok";
      if (!e_quiet) {
        std::cerr << "wrote " << res.rows.size() << " rows (" << failed << " failed) to "
                  << (cfg.output_dir / "results.csv").string() << '\n';
      }
      return 0;
    }

    if (*cv_cmd) {
      Dataset data = load_with_propensity(cv_data, cv_prop);
      const LossKind kind = parse_loss_kind(cv_loss);
      std::vector<LossSpec> grid;
      if (!cv_grid.empty()) {
        for (double v : parse_param_list(cv_grid)) {
          if (kind == LossKind::hinge) grid.push_back(LossSpec::hinge(v));
          else if (kind == LossKind::quantile) grid.push_back(LossSpec::quantile(v));
          else throw Error("--grid is only supported for hinge and quantile");
        }
      } else {
        grid = default_cv_grid(kind);
      }
      const auto demand = fit_demand(parse_demand_kind(cv_demand), data);
      SolverConfig cfg;
      cfg.max_iters = cv_iters;
      cfg.seed = cv_seed;
      CvOptions opt;
      opt.max_eval_points = cv_eval;
      opt.seed = cv_seed;
      opt.theta0 = cv_theta0;
      opt.holdout_fraction = cv_holdout;
      const CvResult r = cross_validate(grid, data, *demand, cfg, opt);
      Output out(cv_out);
      out.stream() << "loss,estimated_revenue,chosen";
      for (std::size_t j = 0; j < data.feature_dim(); ++j) out.stream() << ",theta" << j;
      out.stream() << '\n';
      for (std::size_t k = 0; k < grid.size(); ++k) {
        std::string d = grid[k].describe();
        for (auto& ch : d) ch = ch == ',' ? ';' : ch;
        out.stream() << d << ',' << format_double(r.estimated_revenues[k]) << ',' << (k == r.chosen_index ? 1 : 0);
        for (double t : r.policies[k].theta) out.stream() << ',' << format_double(t);
        out.stream() << '\n';
      }
      return 0;
    }

    if (*sim_cmd) {
      const auto fam = parse_valuation_family(s_family);
      const auto g = parse_g_kind(s_g);
      Scenario sc = fam == ValuationFamily::shifted_exponential ? Scenario::shifted_exponential(g)
                                                                 : Scenario::uniform_band(g);
      sc.family = fam;
      sc.feature_dim = s_dim;
      if (!s_features.empty()) {
        sc.feature_lo = s_features[0];
        sc.feature_hi = s_features[1];
      }
      if (!s_price.empty()) sc.price_law = PropensityModel::parse(s_price);
      sc.n = s_n;
      sc.seed = s_seed;
      Generated gen = generate(sc);
      if (s_no_prop) {
        Dataset bare(gen.data.feature_dim());
        for (std::size_t i = 0; i < gen.data.size(); ++i) {
          bare.add(gen.data.features(i), gen.data.prices()[i], gen.data.sold()[i]);
        }
        gen.data = std::move(bare);
      }
      Output out(s_out);
      write_csv(gen.data, out.stream());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
