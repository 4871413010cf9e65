#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pricing/experiment.hpp"

using namespace pricing;
namespace fs = std::filesystem;

namespace {

Config parse(const std::string& text) {
  std::istringstream in(text);
  return Config::parse(in);
}

const char* kSmall = R"(
name = small
seed = 42
replications = 2
n_grid = 300
test_size = 500
oracle_n = 10000
solver.tol = 1e-6
solver.min_step_ratio = 1e-2
oracle.multistarts = 2
scenarios = u
scenario.u.family = uniform_band
scenario.u.g = linear
learners = hinge, quantile
learner.quantile.param = 0.209
)";

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("pricing_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PRICING_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse("# comment\n a = 1 \n\nb.c = x, y ,z # trailing\nflag = true\n");
  CHECK(c.get_int("a", 0) == 1);
  CHECK(c.get_list("b.c") == std::vector<std::string>{"x", "y", "z"});
  CHECK(c.get_bool("flag", false));
  CHECK(c.get_double("missing", 2.5) == 2.5);
  CHECK_THROWS_AS(parse("a = 1\na = 2\n"), Error);
  CHECK_THROWS_AS(parse("no equals sign\n"), Error);
  CHECK_THROWS_AS(c.get_string("missing"), Error);
  CHECK_THROWS_AS(parse("a = abc\n").get_double("a", 0.0), Error);
}

TEST_CASE("experiment config validation") {
  const auto e = parse_experiment_config(parse(kSmall));
  CHECK(e.replications == 2);
  CHECK(e.n_grid == std::vector<std::size_t>{300});
  CHECK(e.scenarios.size() == 1);
  CHECK(e.learners.size() == 2);
  CHECK(e.learners[1].param == 0.209);

  auto bad = [](const std::string& extra) { return parse_experiment_config(parse(std::string(kSmall) + extra)); };
  CHECK_THROWS_AS(bad("typo.key = 1\n"), Error);
  CHECK_THROWS_AS(bad("learner.hinge.param = 1.5\n"), Error);
  auto replace = [](std::string key, std::string value) {
    std::string t = kSmall;
    const auto at = t.find(key + " =");
    const auto eol = t.find('\n', at);
    t.replace(at, eol - at, key + " = " + value);
    return parse_experiment_config(parse(t));
  };
  CHECK_THROWS_AS(replace("n_grid", "300, 300"), Error);
  CHECK_THROWS_AS(replace("n_grid", "3000, 300"), Error);
  CHECK_THROWS_AS(replace("replications", "0"), Error);
  CHECK_THROWS_AS(replace("learners", "hinge, magic"), Error);
  CHECK_THROWS_AS(replace("scenario.u.family", "gaussian"), Error);
}

TEST_CASE("seeds: data shared across learners, distinct across reps") {
  const auto a = data_seed(1, 0, 300, 0);
  CHECK(a == data_seed(1, 0, 300, 0));
  CHECK(a != data_seed(1, 0, 300, 1));
  CHECK(a != data_seed(1, 0, 3000, 0));
  CHECK(a != data_seed(1, 1, 300, 0));
  CHECK(a != data_seed(2, 0, 300, 0));
  CHECK(learner_seed(a, 0) != learner_seed(a, 1));
}

TEST_CASE("experiment: cardinality, order and determinism") {
  const auto e = parse_experiment_config(parse(kSmall));
  const auto r = run_experiment(e);
  REQUIRE(r.rows.size() == 4);
  CHECK(r.rows[0].learner == "hinge");
  CHECK(r.rows[1].learner == "hinge");
  CHECK(r.rows[2].learner == "quantile");
  CHECK(r.rows[0].rep == 0);
  CHECK(r.rows[1].rep == 1);
  CHECK(r.rows[0].seed == learner_seed(data_seed(42, 0, 300, 0), 0));
  CHECK(r.rows[2].seed == learner_seed(data_seed(42, 0, 300, 0), 1));
  for (const auto& row : r.rows) {
    CHECK(row.status == "ok");
    CHECK(row.distance >= 0.0);
    CHECK(row.revenue > 0.0);
  }
  REQUIRE(r.summary.size() == 2);
  CHECK(r.summary[0].reps == 2);
  CHECK(r.summary[0].distance_mean == doctest::Approx(0.5 * (r.rows[0].distance + r.rows[1].distance)));

  std::ostringstream a, b;
  write_results_csv(r.rows, false, a);
  write_results_csv(run_experiment(e).rows, false, b);
  CHECK(a.str() == b.str());
  const auto ls = lines(a.str());
  REQUIRE(ls.size() == 6);
  CHECK(ls[0].rfind(std::string("# schema: ") + kResultsSchema, 0) == 0);
  CHECK(ls[1] == "scenario,learner,n,rep,seed,distance,revenue,revenue_se,fit_seconds,status,detail");
  CHECK(ls[2].find(",NA,ok,") != std::string::npos);  // timing off
}

TEST_CASE("summary statistics") {
  std::vector<ResultRow> rows(3);
  const double d[] = {1.0, 2.0, 4.0};
  for (int i = 0; i < 3; ++i) {
    rows[i].scenario = "s";
    rows[i].learner = "l";
    rows[i].n = 10;
    rows[i].rep = i;
    rows[i].distance = d[i];
    rows[i].revenue = 1.0;
  }
  rows[2].status = "failed";
  const auto s = summarize(rows);
  REQUIRE(s.size() == 1);
  CHECK(s[0].reps == 3);
  CHECK(s[0].failures == 1);
  CHECK(s[0].distance_mean == doctest::Approx(1.5));
  CHECK(s[0].distance_se == doctest::Approx(0.5));
}

TEST_CASE("cli: bounds") {
  const auto dir = scratch_dir("bounds");
  REQUIRE(run_cli("bounds --kind hinge --min 0.01 --max 1.0 --steps 100 --out " + (dir / "h.csv").string(),
                  dir / "log") == 0);
  const auto ls = lines(slurp(dir / "h.csv"));
  REQUIRE(ls.size() == 101);
  CHECK(ls[0] == "param,value,branch");
  double best = -1.0, arg = 0.0;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const double p = std::stod(ls[i]), v = std::stod(ls[i].substr(ls[i].find(',') + 1));
    if (v > best) best = v, arg = p;
  }
  CHECK(std::abs(arg - 0.82) <= 0.01 + 1e-12);

  REQUIRE(run_cli("bounds --kind quantile --min 0.5 --max 0.5 --steps 1", dir / "q.csv") == 0);
  const auto q = lines(slurp(dir / "q.csv"));
  REQUIRE(q.size() == 2);
  CHECK(std::stod(q[1].substr(q[1].find(',') + 1)) == doctest::Approx(0.5).epsilon(1e-9));

  CHECK(run_cli("bounds --kind hinge --min 0.1 --max 0.9 --steps 0", dir / "log") != 0);
  CHECK(run_cli("bounds --kind hinge --min 0.1 --max 1.5 --steps 3", dir / "log") != 0);
}

TEST_CASE("cli: tightness flags invalid parameters and continues") {
  const auto dir = scratch_dir("tight");
  REQUIRE(run_cli("tightness --kind quantile_above --params 0.25,0.6,0.4", dir / "t.csv") == 0);
  const auto ls = lines(slurp(dir / "t.csv"));
  REQUIRE(ls.size() == 4);
  CHECK(ls[0].rfind("param,bound,achieved,gap,case", 0) == 0);
  CHECK(ls[2].find("invalid") != std::string::npos);
  CHECK(ls[1].find("invalid") == std::string::npos);
  CHECK(ls[3].find("invalid") == std::string::npos);

  REQUIRE(run_cli("tightness --kind quantile_below --params 0.7", dir / "b.csv") == 0);
  const auto b = lines(slurp(dir / "b.csv"));
  std::vector<std::string> cols;
  std::istringstream in(b[1]);
  for (std::string c; std::getline(in, c, ',');) cols.push_back(c);
  CHECK(std::abs(std::stod(cols[3])) <= 1e-9);
}

TEST_CASE("cli: simulate, fit and crossval") {
  const auto dir = scratch_dir("fit");
  const auto data = (dir / "d.csv").string();
  REQUIRE(run_cli("simulate --family uniform_band --g linear --n 2000 --seed 3 --out " + data, dir / "log") == 0);
  const std::string fit = "fit --data " + data + " --loss quantile --param 0.209 --seed 1 --out ";
  REQUIRE(run_cli(fit + (dir / "p1.csv").string(), dir / "log") == 0);
  REQUIRE(run_cli(fit + (dir / "p2.csv").string(), dir / "log") == 0);
  const auto p1 = slurp(dir / "p1.csv");
  CHECK(p1 == slurp(dir / "p2.csv"));
  const auto ls = lines(p1);
  REQUIRE(ls.size() == 3);
  CHECK(ls[0].rfind("# loss=", 0) == 0);
  CHECK(ls[1] == "theta0,theta1");

  const auto bare = (dir / "bare.csv").string();
  REQUIRE(run_cli("simulate --family uniform_band --n 300 --no-propensity --out " + bare, dir / "log") == 0);
  CHECK(run_cli("fit --data " + bare + " --loss hinge --param 0.8", dir / "err") == 1);
  CHECK(slurp(dir / "err").find("--propensity-model") != std::string::npos);
  CHECK(run_cli("fit --data " + bare + " --loss hinge --param 0.8 --propensity-model uniform:1,3", dir / "ok") == 0);
  CHECK(run_cli("fit --data " + data + " --loss hinge --param 1.7", dir / "log") != 0);

  REQUIRE(run_cli("crossval --data " + data + " --loss hinge --demand logistic --out " + (dir / "cv.csv").string(),
                  dir / "log") == 0);
  const auto cv = lines(slurp(dir / "cv.csv"));
  CHECK(cv.size() == 11);
  int chosen = 0;
  for (std::size_t i = 1; i < cv.size(); ++i) chosen += cv[i].find(",1,") != std::string::npos;
  CHECK(chosen == 1);
}

TEST_CASE("cli: experiment writes results and summary") {
  const auto dir = scratch_dir("exp");
  {
    std::ofstream f(dir / "small.cfg");
    f << kSmall;
  }
  REQUIRE(run_cli("experiment --quiet --config " + (dir / "small.cfg").string() + " --out-dir " + (dir / "a").string(),
                  dir / "log") == 0);
  REQUIRE(run_cli("experiment --quiet --config " + (dir / "small.cfg").string() + " --out-dir " + (dir / "b").string(),
                  dir / "log") == 0);
  CHECK(lines(slurp(dir / "a" / "results.csv")).size() == 6);
  CHECK(slurp(dir / "a" / "results.csv") == slurp(dir / "b" / "results.csv"));
  CHECK(slurp(dir / "a" / "summary.csv") == slurp(dir / "b" / "summary.csv"));
  CHECK(run_cli("experiment --config " + (dir / "missing.cfg").string(), dir / "log") != 0);
}
