#include "pricing/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace pricing {

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::size_t feature_dim) : dim_(feature_dim) {
  if (feature_dim == 0) throw Error("dataset: feature dimension must be positive");
}

void Dataset::add(std::span<const double> features, double price, int sold, double propensity) {
  if (features.size() != dim_) {
    throw Error("dataset: sample has " + std::to_string(features.size()) + " features, expected " +
                std::to_string(dim_));
  }
  features_.insert(features_.end(), features.begin(), features.end());
  prices_.push_back(price);
  sold_.push_back(sold);
  propensity_.push_back(propensity);
}

Sample Dataset::sample(std::size_t i) const {
  auto x = features(i);
  return Sample{{x.begin(), x.end()}, observation(i)};
}

bool Dataset::has_propensities() const {
  return std::none_of(propensity_.begin(), propensity_.end(), [](double v) { return std::isnan(v); });
}

void Dataset::assign_propensities(const PropensityModel& model) {
  for (std::size_t i = 0; i < size(); ++i) propensity_[i] = model.density(prices_[i]);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out(dim_);
  for (auto i : indices) out.add(features(i), prices_[i], sold_[i], propensity_[i]);
  return out;
}

double Dataset::mean_price() const {
  if (prices_.empty()) return 0.0;
  return std::accumulate(prices_.begin(), prices_.end(), 0.0) / static_cast<double>(prices_.size());
}

// ---------------------------------------------------------------------------
// Validation

std::string ValidationReport::summary(std::size_t max_items) const {
  if (ok()) return "ok";
  std::ostringstream os;
  os << violations.size() << " violation(s)";
  for (std::size_t k = 0; k < std::min(max_items, violations.size()); ++k) {
    os << "; sample " << violations[k].index << ": " << violations[k].message;
  }
  return os.str();
}

namespace {

void check_observation(std::size_t i, const Observation& o, std::vector<Violation>& out) {
  if (std::isnan(o.propensity)) {
    out.push_back({i, "propensity unset (apply a propensity model)"});
  } else if (!(o.propensity > 0.0) || !std::isfinite(o.propensity)) {
    out.push_back({i, "overlap violated: propensity must be positive"});
  }
  if (!(o.price > 0.0) || !std::isfinite(o.price)) out.push_back({i, "price must be positive"});
  if (o.sold != 0 && o.sold != 1) out.push_back({i, "sale indicator not binary"});
}

}  // namespace

ValidationReport validate_dataset(const Dataset& data) {
  ValidationReport r;
  for (std::size_t i = 0; i < data.size(); ++i) {
    check_observation(i, data.observation(i), r.violations);
    for (double v : data.features(i)) {
      if (!std::isfinite(v)) {
        r.violations.push_back({i, "non-finite feature value"});
        break;
      }
    }
  }
  return r;
}

ValidationReport validate_samples(std::span<const Sample> samples, std::size_t feature_dim) {
  ValidationReport r;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].features.size() != feature_dim) {
      r.violations.push_back({i, "feature dimension mismatch: got " +
                                     std::to_string(samples[i].features.size()) + ", expected " +
                                     std::to_string(feature_dim)});
    }
    check_observation(i, samples[i].obs, r.violations);
  }
  return r;
}

// ---------------------------------------------------------------------------
// PropensityModel

PropensityModel PropensityModel::uniform(double a, double b) {
  if (!(a < b)) throw Error("uniform propensity: requires a < b");
  return {Kind::uniform, {a, b}};
}

PropensityModel PropensityModel::triangular(double low, double mode, double high) {
  if (!(low <= mode && mode <= high && low < high)) {
    throw Error("triangular propensity: requires low <= mode <= high and low < high");
  }
  return {Kind::triangular, {low, mode, high}};
}

PropensityModel PropensityModel::exponential(double scale, double location) {
  if (!(scale > 0.0)) throw Error("exponential propensity: scale must be > 0");
  return {Kind::exponential, {scale, location}};
}

PropensityModel PropensityModel::lognormal(double mu, double sigma) {
  if (!(sigma > 0.0)) throw Error("lognormal propensity: sigma must be > 0");
  return {Kind::lognormal, {mu, sigma}};
}

namespace {

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    out.push_back(std::stod(item, &pos));
  }
  return out;
}

}  // namespace

PropensityModel PropensityModel::parse(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw Error("propensity model '" + text + "': expected kind:params");
  std::string kind = text.substr(0, colon);
  std::vector<double> p;
  try {
    p = parse_number_list(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error("propensity model '" + text + "': bad parameter list");
  }
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (p.size() < lo || p.size() > hi) throw Error("propensity model '" + text + "': wrong parameter count");
  };
  if (kind == "uniform") {
    need(2, 2);
    return uniform(p[0], p[1]);
  }
  if (kind == "triangular") {
    need(3, 3);
    return triangular(p[0], p[1], p[2]);
  }
  if (kind == "exponential") {
    need(1, 2);
    return exponential(p[0], p.size() > 1 ? p[1] : 0.0);
  }
  if (kind == "exponential_rate") {
    need(1, 2);
    return exponential_rate(p[0], p.size() > 1 ? p[1] : 0.0);
  }
  if (kind == "lognormal") {
    need(2, 2);
    return lognormal(p[0], p[1]);
  }
  throw Error("propensity model: unknown kind '" + kind + "'");
}

std::string PropensityModel::to_string() const {
  static constexpr const char* names[] = {"uniform", "triangular", "exponential", "lognormal"};
  std::string s = names[static_cast<int>(kind_)];
  s += ':';
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (i) s += ',';
    s += format_double(params_[i]);
  }
  return s;
}

double PropensityModel::density(double p) const {
  const auto& q = params_;
  switch (kind_) {
    case Kind::uniform:
      return (p >= q[0] && p <= q[1]) ? 1.0 / (q[1] - q[0]) : 0.0;
    case Kind::triangular: {
      const double lo = q[0], mo = q[1], hi = q[2];
      if (p < lo || p > hi) return 0.0;
      if (p < mo) return 2.0 * (p - lo) / ((hi - lo) * (mo - lo));
      if (p == mo) return 2.0 / (hi - lo);
      return 2.0 * (hi - p) / ((hi - lo) * (hi - mo));
    }
    case Kind::exponential: {
      const double z = p - q[1];
      return z < 0.0 ? 0.0 : std::exp(-z / q[0]) / q[0];
    }
    case Kind::lognormal: {
      if (p <= 0.0) return 0.0;
      const double z = (std::log(p) - q[0]) / q[1];
      return std::exp(-0.5 * z * z) / (p * q[1] * std::sqrt(2.0 * std::numbers::pi));
    }
  }
  return 0.0;
}

double PropensityModel::cdf(double p) const {
  const auto& q = params_;
  switch (kind_) {
    case Kind::uniform:
      return std::clamp((p - q[0]) / (q[1] - q[0]), 0.0, 1.0);
    case Kind::triangular: {
      const double lo = q[0], mo = q[1], hi = q[2];
      if (p <= lo) return 0.0;
      if (p >= hi) return 1.0;
      if (p <= mo) return (p - lo) * (p - lo) / ((hi - lo) * (mo - lo));
      return 1.0 - (hi - p) * (hi - p) / ((hi - lo) * (hi - mo));
    }
    case Kind::exponential: {
      const double z = p - q[1];
      return z <= 0.0 ? 0.0 : -std::expm1(-z / q[0]);
    }
    case Kind::lognormal: {
      if (p <= 0.0) return 0.0;
      return 0.5 * std::erfc(-(std::log(p) - q[0]) / (q[1] * std::numbers::sqrt2));
    }
  }
  return 0.0;
}

double PropensityModel::sample(Rng& rng) const {
  const auto& q = params_;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  switch (kind_) {
    case Kind::uniform:
      return q[0] + (q[1] - q[0]) * unif(rng);
    case Kind::triangular: {
      const double lo = q[0], mo = q[1], hi = q[2];
      const double u = unif(rng);
      const double split = (mo - lo) / (hi - lo);
      if (u < split) return lo + std::sqrt(u * (hi - lo) * (mo - lo));
      return hi - std::sqrt((1.0 - u) * (hi - lo) * (hi - mo));
    }
    case Kind::exponential:
      return q[1] - q[0] * std::log1p(-unif(rng));
    case Kind::lognormal: {
      std::lognormal_distribution<double> d(q[0], q[1]);
      return d(rng);
    }
  }
  return 0.0;
}

std::pair<double, double> PropensityModel::support() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind_) {
    case Kind::uniform:
      return {params_[0], params_[1]};
    case Kind::triangular:
      return {params_[0], params_[2]};
    case Kind::exponential:
      return {params_[1], inf};
    case Kind::lognormal:
      return {0.0, inf};
  }
  return {0.0, inf};
}

PropensityModel fit_lognormal_propensity(std::span<const double> prices) {
  if (prices.size() < 2) throw Error("fit_lognormal_propensity: need at least 2 prices");
  double mean = 0.0;
  for (double p : prices) {
    if (!(p > 0.0)) throw Error("fit_lognormal_propensity: prices must be positive");
    mean += std::log(p);
  }
  mean /= static_cast<double>(prices.size());
  double ss = 0.0;
  for (double p : prices) {
    const double d = std::log(p) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(prices.size()));
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
    throw Error("fit_lognormal_propensity: degenerate price history (zero log-variance)");
  }
  return PropensityModel::lognormal(mean, sd);
}

// ---------------------------------------------------------------------------
// LinearPolicy

double LinearPolicy::price(std::span<const double> x) const {
  const std::size_t m = feature_dim();
  if (x.size() != m) throw Error("policy: feature dimension mismatch");
  double s = includes_intercept ? theta[m] : 0.0;
  for (std::size_t j = 0; j < m; ++j) s += theta[j] * x[j];
  return s;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double v) {
  char buf[64];
  // shortest representation that still round-trips
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    auto b = f.find_first_not_of(" \t");
    auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto res = std::from_chars(first, s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

Dataset parse_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> Error {
    return Error(source_name + ":" + std::to_string(line_no) + ": " + msg);
  };

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    header = split_fields(line);
    break;
  }
  if (header.empty()) throw Error(source_name + ": missing header");

  std::size_t m = 0;
  while (m < header.size() && header[m] == "x" + std::to_string(m)) ++m;
  if (m == 0) throw fail("missing feature columns x0..x{m-1}");
  if (m >= header.size() || header[m] != "price") throw fail("missing required column 'price'");
  if (m + 1 >= header.size() || header[m + 1] != "sold") throw fail("missing required column 'sold'");
  const bool has_prop = header.size() > m + 2;
  if (has_prop && (header.size() != m + 3 || header[m + 2] != "propensity")) {
    throw fail("unexpected columns after 'sold' (only 'propensity' allowed)");
  }
  const std::size_t ncol = header.size();

  Dataset data(m);
  std::vector<double> x(m);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto fields = split_fields(line);
    if (fields.size() != ncol) {
      throw fail("expected " + std::to_string(ncol) + " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (!parse_real(fields[j], x[j])) throw fail("malformed feature value '" + fields[j] + "'");
    }
    double price = 0.0;
    if (!parse_real(fields[m], price)) throw fail("malformed price '" + fields[m] + "'");
    int sold = 0;
    if (fields[m + 1] == "0") {
      sold = 0;
    } else if (fields[m + 1] == "1") {
      sold = 1;
    } else {
      throw fail("sold must be 0 or 1, got '" + fields[m + 1] + "'");
    }
    double prop = std::numeric_limits<double>::quiet_NaN();
    if (has_prop && !parse_real(fields[m + 2], prop)) {
      throw fail("malformed propensity '" + fields[m + 2] + "'");
    }
    data.add(x, price, sold, prop);
  }
  return data;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return parse_csv(in, path.string());
}

void write_csv(const Dataset& data, std::ostream& out) {
  const std::size_t m = data.feature_dim();
  const bool with_prop = data.has_propensities();
  for (std::size_t j = 0; j < m; ++j) out << 'x' << j << ',';
  out << "price,sold" << (with_prop ? ",propensity" : "") << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.features(i)) out << format_double(v) << ',';
    const auto o = data.observation(i);
    out << format_double(o.price) << ',' << o.sold;
    if (with_prop) out << ',' << format_double(o.propensity);
    out << '\n';
  }
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_csv(data, out);
}

}  // namespace pricing
