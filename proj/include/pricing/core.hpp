#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pricing/rng.hpp"

namespace pricing {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One logged posted-price transaction, without its features.
struct Observation {
  double price = 0.0;
  int sold = 0;
  /// Density of the logged price under the historical policy.
  double propensity = 1.0;
};

struct Sample {
  std::vector<double> features;
  Observation obs;
};

class PropensityModel;

/// Row-major feature matrix plus per-sample price, sale flag and propensity.
///
/// Structural invariants (shared feature dimension) are enforced on insertion;
/// value constraints are reported by validate_dataset() instead.
class Dataset {
 public:
  explicit Dataset(std::size_t feature_dim);

  /// Throws if features.size() != feature_dim().
  void add(std::span<const double> features, double price, int sold,
           double propensity = std::numeric_limits<double>::quiet_NaN());
  void add(const Sample& s) { add(s.features, s.obs.price, s.obs.sold, s.obs.propensity); }

  std::size_t size() const { return prices_.size(); }
  bool empty() const { return prices_.empty(); }
  std::size_t feature_dim() const { return dim_; }

  std::span<const double> features(std::size_t i) const {
    return {features_.data() + i * dim_, dim_};
  }
  Observation observation(std::size_t i) const { return {prices_[i], sold_[i], propensity_[i]}; }
  Sample sample(std::size_t i) const;

  const std::vector<double>& feature_matrix() const { return features_; }
  const std::vector<double>& prices() const { return prices_; }
  const std::vector<int>& sold() const { return sold_; }
  const std::vector<double>& propensities() const { return propensity_; }

  /// True when every sample carries a propensity value.
  bool has_propensities() const;
  /// Fills every propensity with model.density(price).
  void assign_propensities(const PropensityModel& model);

  /// Subset in the given index order.
  Dataset subset(std::span<const std::size_t> indices) const;

  double mean_price() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::size_t dim_;
  std::vector<double> features_;
  std::vector<double> prices_;
  std::vector<int> sold_;
  std::vector<double> propensity_;
};

struct Violation {
  std::size_t index;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary(std::size_t max_items = 5) const;
};

ValidationReport validate_dataset(const Dataset& data);
/// Same checks for raw samples, including feature-dimension mismatch.
ValidationReport validate_samples(std::span<const Sample> samples, std::size_t feature_dim);

/// Historical (logging) price distribution.
class PropensityModel {
 public:
  enum class Kind { uniform, triangular, exponential, lognormal };

  static PropensityModel uniform(double a, double b);
  static PropensityModel triangular(double low, double mode, double high);
  /// Exponential with the given scale (mean above location).
  static PropensityModel exponential(double scale, double location = 0.0);
  /// Exponential parameterized by rate; Exp(0.4) in the skewed-logging setup means rate 0.4.
  static PropensityModel exponential_rate(double rate, double location = 0.0) {
    if (!(rate > 0.0)) throw Error("exponential propensity: rate must be > 0");
    return exponential(1.0 / rate, location);
  }
  static PropensityModel lognormal(double mu, double sigma);

  /// Parses "uniform:a,b", "triangular:l,m,h", "exponential:scale[,loc]",
  /// "exponential_rate:rate[,loc]" or "lognormal:mu,sigma".
  static PropensityModel parse(const std::string& text);
  std::string to_string() const;

  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }

  double density(double p) const;
  double cdf(double p) const;
  double sample(Rng& rng) const;
  /// Support endpoints; upper is +inf for exponential and lognormal.
  std::pair<double, double> support() const;

 private:
  PropensityModel(Kind k, std::vector<double> params) : kind_(k), params_(std::move(params)) {}
  Kind kind_;
  std::vector<double> params_;
};

/// Maximum-likelihood log-normal fit: mu and population SD of log-prices.
PropensityModel fit_lognormal_propensity(std::span<const double> prices);

/// Price(x) = <theta, x>, with an optional trailing intercept coefficient.
struct LinearPolicy {
  std::vector<double> theta;
  bool includes_intercept = false;

  std::size_t feature_dim() const { return includes_intercept ? theta.size() - 1 : theta.size(); }
  double price(std::span<const double> x) const;
};

/// CSV with header x0,...,x{m-1},price,sold[,propensity].
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::istream& in, const std::string& source_name = "<stream>");
void save_csv(const Dataset& data, const std::filesystem::path& path);
void write_csv(const Dataset& data, std::ostream& out);

/// 17 significant digits; round-trips every finite double.
std::string format_double(double v);

}  // namespace pricing
