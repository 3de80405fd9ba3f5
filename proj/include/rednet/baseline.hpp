#pragma once

// Reference fusion scorer: L2-regularized logistic regression on standardized
// features. It produces hab_prob so the evaluation machinery runs end to end
// without an external gradient-boosting model.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rednet/record.hpp"

namespace rednet {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Default feature set: log1p(chlor_a), kd490, nflh, sst, fai_mean, ndwi_mean,
// rednir_mean, det_mean, sin_m, cos_m.
std::vector<std::string> default_features();

// Also accepts "chlor_a" (raw) and "chlor_a_over_kd490". Throws
// std::invalid_argument for an unknown name.
std::optional<double> feature_value(const SampleRecord& r, const std::string& name);

struct LinearScorer {
  std::vector<std::string> feature_list;
  std::vector<double> feature_means;
  std::vector<double> feature_sds;
  std::vector<double> weights;
  double bias = 0.0;

  bool operator==(const LinearScorer&) const = default;
};

struct FitOptions {
  double l2 = 1e-3;
  int iters = 500;
  double lr = 0.5;
};

struct FitResult {
  LinearScorer model;
  // Objective value before the first step and after each iteration.
  std::vector<double> loss_trace;
};

// Full-batch gradient descent from zero init on mean log-loss plus
// (l2/2)*|w|^2 (bias unpenalized). Each iteration takes a bias step and then a
// weight step, each halving its step size until the objective does not
// increase. Rows with missing y_final are ignored. Throws FitError when the
// labelled rows are single-class.
FitResult fit_traced(std::span<const SampleRecord> train, const std::vector<std::string>& features,
                     const FitOptions& opt = {});
LinearScorer fit(std::span<const SampleRecord> train, const std::vector<std::string>& features,
                 const FitOptions& opt = {});

// logistic(bias + w . z) with z the standardized features; missing features
// standardize to 0 (train-mean imputation).
double score(const LinearScorer& model, const SampleRecord& r);

nlohmann::ordered_json to_json(const LinearScorer& m);
LinearScorer linear_scorer_from_json(const nlohmann::ordered_json& j);

}  // namespace rednet
