#pragma once

// Discrimination, thresholded and calibration-measurement metrics.
//
// AUROC is the Mann-Whitney statistic (ties count one half). AUPRC is step
// average precision: tied scores form one threshold group, and each group
// contributes its share of positives times the precision at that group.

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace rednet::metrics {

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws MetricError unless both classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Throws MetricError when there are no positives.
double auprc(std::span<const double> scores, std::span<const int> labels);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t n() const { return tp + fp + tn + fn; }
  // 0 when nothing is predicted positive.
  double precision() const;
  // 0 when there are no positives.
  double recall() const;
  double prevalence() const;
};

// Predicted positive iff score >= tau.
Confusion confusion_at(std::span<const double> scores, std::span<const int> labels, double tau);

struct ThresholdChoice {
  double tau = 0.0;
  Confusion confusion;
};

// Highest-precision threshold among the unique scores whose recall is at
// least min_recall; ties go to the higher threshold.
ThresholdChoice select_threshold_min_recall(std::span<const double> scores, std::span<const int> labels,
                                            double min_recall = 0.60);

struct RocPoint {
  double fpr, tpr;
  std::optional<double> threshold;  // empty for the (0,0) start point
};

struct PrPoint {
  double recall, precision;
  std::optional<double> threshold;  // empty for the (0,1) start point
};

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);
std::vector<PrPoint> pr_curve(std::span<const double> scores, std::span<const int> labels);

struct ReliabilityBin {
  double lo, hi;
  std::optional<double> mean_pred;  // empty when n == 0
  std::optional<double> frac_pos;
  std::size_t n = 0;
};

// Equal-width bins on [0,1]; a score of exactly 1 falls in the last bin.
// Throws MetricError when n_bins < 2.
std::vector<ReliabilityBin> reliability_curve(std::span<const double> scores, std::span<const int> labels,
                                              int n_bins = 10);

struct EvalReport {
  std::vector<RocPoint> roc_points;
  std::vector<PrPoint> pr_points;
  double auroc = 0.0;
  double auprc = 0.0;
  double prevalence = 0.0;
  double min_recall = 0.60;
  ThresholdChoice operating_point;
  std::vector<ReliabilityBin> reliability_bins;
  std::size_t n = 0;
};

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels, double min_recall = 0.60,
                    int n_bins = 10);

nlohmann::ordered_json to_json(const EvalReport& r);
nlohmann::ordered_json to_json(const Confusion& c);

}  // namespace rednet::metrics
