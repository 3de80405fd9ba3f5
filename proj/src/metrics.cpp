#include "rednet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rednet::metrics {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw MetricError("scores and labels differ in length");
  for (int y : labels) {
    if (y != 0 && y != 1) throw MetricError("labels must be 0 or 1");
  }
}

// Index permutation sorting scores descending; ties keep input order.
std::vector<std::size_t> order_desc(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

// Cumulative (tp, fp, threshold) at the end of each tie group, descending.
struct Step {
  std::size_t tp, fp;
  double threshold;
};

std::vector<Step> sweep(std::span<const double> scores, std::span<const int> labels) {
  auto idx = order_desc(scores);
  std::vector<Step> steps;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    const double s = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == s) {
      (labels[idx[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    steps.push_back({tp, fp, s});
  }
  return steps;
}

std::size_t count_pos(std::span<const int> labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const std::size_t pos = count_pos(labels);
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw MetricError("AUROC needs both classes");

  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum over positives of (#negatives below) + 0.5 (#negatives tied).
  double u = 0.0;
  std::size_t neg_below = 0;
  for (std::size_t i = 0; i < idx.size();) {
    const double s = scores[idx[i]];
    std::size_t p = 0, n = 0;
    while (i < idx.size() && scores[idx[i]] == s) {
      (labels[idx[i]] == 1 ? p : n) += 1;
      ++i;
    }
    u += static_cast<double>(p * neg_below) + 0.5 * static_cast<double>(p * n);
    neg_below += n;
  }
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const std::size_t pos = count_pos(labels);
  if (pos == 0) throw MetricError("AUPRC needs at least one positive");
  double ap = 0.0;
  std::size_t prev_tp = 0;
  for (const auto& st : sweep(scores, labels)) {
    if (st.tp > prev_tp) {
      const double precision = static_cast<double>(st.tp) / static_cast<double>(st.tp + st.fp);
      ap += static_cast<double>(st.tp - prev_tp) / static_cast<double>(pos) * precision;
    }
    prev_tp = st.tp;
  }
  return ap;
}

double Confusion::precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }

double Confusion::recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }

double Confusion::prevalence() const {
  return n() == 0 ? 0.0 : static_cast<double>(tp + fn) / static_cast<double>(n());
}

Confusion confusion_at(std::span<const double> scores, std::span<const int> labels, double tau) {
  check_inputs(scores, labels);
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= tau;
    if (labels[i] == 1) (predicted ? c.tp : c.fn) += 1;
    else (predicted ? c.fp : c.tn) += 1;
  }
  return c;
}

ThresholdChoice select_threshold_min_recall(std::span<const double> scores, std::span<const int> labels,
                                            double min_recall) {
  check_inputs(scores, labels);
  const std::size_t pos = count_pos(labels);
  if (pos == 0) throw MetricError("threshold selection needs at least one positive");
  const std::size_t neg = labels.size() - pos;

  std::optional<ThresholdChoice> best;
  double best_precision = -1.0;
  // Descending sweep: the first threshold reaching a precision keeps the tie.
  for (const auto& st : sweep(scores, labels)) {
    const double recall = static_cast<double>(st.tp) / static_cast<double>(pos);
    if (recall < min_recall) continue;
    const double precision = static_cast<double>(st.tp) / static_cast<double>(st.tp + st.fp);
    if (precision > best_precision) {
      best_precision = precision;
      best = ThresholdChoice{st.threshold, Confusion{st.tp, st.fp, neg - st.fp, pos - st.tp}};
    }
  }
  if (!best) throw MetricError("no threshold reaches the requested recall");
  return *best;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const std::size_t pos = count_pos(labels);
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw MetricError("ROC curve needs both classes");
  std::vector<RocPoint> pts{{0.0, 0.0, std::nullopt}};
  for (const auto& st : sweep(scores, labels)) {
    pts.push_back({static_cast<double>(st.fp) / static_cast<double>(neg),
                   static_cast<double>(st.tp) / static_cast<double>(pos), st.threshold});
  }
  return pts;
}

std::vector<PrPoint> pr_curve(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const std::size_t pos = count_pos(labels);
  if (pos == 0) throw MetricError("PR curve needs at least one positive");
  std::vector<PrPoint> pts{{0.0, 1.0, std::nullopt}};
  for (const auto& st : sweep(scores, labels)) {
    pts.push_back({static_cast<double>(st.tp) / static_cast<double>(pos),
                   static_cast<double>(st.tp) / static_cast<double>(st.tp + st.fp), st.threshold});
  }
  return pts;
}

std::vector<ReliabilityBin> reliability_curve(std::span<const double> scores, std::span<const int> labels,
                                              int n_bins) {
  check_inputs(scores, labels);
  if (n_bins < 2) throw MetricError("reliability curve needs at least 2 bins");
  std::vector<double> sum_pred(static_cast<std::size_t>(n_bins), 0.0), sum_pos(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(n_bins), 0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = std::clamp(scores[i], 0.0, 1.0);
    auto b = static_cast<std::size_t>(std::min(static_cast<int>(std::floor(s * n_bins)), n_bins - 1));
    sum_pred[b] += scores[i];
    sum_pos[b] += labels[i];
    ++count[b];
  }
  std::vector<ReliabilityBin> bins;
  for (int k = 0; k < n_bins; ++k) {
    const auto b = static_cast<std::size_t>(k);
    ReliabilityBin bin{static_cast<double>(k) / n_bins, static_cast<double>(k + 1) / n_bins, std::nullopt,
                       std::nullopt, count[b]};
    if (count[b] > 0) {
      bin.mean_pred = sum_pred[b] / static_cast<double>(count[b]);
      bin.frac_pos = sum_pos[b] / static_cast<double>(count[b]);
    }
    bins.push_back(bin);
  }
  return bins;
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels, double min_recall, int n_bins) {
  EvalReport r;
  r.n = scores.size();
  r.auroc = auroc(scores, labels);
  r.auprc = auprc(scores, labels);
  r.roc_points = roc_curve(scores, labels);
  r.pr_points = pr_curve(scores, labels);
  r.min_recall = min_recall;
  r.operating_point = select_threshold_min_recall(scores, labels, min_recall);
  r.prevalence = r.operating_point.confusion.prevalence();
  r.reliability_bins = reliability_curve(scores, labels, n_bins);
  return r;
}

nlohmann::ordered_json to_json(const Confusion& c) {
  nlohmann::ordered_json j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["tn"] = c.tn;
  j["fn"] = c.fn;
  j["precision"] = c.precision();
  j["recall"] = c.recall();
  return j;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["auroc"] = r.auroc;
  j["auprc"] = r.auprc;
  j["prevalence"] = r.prevalence;
  j["min_recall"] = r.min_recall;
  j["threshold"] = r.operating_point.tau;
  j["confusion"] = to_json(r.operating_point.confusion);
  auto& roc = j["roc_points"] = nlohmann::ordered_json::array();
  for (const auto& p : r.roc_points) roc.push_back({{"fpr", p.fpr}, {"tpr", p.tpr}, {"threshold", opt(p.threshold)}});
  auto& pr = j["pr_points"] = nlohmann::ordered_json::array();
  for (const auto& p : r.pr_points) {
    pr.push_back({{"recall", p.recall}, {"precision", p.precision}, {"threshold", opt(p.threshold)}});
  }
  auto& rel = j["reliability_bins"] = nlohmann::ordered_json::array();
  for (const auto& b : r.reliability_bins) {
    rel.push_back({{"bin_lo", b.lo}, {"bin_hi", b.hi}, {"mean_pred", opt(b.mean_pred)}, {"frac_pos", opt(b.frac_pos)},
                   {"n", b.n}});
  }
  return j;
}

}  // namespace rednet::metrics
