#pragma once

// End-to-end run: ingest -> label mining -> splits -> baseline scorer ->
// ops_risk -> threshold calibration -> evaluation -> drift -> top-k.
//
// Every fitted quantity (monthly label stats, normalization stats, scorer,
// threshold pools) comes from the reference period or, inside
// cross-validation, from the training partition only.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rednet/baseline.hpp"
#include "rednet/drift.hpp"
#include "rednet/labeling.hpp"
#include "rednet/metrics.hpp"
#include "rednet/ops_risk.hpp"
#include "rednet/splits.hpp"
#include "rednet/synthetic.hpp"

namespace rednet {

inline constexpr const char* kToolVersion = "0.3.0";

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct RunConfig {
  // Input table; empty means generate the synthetic table from `synthetic`.
  std::string input;
  SyntheticConfig synthetic;
  std::string output_dir = "runs/latest";

  // Rows with timestamp <= reference_end form the reference (fitting)
  // period; later rows are the current (monitored) period.
  std::string reference_end = "2024-12-31";

  MiningConfig mining;
  int k = 5;
  std::uint64_t seed = 17;
  std::vector<std::string> temporal_cutoffs{"2022-12-31", "2023-12-31", "2024-12-31"};

  std::vector<std::string> features = default_features();
  FitOptions fit;
  // "baseline" scores hab_prob with the reference scorer; "input" keeps the
  // table's own hab_prob column.
  std::string hab_prob_source = "baseline";

  OpsRiskConfig ops;
  double min_recall = 0.60;
  int reliability_bins = 10;
  drift::DriftOptions drift;
  bool svg = false;

  // Throws std::invalid_argument on inconsistent settings.
  void check() const;
};

nlohmann::ordered_json to_json(const RunConfig& c);
// Missing keys keep their defaults.
RunConfig run_config_from_json(const nlohmann::ordered_json& j);
RunConfig load_run_config(const std::string& path);

struct Partition {
  std::vector<SampleRecord> reference;
  std::vector<SampleRecord> current;
};

Partition partition(std::span<const SampleRecord> records, const RunConfig& cfg);

// Everything the reference period fits. Serialized with to_json for
// byte-level leakage comparisons.
struct FittedParameters {
  MonthlyStats label_stats;
  NormStats norm_stats;
  LinearScorer scorer;
  ThresholdSet thresholds;
};

nlohmann::ordered_json to_json(const FittedParameters& p);

// Partitions `records` and fits on the reference period only.
FittedParameters fit_parameters(std::span<const SampleRecord> records, const RunConfig& cfg);

// Applies fitted parameters to any rows: mined labels, hab_prob (baseline
// source), ops_risk and alert state.
std::vector<ScoredRow> apply_parameters(std::span<const SampleRecord> records, const FittedParameters& p,
                                        const RunConfig& cfg);

struct FoldParameters {
  MonthlyStats label_stats;
  LinearScorer scorer;
};

nlohmann::ordered_json to_json(const FoldParameters& p);

// Fits one fold from the rows not in `test` (label stats first, then the
// scorer on train rows mined with those stats).
FoldParameters fit_fold(std::span<const SampleRecord> records, std::span<const std::size_t> train,
                        const RunConfig& cfg);

struct FoldScore {
  int fold = 0;
  std::size_t n = 0;
  std::optional<double> auroc;
  std::optional<double> auprc;
};

struct CvResult {
  std::vector<FoldScore> folds;
  // Out-of-fold predictions and labels (y_final mined with each fold's train
  // stats), in record order.
  std::vector<double> oof_scores;
  std::vector<int> oof_labels;
  metrics::EvalReport pooled;
};

CvResult group_cv(std::span<const SampleRecord> records, const RunConfig& cfg);

struct TemporalCvPair {
  std::string cutoff;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::optional<double> auroc;
  std::optional<double> auprc;
};

struct TemporalCvResult {
  std::vector<TemporalCvPair> pairs;
  std::vector<std::string> warnings;
};

TemporalCvResult temporal_cv(std::span<const SampleRecord> records, const RunConfig& cfg);

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string created_at;  // excluded from determinism comparisons
  nlohmann::ordered_json config;
  std::vector<std::pair<std::string, std::string>> inputs;     // path, sha256
  std::vector<std::pair<std::string, std::string>> artifacts;  // name, path
};

nlohmann::ordered_json to_json(const RunManifest& m);

// Runs every stage and writes the artifacts plus manifest.json into
// cfg.output_dir. Stage failures are rethrown as StageError.
RunManifest run_pipeline(const RunConfig& cfg);

std::string sha256_file(const std::string& path);

// Serialized JSON in the artifact style (2-space indent, trailing newline).
void write_json(const std::string& path, const nlohmann::ordered_json& j);
nlohmann::ordered_json read_json(const std::string& path);

}  // namespace rednet
