#include "rednet/pipeline.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "rednet/ingest.hpp"
#include "rednet/stats.hpp"
#include "rednet/svg.hpp"

namespace rednet {

namespace fs = std::filesystem;

void RunConfig::check() const {
  mining.check();
  ops.check();
  if (hab_prob_source != "baseline" && hab_prob_source != "input") {
    throw std::invalid_argument("hab_prob_source must be 'baseline' or 'input'");
  }
  if (!(min_recall >= 0.0 && min_recall <= 1.0)) throw std::invalid_argument("min_recall must be in [0,1]");
  if (reliability_bins < 2) throw std::invalid_argument("reliability_bins must be >= 2");
  if (drift.k < 1) throw std::invalid_argument("drift k must be >= 1");
  parse_date(reference_end);
  for (const auto& c : temporal_cutoffs) parse_date(c);
  for (const auto& f : features) {
    SampleRecord probe;
    feature_value(probe, f);  // throws for unknown names
  }
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["input"] = c.input;
  j["output_dir"] = c.output_dir;
  j["reference_end"] = c.reference_end;
  j["synthetic"] = {{"seed", c.synthetic.seed},
                    {"plants", c.synthetic.plants},
                    {"start", c.synthetic.start},
                    {"end", c.synthetic.end},
                    {"shift_start", c.synthetic.shift_start},
                    {"bloom_prevalence", c.synthetic.bloom_prevalence},
                    {"trusted_fraction", c.synthetic.trusted_fraction},
                    {"cloud_dropout", c.synthetic.cloud_dropout},
                    {"driver_missing", c.synthetic.driver_missing},
                    {"det_missing", c.synthetic.det_missing},
                    {"envelope_outliers", c.synthetic.envelope_outliers}};
  j["mining"] = {{"z_hi", c.mining.z_hi}, {"min_quality", c.mining.min_quality}};
  j["splits"] = {{"k", c.k}, {"seed", c.seed}, {"temporal_cutoffs", c.temporal_cutoffs}};
  j["baseline"] = {{"features", c.features},
                   {"l2", c.fit.l2},
                   {"iters", c.fit.iters},
                   {"lr", c.fit.lr},
                   {"hab_prob_source", c.hab_prob_source}};
  j["ops_risk"] = to_json(c.ops);
  j["evaluate"] = {{"min_recall", c.min_recall}, {"reliability_bins", c.reliability_bins}, {"svg", c.svg}};
  j["drift"] = {{"n_bins", c.drift.n_bins}, {"eps", c.drift.eps}, {"k", c.drift.k}};
  return j;
}

RunConfig run_config_from_json(const nlohmann::ordered_json& j) {
  RunConfig c;
  c.input = j.value("input", c.input);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.reference_end = j.value("reference_end", c.reference_end);
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    auto& t = c.synthetic;
    t.seed = s.value("seed", t.seed);
    t.plants = s.value("plants", t.plants);
    t.start = s.value("start", t.start);
    t.end = s.value("end", t.end);
    t.shift_start = s.value("shift_start", t.shift_start);
    t.bloom_prevalence = s.value("bloom_prevalence", t.bloom_prevalence);
    t.trusted_fraction = s.value("trusted_fraction", t.trusted_fraction);
    t.cloud_dropout = s.value("cloud_dropout", t.cloud_dropout);
    t.driver_missing = s.value("driver_missing", t.driver_missing);
    t.det_missing = s.value("det_missing", t.det_missing);
    t.envelope_outliers = s.value("envelope_outliers", t.envelope_outliers);
  }
  if (j.contains("mining")) {
    c.mining.z_hi = j.at("mining").value("z_hi", c.mining.z_hi);
    c.mining.min_quality = j.at("mining").value("min_quality", c.mining.min_quality);
  }
  if (j.contains("splits")) {
    const auto& s = j.at("splits");
    c.k = s.value("k", c.k);
    c.seed = s.value("seed", c.seed);
    c.temporal_cutoffs = s.value("temporal_cutoffs", c.temporal_cutoffs);
  }
  if (j.contains("baseline")) {
    const auto& b = j.at("baseline");
    c.features = b.value("features", c.features);
    c.fit.l2 = b.value("l2", c.fit.l2);
    c.fit.iters = b.value("iters", c.fit.iters);
    c.fit.lr = b.value("lr", c.fit.lr);
    c.hab_prob_source = b.value("hab_prob_source", c.hab_prob_source);
  }
  if (j.contains("ops_risk")) c.ops = ops_risk_config_from_json(j.at("ops_risk"));
  if (j.contains("evaluate")) {
    const auto& e = j.at("evaluate");
    c.min_recall = e.value("min_recall", c.min_recall);
    c.reliability_bins = e.value("reliability_bins", c.reliability_bins);
    c.svg = e.value("svg", c.svg);
  }
  if (j.contains("drift")) {
    const auto& d = j.at("drift");
    c.drift.n_bins = d.value("n_bins", c.drift.n_bins);
    c.drift.eps = d.value("eps", c.drift.eps);
    c.drift.k = d.value("k", c.drift.k);
  }
  return c;
}

RunConfig load_run_config(const std::string& path) { return run_config_from_json(read_json(path)); }

Partition partition(std::span<const SampleRecord> records, const RunConfig& cfg) {
  const Date end = parse_date(cfg.reference_end);
  Partition p;
  for (const auto& r : records) (r.timestamp <= end ? p.reference : p.current).push_back(r);
  return p;
}

nlohmann::ordered_json to_json(const FittedParameters& p) {
  nlohmann::ordered_json j;
  j["label_stats"] = to_json(p.label_stats);
  j["norm_stats"] = to_json(p.norm_stats);
  j["scorer"] = to_json(p.scorer);
  j["thresholds"] = to_json(p.thresholds);
  return j;
}

nlohmann::ordered_json to_json(const FoldParameters& p) {
  nlohmann::ordered_json j;
  j["label_stats"] = to_json(p.label_stats);
  j["scorer"] = to_json(p.scorer);
  return j;
}

namespace {

bool use_baseline(const RunConfig& cfg) { return cfg.hab_prob_source == "baseline"; }

std::optional<double> hab_prob_for(const SampleRecord& r, const LinearScorer& scorer, const RunConfig& cfg) {
  return use_baseline(cfg) ? std::optional(score(scorer, r)) : r.hab_prob;
}

std::vector<SampleRecord> subset(std::span<const SampleRecord> records, std::span<const std::size_t> idx) {
  std::vector<SampleRecord> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(records[i]);
  return out;
}

}  // namespace

FittedParameters fit_parameters(std::span<const SampleRecord> records, const RunConfig& cfg) {
  const auto part = partition(records, cfg);
  if (part.reference.empty()) throw StageError("fit", "reference period is empty (reference_end " + cfg.reference_end + ")");

  FittedParameters p;
  p.label_stats = fit_monthly_stats(part.reference);
  const auto mined = mine_labels(part.reference, p.label_stats, cfg.mining);
  if (use_baseline(cfg)) {
    try {
      p.scorer = fit(mined, cfg.features, cfg.fit);
    } catch (const FitError& e) {
      throw StageError("train-baseline", e.what());
    }
  }
  p.norm_stats = fit_norm_stats(part.reference);

  std::vector<double> hab_pool, ops_pool;
  for (auto r : part.reference) {
    r.hab_prob = hab_prob_for(r, p.scorer, cfg);
    if (r.hab_prob) hab_pool.push_back(*r.hab_prob);
    if (auto ops = score_ops_risk(r, p.norm_stats, cfg.ops).ops_risk) ops_pool.push_back(*ops);
  }
  p.thresholds = calibrate_thresholds(hab_pool, ops_pool, cfg.ops);
  return p;
}

std::vector<ScoredRow> apply_parameters(std::span<const SampleRecord> records, const FittedParameters& p,
                                        const RunConfig& cfg) {
  auto mined = mine_labels(std::vector<SampleRecord>(records.begin(), records.end()), p.label_stats, cfg.mining);
  for (auto& r : mined) r.hab_prob = hab_prob_for(r, p.scorer, cfg);
  return score_table(mined, p.norm_stats, cfg.ops, &p.thresholds);
}

FoldParameters fit_fold(std::span<const SampleRecord> records, std::span<const std::size_t> train,
                        const RunConfig& cfg) {
  const auto train_rows = subset(records, train);
  FoldParameters p;
  p.label_stats = fit_monthly_stats(train_rows);
  if (use_baseline(cfg)) {
    const auto mined = mine_labels(train_rows, p.label_stats, cfg.mining);
    try {
      p.scorer = fit(mined, cfg.features, cfg.fit);
    } catch (const FitError& e) {
      throw StageError("train-baseline", e.what());
    }
  }
  return p;
}

namespace {

struct HeldOut {
  std::vector<double> scores;
  std::vector<int> labels;
};

HeldOut score_held_out(std::span<const SampleRecord> records, std::span<const std::size_t> test,
                       const FoldParameters& p, const RunConfig& cfg) {
  HeldOut out;
  for (auto i : test) {
    const auto label = mine_label(records[i], p.label_stats, cfg.mining);
    const auto s = hab_prob_for(records[i], p.scorer, cfg);
    if (!s) continue;
    out.scores.push_back(*s);
    out.labels.push_back(*label.y_final);
  }
  return out;
}

void fold_metrics(const HeldOut& h, std::optional<double>& auroc, std::optional<double>& auprc) {
  const auto pos = std::count(h.labels.begin(), h.labels.end(), 1);
  if (pos > 0) auprc = metrics::auprc(h.scores, h.labels);
  if (pos > 0 && static_cast<std::size_t>(pos) < h.labels.size()) auroc = metrics::auroc(h.scores, h.labels);
}

CvResult group_cv_with(std::span<const SampleRecord> records, const FoldAssignment& folds, const RunConfig& cfg) {
  CvResult res;
  std::vector<std::optional<double>> oof(records.size());
  std::vector<int> labels(records.size(), 0);
  for (int f = 0; f < folds.k; ++f) {
    const auto train = folds.train_indices(f);
    const auto test = folds.test_indices(f);
    const auto params = fit_fold(records, train, cfg);
    for (auto i : test) {
      labels[i] = *mine_label(records[i], params.label_stats, cfg.mining).y_final;
      oof[i] = hab_prob_for(records[i], params.scorer, cfg);
    }
    FoldScore fs;
    fs.fold = f;
    const auto held = score_held_out(records, test, params, cfg);
    fs.n = held.scores.size();
    fold_metrics(held, fs.auroc, fs.auprc);
    res.folds.push_back(fs);
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!oof[i]) continue;
    res.oof_scores.push_back(*oof[i]);
    res.oof_labels.push_back(labels[i]);
  }
  res.pooled = metrics::evaluate(res.oof_scores, res.oof_labels, cfg.min_recall, cfg.reliability_bins);
  return res;
}

}  // namespace

CvResult group_cv(std::span<const SampleRecord> records, const RunConfig& cfg) {
  const auto folds = group_safe_folds(records, cfg.k, cfg.seed);
  return group_cv_with(records, folds, cfg);
}

TemporalCvResult temporal_cv(std::span<const SampleRecord> records, const RunConfig& cfg) {
  std::vector<Date> cutoffs;
  for (const auto& c : cfg.temporal_cutoffs) cutoffs.push_back(parse_date(c));
  const auto split = temporal_folds(records, cutoffs);
  TemporalCvResult res;
  res.warnings = split.warnings;
  for (const auto& pair : split.pairs) {
    TemporalCvPair out;
    out.cutoff = format_date(pair.cutoff);
    out.n_train = pair.train.size();
    out.n_test = pair.test.size();
    try {
      const auto params = fit_fold(records, pair.train, cfg);
      fold_metrics(score_held_out(records, pair.test, params, cfg), out.auroc, out.auprc);
    } catch (const StageError& e) {
      res.warnings.push_back("cutoff " + out.cutoff + ": " + e.what());
    }
    res.pairs.push_back(out);
  }
  return res;
}

nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool_version"] = m.tool_version;
  j["created_at"] = m.created_at;
  j["config"] = m.config;
  auto& inputs = j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& [path, digest] : m.inputs) inputs.push_back({{"path", path}, {"sha256", digest}});
  auto& artifacts = j["artifacts"] = nlohmann::ordered_json::object();
  for (const auto& [name, path] : m.artifacts) artifacts[name] = path;
  return j;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

nlohmann::ordered_json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

namespace {

template <class F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string now_utc() {
  const auto t = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(day).c_str(), static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return buf;
}

nlohmann::ordered_json mean_sd(const std::vector<FoldScore>& folds, std::optional<double> FoldScore::*field) {
  std::vector<double> v;
  for (const auto& f : folds) {
    if (f.*field) v.push_back(*(f.*field));
  }
  if (v.empty()) return nullptr;
  return {{"mean", stats::mean(v)}, {"sd", stats::sample_sd(v)}};
}

}  // namespace

RunManifest run_pipeline(const RunConfig& cfg) {
  stage("config", [&] { cfg.check(); });
  const fs::path out = cfg.output_dir;
  stage("config", [&] { fs::create_directories(out); });
  RunManifest manifest;
  manifest.config = to_json(cfg);

  auto artifact = [&](const std::string& name) {
    manifest.artifacts.emplace_back(name, (out / name).string());
    return (out / name).string();
  };

  // Ingest.
  const auto records = stage("ingest", [&] {
    std::string input = cfg.input;
    if (input.empty()) {
      input = (out / "table.csv").string();
      std::ofstream f(input);
      if (!f) throw std::runtime_error("cannot write " + input);
      write_with_zero_placeholders(f, generate_synthetic(cfg.synthetic));
    }
    manifest.inputs.emplace_back(input, sha256_file(input));
    return load_table(input);
  });
  stage("ingest", [&] { write_json(artifact("ranges.json"), to_json(summarize_ranges(records))); });

  // Splits.
  const auto part = stage("split", [&] { return partition(records, cfg); });
  const auto folds = stage("split", [&] { return group_safe_folds(part.reference, cfg.k, cfg.seed); });

  // Cross-validated evaluation (fold-local label stats and scorer).
  const auto cv = stage("evaluate", [&] { return group_cv_with(part.reference, folds, cfg); });
  const auto tcv = stage("evaluate", [&] { return temporal_cv(records, cfg); });

  // Reference-period fit, scoring, calibration.
  const auto params = stage("fit", [&] { return fit_parameters(records, cfg); });
  stage("train-baseline", [&] {
    nlohmann::ordered_json model = to_json(params.scorer);
    model["hab_prob_source"] = cfg.hab_prob_source;
    model["norm_stats"] = to_json(params.norm_stats);
    model["label_stats"] = to_json(params.label_stats);
    model["ops_config"] = to_json(cfg.ops);
    write_json(artifact("model.json"), model);
  });
  const auto rows = stage("ops-risk", [&] { return apply_parameters(records, params, cfg); });
  stage("ops-risk", [&] { write_ops_table(artifact("ops.csv"), rows); });
  stage("calibrate", [&] { write_json(artifact("thresholds.json"), to_json(params.thresholds)); });

  stage("evaluate", [&] {
    nlohmann::ordered_json j;
    j["label_col"] = "y_final";
    j["score_col"] = "hab_prob";
    nlohmann::ordered_json g;
    g["k"] = cfg.k;
    g["seed"] = cfg.seed;
    g["n_groups"] = [&] {
      std::set<std::string> keys;
      for (const auto& r : part.reference) keys.insert(r.group_key);
      return keys.size();
    }();
    auto& fj = g["folds"] = nlohmann::ordered_json::array();
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
    for (const auto& f : cv.folds) fj.push_back({{"fold", f.fold}, {"n", f.n}, {"auroc", opt(f.auroc)}, {"auprc", opt(f.auprc)}});
    g["auroc"] = mean_sd(cv.folds, &FoldScore::auroc);
    g["auprc"] = mean_sd(cv.folds, &FoldScore::auprc);
    g["pooled"] = metrics::to_json(cv.pooled);
    j["group_safe"] = std::move(g);
    nlohmann::ordered_json t;
    auto& pj = t["pairs"] = nlohmann::ordered_json::array();
    for (const auto& p : tcv.pairs) {
      pj.push_back({{"cutoff", p.cutoff}, {"n_train", p.n_train}, {"n_test", p.n_test}, {"auroc", opt(p.auroc)},
                    {"auprc", opt(p.auprc)}});
    }
    t["warnings"] = tcv.warnings;
    j["temporal"] = std::move(t);
    write_json(artifact("eval.json"), j);
    if (cfg.svg) svg::write_eval_figures(cv.pooled, (out / "figs").string());
  });

  stage("drift", [&] {
    const Date end = parse_date(cfg.reference_end);
    std::vector<ScoredRow> ref, cur;
    for (const auto& r : rows) (r.record.timestamp <= end ? ref : cur).push_back(r);
    auto j = drift::to_json(drift::drift_report(ref, cur, params.thresholds, cfg.drift));
    j["metadata"]["reference_end"] = cfg.reference_end;
    write_json(artifact("drift.json"), j);
  });

  manifest.created_at = now_utc();
  stage("manifest", [&] { write_json((out / "manifest.json").string(), to_json(manifest)); });
  return manifest;
}

}  // namespace rednet
