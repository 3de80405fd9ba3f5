#include <algorithm>
#include <map>

#include "doctest.h"
#include "rednet/ingest.hpp"
#include "rednet/pipeline.hpp"
#include "rednet/synthetic.hpp"
#include "run_fixture.hpp"

using namespace rednet;
namespace fs = std::filesystem;

namespace {

std::vector<SampleRecord> generated() {
  RunConfig cfg;
  return generate_synthetic(cfg.synthetic);
}

void perturb(SampleRecord& r) {
  r.chlor_a = 40.0;
  r.nflh = 2.5;
  r.sst = 35.0;
  r.det_mean = 0.99;
  r.y_trusted = r.y_trusted.value_or(0) == 1 ? 0 : 1;
}

}  // namespace

TEST_CASE("RunConfig round-trips and rejects bad settings") {
  RunConfig cfg;
  cfg.k = 7;
  cfg.temporal_cutoffs = {"2021-12-31"};
  const auto back = run_config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(run_config_from_json(nlohmann::ordered_json::object()).k == RunConfig{}.k);

  cfg = RunConfig{};
  cfg.reference_end = "2024-13-01";
  CHECK_THROWS(cfg.check());
  cfg = RunConfig{};
  cfg.min_recall = 1.5;
  CHECK_THROWS(cfg.check());
}

TEST_CASE("partition splits at reference_end") {
  const auto records = generated();
  RunConfig cfg;
  const auto p = partition(records, cfg);
  CHECK(p.reference.size() + p.current.size() == records.size());
  CHECK_FALSE(p.current.empty());
  const Date end = parse_date(cfg.reference_end);
  for (const auto& r : p.reference) CHECK(r.timestamp <= end);
  for (const auto& r : p.current) CHECK(r.timestamp > end);
}

TEST_CASE("perturbing current-period rows changes no fitted parameter") {
  const auto records = generated();
  RunConfig cfg;
  const std::string before = to_json(fit_parameters(records, cfg)).dump();
  const Date end = parse_date(cfg.reference_end);
  auto changed = records;
  for (std::size_t i = 0; i < changed.size(); ++i) {
    if (changed[i].timestamp > end && i % 3 == 0) perturb(changed[i]);
  }
  CHECK(to_json(fit_parameters(changed, cfg)).dump() == before);

  // and a perturbed reference row does change them
  auto ref_changed = records;
  for (std::size_t i = 0; i < 200; ++i) perturb(ref_changed[i]);
  CHECK(to_json(fit_parameters(ref_changed, cfg)).dump() != before);
}

TEST_CASE("perturbing a held-out fold changes no fold parameter") {
  const auto records = partition(generated(), RunConfig{}).reference;
  RunConfig cfg;
  const auto folds = group_safe_folds(records, cfg.k, cfg.seed);
  for (int f = 0; f < 2; ++f) {
    const auto train = folds.train_indices(f);
    const auto test = folds.test_indices(f);
    const std::string before = to_json(fit_fold(records, train, cfg)).dump();
    auto changed = records;
    for (auto i : test) perturb(changed[i]);
    CHECK(to_json(fit_fold(changed, train, cfg)).dump() == before);
  }
}

TEST_CASE("group_cv on the generated data") {
  const auto records = partition(generated(), RunConfig{}).reference;
  RunConfig cfg;
  const auto cv = group_cv(records, cfg);
  CHECK(cv.folds.size() == static_cast<std::size_t>(cfg.k));
  CHECK(cv.oof_scores.size() == records.size());
  CHECK(cv.oof_labels.size() == records.size());
  CHECK(cv.pooled.auroc >= 0.80);
  CHECK(cv.pooled.operating_point.confusion.recall() >= 0.60);
  std::size_t n = 0;
  for (const auto& f : cv.folds) n += f.n;
  CHECK(n == records.size());
}

TEST_CASE("temporal_cv trains strictly before it tests") {
  RunConfig cfg;
  const auto t = temporal_cv(generated(), cfg);
  CHECK(t.pairs.size() == cfg.temporal_cutoffs.size());
  for (const auto& p : t.pairs) {
    CHECK(p.n_train > 0);
    CHECK(p.n_test > 0);
    REQUIRE(p.auroc);
    CHECK(*p.auroc > 0.5);
  }
}

TEST_CASE("run_pipeline writes a manifest whose digests match") {
  const fs::path dir = testing::shared_run_dir();
  const auto manifest = read_json((dir / "manifest.json").string());
  CHECK(manifest.at("tool_version") == kToolVersion);
  std::vector<std::string> names;
  for (const auto& [name, path] : manifest.at("artifacts").items()) {
    names.push_back(name);
    CHECK(fs::is_regular_file(path.get<std::string>()));
  }
  for (const char* want : {"ranges.json", "model.json", "ops.csv", "thresholds.json", "eval.json", "drift.json"}) {
    CHECK(std::find(names.begin(), names.end(), want) != names.end());
  }
  REQUIRE(manifest.at("inputs").size() == 1);
  const auto& input = manifest.at("inputs")[0];
  CHECK(sha256_file(input.at("path").get<std::string>()) == input.at("sha256").get<std::string>());
  CHECK(input.at("sha256").get<std::string>().size() == 64);

  const auto eval = read_json((dir / "eval.json").string());
  CHECK(eval.at("group_safe").at("pooled").at("auroc").get<double>() >= 0.80);
  const auto drift = read_json((dir / "drift.json").string());
  CHECK(drift.at("metadata").at("reference_end") == "2024-12-31");
  CHECK(drift.at("per_plant").size() == 4);
}

TEST_CASE("run_pipeline is deterministic") {
  RunConfig cfg;
  cfg.output_dir = testing::scratch_dir("determinism").string();
  run_pipeline(cfg);
  const fs::path a = testing::shared_run_dir(), b = cfg.output_dir;
  for (const char* name : {"eval.json", "drift.json", "thresholds.json", "model.json", "ops.csv", "ranges.json"}) {
    CHECK_MESSAGE(testing::slurp(a / name) == testing::slurp(b / name), name);
  }
}

TEST_CASE("stage failures name the stage") {
  RunConfig cfg;
  cfg.output_dir = testing::scratch_dir("bad_k").string();
  cfg.k = 1;
  try {
    run_pipeline(cfg);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "split");
  }

  cfg = RunConfig{};
  cfg.output_dir = testing::scratch_dir("bad_input").string();
  cfg.input = "/nonexistent/table.csv";
  try {
    run_pipeline(cfg);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "ingest");
  }
}

TEST_CASE("run_pipeline accepts an input table") {
  const fs::path dir = testing::scratch_dir("from_input");
  fs::create_directories(dir);
  RunConfig cfg;
  cfg.synthetic.end = "2025-06-30";
  {
    std::ofstream out(dir / "in.csv");
    write_with_zero_placeholders(out, generate_synthetic(cfg.synthetic));
  }
  cfg.input = (dir / "in.csv").string();
  cfg.output_dir = (dir / "out").string();
  const auto m = run_pipeline(cfg);
  REQUIRE(m.inputs.size() == 1);
  CHECK(m.inputs[0].first == cfg.input);
  CHECK(m.inputs[0].second == sha256_file(cfg.input));
  CHECK(fs::is_regular_file(dir / "out" / "drift.json"));
}
