#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rednet/chips.hpp"
#include "rednet/csv.hpp"
#include "rednet/ingest.hpp"
#include "rednet/pipeline.hpp"
#include "rednet/server.hpp"
#include "rednet/svg.hpp"

using namespace rednet;

namespace {

std::vector<double> numeric_column(const csv::Table& t, const std::string& name, const std::string& path) {
  const int c = t.column(name);
  if (c < 0) throw std::runtime_error(path + ": no column " + name);
  std::vector<double> out;
  for (const auto& row : t.rows) {
    const auto& cell = row[static_cast<std::size_t>(c)];
    if (!cell.empty()) out.push_back(std::stod(cell));
  }
  return out;
}

// Accepts a bare NormStats object or any object carrying one under "norm_stats".
NormStats load_norm_stats(const std::string& path, OpsRiskConfig& ops) {
  const auto j = read_json(path);
  if (j.contains("ops_config")) ops = ops_risk_config_from_json(j.at("ops_config"));
  return norm_stats_from_json(j.contains("norm_stats") ? j.at("norm_stats") : j);
}

std::optional<ThresholdSet> load_thresholds(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return threshold_set_from_json(read_json(path));
}

void with_states(std::vector<ScoredRow>& rows, const ThresholdSet& t) {
  for (auto& row : rows) {
    row.state = row.risk.ops_risk ? std::optional(alert_state(*row.risk.ops_risk, t)) : std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"REDNET-ML HAB decision layer"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write the synthetic table");
  SyntheticConfig syn;
  std::string gen_out;
  gen->add_option("--out", gen_out, "Output CSV")->required();
  gen->add_option("--seed", syn.seed, "Generator seed");
  gen->add_option("--start", syn.start, "First date");
  gen->add_option("--end", syn.end, "Last date");
  gen->callback([&] {
    std::ofstream out(gen_out);
    if (!out) throw std::runtime_error("cannot write " + gen_out);
    write_with_zero_placeholders(out, generate_synthetic(syn));
  });

  // ingest
  auto* ing = app.add_subcommand("ingest", "Validate a table and summarize column ranges");
  std::string ing_in, ing_ranges;
  ing->add_option("--in", ing_in)->required();
  ing->add_option("--ranges-out", ing_ranges)->required();
  ing->callback([&] {
    const auto records = load_table(ing_in);
    write_json(ing_ranges, to_json(summarize_ranges(records)));
    std::cerr << records.size() << " rows valid\n";
  });

  // indices
  auto* idx = app.add_subcommand("indices", "Per-chip spectral index summaries");
  std::string idx_chips, idx_sidecar, idx_out;
  idx->add_option("--chips", idx_chips, "Float32 chip stack")->required();
  idx->add_option("--sidecar", idx_sidecar, "JSON sidecar (default: <chips>.json)");
  idx->add_option("--out", idx_out)->required();
  idx->callback([&] {
    const auto stack = chips::read_stack(idx_chips, idx_sidecar);
    std::ofstream out(idx_out);
    if (!out) throw std::runtime_error("cannot write " + idx_out);
    chips::write_summaries(out, stack);
  });

  // label-mine
  auto* lm = app.add_subcommand("label-mine", "Mine weak labels and merge with trusted labels");
  std::string lm_in, lm_out;
  MiningConfig mining;
  lm->add_option("--in", lm_in)->required();
  lm->add_option("--z-hi", mining.z_hi);
  lm->add_option("--min-quality", mining.min_quality);
  lm->add_option("--out", lm_out)->required();
  lm->callback([&] {
    mining.check();
    write_table(lm_out, mine_labels(load_table(lm_in), mining));
  });

  // split
  auto* sp = app.add_subcommand("split", "Group-safe or temporal folds");
  std::string sp_in, sp_mode = "group", sp_out;
  int sp_k = 5;
  std::uint64_t sp_seed = 17;
  std::vector<std::string> sp_cutoffs;
  sp->add_option("--in", sp_in)->required();
  sp->add_option("--mode", sp_mode)->check(CLI::IsMember({"group", "temporal"}));
  sp->add_option("--k", sp_k);
  sp->add_option("--seed", sp_seed);
  sp->add_option("--cutoffs", sp_cutoffs)->delimiter(',');
  sp->add_option("--out", sp_out)->required();
  sp->callback([&] {
    const auto records = load_table(sp_in);
    if (sp_mode == "group") {
      write_json(sp_out, to_json(group_safe_folds(records, sp_k, sp_seed)));
      return;
    }
    std::vector<Date> cutoffs;
    for (const auto& c : sp_cutoffs) cutoffs.push_back(parse_date(c));
    const auto split = temporal_folds(records, cutoffs);
    for (const auto& w : split.warnings) std::cerr << "warning: " << w << '\n';
    write_json(sp_out, to_json(split));
  });

  // train-baseline
  auto* tb = app.add_subcommand("train-baseline", "Fit the logistic baseline on labeled rows");
  std::string tb_in, tb_folds, tb_out, tb_label = "y_final";
  int tb_holdout = -1;
  FitOptions fit_opt;
  tb->add_option("--in", tb_in, "Labeled table")->required();
  tb->add_option("--folds", tb_folds, "folds.json; rows of --holdout are excluded");
  tb->add_option("--holdout", tb_holdout, "Fold (group) or pair index (temporal) to hold out");
  tb->add_option("--label-col", tb_label)->check(CLI::IsMember({"y_final", "y_trusted", "y_weak"}));
  tb->add_option("--l2", fit_opt.l2);
  tb->add_option("--iters", fit_opt.iters);
  tb->add_option("--out", tb_out)->required();
  tb->callback([&] {
    auto records = load_table(tb_in);
    std::vector<std::size_t> train;
    if (!tb_folds.empty() && tb_holdout >= 0) {
      const auto j = read_json(tb_folds);
      if (j.at("mode") == "group") {
        const auto a = fold_assignment_from_json(j);
        if (a.fold_of.size() != records.size()) throw std::runtime_error("folds do not match the table");
        train = a.train_indices(tb_holdout);
      } else {
        train = j.at("pairs").at(static_cast<std::size_t>(tb_holdout)).at("train").get<std::vector<std::size_t>>();
      }
    } else {
      for (std::size_t i = 0; i < records.size(); ++i) train.push_back(i);
    }
    std::vector<SampleRecord> rows;
    for (auto i : train) {
      auto r = records.at(i);
      r.y_final = tb_label == "y_trusted" ? r.y_trusted : tb_label == "y_weak" ? r.y_weak : r.y_final;
      rows.push_back(std::move(r));
    }
    auto model = to_json(fit(rows, default_features(), fit_opt));
    model["norm_stats"] = to_json(fit_norm_stats(rows));
    write_json(tb_out, model);
  });

  // score
  auto* sc = app.add_subcommand("score", "Write hab_prob from a fitted model");
  std::string sc_in, sc_model, sc_out;
  sc->add_option("--in", sc_in)->required();
  sc->add_option("--model", sc_model)->required();
  sc->add_option("--out", sc_out)->required();
  sc->callback([&] {
    const auto model = linear_scorer_from_json(read_json(sc_model));
    auto records = load_table(sc_in);
    for (auto& r : records) r.hab_prob = score(model, r);
    write_table(sc_out, records);
  });

  // ops-risk
  auto* ops = app.add_subcommand("ops-risk", "Compute ops_risk against frozen reference stats");
  std::string ops_in, ops_stats, ops_out, ops_thr;
  ops->add_option("--in", ops_in, "Table with hab_prob")->required();
  ops->add_option("--stats", ops_stats, "NormStats JSON (or model.json)")->required();
  ops->add_option("--thresholds", ops_thr, "Assign alert states with these thresholds");
  ops->add_option("--out", ops_out)->required();
  ops->callback([&] {
    OpsRiskConfig cfg;
    const auto stats = load_norm_stats(ops_stats, cfg);
    const auto t = load_thresholds(ops_thr);
    write_ops_table(ops_out, score_table(load_table(ops_in), stats, cfg, t ? &*t : nullptr));
  });

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Match ops_risk thresholds to legacy exceedance rates");
  std::string cal_pool, cal_out;
  std::optional<double> cal_rw, cal_ra;
  cal->add_option("--pool", cal_pool, "CSV with hab_prob and ops_risk columns")->required();
  cal->add_option("--r-watch", cal_rw, "Target watch rate instead of the legacy rate");
  cal->add_option("--r-action", cal_ra, "Target action rate instead of the legacy rate");
  cal->add_option("--out", cal_out)->required();
  cal->callback([&] {
    const auto t = csv::read_file(cal_pool);
    const auto ops_pool = numeric_column(t, "ops_risk", cal_pool);
    if (cal_rw.has_value() != cal_ra.has_value()) throw CLI::ValidationError("--r-watch and --r-action go together");
    const auto set = cal_rw ? thresholds_for_rates(*cal_rw, *cal_ra, ops_pool)
                            : calibrate_thresholds(numeric_column(t, "hab_prob", cal_pool), ops_pool);
    write_json(cal_out, to_json(set));
  });

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "ROC/PR/reliability evaluation of a score column");
  std::string ev_scores, ev_label = "y_final", ev_score = "hab_prob", ev_out, ev_svg;
  double ev_min_recall = 0.60;
  int ev_bins = 10;
  ev->add_option("--scores", ev_scores)->required();
  ev->add_option("--label-col", ev_label);
  ev->add_option("--score-col", ev_score);
  ev->add_option("--min-recall", ev_min_recall);
  ev->add_option("--bins", ev_bins);
  ev->add_option("--out", ev_out)->required();
  ev->add_option("--svg-dir", ev_svg);
  ev->callback([&] {
    const auto t = csv::read_file(ev_scores);
    const int sc_col = t.column(ev_score), lb_col = t.column(ev_label);
    if (sc_col < 0 || lb_col < 0) throw std::runtime_error(ev_scores + ": missing score or label column");
    std::vector<double> s;
    std::vector<int> y;
    for (const auto& row : t.rows) {
      const auto& a = row[static_cast<std::size_t>(sc_col)];
      const auto& b = row[static_cast<std::size_t>(lb_col)];
      if (a.empty() || b.empty()) continue;
      s.push_back(std::stod(a));
      y.push_back(std::stod(b) != 0.0 ? 1 : 0);
    }
    const auto report = metrics::evaluate(s, y, ev_min_recall, ev_bins);
    auto j = metrics::to_json(report);
    j["label_col"] = ev_label;
    j["score_col"] = ev_score;
    write_json(ev_out, j);
    if (!ev_svg.empty()) svg::write_eval_figures(report, ev_svg);
  });

  // drift
  auto* dr = app.add_subcommand("drift", "PSI/KS drift, monthly alert rates and top-k events");
  std::string dr_ref, dr_cur, dr_thr, dr_out;
  drift::DriftOptions dr_opt;
  dr->add_option("--ref", dr_ref, "Reference ops table")->required();
  dr->add_option("--cur", dr_cur, "Current ops table")->required();
  dr->add_option("--thresholds", dr_thr)->required();
  dr->add_option("--k", dr_opt.k);
  dr->add_option("--bins", dr_opt.n_bins);
  dr->add_option("--out", dr_out)->required();
  dr->callback([&] {
    const auto t = *load_thresholds(dr_thr);
    auto ref = read_ops_table(dr_ref);
    auto cur = read_ops_table(dr_cur);
    with_states(ref, t);
    with_states(cur, t);
    write_json(dr_out, drift::to_json(drift::drift_report(ref, cur, t, dr_opt)));
  });

  // run
  auto* run = app.add_subcommand("run", "Run every stage from one config file");
  std::string run_config, run_input, run_out, run_ref_end;
  std::optional<int> run_k;
  std::optional<std::uint64_t> run_seed;
  bool run_svg = false;
  run->add_option("--config", run_config, "Run config JSON (defaults apply when omitted)");
  run->add_option("--input", run_input, "Input table (default: synthetic)");
  run->add_option("--out-dir", run_out);
  run->add_option("--reference-end", run_ref_end);
  run->add_option("--k", run_k);
  run->add_option("--seed", run_seed);
  run->add_flag("--svg", run_svg);
  run->callback([&] {
    RunConfig cfg = run_config.empty() ? RunConfig{} : load_run_config(run_config);
    if (!run_input.empty()) cfg.input = run_input;
    if (!run_out.empty()) cfg.output_dir = run_out;
    if (!run_ref_end.empty()) cfg.reference_end = run_ref_end;
    if (run_k) cfg.k = *run_k;
    if (run_seed) cfg.seed = *run_seed;
    if (run_svg) cfg.svg = true;
    const auto m = run_pipeline(cfg);
    std::cout << cfg.output_dir << "/manifest.json (" << m.artifacts.size() << " artifacts)\n";
  });

  // serve
  auto* srv = app.add_subcommand("serve", "Serve the ops console API over run artifacts");
  std::string srv_dir, srv_host = "127.0.0.1";
  int srv_port = 8080;
  if (const char* env = std::getenv("REDNET_ARTIFACTS")) srv_dir = env;
  srv->add_option("--artifacts", srv_dir, "Artifacts directory (env REDNET_ARTIFACTS)");
  srv->add_option("--host", srv_host);
  srv->add_option("--port", srv_port);
  srv->callback([&] {
    if (srv_dir.empty()) throw CLI::ValidationError("--artifacts or REDNET_ARTIFACTS is required");
    serve(load_snapshot(srv_dir), srv_host, srv_port);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
