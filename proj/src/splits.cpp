#include "rednet/splits.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "rednet/synthetic.hpp"

namespace rednet {

std::vector<std::size_t> FoldAssignment::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

FoldAssignment group_safe_folds(std::span<const SampleRecord> records, int k, std::uint64_t seed) {
  if (k < 2) throw SplitError("group-safe CV needs k >= 2, got " + std::to_string(k));

  // Groups in first-appearance order, then a seeded Fisher-Yates shuffle, then
  // a stable sort by size so only equal-size groups are permuted by the seed.
  std::map<std::string, std::size_t> group_id;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [it, inserted] = group_id.try_emplace(records[i].group_key, members.size());
    if (inserted) members.emplace_back();
    members[it->second].push_back(i);
  }
  if (members.size() < static_cast<std::size_t>(k)) {
    throw SplitError("group-safe CV needs at least k=" + std::to_string(k) + " groups, got " +
                     std::to_string(members.size()));
  }

  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return members[a].size() > members[b].size(); });

  FoldAssignment out;
  out.mode = SplitMode::GroupSafe;
  out.k = k;
  out.fold_of.assign(records.size(), -1);
  std::vector<std::size_t> load(static_cast<std::size_t>(k), 0);
  for (std::size_t g : order) {
    auto fold = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    load[fold] += members[g].size();
    for (std::size_t i : members[g]) out.fold_of[i] = static_cast<int>(fold);
  }
  return out;
}

TemporalSplit temporal_folds(std::span<const SampleRecord> records, std::span<const Date> cutoffs) {
  for (std::size_t i = 1; i < cutoffs.size(); ++i) {
    if (!(cutoffs[i - 1] < cutoffs[i])) throw SplitError("temporal cutoffs must be strictly increasing");
  }
  TemporalSplit out;
  for (std::size_t c = 0; c < cutoffs.size(); ++c) {
    TemporalPair pair;
    pair.cutoff = cutoffs[c];
    const bool last = c + 1 == cutoffs.size();
    for (std::size_t i = 0; i < records.size(); ++i) {
      const Date t = records[i].timestamp;
      if (t <= cutoffs[c]) {
        pair.train.push_back(i);
      } else if (last || t <= cutoffs[c + 1]) {
        pair.test.push_back(i);
      }
    }
    if (pair.train.empty() || pair.test.empty()) {
      out.warnings.push_back("cutoff " + format_date(cutoffs[c]) + ": empty " +
                             (pair.train.empty() ? "train" : "test") + " window, pair skipped");
      continue;
    }
    out.pairs.push_back(std::move(pair));
  }
  return out;
}

nlohmann::ordered_json to_json(const FoldAssignment& a) {
  nlohmann::ordered_json j;
  j["mode"] = a.mode == SplitMode::GroupSafe ? "group" : "temporal";
  j["k"] = a.k;
  j["fold_of"] = a.fold_of;
  return j;
}

nlohmann::ordered_json to_json(const TemporalSplit& s) {
  nlohmann::ordered_json j;
  j["mode"] = "temporal";
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const auto& p : s.pairs) {
    pairs.push_back({{"cutoff", format_date(p.cutoff)}, {"train", p.train}, {"test", p.test}});
  }
  j["pairs"] = std::move(pairs);
  j["warnings"] = s.warnings;
  return j;
}

FoldAssignment fold_assignment_from_json(const nlohmann::ordered_json& j) {
  FoldAssignment a;
  if (j.at("mode").get<std::string>() != "group") throw SplitError("expected a group-mode fold file");
  a.mode = SplitMode::GroupSafe;
  a.k = j.at("k").get<int>();
  a.fold_of = j.at("fold_of").get<std::vector<int>>();
  return a;
}

}  // namespace rednet
