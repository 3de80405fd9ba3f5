#pragma once

// Leakage-safe cross-validation assignments: whole scene groups per fold, and
// forward (expanding-window) temporal pairs.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rednet/record.hpp"

namespace rednet {

class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SplitMode { GroupSafe, Temporal };

struct FoldAssignment {
  SplitMode mode = SplitMode::GroupSafe;
  int k = 0;
  std::vector<int> fold_of;  // indexed by record position

  std::vector<std::size_t> test_indices(int fold) const;
  std::vector<std::size_t> train_indices(int fold) const;
};

// Groups go whole to folds, largest first, each to the currently smallest
// fold (ties to the lower fold id). The seed only permutes groups of equal
// size. Throws SplitError when k < 2 or there are fewer than k groups.
FoldAssignment group_safe_folds(std::span<const SampleRecord> records, int k, std::uint64_t seed);

struct TemporalPair {
  Date cutoff{};
  std::vector<std::size_t> train;  // timestamp <= cutoff
  std::vector<std::size_t> test;   // cutoff < timestamp <= next cutoff (open for the last)
};

struct TemporalSplit {
  std::vector<TemporalPair> pairs;
  std::vector<std::string> warnings;  // one per skipped cutoff
};

// Expanding-window forward pairs. Cutoffs must be strictly increasing
// (SplitError otherwise). Pairs with an empty side are skipped with a warning.
TemporalSplit temporal_folds(std::span<const SampleRecord> records, std::span<const Date> cutoffs);

nlohmann::ordered_json to_json(const FoldAssignment& a);
nlohmann::ordered_json to_json(const TemporalSplit& s);
FoldAssignment fold_assignment_from_json(const nlohmann::ordered_json& j);

}  // namespace rednet
