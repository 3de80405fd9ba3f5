#pragma once

// Read-only HTTP service over the artifacts of a completed run.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rednet/ops_risk.hpp"

namespace rednet {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Snapshot {
  std::string dir;
  std::vector<ScoredRow> rows;  // ops.csv, file order
  ThresholdSet thresholds;
  OpsRiskConfig ops;
  Date reference_end{};
  std::vector<std::string> plants;
  std::vector<double> reference_pool;  // scorable ops_risk with timestamp <= reference_end
  nlohmann::ordered_json drift;
  nlohmann::ordered_json ranges;
  int default_k = 10;
};

// Throws SnapshotError naming every missing artifact.
Snapshot load_snapshot(const std::string& dir);

struct Response {
  int status = 200;
  nlohmann::ordered_json body;
};

using Query = std::map<std::string, std::string>;

// Pure request handler: same snapshot and request, same response.
Response handle(const Snapshot& snap, const std::string& method, const std::string& path, const Query& query,
                const std::string& body);

// Blocks serving on host:port until the process is stopped.
void serve(const Snapshot& snap, const std::string& host, int port);

}  // namespace rednet
