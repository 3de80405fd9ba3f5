#include "rednet/server.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <iostream>
#include <set>

#include "httplib.h"
#include "rednet/drift.hpp"
#include "rednet/pipeline.hpp"

namespace rednet {

namespace fs = std::filesystem;

Snapshot load_snapshot(const std::string& dir) {
  const std::vector<std::string> required{"ops.csv", "thresholds.json", "drift.json", "ranges.json", "model.json"};
  std::string missing;
  for (const auto& name : required) {
    if (!fs::is_regular_file(fs::path(dir) / name)) missing += (missing.empty() ? "" : ", ") + name;
  }
  if (!fs::is_directory(dir)) throw SnapshotError("artifacts directory not found: " + dir);
  if (!missing.empty()) throw SnapshotError("missing artifacts in " + dir + ": " + missing);

  auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  Snapshot s;
  s.dir = dir;
  try {
    s.rows = read_ops_table(path("ops.csv"));
    s.thresholds = threshold_set_from_json(read_json(path("thresholds.json")));
    s.drift = read_json(path("drift.json"));
    s.ranges = read_json(path("ranges.json"));
    const auto model = read_json(path("model.json"));
    if (model.contains("ops_config")) s.ops = ops_risk_config_from_json(model.at("ops_config"));
    const auto& meta = s.drift.at("metadata");
    s.reference_end = parse_date(meta.at("reference_end").get<std::string>());
    s.default_k = meta.value("k", s.default_k);
  } catch (const std::exception& e) {
    throw SnapshotError(std::string("unreadable artifacts: ") + e.what());
  }
  std::set<std::string> plants;
  for (const auto& row : s.rows) {
    plants.insert(row.record.plant_id);
    if (row.record.timestamp <= s.reference_end && row.risk.ops_risk) s.reference_pool.push_back(*row.risk.ops_risk);
  }
  s.plants.assign(plants.begin(), plants.end());
  return s;
}

namespace {

Response error(int status, const std::string& message) { return {status, {{"error", message}}}; }

const std::string* param(const Query& q, const std::string& key) {
  auto it = q.find(key);
  return it == q.end() ? nullptr : &it->second;
}

bool known_plant(const Snapshot& s, const std::string& plant) {
  return std::binary_search(s.plants.begin(), s.plants.end(), plant);
}

std::vector<ScoredRow> current_rows(const Snapshot& s, const std::string* plant = nullptr) {
  std::vector<ScoredRow> out;
  for (const auto& row : s.rows) {
    if (row.record.timestamp <= s.reference_end) continue;
    if (plant && row.record.plant_id != *plant) continue;
    out.push_back(row);
  }
  return out;
}

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

Response plants(const Snapshot& s) { return {200, {{"plants", s.plants}}}; }

Response risk(const Snapshot& s, const Query& q) {
  const auto* plant = param(q, "plant");
  if (!plant) return error(400, "missing query parameter: plant");
  if (!known_plant(s, *plant)) return error(404, "unknown plant: " + *plant);
  std::optional<Date> from, to;
  try {
    if (const auto* f = param(q, "from")) from = parse_date(*f);
    if (const auto* t = param(q, "to")) to = parse_date(*t);
  } catch (const ValidationError& e) {
    return error(400, e.what());
  }
  nlohmann::ordered_json series = nlohmann::ordered_json::array();
  for (const auto& row : s.rows) {
    const auto& r = row.record;
    if (r.plant_id != *plant || (from && r.timestamp < *from) || (to && r.timestamp > *to)) continue;
    series.push_back({{"t", format_date(r.timestamp)},
                      {"hab_prob", opt_json(r.hab_prob)},
                      {"ops_risk", opt_json(row.risk.ops_risk)},
                      {"state", row.state ? nlohmann::ordered_json(std::string(to_string(*row.state)))
                                          : nlohmann::ordered_json(nullptr)}});
  }
  return {200, {{"plant", *plant}, {"series", std::move(series)}}};
}

Response whatif(const Snapshot& s, const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    return error(400, "body is not valid JSON");
  }
  if (!j.is_object()) return error(400, "body must be a JSON object");
  auto number = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    if (!j.at(key).is_number()) throw std::invalid_argument(std::string(key) + " must be a number");
    return j.at(key).get<double>();
  };
  ThresholdSet t;
  try {
    const auto tw = number("tau_watch"), ta = number("tau_action");
    const auto rw = number("r_watch"), ra = number("r_action");
    const bool explicit_pair = tw || ta;
    const bool rate_pair = rw || ra;
    if (explicit_pair == rate_pair) {
      return error(400, "body must give either {tau_watch, tau_action} or {r_watch, r_action}");
    }
    if (explicit_pair) {
      if (!tw || !ta) return error(400, "both tau_watch and tau_action are required");
      t = explicit_thresholds(*tw, *ta, s.ops);
    } else {
      if (!rw || !ra) return error(400, "both r_watch and r_action are required");
      if (!(*rw >= 0.0 && *rw <= 1.0 && *ra >= 0.0 && *ra <= 1.0)) return error(400, "rates must be in [0,1]");
      t = thresholds_for_rates(*rw, *ra, s.reference_pool, s.ops);
    }
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
  const auto rows = current_rows(s);
  const auto rates = drift::monthly_alert_rates(rows, t);
  return {200, {{"thresholds", to_json(t)}, {"monthly_alert_rates", drift::to_json(std::span<const drift::MonthlyRate>(rates))}}};
}

Response drift_view(const Snapshot& s, const Query& q) {
  const auto* plant = param(q, "plant");
  if (!plant) return {200, s.drift};
  if (!known_plant(s, *plant)) return error(404, "unknown plant: " + *plant);
  nlohmann::ordered_json out;
  out["metadata"] = s.drift.at("metadata");
  out["plant_id"] = *plant;
  out["drift"] = nullptr;
  for (const auto& p : s.drift.at("per_plant")) {
    if (p.at("plant_id") == *plant) out["drift"] = p;
  }
  auto& rates = out["monthly_alert_rates"] = nlohmann::ordered_json::array();
  for (const auto& r : s.drift.at("monthly_alert_rates")) {
    if (r.at("plant_id") == *plant) rates.push_back(r);
  }
  return {200, out};
}

Response topk(const Snapshot& s, const Query& q) {
  const auto* plant = param(q, "plant");
  if (!plant) return error(400, "missing query parameter: plant");
  if (!known_plant(s, *plant)) return error(404, "unknown plant: " + *plant);
  int k = s.default_k;
  if (const auto* kp = param(q, "k")) {
    auto [ptr, ec] = std::from_chars(kp->data(), kp->data() + kp->size(), k);
    if (ec != std::errc{} || ptr != kp->data() + kp->size() || k < 1) return error(400, "k must be a positive integer");
  }
  const auto rows = current_rows(s, plant);
  const auto events = drift::topk_events(rows, k);
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  if (auto it = events.find(*plant); it != events.end()) {
    for (const auto& row : it->second) list.push_back(drift::event_json(row));
  }
  return {200, {{"plant", *plant}, {"k", k}, {"events", std::move(list)}}};
}

}  // namespace

Response handle(const Snapshot& snap, const std::string& method, const std::string& path, const Query& query,
                const std::string& body) {
  struct Route {
    const char* method;
    const char* path;
  };
  static const Route routes[] = {{"GET", "/api/plants"}, {"GET", "/api/risk"},  {"GET", "/api/thresholds"},
                                 {"POST", "/api/whatif"}, {"GET", "/api/drift"}, {"GET", "/api/topk"},
                                 {"GET", "/api/ranges"}};
  bool path_known = false;
  for (const auto& r : routes) {
    if (path != r.path) continue;
    path_known = true;
    if (method != r.method) continue;
    if (path == "/api/plants") return plants(snap);
    if (path == "/api/risk") return risk(snap, query);
    if (path == "/api/thresholds") return {200, to_json(snap.thresholds)};
    if (path == "/api/whatif") return whatif(snap, body);
    if (path == "/api/drift") return drift_view(snap, query);
    if (path == "/api/topk") return topk(snap, query);
    if (path == "/api/ranges") return {200, snap.ranges};
  }
  return path_known ? error(405, "method not allowed") : error(404, "not found: " + path);
}

void serve(const Snapshot& snap, const std::string& host, int port) {
  httplib::Server server;
  auto dispatch = [&snap](const httplib::Request& req, httplib::Response& res) {
    Query q;
    for (const auto& [k, v] : req.params) q.emplace(k, v);
    const auto out = handle(snap, req.method, req.path, q, req.body);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server.Get(R"(/api/.*)", dispatch);
  server.Post(R"(/api/.*)", dispatch);
  server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    std::cerr << req.method << ' ' << req.path << ' ' << res.status << '\n';
  });
  if (!server.bind_to_port(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  std::cerr << "serving " << snap.dir << " on " << host << ':' << port << '\n';
  server.listen_after_bind();
}

}  // namespace rednet
