#include "rednet/baseline.hpp"

#include <cmath>

#include "rednet/ingest.hpp"
#include "rednet/stats.hpp"

namespace rednet {

std::vector<std::string> default_features() {
  return {"log1p_chlor_a", "kd490", "nflh", "sst", "fai_mean", "ndwi_mean", "rednir_mean", "det_mean", "sin_m", "cos_m"};
}

std::optional<double> feature_value(const SampleRecord& r, const std::string& name) {
  if (name == "log1p_chlor_a") return r.chlor_a ? std::optional(std::log1p(*r.chlor_a)) : std::nullopt;
  if (name == "chlor_a") return r.chlor_a;
  if (name == "kd490") return r.kd490;
  if (name == "nflh") return r.nflh;
  if (name == "sst") return r.sst;
  if (name == "fai_mean") return r.fai_mean;
  if (name == "ndwi_mean") return r.ndwi_mean;
  if (name == "rednir_mean") return r.rednir_mean;
  if (name == "det_mean") return r.det_mean;
  if (name == "sin_m") return season_encode(r.month).sin_m;
  if (name == "cos_m") return season_encode(r.month).cos_m;
  if (name == "chlor_a_over_kd490") {
    if (!r.chlor_a || !r.kd490 || *r.kd490 == 0.0) return std::nullopt;
    return *r.chlor_a / *r.kd490;
  }
  throw std::invalid_argument("unknown feature: " + name);
}

namespace {

struct Design {
  std::vector<std::vector<double>> z;  // standardized rows
  std::vector<double> y;
};

double objective(const Design& d, const std::vector<double>& w, double b, double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < d.z.size(); ++i) {
    double eta = b;
    for (std::size_t f = 0; f < w.size(); ++f) eta += w[f] * d.z[i][f];
    // log(1 + e^eta) - y*eta, computed stably.
    double softplus = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    loss += softplus - d.y[i] * eta;
  }
  double reg = 0.0;
  for (double v : w) reg += v * v;
  return loss / static_cast<double>(d.z.size()) + 0.5 * l2 * reg;
}

void gradient(const Design& d, const std::vector<double>& w, double b, double l2, std::vector<double>& gw,
              double& gb) {
  gw.assign(w.size(), 0.0);
  gb = 0.0;
  for (std::size_t i = 0; i < d.z.size(); ++i) {
    double eta = b;
    for (std::size_t f = 0; f < w.size(); ++f) eta += w[f] * d.z[i][f];
    double r = stats::logistic(eta) - d.y[i];
    gb += r;
    for (std::size_t f = 0; f < w.size(); ++f) gw[f] += r * d.z[i][f];
  }
  const double n = static_cast<double>(d.z.size());
  gb /= n;
  for (std::size_t f = 0; f < w.size(); ++f) gw[f] = gw[f] / n + l2 * w[f];
}

}  // namespace

FitResult fit_traced(std::span<const SampleRecord> train, const std::vector<std::string>& features,
                     const FitOptions& opt) {
  if (!(opt.l2 >= 0.0)) throw std::invalid_argument("l2 must be >= 0");
  if (!(opt.lr > 0.0)) throw std::invalid_argument("lr must be > 0");
  if (opt.iters < 0) throw std::invalid_argument("iters must be >= 0");

  std::vector<const SampleRecord*> rows;
  std::size_t positives = 0;
  for (const auto& r : train) {
    if (!r.y_final) continue;
    rows.push_back(&r);
    positives += *r.y_final == 1 ? 1 : 0;
  }
  if (positives == 0 || positives == rows.size()) {
    throw FitError("training set must contain both classes (" + std::to_string(positives) + " positives of " +
                   std::to_string(rows.size()) + " labelled rows)");
  }

  LinearScorer m;
  m.feature_list = features;
  const std::size_t nf = features.size();
  m.feature_means.assign(nf, 0.0);
  m.feature_sds.assign(nf, 1.0);
  m.weights.assign(nf, 0.0);

  for (std::size_t f = 0; f < nf; ++f) {
    std::vector<double> present;
    for (const auto* r : rows) {
      if (auto v = feature_value(*r, features[f])) present.push_back(*v);
    }
    if (present.empty()) continue;
    const double mu = stats::mean(present);
    double ss = 0.0;
    for (double v : present) ss += (v - mu) * (v - mu);
    const double sd = std::sqrt(ss / static_cast<double>(present.size()));
    m.feature_means[f] = mu;
    m.feature_sds[f] = sd > 0.0 ? sd : 1.0;
  }

  Design d;
  d.z.reserve(rows.size());
  for (const auto* r : rows) {
    std::vector<double> z(nf, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
      if (auto v = feature_value(*r, features[f])) z[f] = (*v - m.feature_means[f]) / m.feature_sds[f];
    }
    d.z.push_back(std::move(z));
    d.y.push_back(*r->y_final == 1 ? 1.0 : 0.0);
  }

  FitResult out;
  double loss = objective(d, m.weights, m.bias, opt.l2);
  out.loss_trace.push_back(loss);
  std::vector<double> gw;
  double gb = 0.0;
  double lr_b = opt.lr;
  double lr_w = opt.lr;
  for (int it = 0; it < opt.iters; ++it) {
    gradient(d, m.weights, m.bias, opt.l2, gw, gb);
    // Bias block.
    for (int tries = 0; tries < 60; ++tries) {
      double b = m.bias - lr_b * gb;
      double l = objective(d, m.weights, b, opt.l2);
      if (l <= loss) {
        m.bias = b;
        loss = l;
        break;
      }
      lr_b *= 0.5;
    }
    // Weight block, with the gradient refreshed at the new bias.
    gradient(d, m.weights, m.bias, opt.l2, gw, gb);
    for (int tries = 0; tries < 60; ++tries) {
      std::vector<double> w = m.weights;
      for (std::size_t f = 0; f < nf; ++f) w[f] -= lr_w * gw[f];
      double l = objective(d, w, m.bias, opt.l2);
      if (l <= loss) {
        m.weights = std::move(w);
        loss = l;
        break;
      }
      lr_w *= 0.5;
    }
    out.loss_trace.push_back(loss);
  }
  out.model = std::move(m);
  return out;
}

LinearScorer fit(std::span<const SampleRecord> train, const std::vector<std::string>& features,
                 const FitOptions& opt) {
  return fit_traced(train, features, opt).model;
}

double score(const LinearScorer& model, const SampleRecord& r) {
  double eta = model.bias;
  for (std::size_t f = 0; f < model.feature_list.size(); ++f) {
    if (auto v = feature_value(r, model.feature_list[f])) {
      eta += model.weights[f] * (*v - model.feature_means[f]) / model.feature_sds[f];
    }
  }
  return stats::logistic(eta);
}

nlohmann::ordered_json to_json(const LinearScorer& m) {
  nlohmann::ordered_json j;
  j["feature_list"] = m.feature_list;
  j["means"] = m.feature_means;
  j["sds"] = m.feature_sds;
  j["weights"] = m.weights;
  j["bias"] = m.bias;
  return j;
}

LinearScorer linear_scorer_from_json(const nlohmann::ordered_json& j) {
  LinearScorer m;
  m.feature_list = j.at("feature_list").get<std::vector<std::string>>();
  m.feature_means = j.at("means").get<std::vector<double>>();
  m.feature_sds = j.at("sds").get<std::vector<double>>();
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  const auto n = m.feature_list.size();
  if (m.feature_means.size() != n || m.feature_sds.size() != n || m.weights.size() != n) {
    throw std::invalid_argument("model.json: feature arrays differ in length");
  }
  for (double sd : m.feature_sds) {
    if (!(sd > 0.0)) throw std::invalid_argument("model.json: feature sds must be positive");
  }
  return m;
}

}  // namespace rednet
