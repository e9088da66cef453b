#include "botflow/logreg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "botflow/error.hpp"
#include "util.hpp"

namespace botflow {

void Hyperparams::validate() const {
  if (!(l2_lambda >= 0) || !std::isfinite(l2_lambda))
    throw Error(ErrorCode::InvalidArgument, "l2_lambda must be finite and >= 0");
  if (!(learning_rate > 0) || !std::isfinite(learning_rate))
    throw Error(ErrorCode::InvalidArgument, "learning_rate must be > 0");
  if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  if (!(tol >= 0)) throw Error(ErrorCode::InvalidArgument, "tol must be >= 0");
  if (!(threshold > 0 && threshold < 1))
    throw Error(ErrorCode::InvalidArgument, "threshold must lie in (0,1)");
}

double sigmoid(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log1p_exp(double z) noexcept { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

namespace {

void check_shapes(std::span<const double> weights, DesignView x, std::span<const std::uint8_t> y,
                  std::span<const double> sw) {
  if (weights.size() != x.cols || x.values.size() != x.rows * x.cols || y.size() != x.rows ||
      sw.size() != x.rows)
    throw Error(ErrorCode::ShapeMismatch, "weights, design matrix, targets and sample weights disagree in shape");
}

// Shared pass so loss() and gradient() agree bit-for-bit.
double evaluate(std::span<const double> w, double b, DesignView x, std::span<const std::uint8_t> y,
                std::span<const double> sw, double l2, std::vector<double>* dw, double* db) {
  check_shapes(w, x, y, sw);
  double nll = 0;
  double total_weight = 0;
  double gb = 0;
  if (dw) dw->assign(x.cols, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* row = x.values.data() + i * x.cols;
    double z = b;
    for (std::size_t j = 0; j < x.cols; ++j) z += w[j] * row[j];
    const double c = sw[i];
    total_weight += c;
    nll += c * (y[i] ? log1p_exp(-z) : log1p_exp(z));
    if (dw) {
      const double r = c * (sigmoid(z) - static_cast<double>(y[i]));
      gb += r;
      double* g = dw->data();
      for (std::size_t j = 0; j < x.cols; ++j) g[j] += r * row[j];
    }
  }
  if (total_weight <= 0) throw Error(ErrorCode::EmptyInput, "sum of sample weights must be positive");
  double sq = 0;
  for (double v : w) sq += v * v;
  if (dw) {
    for (std::size_t j = 0; j < x.cols; ++j) (*dw)[j] = (*dw)[j] / total_weight + l2 * w[j];
    *db = gb / total_weight;
  }
  return nll / total_weight + 0.5 * l2 * sq;
}

}  // namespace

double loss(std::span<const double> weights, double bias, DesignView x, std::span<const std::uint8_t> y,
            std::span<const double> sample_weights, double l2_lambda) {
  return evaluate(weights, bias, x, y, sample_weights, l2_lambda, nullptr, nullptr);
}

Gradient gradient(std::span<const double> weights, double bias, DesignView x, std::span<const std::uint8_t> y,
                  std::span<const double> sample_weights, double l2_lambda) {
  Gradient g;
  g.loss = evaluate(weights, bias, x, y, sample_weights, l2_lambda, &g.d_weights, &g.d_bias);
  return g;
}

std::vector<double> class_weights(std::span<const std::uint8_t> y, ClassWeightMode mode) {
  std::vector<double> out(y.size(), 1.0);
  if (mode == ClassWeightMode::None) return out;
  const auto n = static_cast<double>(y.size());
  const auto pos = static_cast<double>(std::count(y.begin(), y.end(), std::uint8_t{1}));
  const double neg = n - pos;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double cls = y[i] ? pos : neg;
    out[i] = n / (2.0 * cls);
  }
  return out;
}

FitResult fit(const FeatureMatrix& m, const Hyperparams& hp, std::uint64_t seed,
              const ClassSet& positive_classes) {
  hp.validate();
  if (m.rows() == 0) throw Error(ErrorCode::EmptyInput, "cannot fit on an empty matrix");
  const std::size_t pos = m.positives();
  if (pos == 0 || pos == m.rows())
    throw Error(ErrorCode::SingleClassInput, "training data contains a single class");

  const auto started = std::chrono::steady_clock::now();
  FitResult out;
  LogRegModel& model = out.model;
  model.feature_names = m.feature_names;
  model.standardization = standardize_fit(m);
  model.threshold = hp.threshold;
  model.hyperparams = hp;
  model.training_meta.seed = seed;
  model.training_meta.positive_classes = format_class_set(positive_classes);

  const FeatureMatrix xs = standardize_apply(m, model.standardization);
  const DesignView x = design_view(xs);
  const std::vector<double> sw = class_weights(m.targets, hp.class_weight);

  std::vector<double> w(m.cols(), 0.0);
  double b = 0.0;
  Gradient g = gradient(w, b, x, m.targets, sw, hp.l2_lambda);
  if (!std::isfinite(g.loss)) throw Error(ErrorCode::NonFiniteLoss, "initial loss is not finite");
  TrainReport& rep = out.report;
  rep.loss_trace.push_back(g.loss);

  std::vector<double> trial_w(w.size());
  double step = hp.learning_rate;
  for (int it = 0; it < hp.max_iter; ++it) {
    double gmax = std::abs(g.d_bias);
    for (double v : g.d_weights) gmax = std::max(gmax, std::abs(v));
    if (!std::isfinite(gmax)) throw Error(ErrorCode::NonFiniteLoss, "gradient diverged");
    if (gmax < hp.tol) {
      rep.converged = true;
      break;
    }

    step = std::min(hp.learning_rate, 2.0 * step);
    Gradient next;
    double trial_b = 0;
    bool accepted = false;
    while (step > 1e-30) {
      for (std::size_t j = 0; j < w.size(); ++j) trial_w[j] = w[j] - step * g.d_weights[j];
      trial_b = b - step * g.d_bias;
      next = gradient(trial_w, trial_b, x, m.targets, sw, hp.l2_lambda);
      if (std::isfinite(next.loss) && next.loss <= g.loss) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No representable step decreases the loss: numerically stationary.
      rep.converged = true;
      break;
    }
    const double improvement = g.loss - next.loss;
    w = trial_w;
    b = trial_b;
    g = std::move(next);
    rep.loss_trace.push_back(g.loss);
    ++rep.iterations_run;
    if (improvement < hp.tol) {
      rep.converged = true;
      break;
    }
  }
  for (double v : w)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteLoss, "weights diverged");

  model.weights = std::move(w);
  model.bias = b;
  model.training_meta.iterations_run = rep.iterations_run;
  model.training_meta.final_loss = g.loss;
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

std::vector<double> predict_proba(const LogRegModel& model, const FeatureMatrix& m) {
  if (m.feature_names != model.feature_names)
    throw Error(ErrorCode::SchemaMismatch, "matrix features do not match the model's feature list");
  std::vector<double> p(m.rows());
  const auto& st = model.standardization;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    double z = model.bias;
    for (std::size_t j = 0; j < r.size(); ++j) z += model.weights[j] * ((r[j] - st.means[j]) / st.scales[j]);
    p[i] = sigmoid(z);
  }
  return p;
}

std::vector<std::uint8_t> predict_label(const LogRegModel& model, const FeatureMatrix& m) {
  const auto p = predict_proba(model, m);
  std::vector<std::uint8_t> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] >= model.threshold ? 1 : 0;
  return out;
}

// ---- serialization ----

namespace {

using ojson = nlohmann::ordered_json;

const char* class_weight_name(ClassWeightMode m) { return m == ClassWeightMode::Balanced ? "balanced" : "none"; }

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::CorruptModel, "corrupt model: " + why); }

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::string model_to_json(const LogRegModel& model) {
  ojson j;
  j["schema_version"] = kModelSchemaVersion;
  j["feature_names"] = model.feature_names;
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  ojson st;
  st["means"] = model.standardization.means;
  st["scales"] = model.standardization.scales;
  std::vector<bool> flags;
  for (auto f : model.standardization.constant_flags) flags.push_back(f != 0);
  st["constant_flags"] = flags;
  j["standardization"] = st;
  j["threshold"] = model.threshold;
  const Hyperparams& hp = model.hyperparams;
  j["hyperparams"] = {{"l2_lambda", hp.l2_lambda},   {"learning_rate", hp.learning_rate},
                      {"max_iter", hp.max_iter},     {"tol", hp.tol},
                      {"class_weight", class_weight_name(hp.class_weight)},
                      {"threshold", hp.threshold}};
  const TrainingMeta& tm = model.training_meta;
  j["training_meta"] = {{"iterations_run", tm.iterations_run},
                        {"final_loss", tm.final_loss},
                        {"seed", tm.seed},
                        {"positive_classes", tm.positive_classes}};
  return j.dump(2) + "\n";
}

LogRegModel model_from_json(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    corrupt(e.what());
  }
  if (!j.is_object() || !j.contains("schema_version")) corrupt("missing schema_version");
  if (!j["schema_version"].is_number_integer()) corrupt("schema_version is not an integer");
  if (j["schema_version"].get<int>() != kModelSchemaVersion)
    throw Error(ErrorCode::SchemaVersionMismatch,
                "model schema_version " + j["schema_version"].dump() + " is not supported (expected " +
                    std::to_string(kModelSchemaVersion) + ")");

  LogRegModel m;
  try {
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    const auto& st = j.at("standardization");
    m.standardization.feature_names = m.feature_names;
    m.standardization.means = st.at("means").get<std::vector<double>>();
    m.standardization.scales = st.at("scales").get<std::vector<double>>();
    for (bool f : st.at("constant_flags").get<std::vector<bool>>())
      m.standardization.constant_flags.push_back(f ? 1 : 0);
    m.threshold = j.at("threshold").get<double>();
    const auto& hp = j.at("hyperparams");
    m.hyperparams.l2_lambda = hp.at("l2_lambda").get<double>();
    m.hyperparams.learning_rate = hp.at("learning_rate").get<double>();
    m.hyperparams.max_iter = hp.at("max_iter").get<int>();
    m.hyperparams.tol = hp.at("tol").get<double>();
    const auto cw = hp.at("class_weight").get<std::string>();
    if (cw != "balanced" && cw != "none") corrupt("unknown class_weight '" + cw + "'");
    m.hyperparams.class_weight = cw == "balanced" ? ClassWeightMode::Balanced : ClassWeightMode::None;
    m.hyperparams.threshold = hp.at("threshold").get<double>();
    const auto& tm = j.at("training_meta");
    m.training_meta.iterations_run = tm.at("iterations_run").get<int>();
    m.training_meta.final_loss = tm.at("final_loss").get<double>();
    m.training_meta.seed = tm.at("seed").get<std::uint64_t>();
    m.training_meta.positive_classes = tm.at("positive_classes").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    corrupt(e.what());
  }

  const std::size_t d = m.feature_names.size();
  if (m.weights.size() != d || m.standardization.means.size() != d || m.standardization.scales.size() != d ||
      m.standardization.constant_flags.size() != d)
    corrupt("vector lengths disagree with feature_names");
  if (!all_finite(m.weights) || !all_finite(m.standardization.means) || !all_finite(m.standardization.scales) ||
      !std::isfinite(m.bias))
    corrupt("non-finite parameter");
  if (std::any_of(m.standardization.scales.begin(), m.standardization.scales.end(), [](double s) { return s <= 0; }))
    corrupt("non-positive standardization scale");
  if (!(m.threshold > 0 && m.threshold < 1)) corrupt("threshold outside (0,1)");
  return m;
}

void save_model(const LogRegModel& model, const std::string& path) {
  detail::atomic_write(path, model_to_json(model));
}

LogRegModel load_model(const std::string& path) { return model_from_json(detail::read_file(path)); }

}  // namespace botflow
