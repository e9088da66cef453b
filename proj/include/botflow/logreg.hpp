#pragma once

// Binary logistic regression trained by full-batch gradient descent with
// backtracking, class weighting and L2 regularization.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "botflow/features.hpp"

namespace botflow {

enum class ClassWeightMode : std::uint8_t { None, Balanced };

struct Hyperparams {
  double l2_lambda = 1e-4;
  double learning_rate = 0.5;
  int max_iter = 2000;
  double tol = 1e-8;
  ClassWeightMode class_weight = ClassWeightMode::Balanced;
  double threshold = 0.5;

  void validate() const;
  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

struct TrainingMeta {
  int iterations_run = 0;
  double final_loss = 0;
  std::uint64_t seed = 0;
  std::string positive_classes = "botnet,cnc";
  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

struct LogRegModel {
  std::vector<std::string> feature_names;
  std::vector<double> weights;
  double bias = 0;
  StandardizationParams standardization;
  double threshold = 0.5;
  Hyperparams hyperparams;
  TrainingMeta training_meta;

  friend bool operator==(const LogRegModel&, const LogRegModel&) = default;
};

struct TrainReport {
  std::vector<double> loss_trace;  // loss after each accepted step, starting at the initial loss
  bool converged = false;
  int iterations_run = 0;
  double wall_time_s = 0;
};

struct FitResult {
  LogRegModel model;
  TrainReport report;
};

// Overflow-free 1/(1+e^-z).
double sigmoid(double z) noexcept;
// log(1 + e^z) without overflow.
double log1p_exp(double z) noexcept;

// Dense view over standardized design rows.
struct DesignView {
  std::span<const double> values;  // rows * cols, row-major
  std::size_t rows = 0;
  std::size_t cols = 0;
};

inline DesignView design_view(const FeatureMatrix& m) { return {m.values, m.rows(), m.cols()}; }

// Weighted mean negative log-likelihood plus (l2/2)*|w|^2. Throws
// Error(ShapeMismatch).
double loss(std::span<const double> weights, double bias, DesignView x, std::span<const std::uint8_t> y,
            std::span<const double> sample_weights, double l2_lambda);

struct Gradient {
  std::vector<double> d_weights;
  double d_bias = 0;
  double loss = 0;
};

Gradient gradient(std::span<const double> weights, double bias, DesignView x, std::span<const std::uint8_t> y,
                  std::span<const double> sample_weights, double l2_lambda);

// Per-sample weights: all 1 for None; N / (2 * N_class(y_i)) for Balanced.
std::vector<double> class_weights(std::span<const std::uint8_t> y, ClassWeightMode mode);

// Throws Error(SingleClassInput), Error(EmptyInput), Error(NonFiniteLoss).
FitResult fit(const FeatureMatrix& m, const Hyperparams& hp, std::uint64_t seed,
              const ClassSet& positive_classes = default_positive_classes());

// Throw Error(SchemaMismatch) when feature names differ from the model's.
std::vector<double> predict_proba(const LogRegModel& model, const FeatureMatrix& m);
// 1 iff probability >= threshold.
std::vector<std::uint8_t> predict_label(const LogRegModel& model, const FeatureMatrix& m);

inline constexpr int kModelSchemaVersion = 1;

std::string model_to_json(const LogRegModel& model);
// Throws Error(CorruptModel) / Error(SchemaVersionMismatch).
LogRegModel model_from_json(std::string_view text);
void save_model(const LogRegModel& model, const std::string& path);
LogRegModel load_model(const std::string& path);

}  // namespace botflow
