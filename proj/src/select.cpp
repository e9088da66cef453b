#include "botflow/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <json.hpp>

#include "botflow/error.hpp"
#include "botflow/metrics.hpp"
#include "botflow/sweep.hpp"
#include "util.hpp"

namespace botflow {

CorrelationMatrix pearson_matrix(const FeatureMatrix& m) {
  if (m.rows() < 2) throw Error(ErrorCode::TooFewRows, "Pearson correlation needs at least 2 rows");
  const std::size_t d = m.cols();
  const auto n = static_cast<double>(m.rows());

  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += m.at(i, j);
  for (auto& v : mean) v /= n;

  std::vector<double> cov(d * d, 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t a = 0; a < d; ++a) {
      const double ca = r[a] - mean[a];
      for (std::size_t b = a; b < d; ++b) cov[a * d + b] += ca * (r[b] - mean[b]);
    }
  }

  CorrelationMatrix out;
  out.feature_names = m.feature_names;
  out.values.assign(d * d, 0.0);
  out.constant_flags.assign(d, 0);
  std::vector<double> sd(d);
  for (std::size_t j = 0; j < d; ++j) {
    sd[j] = std::sqrt(cov[j * d + j] / n);
    if (sd[j] == 0.0 || sd[j] <= 1e-12 * std::abs(mean[j])) out.constant_flags[j] = 1;
  }
  for (std::size_t a = 0; a < d; ++a) {
    if (out.constant_flags[a]) continue;
    for (std::size_t b = a; b < d; ++b) {
      if (out.constant_flags[b]) continue;
      double r = a == b ? 1.0 : (cov[a * d + b] / n) / (sd[a] * sd[b]);
      r = std::clamp(r, -1.0, 1.0);
      out.values[a * d + b] = r;
      out.values[b * d + a] = r;
    }
  }
  return out;
}

FilterResult correlation_filter(const FeatureMatrix& m, double threshold) {
  if (!(threshold > 0 && threshold <= 1))
    throw Error(ErrorCode::InvalidArgument, "correlation threshold must lie in (0,1]");
  const CorrelationMatrix corr = pearson_matrix(m);
  FilterResult out;
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < corr.dim(); ++j) {
    if (corr.constant_flags[j]) {
      out.dropped.push_back({corr.feature_names[j], "constant"});
      continue;
    }
    std::optional<std::size_t> clash;
    for (std::size_t k : kept)
      if (std::abs(corr.at(j, k)) > threshold) {
        clash = k;
        break;
      }
    if (clash) {
      out.dropped.push_back({corr.feature_names[j], "|r| = " + detail::fmt9(std::abs(corr.at(j, *clash))) +
                                                        " with " + corr.feature_names[*clash]});
    } else {
      kept.push_back(j);
      out.retained.push_back(corr.feature_names[j]);
    }
  }
  return out;
}

namespace {

double metric_value(const MetricsReport& r, Metric metric) {
  switch (metric) {
    case Metric::F1: return r.f1;
    case Metric::Precision: return r.precision;
    case Metric::Recall: return r.recall;
  }
  return 0;
}

}  // namespace

EliminationResult backward_elimination(const FeatureMatrix& train, const FeatureMatrix& validation,
                                       const Trainer& trainer, Metric metric, const EliminationOptions& opts) {
  if (train.feature_names != validation.feature_names)
    throw Error(ErrorCode::SchemaMismatch, "train and validation features differ");
  if (opts.min_features < 1 || opts.min_features > train.cols())
    throw Error(ErrorCode::InvalidArgument, "min_features must lie in [1, feature count]");
  const std::size_t pos = validation.positives();
  if (pos == 0 || pos == validation.rows())
    throw Error(ErrorCode::DegenerateSplit, "validation split contains a single class");

  auto score = [&](const std::vector<std::string>& cols) {
    const FeatureMatrix tr = train.select_columns(cols);
    const FeatureMatrix va = validation.select_columns(cols);
    const auto pred = trainer(tr, va);
    return metric_value(metrics_from_confusion(confusion(va.targets, pred)), metric);
  };

  EliminationResult out;
  out.retained = train.feature_names;
  if (out.retained.size() == opts.min_features) return out;
  out.baseline_score = score(out.retained);
  double current = out.baseline_score;
  while (out.retained.size() > opts.min_features) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < out.retained.size(); ++i) {
      std::vector<std::string> cand = out.retained;
      cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(i));
      const double s = score(cand);
      if (s > best) {
        best = s;
        best_idx = i;
      }
    }
    if (best < current - opts.tolerance) break;
    out.trace.push_back({out.retained[best_idx], best});
    out.retained.erase(out.retained.begin() + static_cast<std::ptrdiff_t>(best_idx));
    current = best;
  }
  return out;
}

PcaModel pca_fit(const FeatureMatrix& m, std::size_t n_components) {
  if (m.rows() < 2) throw Error(ErrorCode::TooFewRows, "PCA needs at least 2 rows");
  const std::size_t d = m.cols();
  if (n_components < 1 || n_components > d)
    throw Error(ErrorCode::BadComponentCount, "n_components must lie in [1, " + std::to_string(d) + "]");

  const auto n = static_cast<Eigen::Index>(m.rows());
  const auto dd = static_cast<Eigen::Index>(d);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(m.values.data(), n, dd);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "covariance eigen-decomposition failed");

  PcaModel model;
  model.feature_names = m.feature_names;
  model.mean.assign(mean.data(), mean.data() + dd);
  // Eigen returns ascending eigenvalues.
  for (std::size_t k = 0; k < n_components; ++k) {
    const Eigen::Index col = dd - 1 - static_cast<Eigen::Index>(k);
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    model.components.emplace_back(v.data(), v.data() + dd);
    model.explained_variance.push_back(std::max(0.0, solver.eigenvalues()(col)));
  }
  return model;
}

FeatureMatrix pca_transform(const FeatureMatrix& m, const PcaModel& model) {
  if (m.feature_names != model.feature_names)
    throw Error(ErrorCode::SchemaMismatch, "matrix features do not match the PCA model");
  FeatureMatrix out;
  for (std::size_t k = 0; k < model.n_components(); ++k) out.feature_names.push_back("pc" + std::to_string(k + 1));
  out.keys = m.keys;
  out.targets = m.targets;
  out.values.reserve(m.rows() * model.n_components());
  std::vector<double> centered(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) centered[j] = r[j] - model.mean[j];
    for (const auto& c : model.components) {
      double s = 0;
      for (std::size_t j = 0; j < c.size(); ++j) s += c[j] * centered[j];
      out.values.push_back(s);
    }
  }
  return out;
}

std::vector<double> pca_reconstruct(const FeatureMatrix& projected, const PcaModel& model) {
  if (projected.cols() != model.n_components())
    throw Error(ErrorCode::SchemaMismatch, "projected width does not match the PCA model");
  const std::size_t d = model.mean.size();
  std::vector<double> out;
  out.reserve(projected.rows() * d);
  for (std::size_t i = 0; i < projected.rows(); ++i) {
    std::vector<double> x = model.mean;
    const auto y = projected.row(i);
    for (std::size_t k = 0; k < y.size(); ++k)
      for (std::size_t j = 0; j < d; ++j) x[j] += y[k] * model.components[k][j];
    out.insert(out.end(), x.begin(), x.end());
  }
  return out;
}

std::string selection_report_json(const SelectionReport& r) {
  using ojson = nlohmann::ordered_json;
  auto num = [](double v) { return ojson::parse(detail::fmt9(v)); };
  ojson j;
  j["retained"] = r.retained;
  ojson dropped = ojson::array();
  for (const auto& d : r.dropped) dropped.push_back({{"feature", d.name}, {"reason", d.reason}});
  j["dropped"] = dropped;
  if (r.elimination) {
    ojson trace = ojson::array();
    for (const auto& s : r.elimination->trace) trace.push_back({{"removed", s.removed}, {"score", num(s.score)}});
    j["backward_elimination"] = {{"metric", r.metric},
                                 {"baseline_score", num(r.elimination->baseline_score)},
                                 {"trace", trace}};
  }
  if (r.pca) {
    ojson ev = ojson::array();
    for (double v : r.pca->explained_variance) ev.push_back(num(v));
    j["pca"] = {{"n_components", r.pca->n_components()}, {"explained_variance", ev}};
  }
  return j.dump(2) + "\n";
}

SelectionOutcome run_selection(const FeatureMatrix& m, const SelectionOptions& opts) {
  SelectionOutcome out;
  const char* metric_names[] = {"f1", "precision", "recall"};
  out.report.metric = metric_names[static_cast<int>(opts.metric)];
  FeatureMatrix current = m;

  if (opts.corr_threshold) {
    FilterResult filtered = correlation_filter(current, *opts.corr_threshold);
    out.report.dropped = std::move(filtered.dropped);
    current = current.select_columns(filtered.retained);
  }

  if (opts.backward_elimination) {
    SplitSpec spec;
    spec.train_fraction = opts.train_fraction;
    spec.purge_gap_s = opts.purge_gap_s;
    const SplitResult parts = split(current, spec, 0);
    const Hyperparams hp = opts.hyperparams;
    Trainer trainer = [hp](const FeatureMatrix& train, const FeatureMatrix& validation) {
      return predict_label(fit(train, hp, 0).model, validation);
    };
    EliminationResult elim = backward_elimination(parts.train, parts.test, trainer, opts.metric, opts.elimination);
    for (const auto& step : elim.trace)
      out.report.dropped.push_back({step.removed, "backward elimination (score " + detail::fmt9(step.score) + ")"});
    current = current.select_columns(elim.retained);
    out.report.elimination = std::move(elim);
  }

  out.report.retained = current.feature_names;
  if (opts.pca_components > 0) {
    PcaModel pca = pca_fit(current, opts.pca_components);
    current = pca_transform(current, pca);
    out.report.pca = std::move(pca);
  }
  out.reduced = std::move(current);
  return out;
}

}  // namespace botflow
