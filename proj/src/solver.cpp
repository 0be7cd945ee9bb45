#include "topksvm/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "topksvm/projections.hpp"

namespace topksvm {

void SolverConfig::validate(std::size_t num_classes) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("solver: lambda must be positive");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("solver: epsilon must be positive");
  }
  if (max_epochs < 1) {
    throw std::invalid_argument("solver: max_epochs must be >= 1");
  }
  if (loss.k < 1 || loss.k >= num_classes) {
    throw std::invalid_argument("solver: k=" + std::to_string(loss.k) +
                                " must satisfy 1 <= k < m=" +
                                std::to_string(num_classes));
  }
}

DualState make_dual_state(const Dataset& data) {
  const std::size_t m = data.num_classes();
  DualState s;
  s.A = Matrix(m, data.num_examples());
  s.W = Matrix(data.num_features(), m);
  s.squared_norms.resize(data.num_examples());
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    const auto x = data.X.col(i);
    s.squared_norms[i] = dot(x, x);
  }
  return s;
}

Matrix weights_from_dual(const Matrix& X, const Matrix& A) {
  if (X.cols() != A.cols()) {
    throw std::invalid_argument("weights_from_dual: shape mismatch");
  }
  Matrix W(X.rows(), A.rows());
  for (std::size_t i = 0; i < X.cols(); ++i) rank1_update(W, X.col(i), A.col(i));
  return W;
}

namespace {

void scores_into(const Matrix& W, std::span<const double> x,
                 std::span<double> out) {
  const std::size_t d = std::min(W.rows(), x.size());
  for (std::size_t j = 0; j < W.cols(); ++j) {
    out[j] = dot(W.col(j).first(d), x.first(d));
  }
}

}  // namespace

double primal_objective(const Matrix& W, const Dataset& data,
                        const SolverConfig& config) {
  const std::size_t n = data.num_examples();
  Vector scores(W.cols());
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scores_into(W, data.X.col(i), scores);
    loss += loss_primal(MarginVector::from_scores(scores, data.labels[i]),
                        config.loss);
  }
  return loss / static_cast<double>(n) +
         0.5 * config.lambda * W.squared_norm();
}

bool dual_column_feasible(const DualState& state, const Dataset& data,
                          const SolverConfig& config, std::size_t i,
                          double tol) {
  const auto a = state.A.col(i);
  const std::size_t y = data.labels[i];
  const double scale = config.lambda * static_cast<double>(data.num_examples());
  if (std::abs(sum(a)) * scale > tol) return false;
  Vector b(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    b[j] = j == y ? 0.0 : -scale * a[j];
  }
  return config.loss.variant == LossVariant::topk_alpha
             ? in_topk_lifted(b, config.loss.k, 1.0, tol)
             : in_topk_box(b, config.loss.k, 1.0, tol);
}

double dual_objective(const DualState& state, const Dataset& data,
                      const SolverConfig& config) {
  double gt = 0.0;
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    if (!dual_column_feasible(state, data, config, i)) {
      throw std::domain_error("dual objective: column " + std::to_string(i) +
                              " outside the conjugate domain");
    }
    gt += state.A(data.labels[i], i);
  }
  return config.lambda * gt - 0.5 * config.lambda * state.W.squared_norm();
}

double relative_gap(double primal, double dual) noexcept {
  return (primal - dual) / std::max(1.0, std::abs(primal));
}

std::optional<SdcaStep> sdca_update(const LossSpec& loss, double lambda,
                                    std::size_t n, double xnorm,
                                    std::size_t label,
                                    std::span<const double> scores,
                                    std::span<const double> a_i) {
  const std::size_t m = scores.size();
  if (a_i.size() != m || label >= m || m < 2) {
    throw std::invalid_argument("sdca_update: inconsistent block sizes");
  }
  if (!(xnorm > 0.0)) return std::nullopt;

  // q = W^T x_i - <x_i,x_i> a_i is the score without this example's own
  // contribution. The block problem is a biased projection of b.
  // For alpha the loss ranks all m shifted margins, the ground truth's
  // included, so its conjugate over margin vectors (a_y = 0) allows mass on
  // y. Dropping that coordinate leaves the lifted set, not Delta_k(r); the
  // two agree only for k = 1.
  const double q_y = scores[label] - xnorm * a_i[label];
  Vector b;
  b.reserve(m - 1);
  for (std::size_t j = 0; j < m; ++j) {
    if (j == label) continue;
    const double q_j = scores[j] - xnorm * a_i[j];
    b.push_back((q_j + 1.0 - q_y) / xnorm);
  }

  const double r = 1.0 / (lambda * static_cast<double>(n));
  const ProjectionResult proj =
      loss.variant == LossVariant::topk_alpha
          ? project_topk_lifted(b, loss.k, r, 1.0)
          : project_capped_simplex(b, r / static_cast<double>(loss.k), r, 1.0);

  SdcaStep step;
  step.fallback = proj.fallback;
  step.a.resize(m);
  double total = 0.0;
  for (std::size_t j = 0, p = 0; j < m; ++j) {
    if (j == label) continue;
    step.a[j] = -proj.x[p];
    total += proj.x[p];
    ++p;
  }
  step.a[label] = total;
  return step;
}

Trainer::Trainer(const Dataset& data, const SolverConfig& config)
    : data_(data), config_(config), rng_(config.seed) {
  data_.validate();
  config_.validate(data_.num_classes());
  state_ = make_dual_state(data_);
  order_.resize(data_.num_examples());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  scores_.resize(data_.num_classes());
  delta_.resize(data_.num_classes());
}

bool Trainer::update(std::size_t i) {
  const auto x = data_.X.col(i);
  scores_into(state_.W, x, scores_);
  auto a_old = state_.A.col(i);
  auto step = sdca_update(config_.loss, config_.lambda, data_.num_examples(),
                          state_.squared_norms[i], data_.labels[i], scores_,
                          a_old);
  if (!step) return false;
  if (step->fallback) ++fallbacks_;
  for (std::size_t j = 0; j < delta_.size(); ++j) {
    delta_[j] = step->a[j] - a_old[j];
  }
  rank1_update(state_.W, x, delta_);
  std::copy(step->a.begin(), step->a.end(), a_old.begin());
  return true;
}

void Trainer::run_epoch() {
  std::shuffle(order_.begin(), order_.end(), rng_);
  for (std::size_t i : order_) update(i);
}

double Trainer::resync_weights() {
  Matrix fresh = weights_from_dual(data_.X, state_.A);
  double drift = 0.0;
  const auto old_w = state_.W.values();
  const auto new_w = fresh.values();
  for (std::size_t j = 0; j < old_w.size(); ++j) {
    const double diff = old_w[j] - new_w[j];
    drift += diff * diff;
  }
  state_.W = std::move(fresh);
  return std::sqrt(drift);
}

double Trainer::primal() const {
  return primal_objective(state_.W, data_, config_);
}

double Trainer::dual() const { return dual_objective(state_, data_, config_); }

TrainReport Trainer::run() {
  const auto start = std::chrono::steady_clock::now();
  TrainReport report;
  report.skipped_examples = static_cast<std::size_t>(std::count_if(
      state_.squared_norms.begin(), state_.squared_norms.end(),
      [](double v) { return !(v > 0.0); }));

  for (std::size_t epoch = 1; epoch <= config_.max_epochs; ++epoch) {
    run_epoch();
    report.max_weight_drift =
        std::max(report.max_weight_drift, resync_weights());
    report.epochs_run = epoch;
    report.primal_objective = primal();
    report.dual_objective = dual();
    report.relative_gap =
        relative_gap(report.primal_objective, report.dual_objective);
    if (report.relative_gap <= config_.epsilon) {
      report.converged = true;
      break;
    }
  }
  report.projection_fallbacks = fallbacks_;
  report.wall_time = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  return report;
}

Model Trainer::model() const {
  return Model{state_.W, config_.loss, config_.lambda, data_.label_values};
}

std::pair<Model, TrainReport> train(const Dataset& data,
                                    const SolverConfig& config) {
  Trainer trainer(data, config);
  TrainReport report = trainer.run();
  return {trainer.model(), report};
}

Matrix predict_scores(const Model& model, const Matrix& X) {
  Matrix S(model.num_classes(), X.cols());
  for (std::size_t i = 0; i < X.cols(); ++i) {
    scores_into(model.W, X.col(i), S.col(i));
  }
  return S;
}

std::vector<double> topk_accuracy(const Model& model, const Dataset& data,
                                  std::span<const std::size_t> ks) {
  const std::size_t m = model.num_classes();
  for (std::size_t k : ks) {
    if (k < 1 || k > m) {
      throw std::invalid_argument("topk_accuracy: k=" + std::to_string(k) +
                                  " out of range [1, " + std::to_string(m) +
                                  "]");
    }
  }
  const Matrix S = predict_scores(model, data.X);
  std::vector<std::size_t> errors(ks.size(), 0);
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    const std::int64_t raw = data.label_values[data.labels[i]];
    auto it = std::lower_bound(model.label_values.begin(),
                               model.label_values.end(), raw);
    const bool known = it != model.label_values.end() && *it == raw;
    for (std::size_t q = 0; q < ks.size(); ++q) {
      if (!known) {
        ++errors[q];
        continue;
      }
      const auto y = static_cast<std::size_t>(it - model.label_values.begin());
      errors[q] += static_cast<std::size_t>(topk_error(S.col(i), y, ks[q]));
    }
  }
  std::vector<double> acc(ks.size());
  const double n = static_cast<double>(data.num_examples());
  for (std::size_t q = 0; q < ks.size(); ++q) {
    acc[q] = 100.0 * (1.0 - static_cast<double>(errors[q]) / n);
  }
  return acc;
}

}  // namespace topksvm
