#ifndef TOPKSVM_SOLVER_HPP
#define TOPKSVM_SOLVER_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "topksvm/dataset.hpp"
#include "topksvm/losses.hpp"
#include "topksvm/model.hpp"
#include "topksvm/numkit.hpp"

namespace topksvm {

struct SolverConfig {
  LossSpec loss;
  double lambda = 1.0;
  double epsilon = 1e-3;  // relative duality gap
  std::size_t max_epochs = 300;
  std::uint64_t seed = 42;

  /// Throws std::invalid_argument unless lambda > 0, epsilon > 0,
  /// max_epochs >= 1 and 1 <= k < num_classes.
  void validate(std::size_t num_classes) const;
};

struct TrainReport {
  std::size_t epochs_run = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 0.0;
  double wall_time = 0.0;  // seconds
  bool converged = false;
  std::size_t skipped_examples = 0;     // zero-norm x_i, never updated
  std::size_t projection_fallbacks = 0; // biased cone search gave up
  double max_weight_drift = 0.0;        // ||W - X A^T||_F before each resync
};

// Dual variables A (m x n) and the primal W = X A^T (d x m) kept in sync
// by rank-1 updates.
struct DualState {
  Matrix A;
  Matrix W;
  Vector squared_norms;  // <x_i, x_i>
};

DualState make_dual_state(const Dataset& data);

/// X A^T.
Matrix weights_from_dual(const Matrix& X, const Matrix& A);

/// P(W) = (1/n) sum_i loss(W^T x_i - <w_y, x_i> 1) + (lambda/2) ||W||_F^2.
double primal_objective(const Matrix& W, const Dataset& data,
                        const SolverConfig& config);

/// True when column i satisfies <1, a_i> = 0 and
/// -lambda n (a_i - a_{y,i} e_y) lies in the loss's conjugate domain.
bool dual_column_feasible(const DualState& state, const Dataset& data,
                          const SolverConfig& config, std::size_t i,
                          double tol = 1e-8);

/// D(A) = lambda sum_i a_{y_i,i} - (lambda/2) ||W||_F^2, using the W held
/// in `state`. Throws std::domain_error if a column is infeasible.
double dual_objective(const DualState& state, const Dataset& data,
                      const SolverConfig& config);

/// (P - D) / max(1, |P|).
double relative_gap(double primal, double dual) noexcept;

struct SdcaStep {
  Vector a;
  bool fallback = false;
};

/// Exact maximization of the dual over block a_i. Returns nullopt (skip)
/// when xnorm <= 0.
std::optional<SdcaStep> sdca_update(const LossSpec& loss, double lambda,
                                    std::size_t n, double xnorm,
                                    std::size_t label,
                                    std::span<const double> scores,
                                    std::span<const double> a_i);

// Prox-SDCA driver over one dataset. Holds a reference to `data`.
class Trainer {
 public:
  Trainer(const Dataset& data, const SolverConfig& config);

  /// One exact block update of example i; false if it was skipped.
  bool update(std::size_t i);
  /// One pass over a fresh random permutation.
  void run_epoch();
  /// W <- X A^T. Returns the Frobenius norm of the correction.
  double resync_weights();

  double primal() const;
  double dual() const;

  /// Epochs until the relative gap drops below epsilon or max_epochs.
  TrainReport run();

  const DualState& state() const noexcept { return state_; }
  const SolverConfig& config() const noexcept { return config_; }
  Model model() const;

 private:
  const Dataset& data_;
  SolverConfig config_;
  DualState state_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  Vector scores_;
  Vector delta_;
  std::size_t fallbacks_ = 0;
};

std::pair<Model, TrainReport> train(const Dataset& data,
                                    const SolverConfig& config);

/// W^T X, shape m x n. Features beyond the model's dimension are ignored.
Matrix predict_scores(const Model& model, const Matrix& X);

/// 100 * (1 - mean top-k error) for each k. Labels unknown to the model
/// count as errors.
std::vector<double> topk_accuracy(const Model& model, const Dataset& data,
                                  std::span<const std::size_t> ks);

}  // namespace topksvm

#endif  // TOPKSVM_SOLVER_HPP
