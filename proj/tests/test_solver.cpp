#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "oracle.hpp"
#include "test_util.hpp"
#include "topksvm/solver.hpp"

using namespace topksvm;

namespace {

SolverConfig config_for(LossVariant v, std::size_t k, double lambda) {
  SolverConfig c;
  c.loss = {v, k};
  c.lambda = lambda;
  return c;
}

// D restricted to block i with the other columns held fixed.
double block_dual(const Matrix& W, std::span<const double> x,
                  std::span<const double> a_old, std::span<const double> a_new,
                  std::size_t y, double lambda) {
  Matrix V = W;
  Vector delta(a_new.size());
  for (std::size_t j = 0; j < delta.size(); ++j) delta[j] = a_new[j] - a_old[j];
  rank1_update(V, x, delta);
  return lambda * a_new[y] - 0.5 * lambda * V.squared_norm();
}

Dataset separable_toy() {
  Matrix X(2, 4, Vector{2, 1, 1, 2, -2, -1, -1, -2});
  const std::int64_t y[] = {1, 1, 2, 2};
  return make_dataset(std::move(X), y);
}

}  // namespace

TEST_CASE("primal objective examples") {
  std::mt19937_64 rng(41);
  const Dataset data = testutil::synthetic_dataset(rng, 20, 5, 4);
  const Matrix zero(5, 4);
  for (auto v : {LossVariant::topk_alpha, LossVariant::topk_beta}) {
    for (std::size_t k : {1, 2, 3}) {
      for (double lambda : {1e-3, 1.0, 1e6}) {
        CHECK(primal_objective(zero, data, config_for(v, k, lambda)) == 1.0);
      }
    }
  }

  // One example x = (1, 2), y = class 0, m = 4. Scores (1, 2, 2, -1) give
  // a + c = (0, 2, 2, -1).
  Matrix X(2, 1, Vector{1, 2});
  const std::int64_t lab[] = {1};
  const Dataset one = make_dataset(std::move(X), lab, {1, 2, 3, 4});
  Matrix W(2, 4, Vector{1, 0, 0, 1, 2, 0, 1, -1});
  const double reg = 0.05 * (1 + 1 + 4 + 1 + 1);
  CHECK(primal_objective(W, one, config_for(LossVariant::topk_alpha, 1, 0.1)) ==
        doctest::Approx(2.0 + reg));
  CHECK(primal_objective(W, one, config_for(LossVariant::topk_alpha, 3, 0.1)) ==
        doctest::Approx(4.0 / 3.0 + reg));
  CHECK(primal_objective(W, one, config_for(LossVariant::topk_beta, 3, 0.1)) ==
        doctest::Approx(4.0 / 3.0 + reg));
  Matrix W2(2, 4, Vector{1, 0, 0, 1, 2, 0, -3, 0});
  // Scores (1, 2, 2, -3): a + c = (0, 2, 2, -3).
  const double reg2 = 0.05 * (1 + 1 + 4 + 9);
  CHECK(primal_objective(W2, one, config_for(LossVariant::topk_alpha, 3, 0.1)) ==
        doctest::Approx(4.0 / 3.0 + reg2));
}

TEST_CASE("dual objective: zero state, direct form and one update") {
  std::mt19937_64 rng(42);
  const Dataset data = testutil::synthetic_dataset(rng, 15, 4, 5);
  for (auto v : {LossVariant::topk_alpha, LossVariant::topk_beta}) {
    for (std::size_t k : {1, 2, 4}) {
      const SolverConfig cfg = config_for(v, k, 0.05);
      Trainer t(data, cfg);
      CHECK(t.dual() == 0.0);
      CHECK(t.update(3));
      CHECK(t.dual() > 1e-6);

      t.run_epoch();
      t.resync_weights();
      const auto& s = t.state();
      // -(1/n) sum phi*(-lambda n a_i) - lambda/2 ||W||^2 with the ground
      // truth coordinate of the conjugate argument set to zero.
      const double ln = cfg.lambda * static_cast<double>(data.num_examples());
      double conj = 0.0;
      for (std::size_t i = 0; i < data.num_examples(); ++i) {
        const std::size_t y = data.labels[i];
        Vector b(data.num_classes());
        for (std::size_t j = 0; j < b.size(); ++j) {
          b[j] = j == y ? 0.0 : -ln * s.A(j, i);
        }
        double c_dot_b = sum(b);
        if (v == LossVariant::topk_beta || k == 1) {
          conj += loss_conjugate(b, y, cfg.loss);
          CHECK(-c_dot_b == doctest::Approx(loss_conjugate(b, y, cfg.loss)));
        } else {
          CHECK(in_topk_lifted(b, k, 1.0));
          conj += -c_dot_b;
        }
      }
      const double direct =
          -conj / static_cast<double>(data.num_examples()) -
          0.5 * cfg.lambda * s.W.squared_norm();
      CHECK(t.dual() == doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("dual objective rejects an infeasible column") {
  std::mt19937_64 rng(43);
  const Dataset data = testutil::synthetic_dataset(rng, 5, 3, 3);
  const SolverConfig cfg = config_for(LossVariant::topk_alpha, 1, 0.1);
  DualState s = make_dual_state(data);
  s.A(0, 0) = 1.0;  // column sum no longer zero
  CHECK_FALSE(dual_column_feasible(s, data, cfg, 0));
  CHECK_THROWS_AS(dual_objective(s, data, cfg), std::domain_error);
}

TEST_CASE("sdca_update on one example with two classes matches the oracle") {
  const Vector scores{0.0, 0.0}, a{0.0, 0.0};
  const auto step = sdca_update({LossVariant::topk_alpha, 1}, 1.0, 1, 1.0, 0,
                                scores, a);
  REQUIRE(step);
  // b = (q_1 + 1 - q_0)/|x|^2 = 1, r = 1, bias rho = 1.
  const auto x = oracle::project(Vector{1.0}, {oracle::Set::simplex, 1, 1.0, 1.0});
  CHECK(step->a[1] == doctest::Approx(-x[0]).epsilon(1e-14));
  CHECK(step->a[0] == doctest::Approx(x[0]).epsilon(1e-14));
  CHECK(step->a[0] == doctest::Approx(0.5));

  CHECK_FALSE(sdca_update({LossVariant::topk_alpha, 1}, 1.0, 1, 0.0, 0, scores, a));
  CHECK_THROWS_AS(sdca_update({LossVariant::topk_alpha, 1}, 1.0, 1, 1.0, 2,
                              scores, a),
                  std::invalid_argument);
}

TEST_CASE("sdca_update: constraints, fixed point and block optimality") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 24; ++trial) {
    const std::size_t m = 3 + static_cast<std::size_t>(trial % 4);
    const std::size_t k = 1 + static_cast<std::size_t>(trial / 4) % (m - 1);
    const auto v = trial % 2 ? LossVariant::topk_beta : LossVariant::topk_alpha;
    const double lambda = std::vector<double>{0.01, 0.1, 1.0}[trial % 3];
    const Dataset data = testutil::synthetic_dataset(rng, 12, 4, m);
    const SolverConfig cfg = config_for(v, k, lambda);
    Trainer t(data, cfg);
    for (int e = 0; e < 3; ++e) t.run_epoch();

    const std::size_t n = data.num_examples();
    const double r = 1.0 / (lambda * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = t.state();
      const auto x = data.X.col(i);
      const std::size_t y = data.labels[i];
      Vector scores(m);
      for (std::size_t j = 0; j < m; ++j) scores[j] = dot(s.W.col(j), x);
      const Vector a_old(s.A.col(i).begin(), s.A.col(i).end());
      const auto step =
          sdca_update(cfg.loss, lambda, n, s.squared_norms[i], y, scores, a_old);
      REQUIRE(step);
      CHECK(std::abs(sum(step->a)) < 1e-12);

      DualState probe = s;
      std::copy(step->a.begin(), step->a.end(), probe.A.col(i).begin());
      CHECK(dual_column_feasible(probe, data, cfg, i));

      // Applying the update, then updating again, changes nothing.
      const double best = block_dual(s.W, x, a_old, step->a, y, lambda);
      Matrix W1 = s.W;
      Vector delta(m);
      for (std::size_t j = 0; j < m; ++j) delta[j] = step->a[j] - a_old[j];
      rank1_update(W1, x, delta);
      for (std::size_t j = 0; j < m; ++j) scores[j] = dot(W1.col(j), x);
      const auto again =
          sdca_update(cfg.loss, lambda, n, s.squared_norms[i], y, scores, step->a);
      CHECK(testutil::max_abs_diff(again->a, step->a) < 1e-10);
      CHECK(best >= block_dual(s.W, x, a_old, a_old, y, lambda) - 1e-12);

      // 100 random feasible blocks never beat the exact update.
      int drawn = 0;
      while (drawn < 100) {
        Vector p(m - 1);
        for (double& z : p) z = r * unit(rng) * (unit(rng) < 0.3 ? 0.0 : 1.0);
        const bool ok =
            v == LossVariant::topk_alpha
                ? in_topk_simplex(p, k, r, 0.0)
                : sum(p) <= r && *std::max_element(p.begin(), p.end()) <=
                                     r / static_cast<double>(k);
        if (!ok) continue;
        ++drawn;
        Vector cand(m);
        double total = 0.0;
        for (std::size_t j = 0, q = 0; j < m; ++j) {
          if (j == y) continue;
          cand[j] = -p[q];
          total += p[q++];
        }
        cand[y] = total;
        CHECK(block_dual(s.W, x, a_old, cand, y, lambda) <= best + 1e-12);
      }
      t.update(i);
    }
  }
}

TEST_CASE("dual ascent and weak duality along a run") {
  std::mt19937_64 rng(45);
  const Dataset data = testutil::synthetic_dataset(rng, 25, 6, 5);
  for (auto v : {LossVariant::topk_alpha, LossVariant::topk_beta}) {
    Trainer t(data, config_for(v, 2, 0.01));
    double prev = t.dual();
    for (int e = 0; e < 10; ++e) {
      for (std::size_t i = 0; i < data.num_examples(); ++i) {
        t.update((i * 7 + static_cast<std::size_t>(e)) % data.num_examples());
        const double d = t.dual();
        CHECK(d >= prev - 1e-10);
        prev = d;
      }
      CHECK(t.primal() >= t.dual() - 1e-8);
    }
  }
}

TEST_CASE("separable toy set reaches a tiny gap with zero training error") {
  const Dataset data = separable_toy();
  SolverConfig cfg = config_for(LossVariant::topk_alpha, 1, 0.1);
  cfg.epsilon = 1e-6;
  cfg.max_epochs = 100000;
  const auto [model, report] = train(data, cfg);
  CHECK(report.converged);
  CHECK(report.relative_gap <= 1e-6);
  const std::size_t ks[] = {1};
  CHECK(topk_accuracy(model, data, ks)[0] == 100.0);
}

TEST_CASE("k = 1 solution matches a long reference run") {
  std::mt19937_64 rng(46);
  const Dataset data = testutil::synthetic_dataset(rng, 6, 3, 3);
  for (auto v : {LossVariant::topk_alpha, LossVariant::topk_beta}) {
    SolverConfig ref_cfg = config_for(v, 1, 0.1);
    ref_cfg.epsilon = 1e-300;
    ref_cfg.max_epochs = 100000;
    ref_cfg.seed = 7;
    const Model ref = train(data, ref_cfg).first;

    SolverConfig cfg = config_for(v, 1, 0.1);
    cfg.epsilon = 1e-9;
    cfg.max_epochs = 100000;
    const auto [model, report] = train(data, cfg);
    CHECK(report.converged);
    Matrix diff = model.W;
    for (std::size_t j = 0; j < diff.values().size(); ++j) {
      diff.values()[j] -= ref.W.values()[j];
    }
    CHECK(std::sqrt(diff.squared_norm()) <= 1e-4);
  }
}

TEST_CASE("same seed gives bit-identical weights") {
  std::mt19937_64 rng(47);
  const Dataset data = testutil::synthetic_dataset(rng, 40, 5, 4);
  SolverConfig cfg = config_for(LossVariant::topk_alpha, 2, 0.01);
  cfg.max_epochs = 20;
  const Model a = train(data, cfg).first;
  const Model b = train(data, cfg).first;
  CHECK(a == b);
  cfg.seed = 43;
  const Model c = train(data, cfg).first;
  CHECK_FALSE(a.W == c.W);
}

TEST_CASE("reported gap matches a fresh evaluation") {
  std::mt19937_64 rng(48);
  const Dataset data = testutil::synthetic_dataset(rng, 30, 5, 4);
  SolverConfig cfg = config_for(LossVariant::topk_beta, 2, 0.05);
  cfg.epsilon = 1e-8;
  cfg.max_epochs = 10000;
  Trainer t(data, cfg);
  const TrainReport report = t.run();
  CHECK(report.converged);
  CHECK(report.max_weight_drift < 1e-10);

  DualState fresh = t.state();
  fresh.W = weights_from_dual(data.X, fresh.A);
  const double p = primal_objective(fresh.W, data, cfg);
  const double d = dual_objective(fresh, data, cfg);
  CHECK(std::abs(relative_gap(p, d) - report.relative_gap) <= 1e-12);
  CHECK(report.primal_objective == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("configuration and data validation") {
  const Dataset data = separable_toy();
  SolverConfig cfg = config_for(LossVariant::topk_alpha, 1, 0.1);
  CHECK_NOTHROW(cfg.validate(2));
  cfg.loss.k = 2;
  CHECK_THROWS_AS(train(data, cfg), std::invalid_argument);
  cfg.loss.k = 1;
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(train(data, cfg), std::invalid_argument);
  cfg.lambda = std::nan("");
  CHECK_THROWS_AS(cfg.validate(2), std::invalid_argument);
  cfg.lambda = 0.1;
  cfg.epsilon = -1.0;
  CHECK_THROWS_AS(cfg.validate(2), std::invalid_argument);
  cfg.epsilon = 1e-3;
  cfg.max_epochs = 0;
  CHECK_THROWS_AS(cfg.validate(2), std::invalid_argument);

  Dataset broken = data;
  broken.labels.pop_back();
  CHECK_THROWS_AS(train(broken, config_for(LossVariant::topk_alpha, 1, 0.1)),
                  std::invalid_argument);
}

TEST_CASE("zero-norm examples are skipped") {
  Matrix X(2, 3, Vector{1, 0, 0, 0, 0, 1});
  const std::int64_t y[] = {1, 2, 3};
  const Dataset data = make_dataset(std::move(X), y);
  SolverConfig cfg = config_for(LossVariant::topk_alpha, 1, 0.1);
  cfg.max_epochs = 50;
  Trainer t(data, cfg);
  const TrainReport report = t.run();
  CHECK(report.skipped_examples == 1);
  for (std::size_t j = 0; j < 3; ++j) CHECK(t.state().A(j, 1) == 0.0);
  CHECK(report.primal_objective >= report.dual_objective - 1e-8);
}

TEST_CASE("predict_scores and topk_accuracy") {
  // Three classes, two features, hand-built W. Scores per example are
  // W^T x with columns (1,0), (0,1), (-1,-1).
  Model model;
  model.W = Matrix(2, 3, Vector{1, 0, 0, 1, -1, -1});
  model.loss = {LossVariant::topk_alpha, 1};
  model.lambda = 1.0;
  model.label_values = {1, 2, 3};

  Matrix X(3, 4, Vector{2, 1, 9, 0, 1, 9, -1, -1, 9, 1, 3, 9});
  const Matrix S = predict_scores(model, X);
  CHECK(S.rows() == 3);
  CHECK(S(0, 0) == 2.0);
  CHECK(S(1, 0) == 1.0);
  CHECK(S(2, 0) == -3.0);

  // Score rows: ex0 (2,1,-3), ex1 (0,1,-1), ex2 (-1,-1,2), ex3 (1,3,-4).
  const std::int64_t y[] = {1, 1, 2, 3};
  const Dataset data = make_dataset(Matrix(X), y, {1, 2, 3});
  const std::size_t ks[] = {1, 2, 3};
  const auto acc = topk_accuracy(model, data, ks);
  // top-1 hits: ex0 only. top-2 adds ex1 and ex2 (ties with -1 count as
  // correct). ex3 is ranked last.
  CHECK(acc[0] == 25.0);
  CHECK(acc[1] == 75.0);
  CHECK(acc[2] == 100.0);

  // Labels the model has never seen are errors at every k.
  const std::int64_t y2[] = {1, 1, 2, 7};
  const Dataset other = make_dataset(Matrix(X), y2);
  CHECK(topk_accuracy(model, other, ks)[2] == 75.0);

  const std::size_t bad[] = {4};
  CHECK_THROWS_AS(topk_accuracy(model, data, bad), std::invalid_argument);
}

TEST_CASE("accuracy sanity on trained and random models") {
  std::mt19937_64 rng(49);
  const Dataset data = testutil::synthetic_dataset(rng, 60, 8, 10, 0.05);
  SolverConfig cfg = config_for(LossVariant::topk_alpha, 1, 1e-4);
  cfg.max_epochs = 500;
  const Model model = train(data, cfg).first;
  const std::size_t ks[] = {1, 10};
  CHECK(topk_accuracy(model, data, ks)[0] == 100.0);

  Model random = model;
  for (double& w : random.W.values()) w = std::normal_distribution<double>()(rng);
  CHECK(topk_accuracy(random, data, ks)[1] == 100.0);
}
