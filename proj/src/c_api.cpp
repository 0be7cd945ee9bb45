#include "topksvm/topksvm.h"

#include <algorithm>
#include <exception>
#include <new>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "topksvm/bench.hpp"
#include "topksvm/dataset.hpp"
#include "topksvm/io.hpp"
#include "topksvm/model.hpp"
#include "topksvm/projections.hpp"
#include "topksvm/solver.hpp"

struct topksvm_dataset {
  topksvm::Dataset data;
};

struct topksvm_model {
  topksvm::Model model;
};

namespace {

thread_local std::string g_last_error;

struct BufferTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

topksvm_status fail(topksvm_status status, const char* msg) {
  g_last_error = msg;
  return status;
}

// Runs fn, translating C++ exceptions into status codes.
template <class F>
topksvm_status guarded(F&& fn) noexcept {
  try {
    fn();
    return TOPKSVM_OK;
  } catch (const BufferTooSmall& e) {
    return fail(TOPKSVM_ERR_BUFFER_TOO_SMALL, e.what());
  } catch (const topksvm::ParseError& e) {
    return fail(TOPKSVM_ERR_PARSE, e.what());
  } catch (const topksvm::FormatError& e) {
    return fail(TOPKSVM_ERR_FORMAT, e.what());
  } catch (const topksvm::IoError& e) {
    return fail(TOPKSVM_ERR_IO, e.what());
  } catch (const std::domain_error& e) {
    return fail(TOPKSVM_ERR_DOMAIN, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(TOPKSVM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TOPKSVM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TOPKSVM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TOPKSVM_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void require_capacity(std::size_t capacity, std::size_t needed) {
  if (capacity < needed) {
    throw BufferTooSmall("output buffer holds " + std::to_string(capacity) +
                         " values, need " + std::to_string(needed));
  }
}

void fill_info(const topksvm::ProjectionResult& res, double* x,
               topksvm_projection_info* info) {
  std::copy(res.x.begin(), res.x.end(), x);
  if (info != nullptr) {
    info->t = res.t;
    info->u = res.u;
    info->fallback = res.fallback ? 1 : 0;
  }
}

}  // namespace

extern "C" {

const char* topksvm_version(void) { return "1.0.0"; }

const char* topksvm_last_error(void) { return g_last_error.c_str(); }

const char* topksvm_status_string(topksvm_status status) {
  switch (status) {
    case TOPKSVM_OK:
      return "ok";
    case TOPKSVM_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case TOPKSVM_ERR_PARSE:
      return "parse error";
    case TOPKSVM_ERR_FORMAT:
      return "format error";
    case TOPKSVM_ERR_IO:
      return "i/o error";
    case TOPKSVM_ERR_DOMAIN:
      return "domain error";
    case TOPKSVM_ERR_BUFFER_TOO_SMALL:
      return "buffer too small";
    case TOPKSVM_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

topksvm_status topksvm_dataset_read_libsvm(const char* path,
                                           size_t min_features,
                                           topksvm_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto* h = new topksvm_dataset{topksvm::read_libsvm(path, min_features)};
    *out = h;
  });
}

topksvm_status topksvm_dataset_create(const double* X, size_t num_features,
                                      size_t num_examples,
                                      const int64_t* labels,
                                      topksvm_dataset** out) {
  return guarded([&] {
    require(X != nullptr && labels != nullptr && out != nullptr,
            "null argument");
    *out = nullptr;
    std::vector<double> values(X, X + num_features * num_examples);
    topksvm::Matrix m(num_features, num_examples, std::move(values));
    auto* h = new topksvm_dataset{topksvm::make_dataset(
        std::move(m), std::span<const std::int64_t>(labels, num_examples))};
    *out = h;
  });
}

void topksvm_dataset_free(topksvm_dataset* data) { delete data; }

size_t topksvm_dataset_num_examples(const topksvm_dataset* data) {
  return data != nullptr ? data->data.num_examples() : 0;
}

size_t topksvm_dataset_num_features(const topksvm_dataset* data) {
  return data != nullptr ? data->data.num_features() : 0;
}

size_t topksvm_dataset_num_classes(const topksvm_dataset* data) {
  return data != nullptr ? data->data.num_classes() : 0;
}

void topksvm_train_config_init(topksvm_train_config* config) {
  if (config == nullptr) return;
  config->loss = TOPKSVM_LOSS_ALPHA;
  config->k = 1;
  config->lambda = 1.0;
  config->epsilon = 1e-3;
  config->max_epochs = 300;
  config->seed = 42;
}

topksvm_status topksvm_train(const topksvm_dataset* data,
                             const topksvm_train_config* config,
                             topksvm_model** out,
                             topksvm_train_report* report) {
  return guarded([&] {
    require(data != nullptr && config != nullptr && out != nullptr,
            "null argument");
    *out = nullptr;
    require(config->loss == TOPKSVM_LOSS_ALPHA ||
                config->loss == TOPKSVM_LOSS_BETA,
            "unknown loss variant");
    topksvm::SolverConfig cfg;
    cfg.loss.variant = static_cast<topksvm::LossVariant>(config->loss);
    cfg.loss.k = config->k;
    cfg.lambda = config->lambda;
    cfg.epsilon = config->epsilon;
    cfg.max_epochs = config->max_epochs;
    cfg.seed = config->seed;
    auto [model, rep] = topksvm::train(data->data, cfg);
    auto* h = new topksvm_model{std::move(model)};
    if (report != nullptr) {
      report->epochs_run = rep.epochs_run;
      report->primal_objective = rep.primal_objective;
      report->dual_objective = rep.dual_objective;
      report->relative_gap = rep.relative_gap;
      report->wall_time = rep.wall_time;
      report->converged = rep.converged ? 1 : 0;
      report->skipped_examples = rep.skipped_examples;
      report->projection_fallbacks = rep.projection_fallbacks;
      report->max_weight_drift = rep.max_weight_drift;
    }
    *out = h;
  });
}

topksvm_status topksvm_model_save(const topksvm_model* model,
                                  const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "null argument");
    topksvm::write_model(model->model, std::filesystem::path(path));
  });
}

topksvm_status topksvm_model_load(const char* path, topksvm_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto* h = new topksvm_model{topksvm::read_model(std::filesystem::path(path))};
    *out = h;
  });
}

void topksvm_model_free(topksvm_model* model) { delete model; }

size_t topksvm_model_num_classes(const topksvm_model* model) {
  return model != nullptr ? model->model.num_classes() : 0;
}

size_t topksvm_model_num_features(const topksvm_model* model) {
  return model != nullptr ? model->model.num_features() : 0;
}

size_t topksvm_model_k(const topksvm_model* model) {
  return model != nullptr ? model->model.loss.k : 0;
}

double topksvm_model_lambda(const topksvm_model* model) {
  return model != nullptr ? model->model.lambda : 0.0;
}

topksvm_loss topksvm_model_loss(const topksvm_model* model) {
  return model != nullptr ? static_cast<topksvm_loss>(model->model.loss.variant)
                          : TOPKSVM_LOSS_ALPHA;
}

topksvm_status topksvm_model_weights(const topksvm_model* model, double* out,
                                     size_t capacity) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    const auto w = model->model.W.values();
    require_capacity(capacity, w.size());
    std::copy(w.begin(), w.end(), out);
  });
}

topksvm_status topksvm_model_label_values(const topksvm_model* model,
                                          int64_t* out, size_t capacity) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    const auto& v = model->model.label_values;
    require_capacity(capacity, v.size());
    std::copy(v.begin(), v.end(), out);
  });
}

topksvm_status topksvm_predict_scores(const topksvm_model* model,
                                      const topksvm_dataset* data, double* out,
                                      size_t capacity) {
  return guarded([&] {
    require(model != nullptr && data != nullptr && out != nullptr,
            "null argument");
    require_capacity(capacity,
                     model->model.num_classes() * data->data.num_examples());
    const topksvm::Matrix S = topksvm::predict_scores(model->model, data->data.X);
    std::copy(S.values().begin(), S.values().end(), out);
  });
}

topksvm_status topksvm_rank_labels(const topksvm_model* model,
                                   const topksvm_dataset* data, size_t top,
                                   int64_t* out, size_t capacity) {
  return guarded([&] {
    require(model != nullptr && data != nullptr && out != nullptr,
            "null argument");
    const std::size_t m = model->model.num_classes();
    require(top >= 1 && top <= m, "top must be in [1, num_classes]");
    const std::size_t n = data->data.num_examples();
    require_capacity(capacity, n * top);
    const topksvm::Matrix S = topksvm::predict_scores(model->model, data->data.X);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ranked = topksvm::sorted_desc_with_index(S.col(i));
      for (std::size_t r = 0; r < top; ++r) {
        out[i * top + r] = model->model.label_values[ranked.order[r]];
      }
    }
  });
}

topksvm_status topksvm_topk_accuracy(const topksvm_model* model,
                                     const topksvm_dataset* data,
                                     const size_t* ks, size_t nks,
                                     double* out) {
  return guarded([&] {
    require(model != nullptr && data != nullptr && ks != nullptr &&
                out != nullptr,
            "null argument");
    const auto acc = topksvm::topk_accuracy(
        model->model, data->data, std::span<const std::size_t>(ks, nks));
    std::copy(acc.begin(), acc.end(), out);
  });
}

topksvm_status topksvm_project_knapsack(const double* a, size_t d,
                                        double lower, double upper, double rhs,
                                        double* x,
                                        topksvm_projection_info* info) {
  return guarded([&] {
    require(a != nullptr && x != nullptr, "null argument");
    fill_info(topksvm::project_knapsack({a, d}, lower, upper, rhs), x, info);
  });
}

topksvm_status topksvm_project_topk_cone(const double* a, size_t d, size_t k,
                                         double rho, double* x,
                                         topksvm_projection_info* info) {
  return guarded([&] {
    require(a != nullptr && x != nullptr, "null argument");
    fill_info(topksvm::project_topk_cone({a, d}, k, rho), x, info);
  });
}

topksvm_status topksvm_project_topk_simplex(const double* a, size_t d,
                                            size_t k, double r, double rho,
                                            double* x,
                                            topksvm_projection_info* info) {
  return guarded([&] {
    require(a != nullptr && x != nullptr, "null argument");
    fill_info(topksvm::project_topk_simplex({a, d}, {k, r, rho}), x, info);
  });
}

topksvm_status topksvm_project_topk_box(const double* a, size_t d, size_t k,
                                        double r, double rho, double* x,
                                        topksvm_projection_info* info) {
  return guarded([&] {
    require(a != nullptr && x != nullptr, "null argument");
    fill_info(topksvm::project_topk_box({a, d}, k, r, rho), x, info);
  });
}

topksvm_status topksvm_bench_proj(const size_t* dims, size_t ndims,
                                  const size_t* ks, size_t nks, size_t samples,
                                  uint64_t seed, topksvm_bench_row* rows,
                                  size_t capacity, size_t* count) {
  return guarded([&] {
    require(dims != nullptr && ks != nullptr && rows != nullptr &&
                count != nullptr,
            "null argument");
    *count = 0;
    require_capacity(capacity, 2 * ndims * nks);
    const auto result = topksvm::bench_projections(
        std::span<const std::size_t>(dims, ndims),
        std::span<const std::size_t>(ks, nks), samples, seed);
    for (std::size_t j = 0; j < result.size(); ++j) {
      rows[j].dim = result[j].dim;
      rows[j].k = result[j].k;
      rows[j].method = result[j].method == "knapsack"
                           ? TOPKSVM_BENCH_KNAPSACK
                           : TOPKSVM_BENCH_TOPK_SIMPLEX;
      rows[j].seconds = result[j].seconds;
    }
    *count = result.size();
  });
}

}  // extern "C"
