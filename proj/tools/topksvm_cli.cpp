// topksvm command-line front end. Talks to the library only through the C API.
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "topksvm/topksvm.h"

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(topksvm_status st, const std::string& what) {
  if (st != TOPKSVM_OK) {
    throw CliError(what + ": " + topksvm_status_string(st) + ": " +
                   topksvm_last_error());
  }
}

struct DatasetDeleter {
  void operator()(topksvm_dataset* p) const { topksvm_dataset_free(p); }
};
struct ModelDeleter {
  void operator()(topksvm_model* p) const { topksvm_model_free(p); }
};
using DatasetPtr = std::unique_ptr<topksvm_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<topksvm_model, ModelDeleter>;

DatasetPtr load_data(const std::string& path, std::size_t min_features = 0) {
  topksvm_dataset* raw = nullptr;
  check(topksvm_dataset_read_libsvm(path.c_str(), min_features, &raw),
        "reading " + path);
  return DatasetPtr(raw);
}

ModelPtr load_model(const std::string& path) {
  topksvm_model* raw = nullptr;
  check(topksvm_model_load(path.c_str(), &raw), "loading " + path);
  return ModelPtr(raw);
}

// TOPKSVM_THREADS is reserved. Everything runs on one thread for now, but a
// malformed value is still an error.
void check_threads_env() {
  const char* env = std::getenv("TOPKSVM_THREADS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) {
    throw CliError(std::string("TOPKSVM_THREADS must be a positive integer, got '") +
                   env + "'");
  }
  if (v != 1) {
    std::cerr << "topksvm: TOPKSVM_THREADS=" << v
              << " ignored, running single-threaded\n";
  }
}

struct TrainArgs {
  std::string data, model, loss = "alpha";
  std::size_t k = 1;
  double lambda = 1.0;
  double epsilon = 1e-3;
  std::size_t max_epochs = 300;
  std::uint64_t seed = 42;
};

void cmd_train(const TrainArgs& args) {
  DatasetPtr data = load_data(args.data);
  topksvm_train_config cfg;
  topksvm_train_config_init(&cfg);
  cfg.loss = args.loss == "beta" ? TOPKSVM_LOSS_BETA : TOPKSVM_LOSS_ALPHA;
  cfg.k = args.k;
  cfg.lambda = args.lambda;
  cfg.epsilon = args.epsilon;
  cfg.max_epochs = args.max_epochs;
  cfg.seed = args.seed;

  std::cerr << "topksvm: training on n=" << topksvm_dataset_num_examples(data.get())
            << " d=" << topksvm_dataset_num_features(data.get())
            << " m=" << topksvm_dataset_num_classes(data.get()) << "\n";
  topksvm_model* raw = nullptr;
  topksvm_train_report rep{};
  check(topksvm_train(data.get(), &cfg, &raw, &rep), "train");
  ModelPtr model(raw);
  check(topksvm_model_save(model.get(), args.model.c_str()),
        "writing " + args.model);
  if (!rep.converged) {
    std::cerr << "topksvm: gap " << rep.relative_gap << " above epsilon after "
              << rep.epochs_run << " epochs\n";
  }
  if (rep.skipped_examples > 0) {
    std::cerr << "topksvm: skipped " << rep.skipped_examples
              << " zero-norm examples\n";
  }

  nlohmann::ordered_json out;
  out["epochs"] = rep.epochs_run;
  out["P"] = rep.primal_objective;
  out["D"] = rep.dual_objective;
  out["gap"] = rep.relative_gap;
  out["seconds"] = rep.wall_time;
  out["converged"] = rep.converged != 0;
  out["skipped"] = rep.skipped_examples;
  out["fallbacks"] = rep.projection_fallbacks;
  std::cout << out.dump() << std::endl;
}

void cmd_predict(const std::string& model_path, const std::string& data_path,
                 const std::string& out_path, std::size_t top) {
  ModelPtr model = load_model(model_path);
  DatasetPtr data = load_data(data_path);
  const std::size_t m = topksvm_model_num_classes(model.get());
  const std::size_t n = topksvm_dataset_num_examples(data.get());
  if (top > m) top = m;
  std::vector<std::int64_t> ranked(n * top);
  check(topksvm_rank_labels(model.get(), data.get(), top, ranked.data(),
                            ranked.size()),
        "predict");

  std::ofstream out(out_path);
  if (!out) throw CliError("cannot open " + out_path + " for writing");
  out << "example";
  for (std::size_t r = 1; r <= top; ++r) out << ",rank" << r;
  out << "\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << i;
    for (std::size_t r = 0; r < top; ++r) out << ',' << ranked[i * top + r];
    out << "\n";
  }
  out.flush();
  if (!out) throw CliError("write to " + out_path + " failed");
}

void cmd_evaluate(const std::string& model_path, const std::string& data_path,
                  const std::vector<std::size_t>& ks) {
  ModelPtr model = load_model(model_path);
  DatasetPtr data = load_data(data_path);
  std::vector<double> acc(ks.size());
  check(topksvm_topk_accuracy(model.get(), data.get(), ks.data(), ks.size(),
                              acc.data()),
        "evaluate");
  nlohmann::ordered_json out;
  out["examples"] = topksvm_dataset_num_examples(data.get());
  nlohmann::ordered_json accs = nlohmann::ordered_json::object();
  for (std::size_t q = 0; q < ks.size(); ++q) {
    accs[std::to_string(ks[q])] = acc[q];
  }
  out["accuracy"] = accs;
  std::cout << out.dump() << std::endl;
}

void cmd_bench(const std::vector<std::size_t>& dims,
               const std::vector<std::size_t>& ks, std::size_t samples,
               std::uint64_t seed) {
  std::vector<topksvm_bench_row> rows(2 * dims.size() * ks.size());
  std::size_t count = 0;
  check(topksvm_bench_proj(dims.data(), dims.size(), ks.data(), ks.size(),
                           samples, seed, rows.data(), rows.size(), &count),
        "bench-proj");
  std::cout << "dim,k,method,seconds\n";
  for (std::size_t j = 0; j < count; ++j) {
    const auto& r = rows[j];
    std::cout << r.dim << ',' << r.k << ','
              << (r.method == TOPKSVM_BENCH_KNAPSACK ? "knapsack"
                                                     : "topk_simplex")
              << ',' << r.seconds << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Top-k multiclass SVM: training, prediction and projection timing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(topksvm_version()));

  TrainArgs targs;
  auto* train = app.add_subcommand("train", "Train a model with Prox-SDCA");
  train->add_option("--data", targs.data, "LIBSVM training file")->required();
  train->add_option("--model", targs.model, "Output model file")->required();
  train->add_option("--k", targs.k, "Loss parameter k")
      ->check(CLI::PositiveNumber);
  train->add_option("--lambda", targs.lambda, "Regularization")
      ->check(CLI::PositiveNumber);
  train->add_option("--loss", targs.loss, "alpha or beta")
      ->check(CLI::IsMember({"alpha", "beta"}));
  train->add_option("--epsilon", targs.epsilon, "Relative duality gap target")
      ->check(CLI::PositiveNumber);
  train->add_option("--max-epochs", targs.max_epochs, "Epoch limit")
      ->check(CLI::PositiveNumber);
  train->add_option("--seed", targs.seed, "Shuffle seed");

  std::string model_path, data_path, out_path;
  std::size_t top = 10;
  auto* predict = app.add_subcommand("predict", "Rank labels per example");
  predict->add_option("--model", model_path)->required();
  predict->add_option("--data", data_path)->required();
  predict->add_option("--out", out_path, "CSV output")->required();
  predict->add_option("--top", top, "Labels per example")
      ->check(CLI::PositiveNumber);

  std::vector<std::size_t> ks;
  auto* evaluate = app.add_subcommand("evaluate", "Top-k accuracy in percent");
  evaluate->add_option("--model", model_path)->required();
  evaluate->add_option("--data", data_path)->required();
  evaluate->add_option("--topk", ks, "Comma-separated k values")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);

  std::vector<std::size_t> dims, bks;
  std::size_t samples = 1000;
  std::uint64_t seed = 42;
  auto* bench = app.add_subcommand("bench-proj", "Time knapsack vs top-k simplex");
  bench->add_option("--dims", dims, "Comma-separated dimensions")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  bench->add_option("--k", bks, "Comma-separated k values")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  bench->add_option("--samples", samples)->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "topksvm: " << e.what() << "\n";
    return 2;
  }

  try {
    check_threads_env();
    if (*train) {
      cmd_train(targs);
    } else if (*predict) {
      cmd_predict(model_path, data_path, out_path, top);
    } else if (*evaluate) {
      cmd_evaluate(model_path, data_path, ks);
    } else if (*bench) {
      cmd_bench(dims, bks, samples, seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "topksvm: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
