#include <cstdio>
#include <memory>

#include "commands.hpp"
#include "common.hpp"

namespace cli {

namespace {

struct TrainOpts {
  DataOpts data;
  std::vector<std::size_t> hidden{128, 64};
  std::size_t epochs = 20;
  double learning_rate = 0.05;
  std::size_t minibatch = 32;
  std::uint64_t seed = 0;
  std::string out_model;
};

void run_train(const TrainOpts& o) {
  const DataSplit ds = materialize(o.data, o.seed);
  const std::size_t dim = feta_dataset_dim(ds.train);
  const std::int32_t classes = feta_dataset_classes(ds.train);

  // Seed layout: seed feeds the data, seed+1 the init, seed+2 the shuffles.
  NetworkHandle net;
  check(feta_network_create_mlp(dim, o.hidden.data(), o.hidden.size(), classes, o.seed + 1,
                                net.out()),
        "creating network");
  check(feta_network_train_sgd(net, ds.train, o.epochs, o.learning_rate, o.minibatch, o.seed + 2),
        "training");

  std::printf("train accuracy %.6f\n", accuracy_of(net, ds.train, "train accuracy"));
  if (ds.test) {
    std::printf("test accuracy %.6f\n", accuracy_of(net, ds.test, "test accuracy"));
  }
  if (!o.out_model.empty()) {
    check(feta_network_save(net, o.out_model.c_str()), "saving model");
    std::fprintf(stderr, "model saved to %s\n", o.out_model.c_str());
  }
}

}  // namespace

void setup_train(CLI::App& app) {
  auto opts = std::make_shared<TrainOpts>();
  CLI::App* cmd = app.add_subcommand("train", "Train a reference MLP and save it");
  add_data_flags(cmd, opts->data);
  cmd->add_option("--hidden", opts->hidden, "Hidden layer widths")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--epochs", opts->epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--lr", opts->learning_rate, "Learning rate")->capture_default_str();
  cmd->add_option("--batch", opts->minibatch, "Minibatch size")->capture_default_str();
  cmd->add_option("--seed", opts->seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", opts->out_model, "Where to save the trained model");
  cmd->callback([opts] { run_train(*opts); });
}

}  // namespace cli
