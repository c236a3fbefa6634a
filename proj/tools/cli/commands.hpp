#pragma once

#include <CLI11.hpp>

namespace cli {

void setup_train(CLI::App& app);
void setup_prune(CLI::App& app);
void setup_baseline(CLI::App& app);
void setup_bounds(CLI::App& app);
void setup_bench(CLI::App& app);

}  // namespace cli
