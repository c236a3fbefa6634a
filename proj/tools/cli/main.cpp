#include <cstdio>

#include <CLI11.hpp>

#include "commands.hpp"
#include "common.hpp"
#include "feta/feta.h"

int main(int argc, char** argv) {
  CLI::App app{"Layer pruning by difference-of-convex optimization"};
  app.set_version_flag("--version", feta_version());
  app.require_subcommand(1);

  cli::setup_train(app);
  cli::setup_prune(app);
  cli::setup_baseline(app);
  cli::setup_bounds(app);
  cli::setup_bench(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage problems are exit 2, --help stays 0
  } catch (const cli::CommandError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code;
  }
  return 0;
}
