// Command-line front end.  All substance lives behind the shared library's C
// interface; this file only parses flags, loads the configuration file, and
// maps status codes to exit codes:
//
//   0  success
//   1  validation / domain error (bad configuration or arguments)
//   2  numerical failure
//   3  I/O failure
//   64 usage error (bad flags, missing --config)

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tvar/tvar.h"

int main(int argc, char** argv) {
  CLI::App app{"Time-varying autoregression simulation and estimation toolkit"};
  app.name("tvar");

  std::string command;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  bool emit_plots = false;
  bool show_version = false;

  app.add_option("command", command,
                 "Command to run (overrides the command in the config)")
      ->check(CLI::IsMember({"simulate", "estimate", "decompose", "covariance",
                             "risk", "rate", "expansion-check", "compare"}));
  CLI::Option* config_opt =
      app.add_option("-c,--config", config_path,
                     "Run configuration JSON file, or a manifest written by a "
                     "previous run");
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "Master seed override");
  CLI::Option* workers_opt = app.add_option(
      "--workers", workers,
      "Worker thread count override (0 = all hardware threads); results do "
      "not depend on this");
  CLI::Option* out_opt =
      app.add_option("-o,--out", out_dir, "Output directory override");
  CLI::Option* plots_opt = app.add_flag(
      "--emit-plots", emit_plots, "Also write matplotlib plot scripts");
  app.add_flag("--version", show_version, "Print the version and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  if (show_version) {
    std::printf("tvar %s\n", tvar_version());
    return 0;
  }

  if (config_opt->count() == 0) {
    std::fprintf(stderr, "tvar: --config is required (see --help)\n");
    return 64;
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "tvar: error (io): cannot open config file: %s\n",
                 config_path.c_str());
    return 3;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    std::fprintf(stderr, "tvar: error (io): read failed: %s\n",
                 config_path.c_str());
    return 3;
  }
  const std::string text = buf.str();

  char* summary = nullptr;
  const int rc =
      tvar_run(text.c_str(), command.empty() ? nullptr : command.c_str(),
               out_opt->count() > 0 ? out_dir.c_str() : nullptr,
               seed_opt->count() > 0 ? 1 : 0, seed,
               workers_opt->count() > 0 ? 1 : 0, workers,
               plots_opt->count() > 0 ? 1 : 0, emit_plots ? 1 : 0, &summary);

  if (rc == TVAR_OK) {
    if (summary != nullptr) {
      std::fputs(summary, stdout);
      tvar_string_free(summary);
    }
    return 0;
  }

  std::fprintf(stderr, "tvar: error (%s): %s\n", tvar_status_name(rc),
               tvar_last_error());
  switch (rc) {
    case TVAR_ERR_NUMERIC:
      return 2;
    case TVAR_ERR_IO:
      return 3;
    default:
      return 1;
  }
}
