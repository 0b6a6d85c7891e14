#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace ponderolens;
using namespace ponderolens::cli;

namespace {

int execute(const std::string& cmd, const Options& o) {
  RunConfig cfg = load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.output) cfg.output_dir = *o.output;
  cfg.validate();
  if (o.dry_run) {
    std::cout << "config  " << o.config_path << " (valid)\n"
              << "seed    " << cfg.seed << "\n"
              << "output  " << cfg.output_dir << "\n"
              << "threads " << thread_count() << "\n"
              << "stages ";
    for (auto& s : plan(cmd, cfg)) std::cout << " " << s;
    std::cout << "\n";
    return 0;
  }
  Run run(cfg);
  if (cmd == "focus") return cmd_focus(run);
  if (cmd == "phase") return cmd_phase(run, o);
  if (cmd == "probe") return cmd_probe(run, o);
  if (cmd == "optimize") return cmd_optimize(run);
  if (cmd == "metrics") return cmd_metrics(run, o);
  return cmd_pipeline(run);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ponderomotive correction of electron-lens chromatic aberration"};
  app.set_version_flag("--version", version);
  app.require_subcommand(1);

  Options o;
  if (const char* env = std::getenv("PONDEROLENS_THREADS")) o.threads = std::max(1, std::atoi(env));

  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"focus", "pupil field, focal intensity stack S"},
      {"phase", "ponderomotive phase stack from S (computed or --input)"},
      {"probe", "electron probe and metrics"},
      {"optimize", "tune SLM parameters with the curvature cost"},
      {"pipeline", "optimize (if enabled), focus, phase, probe, metrics"},
      {"metrics", "metrics for an existing probe.plg (--input)"}};
  std::string chosen;
  for (auto& [name, help] : cmds) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config,-c", o.config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    s->add_option("--seed", o.seed, "override the config seed");
    s->add_option("--output,-o", o.output, "override the output directory");
    s->add_option("--threads,-j", o.threads, "worker threads (env PONDEROLENS_THREADS)")->check(CLI::PositiveNumber);
    s->add_flag("--dry-run", o.dry_run, "validate and print the stage plan");
    if (name == "phase" || name == "probe" || name == "metrics")
      s->add_option("--input,-i", o.input, "input grid file")->check(CLI::ExistingFile);
    s->callback([&chosen, n = name] { chosen = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : int(ExitCode::config);
  }

  thread_count() = o.threads;
  try {
    return execute(chosen, o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return int(e.code());
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return int(ExitCode::io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return int(ExitCode::io);
  }
}
