#include "adp/cli/app.hpp"

#include <adp/error.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <iostream>
#include <optional>

extern char** environ;

namespace adp::cli {

namespace {

struct CommonFlags {
  std::optional<std::string> config;
  std::vector<std::string> overrides;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
  std::optional<int> jobs;
  std::optional<std::string> denoiser;
  std::optional<int> steps;
  bool dry_run = false;
  int verbosity = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_steps) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--set", f.overrides, "Override a config key (key=value, repeatable)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--seed", f.seed, "Root random seed");
  cmd->add_option("--replicas", f.replicas, "Number of replicas");
  cmd->add_option("--jobs", f.jobs, "Replicas run in parallel (0 = all cores)");
  cmd->add_option("--denoiser", f.denoiser, "gaussian | library | oracle | remote:ADDR");
  if (with_steps) cmd->add_option("--steps", f.steps, "Iteration cap");
  cmd->add_flag("--dry-run", f.dry_run, "Validate the config and print the plan");
  cmd->add_flag("-v,--verbose", f.verbosity, "More logging (repeatable)");
}

ExperimentSpec build_spec(const CommonFlags& f, Task task) {
  std::vector<std::string> overrides = f.overrides;
  auto push = [&](const std::string& key, const std::string& value) { overrides.push_back(key + "=" + value); };
  if (f.out) push("output", Json(*f.out).dump());
  if (f.seed) push("seed", std::to_string(*f.seed));
  if (f.replicas) push("replicas", std::to_string(*f.replicas));
  if (f.jobs) push("jobs", std::to_string(*f.jobs));
  if (f.denoiser) push("denoiser.kind", Json(*f.denoiser).dump());
  if (f.steps) {
    if (task == Task::bench) {
      push("bench.steps", std::to_string(*f.steps));
      push("bench.dps_steps", std::to_string(*f.steps));
    } else {
      push("schedule.steps", std::to_string(*f.steps));
    }
  }
  const Json config = load_config(f.config, overrides, environ);
  ExperimentSpec spec = resolve_spec(config, task);
  spec.verbose = spec.verbose || f.verbosity > 0;
  return spec;
}

void check_inputs_exist(const ExperimentSpec& spec) {
  auto exists = [](const std::string& path, const char* key) {
    if (!path.empty() && !std::filesystem::exists(path))
      throw ConfigError(std::string(key) + ": file not found: " + path);
  };
  exists(spec.target_path, "target");
  exists(spec.refine.map_path, "refine.map");
  exists(spec.refine.partial_path, "refine.partial");
  exists(spec.distances.pairs_path, "distances.pairs");
  for (const auto& p : spec.denoiser.library) exists(p, "denoiser.library");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusion-prior MAP reconstruction of protein backbones"};
  app.require_subcommand(1);
  CommonFlags flags;
  struct Sub {
    const char* name;
    Task task;
    const char* help;
  };
  const Sub subs[] = {
      {"complete", Task::complete, "Structure completion from every k-th residue"},
      {"distances", Task::distances, "Structure from sparse CA-CA distances"},
      {"refine", Task::refine, "Refine a partial model against a density map"},
      {"simulate-map", Task::simulate_map, "Render a density map from a PDB"},
      {"bench", Task::bench, "Optimizer and DPS comparisons"},
  };
  std::vector<std::pair<CLI::App*, Task>> task_cmds;
  for (const auto& s : subs) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, flags, s.task == Task::bench || s.task == Task::complete || s.task == Task::distances ||
                               s.task == Task::refine);
    task_cmds.emplace_back(cmd, s.task);
  }
  ServeOptions serve;
  int serve_verbosity = 0;
  CLI::App* serve_cmd = app.add_subcommand("serve-echo", "Serve a test denoiser over the wire protocol");
  serve_cmd->add_option("--model", serve.model, "echo | zeros | gaussian")->capture_default_str();
  serve_cmd->add_option("--mu", serve.mu_path, "Component PDB for the gaussian model");
  serve_cmd->add_option("--spread", serve.spread, "Component spread c for the gaussian model");
  serve_cmd->add_option("--listen", serve.listen, "tcp:PORT instead of stdio");
  serve_cmd->add_option("--port-file", serve.port_file, "Write the bound TCP port here");
  serve_cmd->add_option("--max-connections", serve.max_connections, "Exit after this many TCP connections");
  serve_cmd->add_flag("-v,--verbose", serve_verbosity, "More logging");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? kSuccess : kConfigError;
  }

  // Logs go to stderr so stdout stays clean for the serve-echo protocol.
  static const bool logger_ready = [] {
    spdlog::set_default_logger(spdlog::stderr_color_mt("adp"));
    return true;
  }();
  (void)logger_ready;
  spdlog::set_level(spdlog::level::warn);
  try {
    if (serve_cmd->parsed()) {
      if (serve_verbosity > 0) spdlog::set_level(spdlog::level::info);
      return cmd_serve_echo(serve, std::cin, std::cout);
    }
    for (const auto& [cmd, task] : task_cmds) {
      if (!cmd->parsed()) continue;
      if (flags.verbosity > 1) spdlog::set_level(spdlog::level::debug);
      else if (flags.verbosity > 0) spdlog::set_level(spdlog::level::info);
      ExperimentSpec spec = build_spec(flags, task);
      if (flags.dry_run) {
        spec.validate();
        check_inputs_exist(spec);
        out << spec.to_json().dump(2) << '\n';
        return kSuccess;
      }
      switch (task) {
        case Task::complete: return cmd_complete(spec, out);
        case Task::distances: return cmd_distances(spec, out);
        case Task::refine: return cmd_refine(spec, out);
        case Task::simulate_map: return cmd_simulate_map(spec, out);
        case Task::bench: return cmd_bench(spec, out);
      }
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kConfigError;
}

}  // namespace adp::cli
