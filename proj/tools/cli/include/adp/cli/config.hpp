#pragma once

#include <adp/prior.hpp>
#include <adp/schedule.hpp>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace adp::cli {

using Json = nlohmann::json;

// Dotted-path access into a JSON object tree.
const Json* find_path(const Json& root, const std::string& dotted);
void set_path(Json& root, const std::string& dotted, Json value);

// Parses a scalar the way overrides are written on the command line: JSON literals (numbers,
// true/false/null, quoted strings, arrays, objects) when valid, otherwise the raw string.
Json parse_scalar(const std::string& text);

// Layers, lowest precedence first: the JSON file, ADP_* environment variables (ADP_A__B=v sets
// "a.b"), then key=value overrides. Throws ConfigError on unreadable files or malformed input.
Json load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides,
                 char** environ_ptr);

enum class Task { complete, distances, refine, simulate_map, bench };
const char* to_string(Task task);

struct DenoiserSpec {
  std::string kind = "library";  // gaussian | library | oracle | remote
  std::string address;           // remote only
  double spread = 0.0;           // mixture component spread c
  int decoys = 16;               // library: random decoys next to the target
  std::vector<std::string> library;  // extra component PDBs
  double blend = 1.0;            // oracle
  int timeout_ms = 30000;        // remote
  // gaussian/library: "rigid" superposes components onto the current estimate first. Resolved
  // from "auto" to rigid for the distances task and none elsewhere.
  std::string align = "auto";
};

struct CompleteSpec {
  int k = 2;
  double learning_rate = 0.3;
  double momentum = 0.9;
};

struct DistancesSpec {
  int m = 500;
  std::optional<double> learning_rate;  // default 200 / m
  double momentum = 0.99;
  std::string pairs_path;  // optional CSV i,j,distance
};

struct RefineSpec {
  std::string map_path;
  std::string partial_path;
  double learning_rate_map = 0.1;      // model (masked linear) term
  double learning_rate_density = 0.01;
  double momentum = 0.9;
  double anneal_start = 5.0;
  double anneal_end = 1.5;
  int anneal_epochs = 1000;
  double keep_fraction = 1.0;
  double blur = 0.0;
  std::string filter = "sharp";
  // Expected grid; checked against the map when present.
  std::optional<int> grid_size;
  std::optional<double> grid_voxel;
  std::optional<std::vector<double>> grid_origin;
};

struct SimulateSpec {
  double resolution = 2.0;
  double voxel = 1.0;
  double padding = 6.0;
  int size = 0;  // 0: fit the chain plus padding
  double noise = 0.0;
  double blur = 0.0;
  std::string output = "map.mrc";
};

struct BenchSpec {
  int n_residues = 130;
  int k = 2;
  int steps = 200000;            // no-prior iteration cap
  double stop_relative_loss = 1e-6;
  double preconditioned_rate = 0.3;
  double momentum = 0.9;
  int dps_residues = 64;
  int dps_steps = 200;
  int dps_replicas = 2;
  double zeta = 0.1;             // DPS step size
};

// Everything a subcommand needs, resolved from the config tree with task defaults applied.
struct ExperimentSpec {
  Task task = Task::complete;
  std::string target_path;
  std::string output_dir = "adp-out";
  std::uint64_t seed = 0;
  int replicas = 8;
  int jobs = 0;
  bool verbose = false;
  PriorParams prior;
  NoiseSchedule schedule;
  DenoiserSpec denoiser;
  CompleteSpec complete;
  DistancesSpec distances;
  RefineSpec refine;
  SimulateSpec simulate;
  BenchSpec bench;

  // Throws ConfigError naming the first missing or invalid key.
  void validate() const;
  Json to_json() const;
};

// Reads the tree into a spec for `task`. Unknown keys are rejected so that typos surface.
ExperimentSpec resolve_spec(const Json& config, Task task);

}  // namespace adp::cli
