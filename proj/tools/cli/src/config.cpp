#include "adp/cli/config.hpp"

#include <adp/error.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace adp::cli {

namespace {

std::vector<std::string> split_path(const std::string& dotted) {
  std::vector<std::string> parts;
  std::stringstream ss(dotted);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ConfigError("malformed config key '" + dotted + "'");
    parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError("empty config key");
  return parts;
}

// Leaf keys the resolver understands; anything else in a file or override is a typo.
const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "task", "seed", "replicas", "jobs", "output", "target", "verbose",
      "prior.radius_coeff", "prior.radius_exponent", "prior.scale_a",
      "schedule.spacing", "schedule.steps", "schedule.beta_min", "schedule.beta_max",
      "denoiser.kind", "denoiser.address", "denoiser.spread", "denoiser.decoys", "denoiser.library",
      "denoiser.blend", "denoiser.timeout_ms", "denoiser.align",
      "complete.k", "complete.learning_rate", "complete.momentum",
      "distances.m", "distances.learning_rate", "distances.momentum", "distances.pairs",
      "refine.map", "refine.partial", "refine.learning_rate_map", "refine.learning_rate_density",
      "refine.momentum", "refine.anneal_start", "refine.anneal_end", "refine.anneal_epochs",
      "refine.keep_fraction", "refine.blur", "refine.filter", "refine.grid.size", "refine.grid.voxel",
      "refine.grid.origin",
      "simulate.resolution", "simulate.voxel", "simulate.padding", "simulate.size", "simulate.noise",
      "simulate.blur", "simulate.output",
      "bench.n_residues", "bench.k", "bench.steps", "bench.stop_relative_loss",
      "bench.preconditioned_rate", "bench.momentum", "bench.dps_residues", "bench.dps_steps",
      "bench.dps_replicas", "bench.zeta"};
  return keys;
}

void collect_leaves(const Json& node, const std::string& prefix, std::vector<std::string>& out) {
  if (node.is_object() && prefix != "refine.grid.origin") {
    for (auto it = node.begin(); it != node.end(); ++it)
      collect_leaves(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    return;
  }
  out.push_back(prefix);
}

template <class T>
void read(const Json& root, const std::string& key, T& target) {
  const Json* node = find_path(root, key);
  if (!node || node->is_null()) return;
  try {
    target = node->get<T>();
  } catch (const nlohmann::json::exception&) {
    // Values from the environment arrive as strings; retry them as JSON literals.
    if (node->is_string()) {
      const Json reparsed = parse_scalar(node->get<std::string>());
      if (!reparsed.is_string()) {
        try {
          target = reparsed.get<T>();
          return;
        } catch (const nlohmann::json::exception&) {
        }
      }
    }
    throw ConfigError("config key '" + key + "' has the wrong type: " + node->dump());
  }
}

template <class T>
void read_optional(const Json& root, const std::string& key, std::optional<T>& target) {
  const Json* node = find_path(root, key);
  if (!node || node->is_null()) return;
  T value{};
  read(root, key, value);
  target = value;
}

}  // namespace

const Json* find_path(const Json& root, const std::string& dotted) {
  const Json* node = &root;
  for (const auto& part : split_path(dotted)) {
    if (!node->is_object()) return nullptr;
    auto it = node->find(part);
    if (it == node->end()) return nullptr;
    node = &*it;
  }
  return node;
}

void set_path(Json& root, const std::string& dotted, Json value) {
  Json* node = &root;
  for (const auto& part : split_path(dotted)) {
    if (!node->is_object()) *node = Json::object();
    node = &(*node)[part];
  }
  *node = std::move(value);
}

Json parse_scalar(const std::string& text) {
  Json parsed = Json::parse(text, nullptr, false);
  if (parsed.is_discarded()) return Json(text);
  return parsed;
}

Json load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides,
                 char** environ_ptr) {
  Json root = Json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read config file " + *path);
    root = Json::parse(in, nullptr, false, true);
    if (root.is_discarded() || !root.is_object())
      throw ConfigError("config file " + *path + " is not a JSON object");
  }
  for (char** env = environ_ptr; env && *env; ++env) {
    const std::string entry = *env;
    if (entry.rfind("ADP_", 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(4, eq - 4);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    for (std::size_t p = key.find("__"); p != std::string::npos; p = key.find("__", p + 1)) key.replace(p, 2, ".");
    if (key.empty()) continue;
    if (!known_keys().count(key)) {
      spdlog::debug("ignoring environment variable {}", entry.substr(0, eq));
      continue;
    }
    set_path(root, key, parse_scalar(entry.substr(eq + 1)));
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    set_path(root, o.substr(0, eq), parse_scalar(o.substr(eq + 1)));
  }
  return root;
}

const char* to_string(Task task) {
  switch (task) {
    case Task::complete: return "complete";
    case Task::distances: return "distances";
    case Task::refine: return "refine";
    case Task::simulate_map: return "simulate-map";
    case Task::bench: return "bench";
  }
  return "?";
}

ExperimentSpec resolve_spec(const Json& config, Task task) {
  std::vector<std::string> leaves;
  collect_leaves(config, "", leaves);
  for (const auto& key : leaves)
    if (!key.empty() && !known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");

  ExperimentSpec s;
  s.task = task;
  switch (task) {
    case Task::complete:
      s.schedule.spacing = TimeSpacing::linear_time;
      s.schedule.total_steps = 1000;
      break;
    case Task::distances:
      s.schedule.spacing = TimeSpacing::sqrt_time;
      s.schedule.total_steps = 1000;
      break;
    case Task::refine:
      s.schedule.spacing = TimeSpacing::sqrt_time;
      s.schedule.total_steps = 4000;
      break;
    case Task::simulate_map:
    case Task::bench:
      break;
  }
  read(config, "target", s.target_path);
  read(config, "output", s.output_dir);
  read(config, "seed", s.seed);
  read(config, "replicas", s.replicas);
  read(config, "jobs", s.jobs);
  read(config, "verbose", s.verbose);
  read(config, "prior.radius_coeff", s.prior.radius_coeff);
  read(config, "prior.radius_exponent", s.prior.radius_exponent);
  read(config, "prior.scale_a", s.prior.scale_a);
  std::string spacing = to_string(s.schedule.spacing);
  read(config, "schedule.spacing", spacing);
  s.schedule.spacing = time_spacing_from_string(spacing.c_str());
  read(config, "schedule.steps", s.schedule.total_steps);
  read(config, "schedule.beta_min", s.schedule.beta_min);
  read(config, "schedule.beta_max", s.schedule.beta_max);

  read(config, "denoiser.kind", s.denoiser.kind);
  if (s.denoiser.kind.rfind("remote:", 0) == 0) {
    s.denoiser.address = s.denoiser.kind.substr(7);
    s.denoiser.kind = "remote";
  }
  read(config, "denoiser.address", s.denoiser.address);
  read(config, "denoiser.spread", s.denoiser.spread);
  read(config, "denoiser.decoys", s.denoiser.decoys);
  read(config, "denoiser.library", s.denoiser.library);
  read(config, "denoiser.blend", s.denoiser.blend);
  read(config, "denoiser.timeout_ms", s.denoiser.timeout_ms);
  read(config, "denoiser.align", s.denoiser.align);
  if (s.denoiser.align == "auto") s.denoiser.align = task == Task::distances ? "rigid" : "none";

  read(config, "complete.k", s.complete.k);
  read(config, "complete.learning_rate", s.complete.learning_rate);
  read(config, "complete.momentum", s.complete.momentum);

  read(config, "distances.m", s.distances.m);
  read_optional(config, "distances.learning_rate", s.distances.learning_rate);
  read(config, "distances.momentum", s.distances.momentum);
  read(config, "distances.pairs", s.distances.pairs_path);

  read(config, "refine.map", s.refine.map_path);
  read(config, "refine.partial", s.refine.partial_path);
  read(config, "refine.learning_rate_map", s.refine.learning_rate_map);
  read(config, "refine.learning_rate_density", s.refine.learning_rate_density);
  read(config, "refine.momentum", s.refine.momentum);
  read(config, "refine.anneal_start", s.refine.anneal_start);
  read(config, "refine.anneal_end", s.refine.anneal_end);
  read(config, "refine.anneal_epochs", s.refine.anneal_epochs);
  read(config, "refine.keep_fraction", s.refine.keep_fraction);
  read(config, "refine.blur", s.refine.blur);
  read(config, "refine.filter", s.refine.filter);
  read_optional(config, "refine.grid.size", s.refine.grid_size);
  read_optional(config, "refine.grid.voxel", s.refine.grid_voxel);
  read_optional(config, "refine.grid.origin", s.refine.grid_origin);

  read(config, "simulate.resolution", s.simulate.resolution);
  read(config, "simulate.voxel", s.simulate.voxel);
  read(config, "simulate.padding", s.simulate.padding);
  read(config, "simulate.size", s.simulate.size);
  read(config, "simulate.noise", s.simulate.noise);
  read(config, "simulate.blur", s.simulate.blur);
  read(config, "simulate.output", s.simulate.output);

  read(config, "bench.n_residues", s.bench.n_residues);
  read(config, "bench.k", s.bench.k);
  read(config, "bench.steps", s.bench.steps);
  read(config, "bench.stop_relative_loss", s.bench.stop_relative_loss);
  read(config, "bench.preconditioned_rate", s.bench.preconditioned_rate);
  read(config, "bench.momentum", s.bench.momentum);
  read(config, "bench.dps_residues", s.bench.dps_residues);
  read(config, "bench.dps_steps", s.bench.dps_steps);
  read(config, "bench.dps_replicas", s.bench.dps_replicas);
  read(config, "bench.zeta", s.bench.zeta);
  return s;
}

void ExperimentSpec::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(replicas >= 1, "replicas must be >= 1");
  require(jobs >= 0, "jobs must be >= 0");
  require(!output_dir.empty(), "output must name a directory");
  const bool needs_schedule = task == Task::complete || task == Task::distances || task == Task::refine;
  if (needs_schedule) {
    require(schedule.total_steps >= 1, "schedule.steps must be >= 1");
    schedule.validate();
    const std::set<std::string> kinds = {"gaussian", "library", "oracle", "remote"};
    require(kinds.count(denoiser.kind) == 1,
            "denoiser.kind must be one of gaussian, library, oracle, remote:ADDR (got '" + denoiser.kind + "')");
    if (denoiser.kind == "remote") require(!denoiser.address.empty(), "denoiser.address is required for a remote denoiser");
    else require(!target_path.empty(), "missing required key 'target' (the " + denoiser.kind + " denoiser is built from it)");
    require(denoiser.spread >= 0.0, "denoiser.spread must be >= 0");
    require(denoiser.decoys >= 0, "denoiser.decoys must be >= 0");
    require(denoiser.blend >= 0.0 && denoiser.blend <= 1.0, "denoiser.blend must lie in [0, 1]");
    require(denoiser.timeout_ms > 0, "denoiser.timeout_ms must be positive");
    require(denoiser.align == "none" || denoiser.align == "rigid", "denoiser.align must be auto, none or rigid");
  }
  switch (task) {
    case Task::complete:
      require(!target_path.empty(), "missing required key 'target'");
      require(complete.k >= 1, "complete.k must be a positive integer");
      require(complete.learning_rate >= 0.0, "complete.learning_rate must be >= 0");
      require(complete.momentum >= 0.0 && complete.momentum < 1.0, "complete.momentum must lie in [0, 1)");
      break;
    case Task::distances:
      require(!target_path.empty(), "missing required key 'target'");
      require(distances.m >= 0, "distances.m must be >= 0");
      require(!distances.learning_rate || *distances.learning_rate >= 0.0, "distances.learning_rate must be >= 0");
      require(distances.momentum >= 0.0 && distances.momentum < 1.0, "distances.momentum must lie in [0, 1)");
      break;
    case Task::refine:
      require(!refine.map_path.empty(), "missing required key 'refine.map'");
      require(!refine.partial_path.empty(), "missing required key 'refine.partial'");
      require(refine.keep_fraction > 0.0 && refine.keep_fraction <= 1.0, "refine.keep_fraction must lie in (0, 1]");
      require(refine.filter == "sharp" || refine.filter == "smooth", "refine.filter must be sharp or smooth");
      require(refine.anneal_epochs >= 0, "refine.anneal_epochs must be >= 0");
      require(refine.anneal_end > 0.0 && refine.anneal_start > 0.0, "refine.anneal_start/end must be positive");
      require(refine.momentum >= 0.0 && refine.momentum < 1.0, "refine.momentum must lie in [0, 1)");
      require(!refine.grid_origin || refine.grid_origin->size() == 3, "refine.grid.origin must have 3 entries");
      break;
    case Task::simulate_map:
      require(!target_path.empty(), "missing required key 'target'");
      require(simulate.resolution > 0.0, "simulate.resolution must be positive");
      require(simulate.voxel > 0.0, "simulate.voxel must be positive");
      require(simulate.size == 0 || simulate.size >= 2, "simulate.size must be 0 or >= 2");
      require(simulate.noise >= 0.0, "simulate.noise must be >= 0");
      require(simulate.padding >= 0.0, "simulate.padding must be >= 0");
      break;
    case Task::bench:
      require(bench.n_residues >= 2, "bench.n_residues must be >= 2");
      require(bench.k >= 1, "bench.k must be >= 1");
      require(bench.steps >= 0, "bench.steps must be >= 0");
      require(bench.dps_residues >= 2, "bench.dps_residues must be >= 2");
      require(bench.dps_steps >= 0, "bench.dps_steps must be >= 0");
      require(bench.dps_replicas >= 1, "bench.dps_replicas must be >= 1");
      break;
  }
}

Json ExperimentSpec::to_json() const {
  Json j;
  j["task"] = to_string(task);
  j["target"] = target_path;
  j["output"] = output_dir;
  j["seed"] = seed;
  j["replicas"] = replicas;
  j["jobs"] = jobs;
  j["prior"] = {{"radius_coeff", prior.radius_coeff}, {"radius_exponent", prior.radius_exponent},
                {"scale_a", prior.scale_a}};
  j["schedule"] = {{"spacing", adp::to_string(schedule.spacing)}, {"steps", schedule.total_steps},
                   {"beta_min", schedule.beta_min}, {"beta_max", schedule.beta_max}};
  j["denoiser"] = {{"kind", denoiser.kind}, {"address", denoiser.address}, {"spread", denoiser.spread},
                   {"decoys", denoiser.decoys}, {"library", denoiser.library}, {"blend", denoiser.blend},
                   {"timeout_ms", denoiser.timeout_ms}, {"align", denoiser.align}};
  switch (task) {
    case Task::complete:
      j["complete"] = {{"k", complete.k}, {"learning_rate", complete.learning_rate}, {"momentum", complete.momentum}};
      break;
    case Task::distances:
      j["distances"] = {{"m", distances.m},
                        {"learning_rate", distances.learning_rate ? Json(*distances.learning_rate) : Json(nullptr)},
                        {"momentum", distances.momentum}, {"pairs", distances.pairs_path}};
      break;
    case Task::refine:
      j["refine"] = {{"map", refine.map_path}, {"partial", refine.partial_path},
                     {"learning_rate_map", refine.learning_rate_map},
                     {"learning_rate_density", refine.learning_rate_density}, {"momentum", refine.momentum},
                     {"anneal_start", refine.anneal_start}, {"anneal_end", refine.anneal_end},
                     {"anneal_epochs", refine.anneal_epochs}, {"keep_fraction", refine.keep_fraction},
                     {"blur", refine.blur}, {"filter", refine.filter}};
      break;
    case Task::simulate_map:
      j["simulate"] = {{"resolution", simulate.resolution}, {"voxel", simulate.voxel}, {"padding", simulate.padding},
                       {"size", simulate.size}, {"noise", simulate.noise}, {"blur", simulate.blur},
                       {"output", simulate.output}};
      break;
    case Task::bench:
      j["bench"] = {{"n_residues", bench.n_residues}, {"k", bench.k}, {"steps", bench.steps},
                    {"stop_relative_loss", bench.stop_relative_loss},
                    {"preconditioned_rate", bench.preconditioned_rate}, {"momentum", bench.momentum},
                    {"dps_residues", bench.dps_residues}, {"dps_steps", bench.dps_steps},
                    {"dps_replicas", bench.dps_replicas}, {"zeta", bench.zeta}};
      break;
  }
  return j;
}

}  // namespace adp::cli
