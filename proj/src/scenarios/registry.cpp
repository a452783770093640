#include "common.hpp"

#include "coopscat/simd/kernels.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <thread>

#ifndef COOPSCAT_VERSION
#define COOPSCAT_VERSION "0.0.0"
#endif

namespace coopscat {

using nlohmann::json;

namespace {

json range(double lo, double hi, int n) { return json{{"min", lo}, {"max", hi}, {"points", n}}; }

struct Entry {
  ScenarioInfo info;
  scenario::Runner run;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> list = [] {
    std::vector<Entry> v;
    v.push_back({{"pair-sweep", "two-emitter cooperative shift and width versus separation",
                  json{{"spacing_lambda", range(0.1, 2.0, 381)}, {"axis", "x"}}},
                 &scenario::pair_sweep});
    v.push_back({{"spacing-sweep", "drive-selected collective mode of the full array versus a/lambda",
                  json{{"spacing_lambda", range(0.1, 2.0, 39)}}},
                 &scenario::spacing_sweep});
    v.push_back({{"geometry-compare", "spectra for ordered, spread, vertically disordered and pancake layouts",
                  json{{"configurations",
                        {"ordered_2d", "ground_state_spread", "vertical_disorder", "pancake_uniform"}},
                       {"vertical_sigma_a", 10.0},
                       {"spread_a", 0.054}}},
                 &scenario::geometry_compare});
    v.push_back({{"filling-sweep", "fitted width and shift versus filling for a band of vertical spreads",
                  json{{"fillings", {0.44, 0.69, 0.92}}, {"sigma_xy_a", 0.054}, {"sigma_z_a", {0.054, 0.097, 0.14}}}},
                 &scenario::filling_sweep});
    v.push_back({{"bloch", "reflectance and width during one breathing cycle of Bloch oscillations",
                  json{{"time_TB", range(0.0, 2.0, 21)}}},
                 &scenario::bloch});
    v.push_back({{"spread-sweep", "peak reflectance, absorptance and width versus positional spread",
                  json{{"spread_a", range(0.0, 0.2, 11)},
                       {"variants", {"x_only", "z_only", "all_axes", "z_with_ground_xy", "all_axes_small_beam"}},
                       {"ground_spread_a", 0.054},
                       {"small_waist_a", 6.0}}},
                 &scenario::spread_sweep});
    v.push_back({{"effect-ladder", "cumulative model refinements (i)-(v) versus filling",
                  json{{"fillings", range(0.3, 1.0, 8)}, {"ground_spread_a", 0.054}, {"heated_factor", 3.0}}},
                 &scenario::effect_ladder});
    v.push_back({{"na-sweep", "on-resonance response versus numerical aperture, with the mirror reference",
                  json{{"numerical_aperture", range(0.1, 1.0, 10)},
                       {"configurations",
                        {"ordered_2d", "ground_state_spread", "vertical_disorder", "pancake_uniform", "mirror"}},
                       {"vertical_sigma_a", 10.0},
                       {"spread_a", 0.054}}},
                 &scenario::na_sweep});
    v.push_back({{"mode-pdf", "amplitude-weighted density of cooperative modes over (shift, width)",
                  json{{"configurations", {"ordered_2d", "ground_state_spread", "vertical_disorder", "pancake_uniform"}},
                       {"vertical_sigma_a", 10.0},
                       {"spread_a", 0.054},
                       {"detuning_Gamma0", nullptr},
                       {"delta_bins", 81},
                       {"gamma_bins", 81},
                       {"delta_range_Gamma0", {-3.0, 3.0}},
                       {"gamma_range_Gamma0", {0.0, 3.0}}}},
                 &scenario::mode_pdf});
    v.push_back({{"intensity-map", "near-field intensity in the x-z plane and angular emission for two waists",
                  json{{"waists_a", {4.0, 56.0}},
                       {"x_a", range(-6.0, 19.0, 101)},
                       {"z_a", range(-15.0, 15.0, 121)},
                       {"exclusion_radius_a", 0.1},
                       {"detuning_Gamma0", nullptr},
                       {"theta_points", 90},
                       {"phi_points", 72}}},
                 &scenario::intensity_map});
    return v;
  }();
  return list;
}

const Entry& find_entry(const std::string& name) {
  for (const auto& e : entries())
    if (e.info.name == name) return e;
  std::string known;
  for (const auto& e : entries()) known += (known.empty() ? "" : ", ") + e.info.name;
  throw UnknownScenario("unknown scenario '" + name + "' (known: " + known + ")");
}

bool same_kind(const json& def, const json& v) {
  if (def.is_null()) return v.is_null() || v.is_number();
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  if (def.is_string()) return v.is_string();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_array()) {
    if (!v.is_array()) return false;
    if (def.empty()) return true;
    return std::all_of(v.begin(), v.end(), [&](const json& e) {
      return def[0].is_string() ? e.is_string() : e.is_number();
    });
  }
  if (def.is_object()) return v.is_object();
  return false;
}

void merge_knobs(const json& defaults, const json& user, const std::string& path, json& out,
                 std::vector<std::string>& errors) {
  out = defaults;
  if (!user.is_object()) {
    errors.push_back(path + ": expected an object");
    return;
  }
  for (const auto& [key, value] : user.items()) {
    const auto it = defaults.find(key);
    if (it == defaults.end()) {
      errors.push_back(path + "/" + key + ": unknown key");
      continue;
    }
    if (it->is_object() && value.is_object()) {
      merge_knobs(*it, value, path + "/" + key, out[key], errors);
    } else if (!same_kind(*it, value)) {
      errors.push_back(path + "/" + key + ": wrong type");
    } else {
      out[key] = value;
    }
  }
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> infos = [] {
    std::vector<ScenarioInfo> v;
    for (const auto& e : entries()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

const ScenarioInfo& find_scenario(const std::string& name) { return find_entry(name).info; }

json sweep_settings(const RunConfig& config, const std::string& scenario) {
  const auto& info = find_scenario(scenario);
  const auto it = config.sweeps.find(scenario);
  if (it == config.sweeps.end()) return info.sweep_defaults;
  std::vector<std::string> errors;
  json out;
  merge_knobs(info.sweep_defaults, *it, "/sweeps/" + scenario, out, errors);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return out;
}

json normalize_config(const json& document) {
  const RunConfig cfg = parse_config(document);
  std::vector<std::string> errors;
  json sweeps = json::object();
  for (const auto& [name, _] : cfg.sweeps.items()) {
    try {
      find_scenario(name);
    } catch (const UnknownScenario&) {
      errors.push_back("/sweeps/" + name + ": unknown scenario");
    }
  }
  for (const auto& [name, _] : cfg.overrides.items()) {
    try {
      find_scenario(name);
      apply_overrides(cfg, name);
    } catch (const UnknownScenario&) {
      errors.push_back("/overrides/" + name + ": unknown scenario");
    } catch (const ConfigError& e) {
      errors.insert(errors.end(), e.errors().begin(), e.errors().end());
    }
  }
  for (const auto& info : scenario_catalog()) {
    try {
      sweeps[info.name] = sweep_settings(cfg, info.name);
    } catch (const ConfigError& e) {
      errors.insert(errors.end(), e.errors().begin(), e.errors().end());
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  json out = to_json(cfg);
  out["sweeps"] = sweeps;
  return out;
}

json validate_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path + ": cannot open file"});
  json doc;
  try {
    doc = json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw ConfigError({path + ": " + e.what()});
  }
  return normalize_config(doc);
}

Manifest run_scenario(const std::string& name, const RunConfig& config, const std::filesystem::path& out_dir,
                      const RunOptions& options) {
  const Entry& entry = find_entry(name);
  scenario::Context ctx;
  ctx.name = name;
  ctx.config = apply_overrides(config, name);
  ctx.config.overrides = json::object();
  if (options.seed) ctx.config.scan.seed = *options.seed;
  if (options.samples) {
    if (*options.samples < 1) throw ConfigError({"samples: must be >= 1"});
    ctx.config.scan.samples = *options.samples;
  }
  if (options.threads) ctx.config.scan.threads = *options.threads;
  ctx.sweep = sweep_settings(ctx.config, name);
  ctx.config.sweeps = json{{name, ctx.sweep}};
  ctx.threads = resolve_threads(ctx.config.scan.threads);
  ctx.log = options.log;

  scenario::OutputSet out(out_dir, name);
  entry.run(ctx, out);

  json snapshot = to_json(ctx.config);
  snapshot["scan"]["threads"] = 0;  // scheduling never changes results
  json meta;
  meta["scenario"] = name;
  meta["program"] = "coopscat";
  meta["version"] = COOPSCAT_VERSION;
  meta["kernels"] = simd::active_kernels().name;
  meta["eigen"] = fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  meta["fmt"] = FMT_VERSION;
  meta["seed"] = ctx.config.scan.seed;
  meta["samples"] = ctx.config.scan.samples ? json(*ctx.config.scan.samples) : json("auto");
  meta["config"] = snapshot;
  json files = out.files();
  files.push_back("metadata.json");
  meta["files"] = files;
  out.write_text("metadata.json", meta.dump(2) + "\n");
  return out.commit();
}

}  // namespace coopscat
