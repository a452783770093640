#include "coopscat/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace coopscat {

using nlohmann::json;

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string s = "invalid configuration:";
  for (const auto& e : errors) s += "\n  " + e;
  return s;
}

// Walks one JSON object, remembering which keys were consumed so that
// unknown keys can be reported.
class Reader {
public:
  Reader(const json* node, std::string path, std::vector<std::string>& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {
    if (node_ != nullptr && !node_->is_object()) {
      fail("", "expected an object");
      node_ = nullptr;
    }
  }

  ~Reader() {
    if (node_ == nullptr) return;
    for (const auto& [key, value] : node_->items())
      if (!seen_.count(key)) errors_.push_back(child_path(key) + ": unknown key");
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    const json* sub = find(key);
    return Reader(sub, child_path(key), errors_);
  }

  bool has(const std::string& key) const { return find(key) != nullptr; }
  const json* raw(const std::string& key) {
    seen_.insert(key);
    return find(key);
  }

  void fail(const std::string& key, const std::string& message) {
    errors_.push_back((key.empty() ? (path_.empty() ? std::string("/") : path_) : child_path(key)) + ": " + message);
  }

  double number(const std::string& key, double fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) {
      fail(key, "expected a number");
      return fallback;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) fail(key, "must be finite");
    return d;
  }

  long long integer(const std::string& key, long long fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) {
      fail(key, "expected an integer");
      return fallback;
    }
    return v->get<long long>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<long long>() >= 0) return static_cast<std::uint64_t>(v->get<long long>());
    fail(key, "expected a non-negative integer");
    return fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) {
      fail(key, "expected true or false");
      return fallback;
    }
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) {
      fail(key, "expected a string");
      return fallback;
    }
    return v->get<std::string>();
  }

  // {"value": x, "unit": u}; `convert` maps (x, unit) to the canonical unit
  // and returns false for an unsupported unit.
  template <class Convert>
  double quantity(const std::string& key, double fallback, const char* allowed, Convert convert) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    std::vector<double> values;
    std::string unit;
    if (!read_quantity(key, *v, values, unit, false)) return fallback;
    double out = fallback;
    if (!convert(values[0], unit, out)) fail(key, "unsupported unit '" + unit + "' (allowed: " + allowed + ")");
    return out;
  }

  template <class Convert>
  std::vector<double> quantity_vector(const std::string& key, std::vector<double> fallback, std::size_t size,
                                      const char* allowed, Convert convert, bool allow_scalar = false) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    std::vector<double> values;
    std::string unit;
    if (!read_quantity(key, *v, values, unit, true)) return fallback;
    if (allow_scalar && values.size() == 1) values.assign(size, values[0]);
    if (values.size() != size) {
      fail(key, "expected " + std::to_string(size) + " values");
      return fallback;
    }
    std::vector<double> out(size);
    for (std::size_t i = 0; i < size; ++i) {
      if (!convert(values[i], unit, out[i])) {
        fail(key, "unsupported unit '" + unit + "' (allowed: " + allowed + ")");
        return fallback;
      }
    }
    return out;
  }

  const std::string& path() const { return path_; }

private:
  const json* find(const std::string& key) const {
    if (node_ == nullptr) return nullptr;
    const auto it = node_->find(key);
    if (it == node_->end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string child_path(const std::string& key) const { return path_ + "/" + key; }

  bool read_quantity(const std::string& key, const json& v, std::vector<double>& values, std::string& unit,
                     bool vector_ok) {
    if (!v.is_object() || !v.contains("value") || !v.contains("unit")) {
      fail(key, "expected {\"value\": ..., \"unit\": ...}");
      return false;
    }
    for (const auto& [k, _] : v.items())
      if (k != "value" && k != "unit") errors_.push_back(child_path(key) + "/" + k + ": unknown key");
    if (!v["unit"].is_string()) {
      errors_.push_back(child_path(key) + "/unit: expected a string");
      return false;
    }
    unit = v["unit"].get<std::string>();
    const json& val = v["value"];
    if (val.is_number()) {
      values.push_back(val.get<double>());
    } else if (vector_ok && val.is_array()) {
      for (const auto& e : val) {
        if (!e.is_number()) {
          errors_.push_back(child_path(key) + "/value: expected numbers");
          return false;
        }
        values.push_back(e.get<double>());
      }
    } else {
      errors_.push_back(child_path(key) + "/value: expected a number");
      return false;
    }
    for (double d : values)
      if (!std::isfinite(d)) {
        errors_.push_back(child_path(key) + "/value: must be finite");
        return false;
      }
    return true;
  }

  const json* node_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

json quantity(double value, const char* unit) { return json{{"value", value}, {"unit", unit}}; }

json quantity(const std::vector<double>& value, const char* unit) { return json{{"value", value}, {"unit", unit}}; }

PolarizationModel model_from_string(const std::string& s, bool& ok) {
  ok = true;
  if (s == "sigma_minus") return PolarizationModel::sigma_minus;
  if (s == "isotropic") return PolarizationModel::isotropic;
  ok = false;
  return PolarizationModel::sigma_minus;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

std::string to_string(PolarizationModel model) {
  return model == PolarizationModel::sigma_minus ? "sigma_minus" : "isotropic";
}

std::string to_string(BeamDirection direction) { return direction == BeamDirection::plus_z ? "plus_z" : "minus_z"; }

std::size_t ScanSettings::samples_for(const GeometryModel& geometry) const {
  if (samples) return *samples;
  return geometry.is_random() ? 200 : 1;
}

RunConfig parse_config(const json& document) {
  std::vector<std::string> errors;
  RunConfig cfg;
  {
    Reader root(&document, "", errors);

    // transition
    auto& tr = cfg.sim.transition;
    {
      Reader r = root.child("transition");
      tr.gamma0_mhz = r.quantity("gamma0", tr.gamma0_mhz, "MHz, kHz", [](double v, const std::string& u, double& out) {
        if (u == "MHz") out = v;
        else if (u == "kHz") out = v * 1e-3;
        else return false;
        return true;
      });
      if (!(tr.gamma0_mhz > 0.0)) r.fail("gamma0", "must be > 0");
      tr.wavelength_nm = r.quantity("wavelength", tr.wavelength_nm, "nm, um", [](double v, const std::string& u, double& out) {
        if (u == "nm") out = v;
        else if (u == "um") out = v * 1e3;
        else return false;
        return true;
      });
      if (!(tr.wavelength_nm > 0.0)) r.fail("wavelength", "must be > 0");
      tr.alpha0 = r.number("alpha0", tr.alpha0);
      if (!(tr.alpha0 > 0.0)) r.fail("alpha0", "must be > 0");
      bool ok = true;
      tr.polarization_model = model_from_string(r.string("polarization_model", to_string(tr.polarization_model)), ok);
      if (!ok) r.fail("polarization_model", "expected \"sigma_minus\" or \"isotropic\"");
      const double g0 = tr.gamma0_mhz;
      tr.zeeman_detuning_sigma_plus = r.quantity("zeeman_detuning_sigma_plus", tr.zeeman_detuning_sigma_plus, "Gamma0, MHz",
                                                 [g0](double v, const std::string& u, double& out) {
                                                   if (u == "Gamma0") out = v;
                                                   else if (u == "MHz") out = v / g0;
                                                   else return false;
                                                   return true;
                                                 });
    }

    // lattice
    auto& lat = cfg.sim.lattice;
    {
      Reader r = root.child("lattice");
      const double wl = tr.wavelength_nm;
      lat.spacing_over_lambda = r.quantity("spacing", lat.spacing_over_lambda, "lambda, nm",
                                           [wl](double v, const std::string& u, double& out) {
                                             if (u == "lambda") out = v;
                                             else if (u == "nm") out = v / wl;
                                             else return false;
                                             return true;
                                           });
      if (!(lat.spacing_over_lambda > 0.0)) r.fail("spacing", "must be > 0");
      lat.nx = static_cast<int>(r.integer("nx", lat.nx));
      lat.ny = static_cast<int>(r.integer("ny", lat.ny));
      if (lat.nx < 1) r.fail("nx", "must be >= 1");
      if (lat.ny < 1) r.fail("ny", "must be >= 1");
      const auto depths = r.quantity_vector("depths", {lat.depths_er.begin(), lat.depths_er.end()}, 3, "E_r",
                                            [](double v, const std::string& u, double& out) {
                                              if (u != "E_r") return false;
                                              out = v;
                                              return true;
                                            });
      for (std::size_t i = 0; i < 3; ++i) lat.depths_er[i] = depths[i];
      if (!std::all_of(depths.begin(), depths.end(), [](double d) { return d >= 0.0; })) r.fail("depths", "must be >= 0");
      lat.lattice_wavelength_nm = r.quantity("lattice_wavelength", lat.lattice_wavelength_nm, "nm",
                                             [](double v, const std::string& u, double& out) {
                                               if (u != "nm") return false;
                                               out = v;
                                               return true;
                                             });
      if (!(lat.lattice_wavelength_nm > 0.0)) r.fail("lattice_wavelength", "must be > 0");
    }

    const double a_nm = lat.spacing_over_lambda * tr.wavelength_nm;
    auto length_a = [a_nm](double v, const std::string& u, double& out) {
      if (u == "a") out = v;
      else if (u == "nm") out = v / a_nm;
      else if (u == "um") out = v * 1e3 / a_nm;
      else return false;
      return true;
    };
    const double g0 = tr.gamma0_mhz;
    auto detuning = [g0](double v, const std::string& u, double& out) {
      if (u == "Gamma0") out = v;
      else if (u == "MHz") out = v / g0;
      else return false;
      return true;
    };

    // beam
    auto& beam = cfg.sim.beam;
    {
      Reader r = root.child("beam");
      beam.waist_a = r.quantity("waist", beam.waist_a, "a, nm, um", length_a);
      if (!(beam.waist_a > 0.0)) r.fail("waist", "must be > 0");
      const std::string dir = r.string("direction", to_string(beam.direction));
      if (dir == "plus_z") beam.direction = BeamDirection::plus_z;
      else if (dir == "minus_z") beam.direction = BeamDirection::minus_z;
      else r.fail("direction", "expected \"plus_z\" or \"minus_z\"");
      beam.detuning = r.quantity("detuning", beam.detuning, "Gamma0, MHz", detuning);
      if (const json* p = r.raw("polarization")) {
        if (p->is_string()) {
          const std::string s = p->get<std::string>();
          if (s == "sigma_minus") beam.polarization = sigma_minus_vector();
          else if (s == "sigma_plus") beam.polarization = sigma_plus_vector();
          else if (s == "x") beam.polarization = CVec3(1, 0, 0);
          else if (s == "y") beam.polarization = CVec3(0, 1, 0);
          else r.fail("polarization", "expected sigma_minus, sigma_plus, x, y or three [re, im] pairs");
        } else if (p->is_array() && p->size() == 3) {
          CVec3 e;
          bool ok = true;
          for (std::size_t i = 0; i < 3; ++i) {
            const json& c = (*p)[i];
            if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number())
              e[static_cast<Eigen::Index>(i)] = cplx(c[0].get<double>(), c[1].get<double>());
            else
              ok = false;
          }
          if (!ok) r.fail("polarization", "expected three [re, im] pairs");
          else if (std::abs(e.norm() - 1.0) > 1e-12) r.fail("polarization", "must have unit norm (to 1e-12)");
          else beam.polarization = e;
        } else {
          r.fail("polarization", "expected sigma_minus, sigma_plus, x, y or three [re, im] pairs");
        }
      }
      if (const json* f = r.raw("focus")) {
        if (f->is_string() && f->get<std::string>() == "array_center") {
          beam.focus_at_array_center = true;
        } else {
          const auto v = r.quantity_vector("focus", {0, 0, 0}, 3, "a, nm, um", length_a);
          beam.focus_at_array_center = false;
          beam.focus_a = Vec3(v[0], v[1], v[2]);
        }
      }
    }

    // detection
    auto& det = cfg.sim.detection;
    {
      Reader r = root.child("detection");
      det.numerical_aperture = r.number("numerical_aperture", det.numerical_aperture);
      if (!(det.numerical_aperture > 0.0 && det.numerical_aperture <= 1.0))
        r.fail("numerical_aperture", "must lie in (0, 1]");
      Reader q = r.child("quadrature");
      det.quadrature.polar = static_cast<int>(q.integer("polar", det.quadrature.polar));
      det.quadrature.azimuth = static_cast<int>(q.integer("azimuth", det.quadrature.azimuth));
      det.quadrature.beam_polar = static_cast<int>(q.integer("beam_polar", det.quadrature.beam_polar));
      if (det.quadrature.polar < 4) q.fail("polar", "must be >= 4");
      if (det.quadrature.azimuth < 4) q.fail("azimuth", "must be >= 4");
      if (det.quadrature.beam_polar < 4) q.fail("beam_polar", "must be >= 4");
    }

    // geometry
    auto& geo = cfg.sim.geometry;
    {
      Reader r = root.child("geometry");
      const std::string kind = r.string("kind", to_string(geo.kind));
      try {
        geo.kind = config_kind_from_string(kind);
      } catch (const DomainError&) {
        r.fail("kind", "unknown geometry kind '" + kind +
                           "' (ordered_2d, reduced_filling, vertical_disorder, pancake_uniform, bloch_breathing)");
      }
      geo.traps.filling = r.number("filling", geo.traps.filling);
      if (!(geo.traps.filling >= 0.0 && geo.traps.filling <= 1.0)) r.fail("filling", "must lie in [0, 1]");
      geo.traps.vertical_sigma = r.quantity("vertical_sigma", geo.traps.vertical_sigma, "a, nm, um", length_a);
      if (!(geo.traps.vertical_sigma > 0.0)) r.fail("vertical_sigma", "must be > 0");
      geo.traps.pancake_density = r.number("pancake_density", geo.traps.pancake_density);
      if (!(geo.traps.pancake_density > 0.0)) r.fail("pancake_density", "must be > 0");
      {
        Reader b = r.child("bloch");
        auto& bl = geo.traps.bloch;
        bl.period_ms = b.quantity("period", bl.period_ms, "ms, s", [](double v, const std::string& u, double& out) {
          if (u == "ms") out = v;
          else if (u == "s") out = v * 1e3;
          else return false;
          return true;
        });
        if (!(bl.period_ms > 0.0)) b.fail("period", "must be > 0");
        bl.zeta_max = b.number("zeta_max", bl.zeta_max);
        if (!(bl.zeta_max >= 0.0)) b.fail("zeta_max", "must be >= 0");
        const double period = bl.period_ms;
        bl.time = b.quantity("time", bl.time, "T_B, ms", [period](double v, const std::string& u, double& out) {
          if (u == "T_B") out = v;
          else if (u == "ms") out = v / period;
          else return false;
          return true;
        });
      }
      const auto s = r.quantity_vector("spread", {geo.spread.sigma_x, geo.spread.sigma_y, geo.spread.sigma_z}, 3,
                                       "a, nm, um", length_a, true);
      geo.spread = {s[0], s[1], s[2]};
      if (!std::all_of(s.begin(), s.end(), [](double d) { return d >= 0.0; })) r.fail("spread", "must be >= 0");
      geo.local_detuning = r.boolean("local_detuning", geo.local_detuning);
      geo.min_separation_a = r.quantity("min_separation", geo.min_separation_a, "a, nm, um", length_a);
      if (!(geo.min_separation_a >= 0.0)) r.fail("min_separation", "must be >= 0");
    }

    {
      Reader r = root.child("solver");
      cfg.sim.solver.min_rcond = r.number("min_rcond", cfg.sim.solver.min_rcond);
      if (!(cfg.sim.solver.min_rcond >= 0.0 && cfg.sim.solver.min_rcond < 1.0)) r.fail("min_rcond", "must lie in [0, 1)");
    }

    // scan
    auto& sc = cfg.scan;
    {
      Reader r = root.child("scan");
      sc.grid_min = r.quantity("detuning_min", sc.grid_min, "Gamma0, MHz", detuning);
      sc.grid_max = r.quantity("detuning_max", sc.grid_max, "Gamma0, MHz", detuning);
      if (!(sc.grid_max > sc.grid_min)) r.fail("detuning_max", "must exceed detuning_min");
      sc.grid_points = static_cast<int>(r.integer("points", sc.grid_points));
      if (sc.grid_points < 5) r.fail("points", "must be >= 5");
      sc.refine = r.boolean("refine", sc.refine);
      sc.refine_points = static_cast<int>(r.integer("refine_points", sc.refine_points));
      if (sc.refine_points < 2) r.fail("refine_points", "must be >= 2");
      sc.refine_half_span = r.number("refine_half_span", sc.refine_half_span);
      if (!(sc.refine_half_span > 0.0)) r.fail("refine_half_span", "must be > 0");
      if (r.has("samples")) {
        const long long n = r.integer("samples", 1);
        if (n < 1) r.fail("samples", "must be >= 1");
        else sc.samples = static_cast<std::size_t>(n);
      } else {
        r.raw("samples");
      }
      sc.seed = r.unsigned_integer("seed", sc.seed);
      sc.fit_offset = r.boolean("fit_offset", sc.fit_offset);
      const long long threads = r.integer("threads", sc.threads);
      if (threads < 0) r.fail("threads", "must be >= 0");
      else sc.threads = static_cast<unsigned>(threads);
    }

    if (const json* s = root.raw("sweeps")) {
      if (!s->is_object()) root.fail("sweeps", "expected an object");
      else cfg.sweeps = *s;
    }
    if (const json* o = root.raw("overrides")) {
      if (!o->is_object()) {
        root.fail("overrides", "expected an object");
      } else {
        for (const auto& [name, patch] : o->items())
          if (!patch.is_object()) errors.push_back("/overrides/" + name + ": expected an object");
        cfg.overrides = *o;
      }
    }
    root.raw("scenario");  // informational, written into metadata snapshots
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path + ": cannot open file"});
  json doc;
  try {
    doc = json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw ConfigError({path + ": " + e.what()});
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  const auto& tr = cfg.sim.transition;
  const auto& lat = cfg.sim.lattice;
  const auto& beam = cfg.sim.beam;
  const auto& det = cfg.sim.detection;
  const auto& geo = cfg.sim.geometry;
  const auto& sc = cfg.scan;
  json pol = json::array();
  for (int i = 0; i < 3; ++i) pol.push_back({beam.polarization[i].real(), beam.polarization[i].imag()});
  json doc;
  doc["transition"] = {{"gamma0", quantity(tr.gamma0_mhz, "MHz")},
                       {"wavelength", quantity(tr.wavelength_nm, "nm")},
                       {"alpha0", tr.alpha0},
                       {"polarization_model", to_string(tr.polarization_model)},
                       {"zeeman_detuning_sigma_plus", quantity(tr.zeeman_detuning_sigma_plus, "Gamma0")}};
  doc["lattice"] = {{"spacing", quantity(lat.spacing_over_lambda, "lambda")},
                    {"nx", lat.nx},
                    {"ny", lat.ny},
                    {"depths", quantity(std::vector<double>(lat.depths_er.begin(), lat.depths_er.end()), "E_r")},
                    {"lattice_wavelength", quantity(lat.lattice_wavelength_nm, "nm")}};
  doc["beam"] = {{"waist", quantity(beam.waist_a, "a")},
                 {"direction", to_string(beam.direction)},
                 {"detuning", quantity(beam.detuning, "Gamma0")},
                 {"polarization", pol},
                 {"focus", beam.focus_at_array_center
                               ? json("array_center")
                               : quantity(std::vector<double>{beam.focus_a.x(), beam.focus_a.y(), beam.focus_a.z()}, "a")}};
  doc["detection"] = {{"numerical_aperture", det.numerical_aperture},
                      {"quadrature",
                       {{"polar", det.quadrature.polar},
                        {"azimuth", det.quadrature.azimuth},
                        {"beam_polar", det.quadrature.beam_polar}}}};
  doc["geometry"] = {{"kind", to_string(geo.kind)},
                     {"filling", geo.traps.filling},
                     {"vertical_sigma", quantity(geo.traps.vertical_sigma, "a")},
                     {"pancake_density", geo.traps.pancake_density},
                     {"bloch",
                      {{"period", quantity(geo.traps.bloch.period_ms, "ms")},
                       {"zeta_max", geo.traps.bloch.zeta_max},
                       {"time", quantity(geo.traps.bloch.time, "T_B")}}},
                     {"spread", quantity(std::vector<double>{geo.spread.sigma_x, geo.spread.sigma_y, geo.spread.sigma_z}, "a")},
                     {"local_detuning", geo.local_detuning},
                     {"min_separation", quantity(geo.min_separation_a, "a")}};
  doc["solver"] = {{"min_rcond", cfg.sim.solver.min_rcond}};
  doc["scan"] = {{"detuning_min", quantity(sc.grid_min, "Gamma0")},
                 {"detuning_max", quantity(sc.grid_max, "Gamma0")},
                 {"points", sc.grid_points},
                 {"refine", sc.refine},
                 {"refine_points", sc.refine_points},
                 {"refine_half_span", sc.refine_half_span},
                 {"samples", sc.samples ? json(*sc.samples) : json(nullptr)},
                 {"seed", sc.seed},
                 {"fit_offset", sc.fit_offset},
                 {"threads", sc.threads}};
  doc["sweeps"] = cfg.sweeps;
  doc["overrides"] = cfg.overrides;
  return doc;
}

RunConfig apply_overrides(const RunConfig& config, const std::string& scenario) {
  const auto it = config.overrides.find(scenario);
  if (it == config.overrides.end()) return config;
  json doc = to_json(config);
  doc.merge_patch(*it);
  doc["overrides"] = json::object();
  try {
    RunConfig out = parse_config(doc);
    out.overrides = config.overrides;
    return out;
  } catch (const ConfigError& e) {
    std::vector<std::string> errs;
    for (const auto& m : e.errors()) errs.push_back("/overrides/" + scenario + " -> " + m);
    throw ConfigError(std::move(errs));
  }
}

}  // namespace coopscat
