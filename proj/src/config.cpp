#include "shelab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "shelab/diagnostics.hpp"

namespace shelab {

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return ".nan";
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

template <class T>
std::string fmt_list(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, double>) {
      out += fmt_double(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out + "]";
}

// Drift parameters are collected first and turned into a DriftSpec at the end,
// so the declared regularity always follows the form.
struct DriftDraft {
  std::string form = "zero";
  DriftSpec params;
};

struct Field {
  const char* key;
  const char* help;
  std::function<void(ExperimentConfig&, DriftDraft&, const YAML::Node&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
T as(const YAML::Node& n) {
  return n.as<T>();
}

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  using D = DriftDraft;
  using N = YAML::Node;
  static const std::vector<Field> f = {
      {"experiment", "simulate | equivalence | kappa | sewing | besov | uniqueness",
       [](C& c, D&, const N& n) { c.experiment = as<std::string>(n); }, [](const C& c) { return quote(c.experiment); }},
      {"domain.kind", "periodic | neumann | whole_line",
       [](C& c, D&, const N& n) { c.setup.kind = domain_kind_from_string(as<std::string>(n)); },
       [](const C& c) { return quote(to_string(c.setup.kind)); }},
      {"domain.torus_width", "circumference of the whole-line torus",
       [](C& c, D&, const N& n) { c.setup.torus_width = as<double>(n); },
       [](const C& c) { return fmt_double(c.setup.torus_width); }},
      {"grid.n_space", "cells of the coarsest grid", [](C& c, D&, const N& n) { c.n_space = as<int>(n); },
       [](const C& c) { return std::to_string(c.n_space); }},
      {"grid.n_time", "time steps of the coarsest grid", [](C& c, D&, const N& n) { c.n_time = as<int>(n); },
       [](const C& c) { return std::to_string(c.n_time); }},
      {"grid.horizon", "final time, at most 1", [](C& c, D&, const N& n) { c.horizon = as<double>(n); },
       [](const C& c) { return fmt_double(c.horizon); }},
      {"grid.resolutions", "number of joint (dt, dx) halvings used by refinement studies",
       [](C& c, D&, const N& n) { c.resolutions = as<int>(n); },
       [](const C& c) { return std::to_string(c.resolutions); }},
      {"scheme.kind", "splitting | semi_implicit",
       [](C& c, D&, const N& n) { c.scheme = scheme_kind_from_string(as<std::string>(n)); },
       [](const C& c) { return quote(to_string(c.scheme)); }},
      {"scheme.compare", "second scheme of the uniqueness coupling",
       [](C& c, D&, const N& n) { c.compare_scheme = scheme_kind_from_string(as<std::string>(n)); },
       [](const C& c) { return quote(to_string(c.compare_scheme)); }},
      {"uniqueness.mode", "schemes | ladder", [](C& c, D&, const N& n) { c.uniqueness_mode = as<std::string>(n); },
       [](const C& c) { return quote(c.uniqueness_mode); }},
      {"drift.form", "zero | constant | linear | sine | sign | indicator | power | atomic | delta",
       [](C&, D& d, const N& n) { d.form = as<std::string>(n); },
       [](const C& c) { return quote(to_string(c.drift.form)); }},
      {"drift.value", "constant value or linear rate", [](C&, D& d, const N& n) { d.params.value = as<double>(n); },
       [](const C& c) { return fmt_double(c.drift.value); }},
      {"drift.amplitude", "sine amplitude", [](C&, D& d, const N& n) { d.params.amplitude = as<double>(n); },
       [](const C& c) { return fmt_double(c.drift.amplitude); }},
      {"drift.frequency", "sine frequency", [](C&, D& d, const N& n) { d.params.frequency = as<double>(n); },
       [](const C& c) { return fmt_double(c.drift.frequency); }},
      {"drift.lower", "indicator lower end", [](C&, D& d, const N& n) { d.params.lower = as<double>(n); },
       [](const C& c) { return fmt_double(c.drift.lower); }},
      {"drift.upper", "indicator upper end", [](C&, D& d, const N& n) { d.params.upper = as<double>(n); },
       [](const C& c) { return fmt_double(c.drift.upper); }},
      {"drift.exponent", "power singularity exponent, in (0, 1)",
       [](C&, D& d, const N& n) { d.params.exponent = as<double>(n); },
       [](const C& c) { return fmt_double(c.drift.exponent); }},
      {"drift.radius", "power singularity support radius",
       [](C&, D& d, const N& n) { d.params.radius = as<double>(n); },
       [](const C& c) { return fmt_double(c.drift.radius); }},
      {"drift.locations", "atom locations",
       [](C&, D& d, const N& n) { d.params.locations = as<std::vector<double>>(n); },
       [](const C& c) { return fmt_list(c.drift.locations); }},
      {"drift.weights", "atom weights",
       [](C&, D& d, const N& n) { d.params.weights = as<std::vector<double>>(n); },
       [](const C& c) { return fmt_list(c.drift.weights); }},
      {"drift.p", "integrability exponent used for the kappa theory value",
       [](C& c, D&, const N& n) { c.drift_p = as<double>(n); }, [](const C& c) { return fmt_double(c.drift_p); }},
      {"drift.level", "mollification level of the simulated drift (0: tied to the grid)",
       [](C& c, D&, const N& n) { c.drift_level = as<double>(n); },
       [](const C& c) { return fmt_double(c.drift_level); }},
      {"drift.levels", "mollification ladder of the regularized checks",
       [](C& c, D&, const N& n) { c.mollification_levels = as<std::vector<double>>(n); },
       [](const C& c) { return fmt_list(c.mollification_levels); }},
      {"init.value", "constant initial condition", [](C& c, D&, const N& n) { c.u0 = as<double>(n); },
       [](const C& c) { return fmt_double(c.u0); }},
      {"run.realizations", "ensemble size", [](C& c, D&, const N& n) { c.realizations = as<int>(n); },
       [](const C& c) { return std::to_string(c.realizations); }},
      {"run.seed", "master seed", [](C& c, D&, const N& n) { c.seed = as<std::uint64_t>(n); },
       [](const C& c) { return std::to_string(c.seed); }},
      {"probe.s_min", "probe times start here", [](C& c, D&, const N& n) { c.probe_s_min = as<double>(n); },
       [](const C& c) { return fmt_double(c.probe_s_min); }},
      {"probe.x_stride", "probe every k-th node", [](C& c, D&, const N& n) { c.probe_x_stride = as<int>(n); },
       [](const C& c) { return std::to_string(c.probe_x_stride); }},
      {"probe.t_stride", "probe every k-th time", [](C& c, D&, const N& n) { c.probe_t_stride = as<int>(n); },
       [](const C& c) { return std::to_string(c.probe_t_stride); }},
      {"kappa.moment", "moment order m >= 2", [](C& c, D&, const N& n) { c.kappa_moment = as<double>(n); },
       [](const C& c) { return fmt_double(c.kappa_moment); }},
      {"kappa.lags", "lag exponents k, h = 2^-k",
       [](C& c, D&, const N& n) { c.kappa_lags = as<std::vector<int>>(n); },
       [](const C& c) { return fmt_list(c.kappa_lags); }},
      {"sewing.gamma", "regularity gamma of the germ drift", [](C& c, D&, const N& n) { c.sewing_gamma = as<double>(n); },
       [](const C& c) { return fmt_double(c.sewing_gamma); }},
      {"sewing.s", "left end s of the germ pairs", [](C& c, D&, const N& n) { c.sewing_s = as<double>(n); },
       [](const C& c) { return fmt_double(c.sewing_s); }},
      {"sewing.T", "terminal time T of the germ", [](C& c, D&, const N& n) { c.sewing_T = as<double>(n); },
       [](const C& c) { return fmt_double(c.sewing_T); }},
      {"sewing.lags", "lag exponents k, h = 2^-k",
       [](C& c, D&, const N& n) { c.sewing_lags = as<std::vector<int>>(n); },
       [](const C& c) { return fmt_list(c.sewing_lags); }},
      {"besov.beta", "regularity probed by the besov experiment",
       [](C& c, D&, const N& n) { c.besov_beta = as<double>(n); }, [](const C& c) { return fmt_double(c.besov_beta); }},
      {"besov.radius", "window radius", [](C& c, D&, const N& n) { c.besov_radius = as<double>(n); },
       [](const C& c) { return fmt_double(c.besov_radius); }},
      {"weak.tests", "test functions used by weak residuals",
       [](C& c, D&, const N& n) { c.weak_tests = as<int>(n); }, [](const C& c) { return std::to_string(c.weak_tests); }},
      {"output.dir", "output directory", [](C& c, D&, const N& n) { c.out_dir = as<std::string>(n); },
       [](const C& c) { return quote(c.out_dir); }},
      {"output.format", "csv | ndjson", [](C& c, D&, const N& n) { c.format = as<std::string>(n); },
       [](const C& c) { return quote(c.format); }},
      {"output.dump_fields", "write binary field dumps (simulate)",
       [](C& c, D&, const N& n) { c.dump_fields = as<bool>(n); },
       [](const C& c) { return std::string(c.dump_fields ? "true" : "false"); }},
  };
  return f;
}

DriftSpec finish_drift(const DriftDraft& d) {
  const DriftForm form = drift_form_from_string(d.form);
  const DriftSpec& p = d.params;
  switch (form) {
    case DriftForm::Zero: return DriftSpec::zero();
    case DriftForm::Constant: return DriftSpec::constant(p.value);
    case DriftForm::Linear: return DriftSpec::linear(p.value);
    case DriftForm::Sine: return DriftSpec::sine(p.amplitude, p.frequency);
    case DriftForm::Sign: return DriftSpec::sign();
    case DriftForm::Indicator: return DriftSpec::indicator(p.lower, p.upper);
    case DriftForm::PowerSingularity: return DriftSpec::power(p.exponent, p.radius);
    case DriftForm::AtomicMeasure:
      if (p.locations.empty() && p.weights.empty()) return DriftSpec::delta();
      return DriftSpec::atomic(p.locations, p.weights);
  }
  return DriftSpec::zero();
}

void flatten(const YAML::Node& node, const std::string& prefix, std::vector<std::pair<std::string, YAML::Node>>& out) {
  for (const auto& kv : node) {
    const std::string key = prefix.empty() ? kv.first.as<std::string>() : prefix + "." + kv.first.as<std::string>();
    if (kv.second.IsMap()) {
      flatten(kv.second, key, out);
    } else {
      out.emplace_back(key, kv.second);
    }
  }
}

}  // namespace

SchemeSpec ExperimentConfig::scheme_spec() const { return {scheme, {}}; }

double ExperimentConfig::path_level(const Grid1D& grid, const TimeGrid& tgrid) const {
  return drift_level > 0.0 ? drift_level : grid_mollification_level(grid, tgrid);
}

DriftFn ExperimentConfig::path_drift(const Grid1D& grid, const TimeGrid& tgrid) const {
  switch (drift.form) {
    case DriftForm::Zero:
    case DriftForm::Constant:
    case DriftForm::Linear:
    case DriftForm::Sine:
      if (drift_level <= 0.0) {
        const DriftSpec d = drift;
        return [d](double u) { return d.evaluate(u); };
      }
      [[fallthrough]];
    default: return MollifiedDrift(drift, path_level(grid, tgrid)).fn();
  }
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& f : fields()) k.push_back({f.key, f.help});
    return k;
  }();
  return keys;
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  ExperimentConfig cfg;
  DriftDraft draft;
  if (root.IsNull()) {
    cfg.drift = finish_drift(draft);
    return cfg;
  }
  if (!root.IsMap()) throw ConfigError("config must be a mapping of dotted keys", root.Mark().line + 1);

  std::map<std::string, const Field*> index;
  for (const auto& f : fields()) index[f.key] = &f;
  std::map<std::string, int> seen;
  std::vector<std::pair<std::string, YAML::Node>> flat;
  flatten(root, "", flat);
  for (const auto& [key, value] : flat) {
    const int line = value.Mark().line + 1;
    auto it = index.find(key);
    if (it == index.end()) throw ConfigError("unknown key '" + key + "'", line);
    if (seen.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    seen[key] = line;
    try {
      it->second->set(cfg, draft, value);
    } catch (const YAML::Exception&) {
      throw ConfigError("bad value for '" + key + "'", line);
    } catch (const std::exception& e) {
      throw ConfigError(key + ": " + e.what(), line);
    }
  }
  try {
    cfg.drift = finish_drift(draft);
  } catch (const std::exception& e) {
    throw ConfigError(e.what(), seen.count("drift.form") ? seen["drift.form"] : 0);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + ": " + f.get(cfg) + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = serialize_config(cfg);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string h;
  for (unsigned int i = 0; i < len; ++i) {
    h += hex[md[i] >> 4];
    h += hex[md[i] & 15];
  }
  return h;
}

std::vector<std::string> config_violations(const ExperimentConfig& c) {
  std::vector<std::string> v;
  static const std::vector<std::string> experiments{"simulate", "equivalence", "kappa",
                                                    "sewing",   "besov",       "uniqueness"};
  if (std::find(experiments.begin(), experiments.end(), c.experiment) == experiments.end()) {
    v.push_back("unknown experiment '" + c.experiment + "'");
  }
  for (auto& s : c.setup.violations(c.horizon)) v.push_back("domain: " + s);
  for (auto& s : c.drift.violations()) v.push_back("drift: " + s);
  if (c.n_space < 4) v.push_back("grid.n_space must be >= 4");
  if (c.n_time < 1) v.push_back("grid.n_time must be >= 1");
  if (c.resolutions < 1 || c.resolutions > 6) v.push_back("grid.resolutions must lie in [1, 6]");
  if (c.realizations < 1) v.push_back("run.realizations must be >= 1");
  if (!(c.drift_p >= 1.0)) v.push_back("drift.p must be >= 1");
  if (c.drift_level < 0.0) v.push_back("drift.level must be >= 0");
  if (c.mollification_levels.size() < 2) v.push_back("drift.levels needs at least two levels");
  for (std::size_t k = 0; k < c.mollification_levels.size(); ++k) {
    if (!(c.mollification_levels[k] > 0.0) || (k > 0 && !(c.mollification_levels[k] > c.mollification_levels[k - 1]))) {
      v.push_back("drift.levels must be positive and increasing");
      break;
    }
  }
  if (c.probe_x_stride < 1 || c.probe_t_stride < 1) v.push_back("probe strides must be >= 1");
  if (!(c.probe_s_min >= 0.0 && c.probe_s_min < c.horizon)) v.push_back("probe.s_min must lie in [0, horizon)");
  if (!(c.kappa_moment >= 2.0)) v.push_back("kappa.moment must be >= 2");
  for (int k : c.kappa_lags) {
    if (k < 0 || k > 20) v.push_back("kappa.lags entries must lie in [0, 20]");
  }
  for (int k : c.sewing_lags) {
    if (k < 0 || k > 20) v.push_back("sewing.lags entries must lie in [0, 20]");
  }
  if (!(c.sewing_T > 0.0 && c.sewing_T <= c.horizon)) v.push_back("sewing.T must lie in (0, horizon]");
  if (!(c.sewing_s >= 0.0 && c.sewing_s < c.sewing_T)) v.push_back("sewing.s must lie in [0, T)");
  if (!(c.besov_beta >= -2.0 && c.besov_beta <= 1.0)) v.push_back("besov.beta must lie in [-2, 1]");
  if (!(c.besov_radius > 0.0)) v.push_back("besov.radius must be positive");
  if (c.weak_tests < 1) v.push_back("weak.tests must be >= 1");
  if (c.uniqueness_mode != "schemes" && c.uniqueness_mode != "ladder") {
    v.push_back("uniqueness.mode must be schemes or ladder");
  }
  if (c.format != "csv" && c.format != "ndjson") v.push_back("output.format must be csv or ndjson");
  if (c.drift.is_measure() && c.drift_level == 0.0 && c.experiment == "kappa") {
    v.push_back("kappa needs a function drift (a measure has no L_p integrability)");
  }
  return v;
}

std::vector<DerivedQuantity> derived_quantities(const ExperimentConfig& c) {
  std::vector<DerivedQuantity> out;
  auto put = [&](std::string name, std::string value) { out.push_back({std::move(name), std::move(value)}); };
  put("domain.extent", fmt_double(c.setup.extent()));
  if (c.setup.kind == DomainKind::WholeLine) {
    put("torus_width.required", fmt_double(8.0 * std::sqrt(std::max(c.horizon, 0.0))));
  }
  if (c.n_space >= 2 && c.n_time >= 1 && c.horizon > 0.0 && c.setup.extent() > 0.0) {
    for (int r = 0; r < c.resolutions; ++r) {
      const Grid1D g(c.setup, c.n_space << r);
      const TimeGrid t(c.horizon, c.n_time << r);
      const std::string tag = "resolution." + std::to_string(r) + ".";
      put(tag + "n_space", std::to_string(g.n_space()));
      put(tag + "n_time", std::to_string(t.n_time()));
      put(tag + "dx", fmt_double(g.dx()));
      put(tag + "dt", fmt_double(t.dt()));
      put(tag + "mollification_scale", fmt_double(1.0 / c.path_level(g, t)));
    }
  }
  put("drift.declared_beta", fmt_double(c.drift.declared.beta));
  put("kappa.theory", c.drift_p >= 1.0 ? fmt_double(kappa_theory(c.drift_p)) : "n/a");
  return out;
}

}  // namespace shelab
