#pragma once

// Experiment configuration: one JSON document, validated against a fixed
// schema. Unknown keys are rejected and every violation is reported at once.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "muscup/core/coupling.hpp"
#include "muscup/core/errors.hpp"
#include "muscup/gp/gp.hpp"
#include "muscup/models/gray_scott.hpp"
#include "muscup/models/reaction_diffusion_1d.hpp"
#include "muscup/simc/simc.hpp"
#include "muscup/uq/distribution.hpp"
#include "muscup/uq/moments.hpp"

namespace muscup::harness {

using nlohmann::json;

enum class ModelKind { case1, case2 };
enum class Method { mc, simc, gp, coupled_pc, galerkin };

inline const char* to_string(ModelKind m) { return m == ModelKind::case1 ? "case1" : "case2"; }

inline const char* to_string(Method m) {
  switch (m) {
    case Method::mc: return "mc";
    case Method::simc: return "simc";
    case Method::gp: return "gp";
    case Method::coupled_pc: return "coupled-pc";
    case Method::galerkin: return "galerkin";
  }
  return "?";
}

struct ExperimentConfig {
  ModelKind model = ModelKind::case1;
  Method method = Method::mc;
  std::uint64_t seed = 42;
  int threads = 1;
  std::string output_dir;
  std::optional<std::string> reference;
  History history = History::final_only;

  std::vector<UniformInput> distribution;  // filled with model defaults if absent

  // Time scales; zero means "model default".
  int n_micro = 0;
  double dt_macro = 0.0;
  double t_end = 0.0;

  double dx = 1e-2;        // case 1
  std::size_t nx = 256;    // case 2
  std::size_t ny = 256;
  double L = 2.5;

  SamplingPlan sampling{2000, 50, Selection::maximin};
  GPConfig gp;
  int pc_order = 0;             // 0: model default
  int pc_quadrature_level = 0;  // 0: order + 2
  BootstrapConfig bootstrap;

  json raw;  // the document as given

  rd1d::ModelConfig1D case1_config() const {
    auto c = rd1d::ModelConfig1D::defaults(n_micro ? n_micro : 100, dx);
    if (dt_macro > 0.0) c.dt_macro = dt_macro;
    c.t_end = t_end > 0.0 ? t_end : 20.0 * c.dt_macro;
    return c;
  }

  gs::GSConfig case2_config() const {
    gs::GSConfig c;
    c.L = L;
    c.nx = nx;
    c.ny = ny;
    if (n_micro) c.n_micro = n_micro;
    if (dt_macro > 0.0) c.dt_macro = dt_macro;
    if (t_end > 0.0) c.t_end = t_end;
    return c;
  }

  InputDistribution input_distribution() const {
    if (!distribution.empty()) return InputDistribution(distribution);
    if (model == ModelKind::case1) {
      const auto c = case1_config();
      return InputDistribution({{rd1d::kMeanDiffusion, 0.1},
                                {rd1d::mean_reaction(c.n_micro, c.dx), 0.1}});
    }
    return InputDistribution({{gs::kMeanFeed, 0.01}, {gs::kMeanRate, 0.01}});
  }

  int effective_pc_order() const {
    return pc_order > 0 ? pc_order : (model == ModelKind::case1 ? 4 : 5);
  }
  int effective_quadrature_level() const {
    return pc_quadrature_level > 0 ? pc_quadrature_level : effective_pc_order() + 2;
  }
};

namespace detail {

class Checker {
 public:
  void fail(const std::string& path, const std::string& msg) {
    errors_.push_back(path + ": " + msg);
  }

  void keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(path + it.key(), "unknown key");
  }

  const json* object(const json& parent, const std::string& key, const std::string& path) {
    if (!parent.contains(key)) return nullptr;
    const json& v = parent.at(key);
    if (!v.is_object()) {
      fail(path + key, "expected an object");
      return nullptr;
    }
    return &v;
  }

  template <class T>
  std::optional<T> get(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const json& v = obj.at(key);
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return fail(path + key, "expected a string"), std::nullopt;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return fail(path + key, "expected a boolean"), std::nullopt;
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return fail(path + key, "expected an integer"), std::nullopt;
      if (std::is_unsigned_v<T> && v.get<long long>() < 0)
        return fail(path + key, "must be nonnegative"), std::nullopt;
    } else {
      if (!v.is_number()) return fail(path + key, "expected a number"), std::nullopt;
    }
    return v.get<T>();
  }

  void positive(std::optional<double> v, const std::string& where) {
    if (v && !(*v > 0.0)) fail(where, "must be positive");
  }

  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

}  // namespace detail

/// Parses and validates a configuration document.
inline ExperimentConfig parse_config(const json& doc) {
  detail::Checker ck;
  ExperimentConfig c;
  c.raw = doc;
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  ck.keys(doc, "", {"model", "method", "seed", "threads", "output_dir", "reference", "history",
                    "distribution", "time_scales", "grid", "sampling", "gp", "pc", "bootstrap"});

  if (auto m = ck.get<std::string>(doc, "model", "")) {
    if (*m == "case1") c.model = ModelKind::case1;
    else if (*m == "case2") c.model = ModelKind::case2;
    else ck.fail("model", "expected case1 or case2, got '" + *m + "'");
  } else if (!doc.contains("model")) {
    ck.fail("model", "required");
  }
  if (auto m = ck.get<std::string>(doc, "method", "")) {
    if (*m == "mc") c.method = Method::mc;
    else if (*m == "simc") c.method = Method::simc;
    else if (*m == "gp") c.method = Method::gp;
    else if (*m == "coupled-pc") c.method = Method::coupled_pc;
    else if (*m == "galerkin") c.method = Method::galerkin;
    else ck.fail("method", "expected mc, simc, gp, coupled-pc or galerkin, got '" + *m + "'");
  } else if (!doc.contains("method")) {
    ck.fail("method", "required");
  }
  if (auto s = ck.get<std::uint64_t>(doc, "seed", "")) c.seed = *s;
  if (auto t = ck.get<int>(doc, "threads", "")) {
    if (*t < 1) ck.fail("threads", "must be at least 1");
    else c.threads = *t;
  }
  if (auto o = ck.get<std::string>(doc, "output_dir", "")) c.output_dir = *o;
  if (auto r = ck.get<std::string>(doc, "reference", "")) c.reference = *r;
  if (auto h = ck.get<std::string>(doc, "history", "")) {
    if (*h == "all") c.history = History::all;
    else if (*h == "final") c.history = History::final_only;
    else ck.fail("history", "expected all or final");
  }

  if (doc.contains("distribution")) {
    const json& d = doc.at("distribution");
    if (!d.is_array() || d.size() != 2) {
      ck.fail("distribution", "expected an array of two input specs");
    } else {
      for (std::size_t i = 0; i < d.size(); ++i) {
        const std::string p = "distribution[" + std::to_string(i) + "].";
        if (!d[i].is_object()) {
          ck.fail(p, "expected an object");
          continue;
        }
        ck.keys(d[i], p, {"mean", "rel_half_width"});
        auto mean = ck.get<double>(d[i], "mean", p);
        auto rho = ck.get<double>(d[i], "rel_half_width", p);
        if (!mean) ck.fail(p + "mean", "required");
        if (!rho) ck.fail(p + "rel_half_width", "required");
        if (rho && !(*rho >= 0.0 && *rho < 1.0)) ck.fail(p + "rel_half_width", "must lie in [0, 1)");
        if (mean && !(*mean > 0.0)) ck.fail(p + "mean", "must be positive");
        c.distribution.push_back({mean.value_or(1.0), rho.value_or(0.0)});
      }
    }
  }

  if (const json* t = ck.object(doc, "time_scales", "")) {
    ck.keys(*t, "time_scales.", {"dt_macro", "n_micro", "t_end"});
    if (auto v = ck.get<int>(*t, "n_micro", "time_scales.")) {
      if (*v < 1) ck.fail("time_scales.n_micro", "must be at least 1");
      else c.n_micro = *v;
    }
    auto dt = ck.get<double>(*t, "dt_macro", "time_scales.");
    auto te = ck.get<double>(*t, "t_end", "time_scales.");
    ck.positive(dt, "time_scales.dt_macro");
    ck.positive(te, "time_scales.t_end");
    c.dt_macro = dt.value_or(0.0);
    c.t_end = te.value_or(0.0);
  }

  if (const json* g = ck.object(doc, "grid", "")) {
    if (c.model == ModelKind::case1) {
      ck.keys(*g, "grid.", {"dx"});
      if (auto dx = ck.get<double>(*g, "dx", "grid.")) {
        ck.positive(dx, "grid.dx");
        c.dx = *dx;
      }
    } else {
      ck.keys(*g, "grid.", {"nx", "ny", "L"});
      if (auto v = ck.get<std::size_t>(*g, "nx", "grid.")) c.nx = *v;
      if (auto v = ck.get<std::size_t>(*g, "ny", "grid.")) c.ny = *v;
      if (auto v = ck.get<double>(*g, "L", "grid.")) {
        ck.positive(v, "grid.L");
        c.L = *v;
      }
    }
  }

  if (const json* s = ck.object(doc, "sampling", "")) {
    ck.keys(*s, "sampling.", {"N", "N_mu", "selection"});
    if (auto v = ck.get<std::size_t>(*s, "N", "sampling.")) c.sampling.N = *v;
    if (auto v = ck.get<std::size_t>(*s, "N_mu", "sampling.")) c.sampling.N_mu = *v;
    if (auto v = ck.get<std::string>(*s, "selection", "sampling.")) {
      if (*v == "maximin") c.sampling.selection = Selection::maximin;
      else if (*v == "first") c.sampling.selection = Selection::first;
      else ck.fail("sampling.selection", "expected maximin or first");
    }
  }
  if (c.sampling.N < 2) ck.fail("sampling.N", "must be at least 2");
  if (c.method == Method::simc) {
    try {
      c.sampling.validate(2);
    } catch (const ConfigError& e) {
      ck.fail("sampling", e.what());
    }
  }

  if (const json* g = ck.object(doc, "gp", "")) {
    ck.keys(*g, "gp.", {"N_meta", "nugget", "multistarts", "max_evaluations", "hyperparameters"});
    if (auto v = ck.get<std::size_t>(*g, "N_meta", "gp.")) c.gp.N_meta = *v;
    if (auto v = ck.get<double>(*g, "nugget", "gp.")) c.gp.nugget = *v;
    if (auto v = ck.get<int>(*g, "multistarts", "gp.")) c.gp.multistarts = *v;
    if (auto v = ck.get<int>(*g, "max_evaluations", "gp.")) c.gp.max_evaluations = *v;
    if (const json* h = ck.object(*g, "hyperparameters", "gp.")) {
      ck.keys(*h, "gp.hyperparameters.", {"lengthscales", "signal_variance"});
      GPHyperparameters hp;
      if (h->contains("lengthscales") && h->at("lengthscales").is_array()) {
        for (const auto& l : h->at("lengthscales")) {
          if (!l.is_number()) ck.fail("gp.hyperparameters.lengthscales", "expected numbers");
          else hp.lengthscales.push_back(l.get<double>());
        }
      } else {
        ck.fail("gp.hyperparameters.lengthscales", "required array");
      }
      if (auto s2 = ck.get<double>(*h, "signal_variance", "gp.hyperparameters.")) hp.signal_variance = *s2;
      c.gp.fixed = hp;
    }
  }
  try {
    c.gp.validate();
  } catch (const ConfigError& e) {
    ck.fail("gp", e.what());
  }
  c.gp.seed = c.seed;

  if (const json* p = ck.object(doc, "pc", "")) {
    ck.keys(*p, "pc.", {"order", "quadrature_level"});
    if (auto v = ck.get<int>(*p, "order", "pc.")) {
      if (*v < 0) ck.fail("pc.order", "must be nonnegative");
      else c.pc_order = *v;
    }
    if (auto v = ck.get<int>(*p, "quadrature_level", "pc.")) c.pc_quadrature_level = *v;
    if (c.pc_quadrature_level && c.pc_quadrature_level < c.effective_pc_order() + 1)
      ck.fail("pc.quadrature_level", "must be at least order + 1");
  }

  if (const json* b = ck.object(doc, "bootstrap", "")) {
    ck.keys(*b, "bootstrap.", {"resamples", "level"});
    if (auto v = ck.get<int>(*b, "resamples", "bootstrap.")) {
      if (*v < 100) ck.fail("bootstrap.resamples", "must be at least 100");
      else c.bootstrap.resamples = *v;
    }
    if (auto v = ck.get<double>(*b, "level", "bootstrap.")) {
      if (!(*v > 0.0 && *v < 1.0)) ck.fail("bootstrap.level", "must lie in (0, 1)");
      else c.bootstrap.level = *v;
    }
  }
  c.bootstrap.seed = c.seed ^ 0xb5ad4eceda1ce2a9ULL;

  if (ck.errors().empty()) {
    try {
      const InputDistribution dist = c.input_distribution();
      if (c.model == ModelKind::case1) c.case1_config().validate(dist[0].upper());
      else c.case2_config().validate();
    } catch (const std::exception& e) {
      ck.fail("model configuration", e.what());
    }
  }

  if (!ck.errors().empty()) {
    std::ostringstream os;
    os << "invalid configuration (" << ck.errors().size() << " problem"
       << (ck.errors().size() > 1 ? "s" : "") << "):";
    for (const auto& e : ck.errors()) os << "\n  " << e;
    throw ConfigError(os.str());
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("configuration " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

}  // namespace muscup::harness
