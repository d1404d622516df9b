#include "sqlab/config.hpp"

#include <set>

#include "json.hpp"

namespace sqlab {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

template <typename T>
void read_into(const json& o, const char* key, T& dst) {
  auto it = o.find(key);
  if (it == o.end()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception&) {
    bad(key, "wrong type");
  }
}

}  // namespace

RunConfig config_from_json(const std::string& text) {
  json o = json::parse(text, nullptr, false);
  if (o.is_discarded()) throw ConfigError("malformed json");
  if (!o.is_object()) throw ConfigError("config root must be an object");

  static const std::set<std::string> known = {
      "version", "n",      "J",      "K",     "kernel", "tgrid",  "levels", "seed",
      "experiment", "alphas", "deltas", "shifts", "mu",    "p",      "lambda", "trials",
      "scope",   "out_dir"};
  for (auto it = o.begin(); it != o.end(); ++it)
    if (!known.count(it.key())) bad(it.key(), "unknown key");

  RunConfig cfg;
  read_into(o, "version", cfg.version);
  if (cfg.version != 1) bad("version", "expected 1");
  read_into(o, "n", cfg.n);
  read_into(o, "J", cfg.J);
  read_into(o, "K", cfg.K);
  read_into(o, "kernel", cfg.kernel);
  if (auto it = o.find("tgrid"); it != o.end()) {
    if (!it->is_object()) bad("tgrid", "expected object");
    for (auto f = it->begin(); f != it->end(); ++f)
      if (f.key() != "t_min" && f.key() != "ratio" && f.key() != "L") bad("tgrid." + f.key(), "unknown key");
    read_into(*it, "t_min", cfg.tgrid.t_min);
    read_into(*it, "ratio", cfg.tgrid.ratio);
    read_into(*it, "L", cfg.tgrid.L);
  }
  read_into(o, "levels", cfg.levels);
  if (o.contains("seed")) {
    read_into(o, "seed", cfg.seed);
    cfg.seed_set = true;
  }
  read_into(o, "experiment", cfg.experiment);
  read_into(o, "alphas", cfg.alphas);
  read_into(o, "deltas", cfg.deltas);
  read_into(o, "shifts", cfg.shifts);
  read_into(o, "mu", cfg.mu);
  read_into(o, "p", cfg.p);
  read_into(o, "lambda", cfg.lambda);
  read_into(o, "trials", cfg.trials);
  read_into(o, "scope", cfg.scope);
  read_into(o, "out_dir", cfg.out_dir);
  validate_config(cfg);
  return cfg;
}

std::string config_json(const RunConfig& cfg) {
  json o{{"version", cfg.version},
         {"n", cfg.n},
         {"J", cfg.J},
         {"K", cfg.K},
         {"kernel", cfg.kernel},
         {"levels", cfg.levels},
         {"seed", cfg.seed},
         {"experiment", cfg.experiment},
         {"alphas", cfg.alphas},
         {"deltas", cfg.deltas},
         {"shifts", cfg.shifts},
         {"mu", cfg.mu},
         {"p", cfg.p},
         {"lambda", cfg.lambda},
         {"trials", cfg.trials},
         {"scope", cfg.scope},
         {"out_dir", cfg.out_dir}};
  if (cfg.tgrid.t_min > 0.0)
    o["tgrid"] = json{{"t_min", cfg.tgrid.t_min}, {"ratio", cfg.tgrid.ratio}, {"L", cfg.tgrid.L}};
  return o.dump(2);
}

void validate_config(const RunConfig& cfg) {
  if (cfg.n != 1 && cfg.n != 2) bad("n", "must be 1 or 2");
  if (cfg.J < -4 || cfg.J > 4) bad("J", "must lie in [-4, 4]");
  if (cfg.K <= cfg.J + 4) bad("K", "need K > J + 4 so cubes span several levels");
  if (cfg.n * (cfg.J + 1 + cfg.K) > 26) bad("K", "grid too fine for exact cell counting");
  kernel_id_from(cfg.kernel);  // throws KernelError on unknown names
  if (cfg.tgrid.t_min > 0.0) {
    if (!(cfg.tgrid.ratio > 1.0)) bad("tgrid.ratio", "must exceed 1");
    if (cfg.tgrid.L < 2) bad("tgrid.L", "need at least 2 levels");
  } else if (cfg.tgrid.ratio != 0.0 || cfg.tgrid.L != 0) {
    bad("tgrid", "partial spec; give t_min, ratio and L together");
  }
  if (cfg.levels < 2) bad("levels", "need at least 2 levels");
  for (double a : cfg.alphas)
    if (!(a > 0.0)) bad("alphas", "apertures must be positive");
  for (double d : cfg.deltas)
    if (!(d > 0.0) || d > 1.0) bad("deltas", "must lie in (0, 1]");
  for (int m : cfg.shifts)
    if (m < 1) bad("shifts", "must be >= 1");
  if (!(cfg.mu > 1.0)) bad("mu", "must exceed 1");
  if (!(cfg.p >= 1.0)) bad("p", "must be >= 1");
  if (cfg.lambda < 0.0) bad("lambda", "must be >= 0");
  if (cfg.trials < 0) bad("trials", "must be >= 0");
  scope_from_name(cfg.scope);
}

KernelSpec config_kernel(const RunConfig& cfg) { return KernelSpec::make(kernel_id_from(cfg.kernel), cfg.n); }

TGrid config_tgrid(const RunConfig& cfg, const Signal& f) {
  if (cfg.tgrid.t_min > 0.0) return TGrid{cfg.tgrid.t_min, cfg.tgrid.ratio, cfg.tgrid.L};
  return TGrid::spanning(f, cfg.levels);
}

ApScope scope_from_name(const std::string& name) {
  if (name == "all") return ApScope::all;
  if (name == "dyadic") return ApScope::dyadic;
  if (name == "dyadic_shifted") return ApScope::dyadic_shifted;
  throw ConfigError("unknown scope '" + name + "'");
}

}  // namespace sqlab
