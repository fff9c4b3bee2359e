#include "prigp/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "prigp/error.hpp"

namespace prigp {
namespace {

using nlohmann::json;

// A JSON node plus the pointer that reached it, for error messages.
class Node {
 public:
  Node(const json* value, std::string path) : v_(value), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError((path_.empty() ? std::string("/") : path_) + ": " + what);
  }

  const json& raw() const { return *v_; }
  const std::string& path() const { return path_; }

  std::optional<Node> get(const std::string& key) const {
    if (!v_->is_object()) fail("expected an object");
    auto it = v_->find(key);
    if (it == v_->end() || it->is_null()) return std::nullopt;
    return Node(&*it, path_ + "/" + key);
  }
  Node require(const std::string& key) const {
    auto n = get(key);
    if (!n) {
      Node missing(v_, path_ + "/" + key);
      missing.fail("required field is missing");
    }
    return *n;
  }
  std::vector<Node> items() const {
    if (!v_->is_array()) fail("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < v_->size(); ++i) out.emplace_back(&(*v_)[i], path_ + "/" + std::to_string(i));
    return out;
  }

  double number() const {
    if (!v_->is_number()) fail("expected a number");
    const double d = v_->get<double>();
    if (!std::isfinite(d)) fail("expected a finite number");
    return d;
  }
  double positive() const {
    const double d = number();
    if (!(d > 0.0)) fail("must be positive");
    return d;
  }
  double nonnegative() const {
    const double d = number();
    if (!(d >= 0.0)) fail("must be nonnegative");
    return d;
  }
  std::uint64_t uint() const {
    if (!v_->is_number_unsigned() && !(v_->is_number_integer() && v_->get<std::int64_t>() >= 0)) {
      fail("expected a nonnegative integer");
    }
    return v_->get<std::uint64_t>();
  }
  bool boolean() const {
    if (!v_->is_boolean()) fail("expected true or false");
    return v_->get<bool>();
  }
  std::string string() const {
    if (!v_->is_string()) fail("expected a string");
    return v_->get<std::string>();
  }
  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const Node& n : items()) out.push_back(n.number());
    return out;
  }

 private:
  const json* v_;
  std::string path_;
};

void check_keys(const Node& n, std::initializer_list<std::string_view> allowed) {
  if (!n.raw().is_object()) n.fail("expected an object");
  for (auto it = n.raw().begin(); it != n.raw().end(); ++it) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || it.key() == a;
    if (!ok) Node(&it.value(), n.path() + "/" + it.key()).fail("unknown field");
  }
}

void read_kernel(const Node& n, KernelConfig& k) {
  check_keys(n, {"signal_std", "lengthscales", "convention", "noise_std"});
  if (auto v = n.get("signal_std")) k.signal_std = v->positive();
  k.lengthscales = n.require("lengthscales").numbers();
  for (const Node& item : n.require("lengthscales").items()) item.positive();
  if (auto v = n.get("convention")) {
    k.convention = v->string();
    if (k.convention != "inverse" && k.convention != "lengthscale") {
      v->fail("expected \"inverse\" or \"lengthscale\"");
    }
  }
  if (auto v = n.get("noise_std")) k.noise_std = v->positive();
}

void read_dynamics(const Node& n, DynamicsConfig& d) {
  check_keys(n, {"s", "r", "dt", "steps", "initial_lower", "initial_upper",
                 "trajectory_initial_state", "trajectories"});
  if (auto v = n.get("s")) d.system.s = v->number();
  if (auto v = n.get("r")) d.system.r = v->number();
  if (auto v = n.get("dt")) d.system.dt = v->positive();
  if (auto v = n.get("steps")) {
    d.system.steps = v->uint();
    if (d.system.steps < 1) v->fail("must be at least 1");
  }
  auto vec3 = [](const Node& v) {
    auto out = v.numbers();
    if (out.size() != 3) v.fail("expected 3 numbers");
    return out;
  };
  if (auto v = n.get("initial_lower")) d.initial_lower = vec3(*v);
  if (auto v = n.get("initial_upper")) d.initial_upper = vec3(*v);
  for (std::size_t j = 0; j < 3; ++j) {
    if (d.initial_upper[j] < d.initial_lower[j]) n.fail("initial_upper must not lie below initial_lower");
  }
  if (auto v = n.get("trajectory_initial_state")) d.trajectory_initial_state = vec3(*v);
  if (auto v = n.get("trajectories")) d.trajectories = v->boolean();
}

void read_bounds(const Node& n, BoundsConfig& b) {
  check_keys(n, {"tau", "delta", "points", "sigma_reading", "L_f", "L_fhat", "L_kappa", "c"});
  if (auto v = n.get("tau")) b.tau = v->positive();
  if (auto v = n.get("delta")) {
    b.delta = v->number();
    if (!(b.delta > 0.0 && b.delta < 1.0)) v->fail("must lie in (0, 1)");
  }
  if (auto v = n.get("points")) b.points = v->uint();
  if (auto v = n.get("sigma_reading")) {
    const std::string s = v->string();
    if (s == "std") b.sigma_reading = SigmaReading::kStandardDeviation;
    else if (s == "variance") b.sigma_reading = SigmaReading::kVariance;
    else v->fail("expected \"std\" or \"variance\"");
  }
  if (auto v = n.get("L_f")) b.L_f = v->nonnegative();
  if (auto v = n.get("L_fhat")) b.L_fhat = v->nonnegative();
  if (auto v = n.get("L_kappa")) b.L_kappa = v->nonnegative();
  if (auto v = n.get("c")) {
    b.c = v->number();
    if (!(b.c >= 0.0 && b.c <= 1.0)) v->fail("must lie in [0, 1]");
  }
}

}  // namespace

KernelParams KernelConfig::params() const {
  if (convention == "lengthscale") return KernelParams::from_lengthscales(signal_std, lengthscales, noise_std);
  KernelParams p;
  p.signal_std = signal_std;
  p.inverse_lengthscales = lengthscales;
  p.noise_std = noise_std;
  return p;
}

std::string_view experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kFuncApprox: return "func-approx";
    case ExperimentKind::kDynIdent: return "dyn-ident";
    case ExperimentKind::kBoundsCheck: return "bounds-check";
  }
  return "?";
}

ExperimentConfig parse_config(std::string_view json_text, std::string_view origin) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(origin) + ": malformed JSON at byte " + std::to_string(e.byte) +
                      ": " + e.what());
  }
  try {
    const Node root(&doc, "");
    check_keys(root, {"experiment", "seed", "trials", "methods", "c", "domain", "target", "kernel",
                      "agents", "graph", "data", "test", "election", "dynamics", "bounds", "output"});
    ExperimentConfig cfg;

    const Node exp = root.require("experiment");
    const std::string name = exp.string();
    if (name == "func-approx") cfg.experiment = ExperimentKind::kFuncApprox;
    else if (name == "dyn-ident") cfg.experiment = ExperimentKind::kDynIdent;
    else if (name == "bounds-check") cfg.experiment = ExperimentKind::kBoundsCheck;
    else exp.fail("expected func-approx, dyn-ident or bounds-check");

    if (auto v = root.get("seed")) cfg.seed = v->uint();
    if (auto v = root.get("trials")) {
      cfg.trials = v->uint();
      if (cfg.trials < 1) v->fail("must be at least 1");
    }

    double default_c = 1.0;
    if (auto v = root.get("c")) {
      default_c = v->number();
      if (!(default_c >= 0.0 && default_c <= 1.0)) v->fail("must lie in [0, 1]");
    }
    if (auto v = root.get("methods")) {
      for (const Node& m : v->items()) {
        try {
          cfg.methods.push_back(parse_method(m.string(), default_c));
        } catch (const ConfigError& e) {
          m.fail(e.what());
        }
      }
      if (cfg.methods.empty()) v->fail("at least one method is required");
    } else {
      cfg.methods.push_back(parse_method("prigp", default_c));
    }

    const Node domain = root.require("domain");
    check_keys(domain, {"lower", "upper"});
    cfg.domain.lower = domain.require("lower").numbers();
    cfg.domain.upper = domain.require("upper").numbers();
    if (cfg.domain.lower.size() != cfg.domain.upper.size() || cfg.domain.lower.empty()) {
      domain.fail("lower and upper must be nonempty and of equal length");
    }
    for (std::size_t j = 0; j < cfg.domain.dim(); ++j) {
      if (!(cfg.domain.upper[j] > cfg.domain.lower[j])) domain.fail("upper must exceed lower in every dimension");
    }
    const std::size_t m = cfg.domain.dim();

    const Node target = root.require("target");
    cfg.target = target.string();
    try {
      PriorMeanFunction(cfg.target, m);
    } catch (const InputError& e) {
      target.fail(e.what());
    }

    const Node kernel = root.require("kernel");
    read_kernel(kernel, cfg.kernel);
    if (cfg.kernel.lengthscales.size() != m) {
      kernel.require("lengthscales").fail("expected one value per domain dimension (" + std::to_string(m) + ")");
    }

    const Node agents = root.require("agents");
    for (const Node& a : agents.items()) {
      check_keys(a, {"prior", "sbar", "sigma_h"});
      AgentConfig ac;
      const Node prior = a.require("prior");
      ac.prior = prior.string();
      try {
        PriorMeanFunction(ac.prior, m);
      } catch (const InputError& e) {
        prior.fail(e.what());
      }
      ac.sbar = a.require("sbar").uint();
      if (auto v = a.get("sigma_h")) ac.sigma_h = v->positive();
      cfg.agents.push_back(std::move(ac));
    }
    if (cfg.agents.empty()) agents.fail("at least one agent is required");

    const Node graph = root.require("graph");
    check_keys(graph, {"adjacency"});
    const Node adj = graph.require("adjacency");
    for (const Node& row : adj.items()) {
      std::vector<int> r;
      for (const Node& e : row.items()) {
        const std::uint64_t v = e.uint();
        if (v > 1) e.fail("expected 0 or 1");
        r.push_back(static_cast<int>(v));
      }
      cfg.adjacency.push_back(std::move(r));
    }
    if (cfg.adjacency.size() != cfg.agents.size()) {
      adj.fail("matrix has " + std::to_string(cfg.adjacency.size()) + " rows for " +
               std::to_string(cfg.agents.size()) + " agents");
    }
    CommGraph g;
    try {
      g = build_graph(cfg.adjacency);
    } catch (const ConfigError& e) {
      adj.fail(e.what());
    }
    for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
      const std::size_t closed = g.closed_neighborhood(i).size();
      const auto& agents_items = agents.items();
      if (cfg.agents[i].sbar + 1 > closed) {
        agents_items[i].require("sbar").fail("must be at most |closed neighbourhood| - 1 = " +
                                             std::to_string(closed - 1));
      }
    }

    if (auto d = root.get("data")) {
      check_keys(*d, {"shared", "points", "noise_std"});
      if (auto v = d->get("shared")) cfg.data.shared = v->boolean();
      if (auto v = d->get("points")) cfg.data.points = v->uint();
      if (auto v = d->get("noise_std")) cfg.data.noise_std = v->nonnegative();
    }
    if (auto t = root.get("test")) {
      check_keys(*t, {"points", "measurement_noise_std"});
      if (auto v = t->get("points")) cfg.test.points = v->uint();
      if (auto v = t->get("measurement_noise_std")) cfg.test.measurement_noise_std = v->nonnegative();
    }
    if (auto e = root.get("election")) {
      check_keys(*e, {"rule", "variance_weight"});
      if (auto v = e->get("rule")) {
        const std::string s = v->string();
        if (s == "threshold") cfg.rule = ElectionRule::kThreshold;
        else if (s == "keep") cfg.rule = ElectionRule::kKeepCount;
        else v->fail("expected \"threshold\" or \"keep\"");
      }
      if (auto v = e->get("variance_weight")) {
        const std::string s = v->string();
        if (s == "inverse") cfg.variance_weighting = VarianceWeighting::kInverseVariance;
        else if (s == "inverse_squared") cfg.variance_weighting = VarianceWeighting::kInverseVarianceSquared;
        else v->fail("expected \"inverse\" or \"inverse_squared\"");
      }
    }
    if (cfg.rule == ElectionRule::kKeepCount) {
      for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
        if (cfg.agents[i].sbar < 1) agents.items()[i].require("sbar").fail("keep rule needs sbar >= 1");
      }
    }
    if (auto d = root.get("dynamics")) read_dynamics(*d, cfg.dynamics);
    if (cfg.experiment == ExperimentKind::kDynIdent && m != 3) {
      domain.fail("dyn-ident needs a 3-dimensional domain");
    }
    if (auto b = root.get("bounds")) read_bounds(*b, cfg.bounds);
    if (auto o = root.get("output")) {
      check_keys(*o, {"dir", "audit", "trace_trials"});
      if (auto v = o->get("dir")) cfg.output.dir = v->string();
      if (auto v = o->get("audit")) cfg.output.audit = v->boolean();
      if (auto v = o->get("trace_trials")) cfg.output.trace_trials = v->uint();
    }
    return cfg;
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace prigp
