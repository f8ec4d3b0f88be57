#include "dopt/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dopt/error.hpp"

namespace dopt::config {
namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were read so leftovers can be
// reported as unknown. Unknown keys from every section land in one shared list.
class Section {
 public:
  Section(const json& j, std::string path, std::vector<std::string>& unknown)
      : j_(j), path_(std::move(path)), unknown_(unknown) {
    if (!j_.is_object()) throw ParseError(fmt::format("config: '{}' must be an object", path_));
  }
  Section(const Section&) = delete;
  ~Section() {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) unknown_.push_back(path_.empty() ? key : path_ + "." + key);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    if (!has(key)) throw ParseError(fmt::format("config: missing required key '{}'", where(key)));
    return j_.at(key);
  }

  Section child(const std::string& key) { return Section(raw(key), where(key), unknown_); }

  template <class T>
  T get(const std::string& key) {
    const auto& v = raw(key);
    try {
      return convert<T>(v);
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("config: bad value for '{}': {}", where(key), e.what()));
    }
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  template <class T>
  std::optional<T> maybe(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return get<T>(key);
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  template <class T>
  static T convert(const json& v) {
    if constexpr (std::is_same_v<T, std::int64_t> || std::is_same_v<T, std::uint64_t> ||
                  std::is_same_v<T, std::size_t>) {
      // Accept 1e7-style numbers as long as they are whole.
      if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d != std::floor(d) || (d < 0 && !std::is_signed_v<T>))
          throw ParseError(fmt::format("expected a whole number, got {}", d));
        return static_cast<T>(d);
      }
      return v.get<T>();
    } else {
      return v.get<T>();
    }
  }

  const json& j_;
  std::string path_;
  std::vector<std::string>& unknown_;
  std::set<std::string> seen_;
};

template <class T>
std::vector<T> get_list(Section& s, const std::string& key) {
  const auto& v = s.raw(key);
  if (!v.is_array()) throw ParseError(fmt::format("config: '{}' must be a list", s.where(key)));
  std::vector<T> out;
  for (const auto& e : v) {
    try {
      if constexpr (std::is_integral_v<T>) {
        if (e.is_number_float() && e.get<double>() != std::floor(e.get<double>()))
          throw ParseError(fmt::format("config: '{}' must contain whole numbers", s.where(key)));
        out.push_back(e.is_number_float() ? static_cast<T>(e.get<double>()) : e.get<T>());
      } else {
        out.push_back(e.get<T>());
      }
    } catch (const json::exception& ex) {
      throw ParseError(fmt::format("config: bad entry in '{}': {}", s.where(key), ex.what()));
    }
  }
  return out;
}

Problem read_problem(Section s) {
  const auto kind = s.get<std::string>("kind");
  if (kind == "quadratic") {
    QuadraticProblem p;
    p.dim = s.get_or<std::size_t>("dim", p.dim);
    p.smoothness = s.get_or("smoothness", p.smoothness);
    p.strong_convexity = s.get_or("strong_convexity", p.strong_convexity);
    p.delta = s.get_or("delta", p.delta);
    p.heterogeneity = s.get_or("heterogeneity", p.heterogeneity);
    p.seed = s.get_or<std::uint64_t>("seed", p.seed);
    return p;
  }
  if (kind == "logistic") {
    LogisticProblem p;
    p.dataset = s.get<std::string>("dataset");
    p.dim = s.maybe<std::size_t>("dim");
    p.max_rows = s.maybe<std::size_t>("max_rows");
    if (s.has("partition")) p.partition = data::parse_partition_scheme(s.get<std::string>("partition"));
    p.partition_seed = s.get_or<std::uint64_t>("partition_seed", p.partition_seed);
    p.reg = s.get_or("reg", p.reg);
    return p;
  }
  if (kind == "hard_instance") {
    HardInstanceProblem p;
    p.smoothness = s.get_or("smoothness", p.smoothness);
    p.delta = s.get_or("delta", p.delta);
    if (s.has("shares")) p.shares = get_list<double>(s, "shares");
    return p;
  }
  throw ParseError("config: problem.kind must be quadratic, logistic or hard_instance (got '" + kind + "')");
}

TopologyConfig read_topology(Section s) {
  TopologyConfig t;
  t.spec.kind = topology::parse_graph_kind(s.get<std::string>("kind"));
  t.spec.m = s.get<std::size_t>("m");
  t.spec.edge_prob = s.get_or("edge_prob", 0.0);
  t.spec.seed = s.get_or<std::uint64_t>("seed", 0);
  if (s.has("weights")) t.weighting = topology::parse_weighting(s.get<std::string>("weights"));
  if (s.has("calibrate")) {
    auto c = s.child("calibrate");
    Calibration cal;
    cal.target_chi = c.get<double>("target_chi");
    cal.tol = c.get_or("tol", cal.tol);
    cal.seed = c.get_or<std::uint64_t>("seed", t.spec.seed);
    t.calibrate = cal;
  }
  return t;
}

SigmaSchedule read_sigmas(Section s) {
  SigmaSchedule out;
  int forms = 0;
  if (s.has("explicit")) {
    out.kind = SigmaKind::explicit_list;
    out.values = get_list<double>(s, "explicit");
    ++forms;
  }
  if (s.has("geometric")) {
    auto g = s.child("geometric");
    out.kind = SigmaKind::geometric;
    out.base = g.get<double>("base");
    out.ratio = g.get<double>("ratio");
    ++forms;
  }
  if (s.has("linear")) {
    auto l = s.child("linear");
    out.kind = SigmaKind::linear;
    out.first = l.get<double>("first");
    out.last = l.get<double>("last");
    ++forms;
  }
  if (forms != 1) throw ParseError("config: sigmas needs exactly one of explicit, geometric or linear");
  if (s.has("estimate")) out.estimate_pilot = s.child("estimate").get<std::int64_t>("n_pilot");
  return out;
}

AlgorithmConfig read_algorithm(Section s) {
  AlgorithmConfig a;
  a.name = s.get_or<std::string>("name", a.name);
  if (s.has("schedule")) {
    const auto src = s.get<std::string>("schedule");
    if (src == "theorem")
      a.schedule = ScheduleSource::theorem;
    else if (src == "manual")
      a.schedule = ScheduleSource::manual;
    else
      throw ParseError("config: algorithm.schedule must be theorem or manual (got '" + src + "')");
  }
  a.rounds_scale = s.get_or("rounds_scale", a.rounds_scale);
  a.batch_constant = s.get_or("batch_constant", a.batch_constant);
  a.delta = s.maybe<double>("delta");
  a.smoothness = s.maybe<double>("smoothness");
  a.lbar = s.maybe<double>("lbar");
  if (s.has("overrides")) {
    auto o = s.child("overrides");
    auto& v = a.overrides;
    v.eta = o.maybe<double>("eta");
    v.iterations = o.maybe<std::int64_t>("iterations");
    if (o.has("batches")) v.batches = get_list<std::int64_t>(o, "batches");
    v.batch = o.maybe<std::int64_t>("batch");
    v.rounds = o.maybe<std::int64_t>("rounds");
    v.initial_rounds = o.maybe<std::int64_t>("initial_rounds");
    v.mini_batch = o.maybe<std::int64_t>("mini_batch");
    v.p = o.maybe<double>("p");
    v.q = o.maybe<double>("q");
  }
  return a;
}

void validate(const ExperimentConfig& c) {
  const auto m = c.topology.spec.m;
  detail::require(m >= 1, "config", "topology.m must be at least 1");
  detail::require(!c.seeds.empty(), "config", "seeds must be a nonempty list");
  detail::require(c.eps > 0.0, "config", "eps must be positive");
  if (c.sigmas.kind == SigmaKind::explicit_list)
    detail::require(c.sigmas.values.size() == m, "config",
                    fmt::format("sigmas.explicit has {} entries but topology.m = {}", c.sigmas.values.size(), m));
  if (c.sigmas.estimate_pilot) detail::require(*c.sigmas.estimate_pilot >= 2, "config", "estimate.n_pilot must be >= 2");
  if (const auto* h = std::get_if<HardInstanceProblem>(&c.problem); h && !h->shares.empty())
    detail::require(h->shares.size() == m, "config", "problem.shares must have one entry per node");
  const auto& a = c.algorithm;
  bool known = false;
  for (const auto& n : kAlgorithms) known = known || n == a.name;
  detail::require(known, "config", "unknown algorithm '" + a.name + "'");
  detail::require(a.rounds_scale >= 0.0, "config", "rounds_scale must be nonnegative");
  if (a.overrides.batches)
    detail::require(a.overrides.batches->size() == m, "config", "overrides.batches must have one entry per node");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <class T>
void put(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace

std::string problem_kind(const Problem& p) {
  switch (p.index()) {
    case 0: return "quadratic";
    case 1: return "logistic";
    default: return "hard_instance";
  }
}

std::vector<double> SigmaSchedule::resolve(std::size_t m) const {
  std::vector<double> out(m);
  switch (kind) {
    case SigmaKind::explicit_list:
      detail::require(values.size() == m, "config", "explicit sigma list length does not match m");
      return values;
    case SigmaKind::geometric:
      for (std::size_t i = 0; i < m; ++i) out[i] = base * std::pow(ratio, static_cast<double>(i));
      return out;
    case SigmaKind::linear:
      for (std::size_t i = 0; i < m; ++i)
        out[i] = m == 1 ? first : first + (last - first) * static_cast<double>(i) / static_cast<double>(m - 1);
      return out;
  }
  return out;
}

ExperimentConfig parse(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: invalid JSON: ") + e.what());
  }

  std::vector<std::string> unknown;
  const auto unknown_list = [&] {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    return "config: unknown keys: " + list;
  };
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  try {
    Section top(root, "", unknown);
    cfg.problem = read_problem(top.child("problem"));
    cfg.topology = read_topology(top.child("topology"));
    cfg.sigmas = read_sigmas(top.child("sigmas"));
    cfg.eps = top.get<double>("eps");
    if (top.has("algorithm")) cfg.algorithm = read_algorithm(top.child("algorithm"));
    cfg.seeds = get_list<std::uint64_t>(top, "seeds");
    cfg.max_samples = top.maybe<std::uint64_t>("max_samples");
    cfg.output = top.get_or<std::string>("output", cfg.output);
  } catch (const ParseError& e) {
    // A misspelled key usually surfaces first as a missing one; name both.
    if (!unknown.empty()) throw ParseError(unknown_list() + " (" + e.what() + ")");
    throw;
  }
  if (!unknown.empty()) throw ParseError(unknown_list());
  validate(cfg);
  return cfg;
}

ExperimentConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto dir = std::filesystem::path(path).parent_path().string();
  return parse(buf.str(), dir.empty() ? "." : dir);
}

std::string canonical(const ExperimentConfig& cfg) {
  json j;
  json& pr = j["problem"];
  pr["kind"] = problem_kind(cfg.problem);
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, QuadraticProblem>) {
          pr["dim"] = p.dim;
          pr["smoothness"] = p.smoothness;
          pr["strong_convexity"] = p.strong_convexity;
          pr["delta"] = p.delta;
          pr["heterogeneity"] = p.heterogeneity;
          pr["seed"] = p.seed;
        } else if constexpr (std::is_same_v<P, LogisticProblem>) {
          pr["dataset"] = p.dataset;
          put(pr, "dim", p.dim);
          put(pr, "max_rows", p.max_rows);
          pr["partition"] = data::to_string(p.partition);
          pr["partition_seed"] = p.partition_seed;
          pr["reg"] = p.reg;
        } else {
          pr["smoothness"] = p.smoothness;
          pr["delta"] = p.delta;
          pr["shares"] = p.shares;
        }
      },
      cfg.problem);

  json& tp = j["topology"];
  tp["kind"] = topology::to_string(cfg.topology.spec.kind);
  tp["m"] = cfg.topology.spec.m;
  tp["edge_prob"] = cfg.topology.spec.edge_prob;
  tp["seed"] = cfg.topology.spec.seed;
  tp["weights"] = topology::to_string(cfg.topology.weighting);
  if (const auto& c = cfg.topology.calibrate)
    tp["calibrate"] = {{"target_chi", c->target_chi}, {"tol", c->tol}, {"seed", c->seed}};

  j["sigmas"] = {{"values", cfg.sigmas.resolve(cfg.topology.spec.m)}};
  put(j["sigmas"], "n_pilot", cfg.sigmas.estimate_pilot);
  j["eps"] = cfg.eps;

  const auto& a = cfg.algorithm;
  json& al = j["algorithm"];
  al["name"] = a.name;
  al["schedule"] = a.schedule == ScheduleSource::theorem ? "theorem" : "manual";
  al["rounds_scale"] = a.rounds_scale;
  al["batch_constant"] = a.batch_constant;
  put(al, "delta", a.delta);
  put(al, "smoothness", a.smoothness);
  put(al, "lbar", a.lbar);
  json& ov = al["overrides"];
  ov = json::object();
  put(ov, "eta", a.overrides.eta);
  put(ov, "iterations", a.overrides.iterations);
  put(ov, "batches", a.overrides.batches);
  put(ov, "batch", a.overrides.batch);
  put(ov, "rounds", a.overrides.rounds);
  put(ov, "initial_rounds", a.overrides.initial_rounds);
  put(ov, "mini_batch", a.overrides.mini_batch);
  put(ov, "p", a.overrides.p);
  put(ov, "q", a.overrides.q);
  put(j, "max_samples", cfg.max_samples);
  return j.dump();
}

std::string fingerprint(const ExperimentConfig& cfg) { return fmt::format("{:016x}", fnv1a(canonical(cfg))); }

ExperimentConfig with_algorithm(const ExperimentConfig& cfg, const std::string& name) {
  ExperimentConfig out = cfg;
  out.algorithm.name = name;
  out.algorithm.schedule = ScheduleSource::theorem;
  out.algorithm.overrides = {};
  validate(out);
  return out;
}

}  // namespace dopt::config
