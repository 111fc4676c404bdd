#include "sparsewalk/config.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sparsewalk/evalharness.hpp"

namespace sparsewalk {

namespace {

using Json = nlohmann::ordered_json;

Json range_json(curriculum::Range r) { return Json::array({r.lo, r.hi}); }

template <class T>
T read_value(const Json& j, const std::string& path);

template <>
double read_value<double>(const Json& j, const std::string& path) {
  if (!j.is_number()) {
    throw ConfigError(path, "expected a number");
  }
  return j.get<double>();
}

template <>
int read_value<int>(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) {
    throw ConfigError(path, "expected an integer");
  }
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(path, "integer out of range");
  }
  return static_cast<int>(v);
}

template <>
std::uint64_t read_value<std::uint64_t>(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw ConfigError(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

template <>
bool read_value<bool>(const Json& j, const std::string& path) {
  if (!j.is_boolean()) {
    throw ConfigError(path, "expected true or false");
  }
  return j.get<bool>();
}

template <>
std::string read_value<std::string>(const Json& j, const std::string& path) {
  if (!j.is_string()) {
    throw ConfigError(path, "expected a string");
  }
  return j.get<std::string>();
}

template <>
std::vector<int> read_value<std::vector<int>>(const Json& j, const std::string& path) {
  if (!j.is_array()) {
    throw ConfigError(path, "expected an array of integers");
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(read_value<int>(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <>
std::vector<std::string> read_value<std::vector<std::string>>(const Json& j,
                                                              const std::string& path) {
  if (!j.is_array()) {
    throw ConfigError(path, "expected an array of strings");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(read_value<std::string>(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <>
curriculum::Range read_value<curriculum::Range>(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError(path, "expected [lo, hi]");
  }
  return {read_value<double>(j[0], path + "[0]"), read_value<double>(j[1], path + "[1]")};
}

// Reads the keys of one JSON object and rejects any it was not asked about.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it != j_.end()) {
      out = read_value<T>(*it, child(key));
    }
  }

  /// Returns a reader for a nested object, or nullopt when the key is absent.
  std::optional<ObjectReader> object(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) {
      return std::nullopt;
    }
    return ObjectReader(*it, child(key));
  }

  const Json* raw(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError(child(it.key()), "unknown key");
      }
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
void check(const std::string& field, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
}

Json to_json_value(const RunConfig& cfg) {
  const auto& t = cfg.train;
  const auto& m = t.env.model;
  const auto& c = t.env.contact;
  const auto& r = t.env.rays;
  const auto& w = t.env.weights;
  const auto& p = t.ppo;
  const auto& cu = t.curriculum;

  Json j;
  j["seed"] = cfg.seed;
  j["threads"] = t.threads;
  j["robot"] = {{"trunk_mass", m.trunk_mass},
                {"trunk_inertia", m.trunk_inertia},
                {"trunk_half_length", m.trunk_half_length},
                {"trunk_half_height", m.trunk_half_height},
                {"hip_offset", m.hip_offset},
                {"thigh_mass", m.thigh_mass},
                {"thigh_length", m.thigh_length},
                {"thigh_inertia", m.thigh_inertia},
                {"shank_mass", m.shank_mass},
                {"shank_length", m.shank_length},
                {"shank_inertia", m.shank_inertia},
                {"hip_min", m.hip_min},
                {"hip_max", m.hip_max},
                {"knee_min", m.knee_min},
                {"knee_max", m.knee_max},
                {"torque_limit", m.torque_limit},
                {"kp", m.kp},
                {"kd", m.kd},
                {"foot_size", m.foot_size},
                {"nominal_height", m.nominal_height}};
  j["contact"] = {{"stiffness", c.stiffness},
                  {"damping", c.damping},
                  {"friction", c.friction},
                  {"tangential_damping", c.tangential_damping},
                  {"tangential_stiffness", c.tangential_stiffness}};
  j["rays"] = {{"n_rays", r.n_rays},
               {"fov", r.fov},
               {"mount_offset", Json::array({r.mount_offset.x, r.mount_offset.z})},
               {"clip_min", r.clip_min},
               {"clip_max", r.clip_max}};
  j["reward"] = {{"c_tau", w.c_tau},   {"c_qdot", w.c_qdot}, {"c_orient", w.c_orient},
                 {"c_v", w.c_v},       {"c_psi", w.c_psi},   {"psi_clip", w.psi_clip}};
  j["env"] = {{"action_scale", t.env.action_scale},
              {"pitch_limit", t.env.pitch_limit},
              {"min_clearance", t.env.min_clearance}};
  j["policy"] = {{"hidden", t.layout.hidden}, {"log_std_init", t.layout.log_std_init}};
  j["ppo"] = {{"gamma", p.gamma},
              {"lambda", p.lambda},
              {"clip", p.clip},
              {"learning_rate", p.learning_rate},
              {"value_coef", p.value_coef},
              {"entropy_coef", p.entropy_coef},
              {"epochs", p.epochs},
              {"minibatches", p.minibatches},
              {"max_grad_norm", p.max_grad_norm},
              {"min_policy_noise", p.min_policy_noise},
              {"n_envs", p.n_envs},
              {"horizon", p.horizon},
              {"optimizer", std::string(learn::to_string(p.optimizer))},
              {"adam_beta1", p.adam_beta1},
              {"adam_beta2", p.adam_beta2},
              {"adam_epsilon", p.adam_epsilon}};
  j["curriculum"] = {{"uniform_baseline", cu.uniform_baseline},
                     {"stage_budget", cu.stage_budget},
                     {"noise_threshold", cu.noise_threshold},
                     {"ranges",
                      {{"step_height", range_json(cu.ranges.step_height)},
                       {"ramp_angle", range_json(cu.ranges.ramp_angle)},
                       {"stair_rise", range_json(cu.ranges.stair_rise)},
                       {"stair_run", cu.ranges.stair_run},
                       {"start_x", range_json(cu.ranges.start_x)}}}};
  j["training"] = {{"max_updates", t.max_updates}, {"warmup_only", t.warmup_only}};
  j["eval"] = {{"trials", cfg.eval.trials}, {"suites", cfg.eval.suites}};
  return j;
}

}  // namespace

void validate(const RunConfig& cfg) {
  const auto& t = cfg.train;
  check("robot", [&] { dynamics::validate(t.env.model); });
  check("contact", [&] { dynamics::validate(t.env.contact); });
  check("rays", [&] { raysensor::validate(t.env.rays); });
  check("reward", [&] { env::validate(t.env.weights); });
  check("env", [&] { env::validate(t.env); });
  check("policy", [&] { learn::validate(t.layout); });
  check("ppo", [&] { learn::validate(t.ppo); });
  check("curriculum", [&] { curriculum::validate(t.curriculum); });
  check("training", [&] { validate(t); });
  if (cfg.eval.trials < 1) {
    throw ConfigError("eval.trials", "must be at least 1");
  }
  for (std::size_t i = 0; i < cfg.eval.suites.size(); ++i) {
    if (!evalharness::suite_from_string(cfg.eval.suites[i])) {
      throw ConfigError("eval.suites[" + std::to_string(i) + "]",
                        "unknown suite '" + cfg.eval.suites[i] + "'");
    }
  }
}

std::string to_json(const RunConfig& cfg) { return to_json_value(cfg).dump(2) + "\n"; }

RunConfig run_config_from_json(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  RunConfig cfg;
  auto& t = cfg.train;
  ObjectReader top(root, "");
  top.get("seed", cfg.seed);
  top.get("threads", t.threads);
  if (auto o = top.object("robot")) {
    auto& m = t.env.model;
    o->get("trunk_mass", m.trunk_mass);
    o->get("trunk_inertia", m.trunk_inertia);
    o->get("trunk_half_length", m.trunk_half_length);
    o->get("trunk_half_height", m.trunk_half_height);
    o->get("hip_offset", m.hip_offset);
    o->get("thigh_mass", m.thigh_mass);
    o->get("thigh_length", m.thigh_length);
    o->get("thigh_inertia", m.thigh_inertia);
    o->get("shank_mass", m.shank_mass);
    o->get("shank_length", m.shank_length);
    o->get("shank_inertia", m.shank_inertia);
    o->get("hip_min", m.hip_min);
    o->get("hip_max", m.hip_max);
    o->get("knee_min", m.knee_min);
    o->get("knee_max", m.knee_max);
    o->get("torque_limit", m.torque_limit);
    o->get("kp", m.kp);
    o->get("kd", m.kd);
    o->get("foot_size", m.foot_size);
    o->get("nominal_height", m.nominal_height);
    o->finish();
  }
  if (auto o = top.object("contact")) {
    auto& c = t.env.contact;
    o->get("stiffness", c.stiffness);
    o->get("damping", c.damping);
    o->get("friction", c.friction);
    o->get("tangential_damping", c.tangential_damping);
    o->get("tangential_stiffness", c.tangential_stiffness);
    o->finish();
  }
  if (auto o = top.object("rays")) {
    auto& r = t.env.rays;
    o->get("n_rays", r.n_rays);
    o->get("fov", r.fov);
    if (const Json* off = o->raw("mount_offset")) {
      const auto v = read_value<curriculum::Range>(*off, o->child("mount_offset"));
      r.mount_offset = {v.lo, v.hi};
    }
    o->get("clip_min", r.clip_min);
    o->get("clip_max", r.clip_max);
    o->finish();
  }
  if (auto o = top.object("reward")) {
    auto& w = t.env.weights;
    o->get("c_tau", w.c_tau);
    o->get("c_qdot", w.c_qdot);
    o->get("c_orient", w.c_orient);
    o->get("c_v", w.c_v);
    o->get("c_psi", w.c_psi);
    o->get("psi_clip", w.psi_clip);
    o->finish();
  }
  if (auto o = top.object("env")) {
    o->get("action_scale", t.env.action_scale);
    o->get("pitch_limit", t.env.pitch_limit);
    o->get("min_clearance", t.env.min_clearance);
    o->finish();
  }
  if (auto o = top.object("policy")) {
    o->get("hidden", t.layout.hidden);
    o->get("log_std_init", t.layout.log_std_init);
    o->finish();
  }
  if (auto o = top.object("ppo")) {
    auto& p = t.ppo;
    o->get("gamma", p.gamma);
    o->get("lambda", p.lambda);
    o->get("clip", p.clip);
    o->get("learning_rate", p.learning_rate);
    o->get("value_coef", p.value_coef);
    o->get("entropy_coef", p.entropy_coef);
    o->get("epochs", p.epochs);
    o->get("minibatches", p.minibatches);
    o->get("max_grad_norm", p.max_grad_norm);
    o->get("min_policy_noise", p.min_policy_noise);
    o->get("n_envs", p.n_envs);
    o->get("horizon", p.horizon);
    std::string opt(learn::to_string(p.optimizer));
    o->get("optimizer", opt);
    if (opt == "adam") {
      p.optimizer = learn::OptimizerKind::Adam;
    } else if (opt == "sgd") {
      p.optimizer = learn::OptimizerKind::Sgd;
    } else {
      throw ConfigError("ppo.optimizer", "expected \"adam\" or \"sgd\"");
    }
    o->get("adam_beta1", p.adam_beta1);
    o->get("adam_beta2", p.adam_beta2);
    o->get("adam_epsilon", p.adam_epsilon);
    o->finish();
  }
  if (auto o = top.object("curriculum")) {
    auto& cu = t.curriculum;
    o->get("uniform_baseline", cu.uniform_baseline);
    o->get("stage_budget", cu.stage_budget);
    o->get("noise_threshold", cu.noise_threshold);
    if (auto r = o->object("ranges")) {
      r->get("step_height", cu.ranges.step_height);
      r->get("ramp_angle", cu.ranges.ramp_angle);
      r->get("stair_rise", cu.ranges.stair_rise);
      r->get("stair_run", cu.ranges.stair_run);
      r->get("start_x", cu.ranges.start_x);
      r->finish();
    }
    o->finish();
  }
  if (auto o = top.object("training")) {
    o->get("max_updates", t.max_updates);
    o->get("warmup_only", t.warmup_only);
    o->finish();
  }
  if (auto o = top.object("eval")) {
    o->get("trials", cfg.eval.trials);
    o->get("suites", cfg.eval.suites);
    o->finish();
  }
  top.finish();
  validate(cfg);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path, "cannot read config file");
  }
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return run_config_from_json(text);
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(to_json(cfg)); }

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace sparsewalk
