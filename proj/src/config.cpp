#include "frlab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace frlab {
namespace {

using nlohmann::json;

void decode(const json& j, const std::string& path, double& v) {
  if (!j.is_number()) throw std::runtime_error("config: " + path + " must be a number");
  v = j.get<double>();
}
void decode(const json& j, const std::string& path, int& v) {
  if (!j.is_number_integer()) throw std::runtime_error("config: " + path + " must be an integer");
  v = j.get<int>();
}
void decode(const json& j, const std::string& path, uint64_t& v) {
  if (!j.is_number_unsigned() && !j.is_number_integer())
    throw std::runtime_error("config: " + path + " must be an integer");
  v = j.get<uint64_t>();
}
void decode(const json& j, const std::string& path, bool& v) {
  if (!j.is_boolean()) throw std::runtime_error("config: " + path + " must be a boolean");
  v = j.get<bool>();
}
void decode(const json& j, const std::string& path, std::string& v) {
  if (!j.is_string()) throw std::runtime_error("config: " + path + " must be a string");
  v = j.get<std::string>();
}
void decode(const json& j, const std::string& path, Range& v) {
  if (!j.is_array() || j.size() != 2)
    throw std::runtime_error("config: " + path + " must be a [lo, hi] pair");
  decode(j[0], path + "[0]", v.lo);
  decode(j[1], path + "[1]", v.hi);
}
void decode(const json& j, const std::string& path, std::array<double, 3>& v) {
  if (!j.is_array() || j.size() != 3)
    throw std::runtime_error("config: " + path + " must be a 3-element array");
  for (int i = 0; i < 3; ++i) decode(j[i], path, v[i]);
}
void decode(const json& j, const std::string& path, std::vector<int>& v) {
  if (!j.is_array()) throw std::runtime_error("config: " + path + " must be an array");
  v.clear();
  for (const auto& e : j) {
    int x;
    decode(e, path, x);
    v.push_back(x);
  }
}
void decode(const json& j, const std::string& path, std::vector<std::string>& v) {
  if (!j.is_array()) throw std::runtime_error("config: " + path + " must be an array");
  v.clear();
  for (const auto& e : j) {
    std::string x;
    decode(e, path, x);
    v.push_back(x);
  }
}

json encode(double v) { return v; }
json encode(int v) { return v; }
json encode(uint64_t v) { return v; }
json encode(bool v) { return v; }
json encode(const std::string& v) { return v; }
json encode(const Range& v) { return json::array({v.lo, v.hi}); }
json encode(const std::array<double, 3>& v) { return json::array({v[0], v[1], v[2]}); }
json encode(const std::vector<int>& v) { return json(v); }
json encode(const std::vector<std::string>& v) { return json(v); }

/// Applies keys from a JSON object onto struct fields and rejects keys the
/// schema does not declare.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw std::runtime_error("config: " + path_ + " must be an object");
  }
  template <typename T>
  void operator()(const char* key, T& field) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it != j_.end()) decode(*it, path_ + "." + key, field);
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key()))
        throw std::runtime_error("config: unknown key " + path_ + "." + it.key());
    }
  }
  const json& raw() const { return j_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

class Writer {
 public:
  explicit Writer(json& j) : j_(j) {}
  template <typename T>
  void operator()(const char* key, T& field) {
    j_[key] = encode(field);
  }
  void finish() const {}

 private:
  json& j_;
};

template <typename Ar>
void visit(Ar& ar, MorphologyConfig& c) {
  ar("trunk_mass", c.trunk_mass);
  ar("trunk_length", c.trunk_length);
  ar("trunk_width", c.trunk_width);
  ar("trunk_height", c.trunk_height);
  ar("hip_mass", c.hip_mass);
  ar("hip_length", c.hip_length);
  ar("thigh_mass", c.thigh_mass);
  ar("thigh_length", c.thigh_length);
  ar("thigh_width", c.thigh_width);
  ar("thigh_height", c.thigh_height);
  ar("calf_mass", c.calf_mass);
  ar("calf_length", c.calf_length);
  ar("calf_width", c.calf_width);
  ar("calf_height", c.calf_height);
  ar("kp", c.kp);
  ar("kd", c.kd);
  ar("motor_strength", c.motor_strength);
  ar("com_shift", c.com_shift);
  ar("payload", c.payload);
  ar("motor_friction", c.motor_friction);
  ar("ground_friction", c.ground_friction);
  ar("torque_limit", c.torque_limit);
  ar("joint_lower", c.joint_lower);
  ar("joint_upper", c.joint_upper);
  ar("foot_radius", c.foot_radius);
}

template <typename Ar>
void visit(Ar& ar, SimConfig& c) {
  ar("control_dt", c.control_dt);
  ar("substeps", c.substeps);
  ar("gravity", c.gravity);
  ar("contact_stiffness", c.contact_stiffness);
  ar("contact_damping", c.contact_damping);
  ar("max_penetration", c.max_penetration);
  ar("contact_iterations", c.contact_iterations);
  ar("joint_armature", c.joint_armature);
  ar("limit_stiffness", c.limit_stiffness);
  ar("limit_damping", c.limit_damping);
  ar("settle_time", c.settle_time);
}

template <typename Ar>
void visit(Ar& ar, TerrainConfig& c) {
  ar("cell_size", c.cell_size);
  ar("extent", c.extent);
  ar("rough_amplitude", c.rough_amplitude);
  ar("slope_angle_deg", c.slope_angle_deg);
  ar("stair_height", c.stair_height);
  ar("stair_tread", c.stair_tread);
  ar("stone_height", c.stone_height);
  ar("stone_density", c.stone_density);
  ar("gap_width", c.gap_width);
  ar("beam_width", c.beam_width);
  ar("beam_drop", c.beam_drop);
  ar("beam_gap", c.beam_gap);
}

template <typename Ar>
void visit(Ar& ar, ObservationConfig& c) {
  ar("noise", c.noise);
  ar("noise_ang_vel", c.noise_ang_vel);
  ar("noise_gravity", c.noise_gravity);
  ar("noise_q", c.noise_q);
  ar("noise_qd", c.noise_qd);
  ar("scan_rows", c.scan_rows);
  ar("scan_cols", c.scan_cols);
  ar("scan_spacing", c.scan_spacing);
  ar("scan_clip", c.scan_clip);
}

template <typename Ar>
void visit(Ar& ar, RewardConfig& c) {
  ar("w_orientation", c.w_orientation);
  ar("w_upright", c.w_upright);
  ar("w_posture", c.w_posture);
  ar("w_feet_contact", c.w_feet_contact);
  ar("w_body_contact", c.w_body_contact);
  ar("w_knee_force", c.w_knee_force);
  ar("w_body_bias", c.w_body_bias);
  ar("w_position_limits", c.w_position_limits);
  ar("w_ang_vel_limit", c.w_ang_vel_limit);
  ar("w_joint_acc", c.w_joint_acc);
  ar("w_joint_vel", c.w_joint_vel);
  ar("w_action_smooth", c.w_action_smooth);
  ar("w_torque", c.w_torque);
  ar("eps_gauss", c.eps_gauss);
  ar("eps_ind", c.eps_ind);
  ar("ang_vel_soft_limit", c.ang_vel_soft_limit);
  ar("body_bias_clip", c.body_bias_clip);
  ar("scale_by_dt", c.scale_by_dt);
}

template <typename Ar>
void visit(Ar& ar, McpConfig& c) {
  ar("encoder_hidden", c.encoder_hidden);
  ar("decoder_hidden", c.decoder_hidden);
  ar("latent_dim", c.latent_dim);
  ar("lambda_mass", c.lambda_mass);
  ar("lambda_contact", c.lambda_contact);
  ar("lambda_recon", c.lambda_recon);
  ar("lambda_kl", c.lambda_kl);
  ar("lr", c.lr);
}

template <typename Ar>
void visit(Ar& ar, PolicyConfig& c) {
  ar("actor_hidden", c.actor_hidden);
  ar("critic_hidden", c.critic_hidden);
  ar("init_log_std", c.init_log_std);
  ar("action_scale", c.action_scale);
  ar("action_clip", c.action_clip);
  ar("q_stand", c.q_stand);
}

template <typename Ar>
void visit(Ar& ar, PpoConfig& c) {
  ar("gamma", c.gamma);
  ar("lam", c.lam);
  ar("clip_ratio", c.clip_ratio);
  ar("epochs", c.epochs);
  ar("minibatches", c.minibatches);
  ar("lr", c.lr);
  ar("adaptive_lr", c.adaptive_lr);
  ar("kl_target", c.kl_target);
  ar("kl_abort", c.kl_abort);
  ar("entropy_coef", c.entropy_coef);
  ar("value_coef", c.value_coef);
  ar("max_grad_norm", c.max_grad_norm);
  ar("lr_min", c.lr_min);
  ar("lr_max", c.lr_max);
}

template <typename Ar>
void visit(Ar& ar, TrainConfig& c) {
  ar("envs", c.envs);
  ar("horizon", c.horizon);
  ar("episode_length", c.episode_length);
  ar("seed", c.seed);
  ar("iterations", c.iterations);
  ar("checkpoint_every", c.checkpoint_every);
  ar("workers", c.workers);
  ar("terrain_families", c.terrain_families);
  ar("curriculum", c.curriculum);
  ar("start_level", c.start_level);
  ar("no_mass", c.no_mass);
  ar("no_col", c.no_col);
  ar("no_est", c.no_est);
  ar("bootstrap_timeouts", c.bootstrap_timeouts);
  ar("out_dir", c.out_dir);
}

template <typename Ar>
void visit(Ar& ar, EvalConfig& c) {
  ar("episodes", c.episodes);
  ar("seeds", c.seeds);
  ar("upright_gz_tol", c.upright_gz_tol);
  ar("hold_time", c.hold_time);
  ar("time_limit", c.time_limit);
  ar("height_fraction", c.height_fraction);
  ar("posture_tol", c.posture_tol);
  ar("displacement_limit", c.displacement_limit);
}

template <typename SectionT>
void read_section(const json& root, const char* name, SectionT& out, std::set<std::string>& seen) {
  seen.insert(name);
  auto it = root.find(name);
  if (it == root.end()) return;
  Reader r(*it, name);
  visit(r, out);
  r.finish();
}

template <typename SectionT>
void write_section(json& root, const char* name, SectionT& s) {
  json j = json::object();
  Writer w(j);
  visit(w, s);
  root[name] = j;
}

}  // namespace

Config Config::from_json_text(const std::string& text) {
  json root = json::parse(text);
  if (!root.is_object()) throw std::runtime_error("config: top level must be an object");
  Config c;
  std::set<std::string> seen;
  read_section(root, "morphology", c.morphology, seen);
  read_section(root, "sim", c.sim, seen);
  read_section(root, "terrain", c.terrain, seen);
  read_section(root, "observation", c.observation, seen);
  read_section(root, "rewards", c.rewards, seen);
  read_section(root, "mcp", c.mcp, seen);
  read_section(root, "policy", c.policy, seen);
  read_section(root, "ppo", c.ppo, seen);
  read_section(root, "train", c.train, seen);
  read_section(root, "eval", c.eval, seen);
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (!seen.count(it.key())) throw std::runtime_error("config: unknown key " + it.key());
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string Config::to_json_text() const {
  json root = json::object();
  Config& self = const_cast<Config&>(*this);
  write_section(root, "morphology", self.morphology);
  write_section(root, "sim", self.sim);
  write_section(root, "terrain", self.terrain);
  write_section(root, "observation", self.observation);
  write_section(root, "rewards", self.rewards);
  write_section(root, "mcp", self.mcp);
  write_section(root, "policy", self.policy);
  write_section(root, "ppo", self.ppo);
  write_section(root, "train", self.train);
  write_section(root, "eval", self.eval);
  return root.dump(2) + "\n";
}

void Config::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << to_json_text();
}

}  // namespace frlab
