#include "dqcalib/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dqcalib/errors.hpp"

namespace dqcalib {

namespace {

constexpr double kLoadNormalizeTol = 1e-8;
constexpr double kLoadWarnTol = 1e-3;

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line.substr(0, line.find('#')));
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool parse_double(const std::string& s, double& v) {
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && ptr == end && std::isfinite(v);
}

std::string fixed9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line) + ": " + msg);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

}  // namespace

// ------------------------------------------------------------- pose files

std::string format_pose_line(const Pose& p) {
  const Quaternion& q = p.rotation;
  std::string s = fixed9(p.timestamp);
  for (double v : {p.translation.x(), p.translation.y(), p.translation.z(), q.x, q.y, q.z, q.w}) {
    s += ' ';
    s += fixed9(v);
  }
  return s;
}

void write_trajectory(std::ostream& out, const Trajectory& traj) {
  out << "# sensor " << traj.sensor_id() << "\n# timestamp tx ty tz qx qy qz qw\n";
  for (const Pose& p : traj.poses()) out << format_pose_line(p) << '\n';
}

Trajectory read_trajectory(std::istream& in, const std::string& sensor_id, const std::string& source,
                           std::vector<ParseWarning>* warnings) {
  std::vector<Pose> poses;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokenize(line);
    if (tok.empty()) continue;
    if (tok.size() != 8) parse_fail(source, lineno, "expected 8 fields, got " + std::to_string(tok.size()));
    double v[8];
    for (int i = 0; i < 8; ++i) {
      if (!parse_double(tok[static_cast<std::size_t>(i)], v[i])) {
        parse_fail(source, lineno, "invalid number '" + tok[static_cast<std::size_t>(i)] + "'");
      }
    }
    Quaternion q{v[7], v[4], v[5], v[6]};
    const double n2 = q.squared_norm();
    if (n2 == 0.0) parse_fail(source, lineno, "zero quaternion");
    if (std::abs(std::sqrt(n2) - 1.0) > kLoadWarnTol && warnings) {
      warnings->push_back({lineno, "quaternion norm " + std::to_string(std::sqrt(n2)) + " normalized"});
    }
    if (std::abs(n2 - 1.0) > kLoadNormalizeTol) q = q.normalized();
    if (!poses.empty() && !(v[0] > poses.back().timestamp)) {
      parse_fail(source, lineno, "timestamp not strictly increasing");
    }
    poses.push_back({v[0], q, Eigen::Vector3d(v[1], v[2], v[3])});
  }
  return Trajectory(sensor_id, std::move(poses));
}

Trajectory load_trajectory(const std::filesystem::path& path, const std::string& sensor_id,
                           std::vector<ParseWarning>* warnings) {
  std::ifstream in = open_in(path);
  return read_trajectory(in, sensor_id, path.string(), warnings);
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out = open_out(path);
  write_trajectory(out, traj);
  check_written(out, path);
}

// ---------------------------------------------------------- feature files

void write_features(std::ostream& out, const std::vector<FeatureObservation>& obs) {
  out << "# sensor_id timestamp label x y z\n";
  for (const auto& o : obs) {
    out << o.sensor_id << ' ' << fixed9(o.timestamp) << ' ' << o.label << ' ' << fixed9(o.point.x()) << ' '
        << fixed9(o.point.y()) << ' ' << fixed9(o.point.z()) << '\n';
  }
}

std::vector<FeatureObservation> read_features(std::istream& in, const std::string& source) {
  std::vector<FeatureObservation> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokenize(line);
    if (tok.empty()) continue;
    if (tok.size() != 6) parse_fail(source, lineno, "expected 6 fields, got " + std::to_string(tok.size()));
    FeatureObservation o;
    o.sensor_id = tok[0];
    o.label = tok[2];
    double v[4];
    const std::size_t idx[4] = {1, 3, 4, 5};
    for (int i = 0; i < 4; ++i) {
      if (!parse_double(tok[idx[i]], v[i])) parse_fail(source, lineno, "invalid number '" + tok[idx[i]] + "'");
    }
    o.timestamp = v[0];
    o.point = {v[1], v[2], v[3]};
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<FeatureObservation> load_features(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_features(in, path.string());
}

void save_features(const std::filesystem::path& path, const std::vector<FeatureObservation>& obs) {
  std::ofstream out = open_out(path);
  write_features(out, obs);
  check_written(out, path);
}

// ------------------------------------------------------------------- JSON

double round_sig12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

nlohmann::json pose_to_json(const Pose& p) {
  const Quaternion& q = p.rotation;
  return {{"translation", {round_sig12(p.translation.x()), round_sig12(p.translation.y()), round_sig12(p.translation.z())}},
          {"rotation", {{"w", round_sig12(q.w)}, {"x", round_sig12(q.x)}, {"y", round_sig12(q.y)}, {"z", round_sig12(q.z)}}}};
}

Pose pose_from_json(const nlohmann::json& j) {
  try {
    const auto& t = j.at("translation");
    const auto& r = j.at("rotation");
    Pose p;
    p.translation = {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
    p.rotation = Quaternion{r.at("w").get<double>(), r.at("x").get<double>(), r.at("y").get<double>(),
                            r.at("z").get<double>()}
                     .normalized();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("pose JSON: ") + e.what());
  }
}

nlohmann::json dq_to_json(const DualQuaternion& q) {
  nlohmann::json a = nlohmann::json::array();
  const Vector8d v = q.to_vector();
  for (int i = 0; i < 8; ++i) a.push_back(round_sig12(v[i]));
  return a;
}

Pose load_extrinsic_json(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  if (!j.contains("extrinsic") || !j["extrinsic"].contains("pose")) {
    throw Error(ErrorCode::ParseError, path.string() + ": missing extrinsic.pose");
  }
  return pose_from_json(j["extrinsic"]["pose"]);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  check_written(out, path);
}

// ----------------------------------------------------------------- config

ExtractOptions PipelineConfig::extract_options() const {
  ExtractOptions o;
  o.min_angle = min_angle_deg * kDegree;
  o.congruence_tol = congruence_tol;
  o.gate_angle = gate_angle_deg * kDegree;
  o.stride = motion_stride;
  return o;
}

SolveOptions PipelineConfig::solve_options() const { return {batch_size, degeneracy_threshold}; }

VerifyOptions PipelineConfig::verify_options() const {
  return {gating_distance, segment_length, offset_horizon, link_distance};
}

RigSpec PipelineConfig::rig() const {
  RigSpec r;
  r.extrinsic_fr = sim_extrinsic;
  r.base_to_front = base_to_front;
  r.rate_front = rate_front;
  r.rate_rear = rate_rear;
  r.phase_front = phase_front;
  r.phase_rear = phase_rear;
  r.noise = {trans_sigma, rot_sigma_deg * kDegree, noise_mode};
  r.features.sigma = feature_sigma;
  r.seed = seed;
  return r;
}

TrajectorySpec PipelineConfig::trajectory() const { return {sim_trajectory, sim_duration, sim_scale}; }

namespace {

struct ConfigField {
  std::function<void(PipelineConfig&, const std::vector<std::string>&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double one_double(const std::vector<std::string>& v) {
  double d = 0.0;
  if (v.size() != 1 || !parse_double(v[0], d)) throw std::invalid_argument("expected one number");
  return d;
}

Pose seven_doubles(const std::vector<std::string>& v) {
  double d[7];
  if (v.size() != 7) throw std::invalid_argument("expected 'tx ty tz qx qy qz qw'");
  for (int i = 0; i < 7; ++i) {
    if (!parse_double(v[static_cast<std::size_t>(i)], d[i])) throw std::invalid_argument("invalid number");
  }
  const Quaternion q{d[6], d[3], d[4], d[5]};
  if (q.squared_norm() == 0.0) throw std::invalid_argument("zero quaternion");
  return {0.0, q.normalized(), Eigen::Vector3d(d[0], d[1], d[2])};
}

std::string pose_text(const Pose& p) {
  const Quaternion& q = p.rotation;
  std::string s;
  for (double v : {p.translation.x(), p.translation.y(), p.translation.z(), q.x, q.y, q.z, q.w}) {
    if (!s.empty()) s += ' ';
    s += fmt_double(v);
  }
  return s;
}

ConfigField double_field(double PipelineConfig::*member) {
  return {[member](PipelineConfig& c, const std::vector<std::string>& v) { c.*member = one_double(v); },
          [member](const PipelineConfig& c) { return fmt_double(c.*member); }};
}

ConfigField count_field(std::size_t PipelineConfig::*member, std::size_t min) {
  return {[member, min](PipelineConfig& c, const std::vector<std::string>& v) {
            const double d = one_double(v);
            if (d < static_cast<double>(min) || d != std::floor(d)) {
              throw std::invalid_argument("expected an integer >= " + std::to_string(min));
            }
            c.*member = static_cast<std::size_t>(d);
          },
          [member](const PipelineConfig& c) { return std::to_string(c.*member); }};
}

const std::map<std::string, ConfigField>& config_fields() {
  static const std::map<std::string, ConfigField> fields = {
      {"grid_policy",
       {[](PipelineConfig& c, const std::vector<std::string>& v) {
          if (v.size() != 1) throw std::invalid_argument("expected sensor_a, sensor_b or uniform:<seconds>");
          if (v[0] == "sensor_a") {
            c.grid = GridPolicy::sensor_a();
          } else if (v[0] == "sensor_b") {
            c.grid = GridPolicy::sensor_b();
          } else if (v[0].rfind("uniform:", 0) == 0) {
            double step = 0.0;
            if (!parse_double(v[0].substr(8), step) || !(step > 0.0)) throw std::invalid_argument("bad uniform step");
            c.grid = GridPolicy::uniform(step);
          } else {
            throw std::invalid_argument("expected sensor_a, sensor_b or uniform:<seconds>");
          }
        },
        [](const PipelineConfig& c) -> std::string {
          switch (c.grid.kind) {
            case GridPolicy::Kind::SensorA: return "sensor_a";
            case GridPolicy::Kind::SensorB: return "sensor_b";
            case GridPolicy::Kind::Uniform: return "uniform:" + fmt_double(c.grid.step);
          }
          return "sensor_a";
        }}},
      {"min_angle_deg", double_field(&PipelineConfig::min_angle_deg)},
      {"congruence_tol", double_field(&PipelineConfig::congruence_tol)},
      {"gate_angle_deg", double_field(&PipelineConfig::gate_angle_deg)},
      {"motion_stride", count_field(&PipelineConfig::motion_stride, 1)},
      {"batch_size", count_field(&PipelineConfig::batch_size, 0)},
      {"degeneracy_threshold", double_field(&PipelineConfig::degeneracy_threshold)},
      {"init_low_confidence_rms", double_field(&PipelineConfig::init_low_confidence_rms)},
      {"gating_distance", double_field(&PipelineConfig::gating_distance)},
      {"link_distance", double_field(&PipelineConfig::link_distance)},
      {"segment_length", double_field(&PipelineConfig::segment_length)},
      {"offset_horizon", double_field(&PipelineConfig::offset_horizon)},
      {"base_to_front",
       {[](PipelineConfig& c, const std::vector<std::string>& v) { c.base_to_front = seven_doubles(v); },
        [](const PipelineConfig& c) { return pose_text(c.base_to_front); }}},
      {"sim_extrinsic",
       {[](PipelineConfig& c, const std::vector<std::string>& v) { c.sim_extrinsic = seven_doubles(v); },
        [](const PipelineConfig& c) { return pose_text(c.sim_extrinsic); }}},
      {"sim_trajectory",
       {[](PipelineConfig& c, const std::vector<std::string>& v) {
          if (v.size() != 1) throw std::invalid_argument("expected one trajectory kind");
          try {
            c.sim_trajectory = trajectory_kind_from_string(v[0]);
          } catch (const Error& e) {
            throw std::invalid_argument(e.what());
          }
        },
        [](const PipelineConfig& c) { return std::string(to_string(c.sim_trajectory)); }}},
      {"sim_duration", double_field(&PipelineConfig::sim_duration)},
      {"sim_scale", double_field(&PipelineConfig::sim_scale)},
      {"rate_front", double_field(&PipelineConfig::rate_front)},
      {"rate_rear", double_field(&PipelineConfig::rate_rear)},
      {"phase_front", double_field(&PipelineConfig::phase_front)},
      {"phase_rear", double_field(&PipelineConfig::phase_rear)},
      {"trans_sigma", double_field(&PipelineConfig::trans_sigma)},
      {"rot_sigma_deg", double_field(&PipelineConfig::rot_sigma_deg)},
      {"noise_mode",
       {[](PipelineConfig& c, const std::vector<std::string>& v) {
          if (v.size() == 1 && v[0] == "relative") {
            c.noise_mode = NoiseSpec::Mode::Relative;
          } else if (v.size() == 1 && v[0] == "absolute") {
            c.noise_mode = NoiseSpec::Mode::Absolute;
          } else {
            throw std::invalid_argument("expected relative or absolute");
          }
        },
        [](const PipelineConfig& c) {
          return std::string(c.noise_mode == NoiseSpec::Mode::Relative ? "relative" : "absolute");
        }}},
      {"feature_sigma", double_field(&PipelineConfig::feature_sigma)},
      {"seed",
       {[](PipelineConfig& c, const std::vector<std::string>& v) {
          if (v.size() != 1) throw std::invalid_argument("expected an integer");
          std::uint64_t s = 0;
          const auto [ptr, ec] = std::from_chars(v[0].data(), v[0].data() + v[0].size(), s);
          if (ec != std::errc() || ptr != v[0].data() + v[0].size()) throw std::invalid_argument("expected an integer");
          c.seed = s;
        },
        [](const PipelineConfig& c) { return std::to_string(c.seed); }}},
  };
  return fields;
}

}  // namespace

PipelineConfig parse_config(std::istream& in, const std::string& source) {
  PipelineConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = line.substr(0, line.find('#'));
    if (body.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const auto key_tok = tokenize(body.substr(0, eq));
    if (key_tok.size() != 1) {
      throw Error(ErrorCode::ConfigError, source + ":" + std::to_string(lineno) + ": malformed key");
    }
    const auto& fields = config_fields();
    const auto it = fields.find(key_tok[0]);
    if (it == fields.end()) {
      throw Error(ErrorCode::ConfigError, source + ":" + std::to_string(lineno) + ": unknown key '" + key_tok[0] + "'");
    }
    try {
      it->second.set(cfg, tokenize(body.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw Error(ErrorCode::ConfigError,
                  source + ":" + std::to_string(lineno) + ": " + key_tok[0] + ": " + e.what());
    }
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return parse_config(in, path.string());
}

std::string config_to_text(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& [key, field] : config_fields()) out += key + " = " + field.get(cfg) + "\n";
  return out;
}

}  // namespace dqcalib
