#include "uavrl/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uavrl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

bool IniDoc::has(const std::string& section, const std::string& key) const {
  const auto s = sections.find(section);
  return s != sections.end() && s->second.count(key) > 0;
}

const std::string& IniDoc::get(const std::string& section, const std::string& key) const {
  const auto s = sections.find(section);
  if (s == sections.end())
    throw std::runtime_error("config: missing section [" + section + "]");
  const auto k = s->second.find(key);
  if (k == s->second.end())
    throw std::runtime_error("config: missing key '" + key + "' in [" + section + "]");
  return k->second;
}

double IniDoc::get_double(const std::string& section, const std::string& key) const {
  const std::string& v = get(section, key);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw std::runtime_error("config: key '" + key + "' in [" + section +
                             "] is not a number: '" + v + "'");
  return d;
}

double IniDoc::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

long IniDoc::get_int(const std::string& section, const std::string& key,
                     long fallback) const {
  if (!has(section, key)) return fallback;
  const double d = get_double(section, key);
  const long v = static_cast<long>(std::llround(d));
  if (std::abs(d - v) > 1e-9)
    throw std::runtime_error("config: key '" + key + "' in [" + section +
                             "] must be an integer");
  return v;
}

bool IniDoc::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& v = get(section, key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::runtime_error("config: key '" + key + "' in [" + section +
                           "] must be true/false");
}

void IniDoc::set(const std::string& section, const std::string& key,
                 const std::string& v) {
  sections[section][key] = v;
}
void IniDoc::set_double(const std::string& section, const std::string& key, double v) {
  set(section, key, fmt_double(v));
}
void IniDoc::set_int(const std::string& section, const std::string& key, long v) {
  set(section, key, std::to_string(v));
}

IniDoc parse_ini(const std::string& text) {
  IniDoc doc;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config: line " + std::to_string(lineno) +
                                 ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw std::runtime_error("config: line " + std::to_string(lineno) +
                                 ": empty section name");
      doc.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: line " + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               ": key outside any [section]");
    doc.sections[section][key] = value;
  }
  return doc;
}

IniDoc load_ini_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_ini(ss.str());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string write_ini(const IniDoc& doc) {
  std::string out;
  bool first = true;
  for (const auto& [section, entries] : doc.sections) {
    if (!first) out += "\n";
    first = false;
    out += "[" + section + "]\n";
    for (const auto& [key, value] : entries) out += key + " = " + value + "\n";
  }
  return out;
}

void save_ini_file(const IniDoc& doc, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path + " for write");
  f << write_ini(doc);
  if (!f) throw std::runtime_error("config: write failed for " + path);
}

IniDoc to_ini(const CascadeGains& g) {
  IniDoc d;
  const auto put = [&](const std::string& sec, const PidGains& pg) {
    d.set_double(sec, "k_p", pg.k_p);
    d.set_double(sec, "k_i", pg.k_i);
    d.set_double(sec, "k_d", pg.k_d);
    d.set_double(sec, "integral_limit", pg.integral_limit);
    d.set_double(sec, "output_limit", pg.output_limit);
  };
  put("position", g.position);
  put("velocity", g.velocity);
  put("attitude", g.attitude);
  put("rate", g.rate);
  d.set_double("rate", "max_acc", g.rate_max_acc);
  d.set_double("cascade", "sqrt_scaling_accel", g.sqrt_scaling_accel);
  d.set("cascade", "leash_enabled", g.leash_enabled ? "true" : "false");
  d.set_double("cascade", "altitude_velocity_kp", g.altitude_velocity_kp);
  d.set_double("cascade", "altitude_rate_kp", g.altitude_rate_kp);
  d.set_double("cascade", "max_velocity", g.max_velocity);
  d.set_double("cascade", "max_tilt", g.max_tilt);
  d.set_int("cascade", "position_period_ticks", g.position_period_ticks);
  return d;
}

CascadeGains gains_from_ini(const IniDoc& d) {
  CascadeGains g;
  const auto read = [&](const std::string& sec, PidGains& pg) {
    pg.k_p = d.get_double(sec, "k_p");
    pg.k_i = d.get_double(sec, "k_i");
    pg.k_d = d.get_double(sec, "k_d");
    pg.integral_limit = d.get_double(sec, "integral_limit", pg.integral_limit);
    pg.output_limit = d.get_double(sec, "output_limit", pg.output_limit);
  };
  read("position", g.position);
  read("velocity", g.velocity);
  read("attitude", g.attitude);
  read("rate", g.rate);
  g.rate_max_acc = d.get_double("rate", "max_acc");
  g.sqrt_scaling_accel = d.get_double("cascade", "sqrt_scaling_accel", g.sqrt_scaling_accel);
  g.leash_enabled = d.get_bool("cascade", "leash_enabled", g.leash_enabled);
  g.altitude_velocity_kp = d.get_double("cascade", "altitude_velocity_kp", g.altitude_velocity_kp);
  g.altitude_rate_kp = d.get_double("cascade", "altitude_rate_kp", g.altitude_rate_kp);
  g.max_velocity = d.get_double("cascade", "max_velocity", g.max_velocity);
  g.max_tilt = d.get_double("cascade", "max_tilt", g.max_tilt);
  g.position_period_ticks =
      static_cast<int>(d.get_int("cascade", "position_period_ticks", g.position_period_ticks));
  return g;
}

IniDoc to_ini(const VehicleParams& p) {
  IniDoc d;
  d.set_double("vehicle", "mass", p.mass);
  d.set_double("vehicle", "gravity", p.gravity);
  d.set_double("vehicle", "arm_length", p.arm_length);
  d.set_int("vehicle", "rotor_count", p.rotor_count);
  d.set_double("vehicle", "thrust_coeff", p.thrust_coeff);
  d.set_double("vehicle", "torque_coeff", p.torque_coeff);
  d.set_double("vehicle", "max_rotor_speed", p.max_rotor_speed);
  d.set_double("vehicle", "rated_thrust", p.rated_thrust);
  d.set_double("vehicle", "inertia_xx", p.inertia.x());
  d.set_double("vehicle", "inertia_yy", p.inertia.y());
  d.set_double("vehicle", "inertia_zz", p.inertia.z());
  std::string angles, spins;
  for (int i = 0; i < p.rotor_count; ++i) {
    if (i > 0) {
      angles += ",";
      spins += ",";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", p.rotor_angles[i]);
    angles += buf;
    spins += std::to_string(p.spin_directions[i]);
  }
  d.set("vehicle", "rotor_angles", angles);
  d.set("vehicle", "spin_directions", spins);
  return d;
}

VehicleParams vehicle_from_ini(const IniDoc& d) {
  VehicleParams p = calibrated_octorotor();
  p.mass = d.get_double("vehicle", "mass");
  p.gravity = d.get_double("vehicle", "gravity", p.gravity);
  p.arm_length = d.get_double("vehicle", "arm_length", p.arm_length);
  p.thrust_coeff = d.get_double("vehicle", "thrust_coeff");
  p.torque_coeff = d.get_double("vehicle", "torque_coeff");
  p.max_rotor_speed = d.get_double("vehicle", "max_rotor_speed");
  p.rated_thrust = d.get_double("vehicle", "rated_thrust");
  p.inertia.x() = d.get_double("vehicle", "inertia_xx", p.inertia.x());
  p.inertia.y() = d.get_double("vehicle", "inertia_yy", p.inertia.y());
  p.inertia.z() = d.get_double("vehicle", "inertia_zz", p.inertia.z());
  if (d.has("vehicle", "rotor_angles")) {
    std::istringstream in(d.get("vehicle", "rotor_angles"));
    std::string tok;
    int i = 0;
    while (std::getline(in, tok, ',') && i < 8) p.rotor_angles[i++] = std::stod(tok);
  }
  if (d.has("vehicle", "spin_directions")) {
    std::istringstream in(d.get("vehicle", "spin_directions"));
    std::string tok;
    int i = 0;
    while (std::getline(in, tok, ',') && i < 8) p.spin_directions[i++] = std::stoi(tok);
  }
  validate(p);
  return p;
}

IniDoc to_ini(const EpisodeConfig& c) {
  IniDoc d;
  d.set_double("episode", "bounding_box", c.bounding_box);
  d.set_double("episode", "scaling_factor", c.scaling_factor);
  d.set_int("episode", "steps_between_actions", c.steps_between_actions);
  d.set_double("episode", "dt", c.dt);
  d.set_double("episode", "max_time", c.max_time);
  d.set_double("episode", "tip_threshold_deg", c.tip_threshold * 180.0 / M_PI);
  d.set_double("episode", "arrival_radius", c.arrival_radius);
  d.set_double("episode", "max_velocity", c.max_velocity);
  d.set_double("episode", "omega_bound", c.omega_bound);
  return d;
}

EpisodeConfig episode_from_ini(const IniDoc& d) {
  EpisodeConfig c;
  c.bounding_box = d.get_double("episode", "bounding_box", c.bounding_box);
  c.scaling_factor = d.get_double("episode", "scaling_factor", c.scaling_factor);
  c.steps_between_actions = static_cast<int>(
      d.get_int("episode", "steps_between_actions", c.steps_between_actions));
  c.dt = d.get_double("episode", "dt", c.dt);
  c.max_time = d.get_double("episode", "max_time", c.max_time);
  c.tip_threshold =
      d.get_double("episode", "tip_threshold_deg", c.tip_threshold * 180.0 / M_PI) *
      M_PI / 180.0;
  c.arrival_radius = d.get_double("episode", "arrival_radius", c.arrival_radius);
  c.max_velocity = d.get_double("episode", "max_velocity", c.max_velocity);
  c.omega_bound = d.get_double("episode", "omega_bound", c.omega_bound);
  validate(c);
  return c;
}

IniDoc to_ini(const RlHyperparams& hp) {
  IniDoc d;
  d.set_double("rl", "learning_rate", hp.learning_rate);
  d.set_int("rl", "batch_size", hp.batch_size);
  d.set_int("rl", "epochs", hp.epochs);
  d.set_int("rl", "steps", hp.steps);
  d.set_double("rl", "clip_ratio", hp.clip_ratio);
  d.set_double("rl", "gamma", hp.gamma);
  d.set_double("rl", "gae_lambda", hp.gae_lambda);
  d.set_double("rl", "entropy_coef", hp.entropy_coef);
  d.set_double("rl", "value_coef", hp.value_coef);
  d.set_double("rl", "max_grad_norm", hp.max_grad_norm);
  d.set_int("rl", "n_envs", hp.n_envs);
  d.set_int("rl", "hidden_width", hp.hidden_width);
  d.set_int("rl", "hidden_depth", hp.hidden_depth);
  return d;
}

RlHyperparams rl_from_ini(const IniDoc& d) {
  RlHyperparams hp;
  hp.learning_rate = d.get_double("rl", "learning_rate", hp.learning_rate);
  hp.batch_size = static_cast<int>(d.get_int("rl", "batch_size", hp.batch_size));
  hp.epochs = static_cast<int>(d.get_int("rl", "epochs", hp.epochs));
  hp.steps = static_cast<int>(d.get_int("rl", "steps", hp.steps));
  hp.clip_ratio = d.get_double("rl", "clip_ratio", hp.clip_ratio);
  hp.gamma = d.get_double("rl", "gamma", hp.gamma);
  hp.gae_lambda = d.get_double("rl", "gae_lambda", hp.gae_lambda);
  hp.entropy_coef = d.get_double("rl", "entropy_coef", hp.entropy_coef);
  hp.value_coef = d.get_double("rl", "value_coef", hp.value_coef);
  hp.max_grad_norm = d.get_double("rl", "max_grad_norm", hp.max_grad_norm);
  hp.n_envs = static_cast<int>(d.get_int("rl", "n_envs", hp.n_envs));
  hp.hidden_width = static_cast<int>(d.get_int("rl", "hidden_width", hp.hidden_width));
  hp.hidden_depth = static_cast<int>(d.get_int("rl", "hidden_depth", hp.hidden_depth));
  validate(hp);
  return hp;
}

SearchSpace space_from_ini(const IniDoc& d) {
  const auto sec = d.sections.find("search_space");
  if (sec == d.sections.end())
    throw std::runtime_error("config: missing [search_space] section");
  SearchSpace space;
  for (const auto& [name, value] : sec->second) {
    std::istringstream in(value);
    std::string kind;
    double lo, hi;
    if (!(in >> kind >> lo >> hi))
      throw std::runtime_error("config: search range for '" + name +
                               "' must be 'kind lo hi'");
    ParamRange r;
    if (kind == "uniform") r.kind = RangeKind::uniform;
    else if (kind == "log_uniform") r.kind = RangeKind::log_uniform;
    else if (kind == "integer") r.kind = RangeKind::integer;
    else
      throw std::runtime_error("config: unknown range kind '" + kind + "' for '" +
                               name + "'");
    r.lo = lo;
    r.hi = hi;
    space.params[name] = r;
  }
  validate(space);
  return space;
}

IniDoc to_ini(const SearchSpace& space) {
  IniDoc d;
  for (const auto& [name, r] : space.params) {
    const char* kind = r.kind == RangeKind::uniform ? "uniform"
                       : r.kind == RangeKind::log_uniform ? "log_uniform"
                                                          : "integer";
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s %.17g %.17g", kind, r.lo, r.hi);
    d.set("search_space", name, buf);
  }
  return d;
}

WindField parse_wind_spec(const std::string& spec) {
  double mag = 0.0, heading = 0.0;
  char extra = 0;
  const int n2 = std::sscanf(spec.c_str(), "%lf@%lf%c", &mag, &heading, &extra);
  if (n2 == 2) {
    if (mag < 0.0) throw std::runtime_error("wind: magnitude must be >= 0 in '" + spec + "'");
    if (heading < 0.0 || heading >= 360.0)
      throw std::runtime_error("wind: heading must be in [0, 360) in '" + spec + "'");
    return WindField::from_heading(mag, heading);
  }
  const int n1 = std::sscanf(spec.c_str(), "%lf%c", &mag, &extra);
  if (n1 == 1) {
    if (mag < 0.0) throw std::runtime_error("wind: magnitude must be >= 0 in '" + spec + "'");
    return WindField::from_heading(mag, 0.0);
  }
  throw std::runtime_error("wind: expected 'M@H' or 'M', got '" + spec + "'");
}

}  // namespace uavrl
