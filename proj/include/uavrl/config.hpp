#pragma once

#include <map>
#include <string>

#include "uavrl/controller.hpp"
#include "uavrl/env.hpp"
#include "uavrl/ppo.hpp"
#include "uavrl/tuner_types.hpp"
#include "uavrl/vehicle.hpp"

namespace uavrl {

/// Flat key = value config format, one [section] per domain type,
/// '#' comments. Keys inside a section are unique; values are kept as
/// strings until a typed accessor asks for them.
struct IniDoc {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& section, const std::string& key) const;
  const std::string& get(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  long get_int(const std::string& section, const std::string& key, long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  void set(const std::string& section, const std::string& key, const std::string& v);
  void set_double(const std::string& section, const std::string& key, double v);
  void set_int(const std::string& section, const std::string& key, long v);
};

/// Throws std::runtime_error with a line number on malformed input.
IniDoc parse_ini(const std::string& text);
IniDoc load_ini_file(const std::string& path);
std::string write_ini(const IniDoc& doc);
void save_ini_file(const IniDoc& doc, const std::string& path);

// Domain type round-trips. Gain keys match the tuning-table labels
// ([position]/[velocity]/[attitude]/[rate] k_p/k_i/k_d, rate max_acc).
IniDoc to_ini(const CascadeGains& gains);
CascadeGains gains_from_ini(const IniDoc& doc);
IniDoc to_ini(const VehicleParams& params);
VehicleParams vehicle_from_ini(const IniDoc& doc);
IniDoc to_ini(const EpisodeConfig& config);
EpisodeConfig episode_from_ini(const IniDoc& doc);
IniDoc to_ini(const RlHyperparams& hp);
RlHyperparams rl_from_ini(const IniDoc& doc);

/// [search_space] entries "name = kind lo hi" with kind in
/// {uniform, log_uniform, integer}.
SearchSpace space_from_ini(const IniDoc& doc);
IniDoc to_ini(const SearchSpace& space);

/// Wind flag grammar "M@H": M newtons, H degrees heading the wind comes
/// from ("5@90" is 5 N coming from 90 degrees). A bare "M" means heading
/// 0. Throws std::runtime_error on a malformed spec.
WindField parse_wind_spec(const std::string& spec);

}  // namespace uavrl
