#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "deconflict/aircraft.hpp"
#include "deconflict/errors.hpp"
#include "deconflict/io_util.hpp"

namespace deconflict {

/// Serializes an instance. The writer is hand-rolled so the byte layout is
/// fixed: stable key order, 2-space indent, %.17g numbers. Parsing accepts
/// only this schema and rejects unknown keys, so typos in hand-edited files
/// fail loudly instead of silently falling back to defaults.
inline std::string to_json(const ProblemInstance& inst) {
  std::string s;
  s += "{\n";
  s += "  \"version\": 1,\n";
  s += "  \"kind\": \"" + inst.kind + "\",\n";
  s += "  \"d_nm\": " + format_double(inst.d_nm) + ",\n";
  s += "  \"seed\": " + std::to_string(inst.seed) + ",\n";
  s += "  \"generator_params\": {\n";
  s += "    \"n\": " + std::to_string(inst.params.n) + ",\n";
  s += "    \"radius_nm\": " + format_double(inst.params.radius_nm) + ",\n";
  s += "    \"speed_kn\": " + format_double(inst.params.speed_kn) + ",\n";
  s += "    \"speed_min_kn\": " + format_double(inst.params.speed_min_kn) +
       ",\n";
  s += "    \"speed_max_kn\": " + format_double(inst.params.speed_max_kn) +
       ",\n";
  s += "    \"heading_jitter_rad\": " +
       format_double(inst.params.heading_jitter_rad) + "\n";
  s += "  },\n";
  s += "  \"aircraft\": [\n";
  for (int i = 0; i < inst.size(); ++i) {
    const AircraftState& a = inst.aircraft[i];
    s += "    {\"id\": " + std::to_string(a.id) +
         ", \"x_nm\": " + format_double(a.position.x) +
         ", \"y_nm\": " + format_double(a.position.y) +
         ", \"speed_kn\": " + format_double(a.speed_kn) +
         ", \"heading_rad\": " + format_double(a.heading_rad) + "}";
    s += i + 1 < inst.size() ? ",\n" : "\n";
  }
  s += "  ]\n";
  s += "}\n";
  return s;
}

namespace io_detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw InputError("unknown key \"" + it.key() + "\" in " + where);
  }
}

template <typename T>
T require(const nlohmann::json& obj, const char* key,
          const std::string& where) {
  if (!obj.contains(key))
    throw InputError("missing key \"" + std::string(key) + "\" in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError("key \"" + std::string(key) + "\" in " + where +
                     " has the wrong type");
  }
}

}  // namespace io_detail

inline ProblemInstance instance_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("instance file must be a JSON object");
  io_detail::reject_unknown_keys(
      j, {"version", "kind", "d_nm", "seed", "generator_params", "aircraft"},
      "instance");
  if (io_detail::require<int>(j, "version", "instance") != 1)
    throw InputError("unsupported instance version");

  ProblemInstance inst;
  inst.kind = io_detail::require<std::string>(j, "kind", "instance");
  if (inst.kind != "CP" && inst.kind != "RCP" && inst.kind != "custom")
    throw InputError("kind must be CP, RCP, or custom");
  inst.d_nm = io_detail::require<double>(j, "d_nm", "instance");
  inst.seed = io_detail::require<std::uint64_t>(j, "seed", "instance");

  if (!j.contains("generator_params") || !j.at("generator_params").is_object())
    throw InputError("instance needs a \"generator_params\" object");
  const nlohmann::json& gp = j.at("generator_params");
  io_detail::reject_unknown_keys(gp,
                                 {"n", "radius_nm", "speed_kn", "speed_min_kn",
                                  "speed_max_kn", "heading_jitter_rad"},
                                 "generator_params");
  inst.params.n = io_detail::require<int>(gp, "n", "generator_params");
  inst.params.radius_nm =
      io_detail::require<double>(gp, "radius_nm", "generator_params");
  inst.params.speed_kn =
      io_detail::require<double>(gp, "speed_kn", "generator_params");
  inst.params.speed_min_kn =
      io_detail::require<double>(gp, "speed_min_kn", "generator_params");
  inst.params.speed_max_kn =
      io_detail::require<double>(gp, "speed_max_kn", "generator_params");
  inst.params.heading_jitter_rad =
      io_detail::require<double>(gp, "heading_jitter_rad", "generator_params");

  if (!j.contains("aircraft") || !j.at("aircraft").is_array())
    throw InputError("instance needs an \"aircraft\" array");
  for (const nlohmann::json& ja : j.at("aircraft")) {
    if (!ja.is_object()) throw InputError("aircraft entries must be objects");
    io_detail::reject_unknown_keys(
        ja, {"id", "x_nm", "y_nm", "speed_kn", "heading_rad"}, "aircraft");
    AircraftState a;
    a.id = io_detail::require<int>(ja, "id", "aircraft");
    a.position.x = io_detail::require<double>(ja, "x_nm", "aircraft");
    a.position.y = io_detail::require<double>(ja, "y_nm", "aircraft");
    a.speed_kn = io_detail::require<double>(ja, "speed_kn", "aircraft");
    a.heading_rad = io_detail::require<double>(ja, "heading_rad", "aircraft");
    inst.aircraft.push_back(a);
  }
  inst.validate();
  return inst;
}

inline void save_instance(const ProblemInstance& inst,
                          const std::string& path) {
  write_file(path, to_json(inst));
}

inline ProblemInstance load_instance(const std::string& path) {
  return instance_from_json(read_file(path));
}

}  // namespace deconflict
