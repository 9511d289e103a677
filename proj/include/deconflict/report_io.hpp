#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "deconflict/io_util.hpp"
#include "deconflict/resolution.hpp"

namespace deconflict {

namespace io_detail {

/// JSON has no infinities; unbounded fields serialize as null.
inline std::string json_number(double v) {
  return std::isfinite(v) ? format_double(v) : "null";
}

inline std::string json_time(double v, bool redact) {
  return redact ? "0" : json_number(v);
}

}  // namespace io_detail

/// Serializes a resolution report. With `redact_timing` every wall-clock
/// field is written as 0, which makes repeat runs of the same instance and
/// options byte-identical; everything else in the pipeline is deterministic.
inline std::string to_json(const ResolutionReport& rep,
                           bool redact_timing = false) {
  using io_detail::json_number;
  using io_detail::json_time;
  std::string s;
  s += "{\n";
  s += "  \"version\": 1,\n";
  s += "  \"instance\": \"" + rep.instance_name + "\",\n";
  s += "  \"status\": \"" + std::string(to_string(rep.status)) + "\",\n";
  s += "  \"objective\": " + json_number(rep.objective) + ",\n";
  s += "  \"lower_bound\": " + json_number(rep.lower_bound) + ",\n";
  s += "  \"gap\": " + json_number(rep.gap) + ",\n";
  s += "  \"initial_conflicts\": " + std::to_string(rep.initial_conflicts) +
       ",\n";
  s += "  \"controls\": [";
  if (!rep.has_controls) {
    s += "],\n";
  } else {
    s += "\n";
    for (std::size_t i = 0; i < rep.controls.size(); ++i) {
      const ControlDecision& c = rep.controls[i];
      s += "    {\"id\": " + std::to_string(i) +
           ", \"dx\": " + format_double(c.dx) +
           ", \"dy\": " + format_double(c.dy) +
           ", \"q\": " + format_double(c.q()) +
           ", \"theta_rad\": " + format_double(c.theta()) + "}";
      s += i + 1 < rep.controls.size() ? ",\n" : "\n";
    }
    s += "  ],\n";
  }
  s += "  \"steps\": [\n";
  for (std::size_t i = 0; i < rep.steps.size(); ++i) {
    const StepRecord& st = rep.steps[i];
    s += "    {\"name\": \"" + st.name + "\", \"status\": \"" + st.status +
         "\", \"objective\": " + json_number(st.objective) +
         ", \"bound\": " + json_number(st.bound) +
         ", \"gap\": " + json_number(st.gap) +
         ", \"viol\": " + std::to_string(st.viol) +
         ", \"nodes\": " + std::to_string(st.nodes) +
         ", \"time_s\": " + json_time(st.time_s, redact_timing) + "}";
    s += i + 1 < rep.steps.size() ? ",\n" : "\n";
  }
  s += "  ],\n";
  s += "  \"total_time_s\": " + json_time(rep.total_time_s, redact_timing) +
       "\n";
  s += "}\n";
  return s;
}

inline void save_report(const ResolutionReport& rep, const std::string& path,
                        bool redact_timing = false) {
  write_file(path, to_json(rep, redact_timing));
}

/// Reads the resolved controls back out of a report file, for verification.
inline std::vector<ControlDecision> controls_from_report_json(
    const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid report JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("controls") ||
      !j.at("controls").is_array())
    throw InputError("report has no \"controls\" array");
  std::vector<ControlDecision> controls;
  for (const nlohmann::json& jc : j.at("controls")) {
    if (!jc.is_object() || !jc.contains("dx") || !jc.contains("dy"))
      throw InputError("report control entries need dx and dy");
    controls.push_back({jc.at("dx").get<double>(), jc.at("dy").get<double>()});
  }
  if (controls.empty())
    throw InputError("report holds no resolution to verify");
  return controls;
}

}  // namespace deconflict
