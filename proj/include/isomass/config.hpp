#pragma once

// Metric specifications and run configuration.
//
// Inline metric forms:
//   flat
//   schwarzschild:m=<mass>
//   cylinder:a=<radius>
//   expr:<gauge>:<expression>[:name=value,...]     (the key "start" sets the domain start)
//   table:<gauge>:<path to radius,profile CSV>
//
// Config files hold key = value lines in three sections:
//   [metric]      family, gauge, expression, start, path, m, a, param.<name>
//   [tolerances]  the ToleranceConfig fields and report_tol
//   [output]      format (csv | json), path
// Lines starting with # or ; are comments. Unknown sections and keys are errors.

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "isomass/errors.hpp"
#include "isomass/geometry.hpp"
#include "isomass/numerics.hpp"

namespace isomass {

struct MetricSpec {
  std::string family;  // flat, schwarzschild, cylinder, expr, table
  Gauge gauge = Gauge::Geodesic;
  std::string expression;
  ParamSet params;
  double start = 0;
  std::string path;
  double m = 1;
  double a = 1;
};

enum class OutputFormat { Csv, Json };

struct RunConfig {
  std::optional<MetricSpec> metric;
  ToleranceConfig tolerances;
  double report_tol = 1e-3;
  OutputFormat format = OutputFormat::Csv;
  std::string output_path;  // empty: standard output
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline double parse_number(std::string_view text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError("invalid number '" + t + "' for " + what);
  return v;
}

inline int parse_count(std::string_view text, const std::string& what) {
  const double v = parse_number(text, what);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(what + " must be an integer");
  return static_cast<int>(v);
}

inline Gauge parse_gauge(std::string_view text) {
  const std::string t = trim(text);
  if (t == "geodesic") return Gauge::Geodesic;
  if (t == "areal") return Gauge::Areal;
  throw ConfigError("unknown gauge '" + t + "' (expected geodesic or areal)");
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

// Parses "k=v,k=v" into (key, value) pairs.
inline std::vector<std::pair<std::string, double>> parse_assignments(std::string_view text, const std::string& ctx) {
  std::vector<std::pair<std::string, double>> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    const std::string key = trim(item.substr(0, eq));
    if (eq == std::string_view::npos || !is_identifier(key))
      throw ConfigError("expected name=value in " + ctx + ", got '" + trim(item) + "'");
    out.emplace_back(key, parse_number(item.substr(eq + 1), key));
    pos = comma + 1;
  }
  return out;
}

inline bool looks_like_assignments(std::string_view text) {
  try {
    parse_assignments(text, "");
    return true;
  } catch (const ConfigError&) {
    return false;
  }
}

}  // namespace detail

/// Parses an inline metric form.
inline MetricSpec parse_metric_spec(std::string_view text) {
  const std::string s = detail::trim(text);
  MetricSpec spec;
  const std::size_t colon = s.find(':');
  spec.family = s.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string() : s.substr(colon + 1);

  const auto family_params = [&](std::initializer_list<const char*> allowed) {
    if (rest.empty()) return;
    for (const auto& [k, v] : detail::parse_assignments(rest, spec.family)) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) throw ConfigError("unknown parameter '" + k + "' for metric family " + spec.family);
      if (k == "m") spec.m = v;
      if (k == "a") spec.a = v;
    }
  };

  if (spec.family == "flat") {
    if (!rest.empty()) throw ConfigError("flat takes no parameters");
  } else if (spec.family == "schwarzschild") {
    family_params({"m"});
  } else if (spec.family == "cylinder") {
    family_params({"a"});
  } else if (spec.family == "expr" || spec.family == "table") {
    const std::size_t c2 = rest.find(':');
    if (c2 == std::string::npos) throw ConfigError(spec.family + " needs the form " + spec.family + ":<gauge>:...");
    spec.gauge = detail::parse_gauge(rest.substr(0, c2));
    std::string body = rest.substr(c2 + 1);
    if (spec.family == "table") {
      spec.path = body;
      if (spec.path.empty()) throw ConfigError("table needs a file path");
    } else {
      const std::size_t last = body.rfind(':');
      if (last != std::string::npos && detail::looks_like_assignments(std::string_view(body).substr(last + 1))) {
        for (const auto& [k, v] : detail::parse_assignments(std::string_view(body).substr(last + 1), "expr")) {
          if (k == "start")
            spec.start = v;
          else
            spec.params.add(k, v);
        }
        body = body.substr(0, last);
      }
      spec.expression = detail::trim(body);
      if (spec.expression.empty()) throw ConfigError("expr needs an expression");
    }
  } else {
    throw ConfigError("unknown metric family '" + spec.family +
                      "' (expected flat, schwarzschild, cylinder, expr or table)");
  }
  return spec;
}

/// Builds the metric described by a specification.
inline RadialMetric build_metric(const MetricSpec& spec) {
  if (spec.family == "flat") return flat_metric();
  if (spec.family == "schwarzschild") return schwarzschild_metric(spec.m);
  if (spec.family == "cylinder") return cylinder_metric(spec.a);
  if (spec.family == "expr") return expression_metric(spec.gauge, spec.expression, spec.params, spec.start);
  if (spec.family == "table") return table_metric_from_csv(spec.gauge, spec.path);
  throw ConfigError("unknown metric family '" + spec.family + "'");
}

inline void apply_tolerance(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto& t = cfg.tolerances;
  if (key == "quad_rel_tol") t.quad_rel_tol = detail::parse_number(value, key);
  else if (key == "quad_abs_tol") t.quad_abs_tol = detail::parse_number(value, key);
  else if (key == "root_tol") t.root_tol = detail::parse_number(value, key);
  else if (key == "max_subdivisions") t.max_subdivisions = detail::parse_count(value, key);
  else if (key == "extrap_terms") t.extrap_terms = detail::parse_count(value, key);
  else if (key == "cutoff_radius") t.cutoff_radius = detail::parse_number(value, key);
  else if (key == "probe_per_decade") t.probe_per_decade = detail::parse_count(value, key);
  else if (key == "report_tol") cfg.report_tol = detail::parse_number(value, key);
  else throw ConfigError("unknown key '" + key + "' in [tolerances]");
}

inline OutputFormat parse_format(const std::string& value) {
  const std::string v = detail::trim(value);
  if (v == "csv") return OutputFormat::Csv;
  if (v == "json") return OutputFormat::Json;
  throw ConfigError("unknown output format '" + v + "' (expected csv or json)");
}

/// Reads a key = value config file.
inline RunConfig parse_config_text(std::istream& in, const std::string& source = "config") {
  RunConfig cfg;
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::string> metric_keys;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = source + ":" + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + ": malformed section header");
      section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
      if (section != "metric" && section != "tolerances" && section != "output")
        throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    try {
      if (section.empty()) throw ConfigError("key outside of any section");
      if (section == "metric") {
        if (!metric_keys.emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
      } else if (section == "tolerances") {
        apply_tolerance(cfg, key, value);
      } else if (key == "format") {
        cfg.format = parse_format(value);
      } else if (key == "path") {
        cfg.output_path = value;
      } else {
        throw ConfigError("unknown key '" + key + "' in [output]");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }

  if (!metric_keys.empty()) {
    MetricSpec spec;
    const auto family = metric_keys.find("family");
    if (family == metric_keys.end()) throw ConfigError(source + ": [metric] needs a family key");
    spec.family = family->second;
    for (const auto& [key, value] : metric_keys) {
      if (key == "family") continue;
      if (key == "gauge") spec.gauge = detail::parse_gauge(value);
      else if (key == "expression") spec.expression = value;
      else if (key == "start") spec.start = detail::parse_number(value, key);
      else if (key == "path") spec.path = value;
      else if (key == "m") spec.m = detail::parse_number(value, key);
      else if (key == "a") spec.a = detail::parse_number(value, key);
      else if (key.rfind("param.", 0) == 0 && detail::is_identifier(key.substr(6)))
        spec.params.add(key.substr(6), detail::parse_number(value, key));
      else throw ConfigError(source + ": unknown key '" + key + "' in [metric]");
    }
    if (spec.family != "flat" && spec.family != "schwarzschild" && spec.family != "cylinder" &&
        spec.family != "expr" && spec.family != "table")
      throw ConfigError(source + ": unknown metric family '" + spec.family + "'");
    if (spec.family == "expr" && spec.expression.empty()) throw ConfigError(source + ": expr needs an expression");
    if (spec.family == "table" && spec.path.empty()) throw ConfigError(source + ": table needs a path");
    cfg.metric = spec;
  }
  return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config_text(in, path);
}

}  // namespace isomass
