#pragma once

// Architecture config files: a preset, design-point settings and catalog
// overrides, stored as JSON. See docs/formats.md.

#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>

#include <json.hpp>

#include "newton/error.hpp"
#include "newton/evaluator.hpp"

namespace newton {

inline constexpr int kArchSchemaVersion = 1;

namespace detail {

using Json = nlohmann::ordered_json;

template <class F>
void for_each_component(Catalog& c, F&& f) {
  f("router", c.router);
  f("adc", c.adc);
  f("hyper_transport", c.hyper_transport);
  f("dac_array", c.dac_array);
  f("crossbar", c.crossbar);
  f("edram_per_kb", c.edram_per_kb);
  f("bus", c.bus);
  f("sigmoid", c.sigmoid);
  f("maxpool", c.maxpool);
  f("tile_output_reg", c.tile_output_reg);
  f("tile_shift_add", c.tile_shift_add);
  f("input_reg", c.input_reg);
  f("output_reg", c.output_reg);
  f("shift_add", c.shift_add);
  f("sample_hold", c.sample_hold);
  f("input_adders", c.input_adders);
}

template <class F>
void for_each_scalar(Catalog& c, F&& f) {
  f("tiles_per_router", c.tiles_per_router);
  f("router_flit_bits", c.router_flit_bits);
  f("router_ports", c.router_ports);
  f("router_clock_ghz", c.router_clock_ghz);
  f("adc_rate_gsps", c.adc_rate_gsps);
  f("ht_links", c.ht_links);
  f("ht_link_gbytes", c.ht_link_gbytes);
  f("shift_add_per_ima", c.shift_add_per_ima);
  f("htree_area_mm2", c.htree_area_mm2);
  f("htree_energy_pj", c.htree_energy_pj);
  f("cycle_ns", c.cycle_ns);
  f("tiles_per_chip", c.tiles_per_chip);
}

inline bool is_flag_setting(const std::string& k) {
  return k == "adaptive_adc" || k == "compact_htree" || k == "strassen" ||
         k == "spread_buffers" || k == "fc_tiles";
}

inline double setting_value(const DesignPoint& p, const std::string& k) {
  if (k == "adaptive_adc") return p.adaptive_adc;
  if (k == "guard_bits") return p.guard_bits;
  if (k == "karatsuba_level") return p.ima.karatsuba_level;
  if (k == "compact_htree") return p.ima.compact_htree;
  if (k == "strassen") return p.strassen;
  if (k == "spread_buffers") return p.spread_buffers;
  if (k == "fc_tiles") return p.fc_tiles;
  if (k == "fc_adc_share") return p.fc_adc_share;
  if (k == "fc_slowdown") return p.fc_slowdown;
  if (k == "conv_edram_kb") return p.conv_edram_kb;
  if (k == "fc_edram_kb") return p.fc_edram_kb;
  if (k == "imas_per_tile") return p.imas_per_tile;
  if (k == "ima_inputs") return p.ima.inputs;
  if (k == "ima_outputs") return p.ima.outputs;
  if (k == "replication_scale") return p.replication_scale;
  if (k == "input_size") return p.input_size;
  throw ConfigError("unknown setting '" + k + "'");
}

inline std::string json_scalar_text(const std::string& key, const Json& v) {
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  if (v.is_string()) return v.get<std::string>();
  throw ConfigError("setting " + key + " must be a boolean, number or string");
}

inline double json_number(const std::string& key, const Json& v) {
  if (!v.is_number()) throw ConfigError(key + " must be a number");
  return v.get<double>();
}

template <class T>
void assign_number(T& dst, const std::string& key, const Json& v) {
  const double d = json_number(key, v);
  if constexpr (std::is_integral_v<T>) {
    if (d < 0 || d != static_cast<double>(static_cast<T>(d))) {
      throw ConfigError(key + " must be a non-negative integer");
    }
  }
  dst = static_cast<T>(d);
}

inline void apply_catalog(Catalog& cat, const Json& j) {
  if (!j.is_object()) throw ConfigError("catalog must be an object");
  for (const auto& [key, v] : j.items()) {
    bool found = false;
    for_each_component(cat, [&](const char* name, ComponentSpec& spec) {
      if (key != name) return;
      found = true;
      if (!v.is_object()) throw ConfigError("catalog." + key + " must be an object");
      for (const auto& [f, x] : v.items()) {
        if (f == "power_mw") spec.power_mw = json_number("catalog." + key + ".power_mw", x);
        else if (f == "area_mm2") spec.area_mm2 = json_number("catalog." + key + ".area_mm2", x);
        else throw ConfigError("unknown field catalog." + key + "." + f);
      }
    });
    for_each_scalar(cat, [&](const char* name, auto& dst) {
      if (key != name) return;
      found = true;
      assign_number(dst, "catalog." + key, v);
    });
    if (key == "adc_cdac_fraction") {
      found = true;
      cat.adc_model = cat.adc_model.with_cdac_fraction(json_number("catalog." + key, v));
    }
    if (!found) throw ConfigError("unknown catalog entry '" + key + "'");
  }
}

}  // namespace detail

inline DesignPoint preset(const std::string& name) {
  if (name == "isaac") return DesignPoint::isaac();
  if (name == "newton") return DesignPoint::newton();
  throw ConfigError("unknown preset '" + name + "' (expected isaac or newton)");
}

inline DesignPoint parse_arch(const std::string& text) {
  detail::Json j;
  try {
    j = detail::Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("arch config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("arch config must be a JSON object");
  if (!j.contains("schema_version")) throw ConfigError("arch config lacks schema_version");
  if (j["schema_version"] != kArchSchemaVersion) {
    throw ConfigError("unsupported arch schema_version " + j["schema_version"].dump() +
                      " (expected " + std::to_string(kArchSchemaVersion) + ")");
  }
  DesignPoint p = preset(j.value("preset", std::string("newton")));
  for (const auto& [key, v] : j.items()) {
    if (key == "schema_version" || key == "preset") continue;
    if (key == "name") {
      if (!v.is_string()) throw ConfigError("name must be a string");
      p.name = v.get<std::string>();
    } else if (key == "settings") {
      if (!v.is_object()) throw ConfigError("settings must be an object");
      for (const auto& [k, x] : v.items()) apply_setting(p, k, detail::json_scalar_text(k, x));
    } else if (key == "catalog") {
      detail::apply_catalog(p.catalog, v);
    } else if (key == "max_tiles") {
      detail::assign_number(p.max_tiles, key, v);
    } else if (key == "verify_numerics") {
      if (!v.is_boolean()) throw ConfigError("verify_numerics must be a boolean");
      p.verify_numerics = v.get<bool>();
    } else {
      throw ConfigError("unknown arch config key '" + key + "'");
    }
  }
  p.validate();
  return p;
}

inline DesignPoint load_arch(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open arch config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_arch(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Every setting and catalog entry written out, so a saved file reloads to
// the same point under any future preset defaults.
inline std::string serialize_arch(const DesignPoint& p) {
  detail::Json j;
  j["schema_version"] = kArchSchemaVersion;
  j["name"] = p.name;
  j["preset"] = "newton";
  detail::Json s = detail::Json::object();
  for (const auto& k : setting_keys()) {
    const double v = detail::setting_value(p, k);
    if (detail::is_flag_setting(k)) s[k] = v != 0;
    else if (v == static_cast<double>(static_cast<std::int64_t>(v))) s[k] = static_cast<std::int64_t>(v);
    else s[k] = v;
  }
  j["settings"] = s;
  Catalog cat = p.catalog;
  detail::Json c = detail::Json::object();
  detail::for_each_component(cat, [&](const char* name, ComponentSpec& spec) {
    c[name] = {{"power_mw", spec.power_mw}, {"area_mm2", spec.area_mm2}};
  });
  detail::for_each_scalar(cat, [&](const char* name, auto& v) { c[name] = v; });
  c["adc_cdac_fraction"] = cat.adc_model.cdac;
  j["catalog"] = c;
  if (p.max_tiles) j["max_tiles"] = p.max_tiles;
  if (!p.verify_numerics) j["verify_numerics"] = false;
  return j.dump(2) + "\n";
}

}  // namespace newton
