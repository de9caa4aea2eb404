#include "cad2osm/config.hpp"

#include "cad2osm/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace cad2osm {
namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int i = std::stoi(v, &used);
    if (trim(v.substr(used)).empty()) return i;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected an integer, got '" + v + "'");
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string num(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", d);
  return buf;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

struct Entry {
  std::string section, key;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

#define DOUBLE_ENTRY(sec, name, field)                                                        \
  Entry {                                                                                     \
    sec, name, [](PipelineConfig& c, const std::string& v) { c.field = to_double(name, v); }, \
        [](const PipelineConfig& c) { return num(c.field); }                                  \
  }
#define INT_ENTRY(sec, name, field)                                                        \
  Entry {                                                                                  \
    sec, name, [](PipelineConfig& c, const std::string& v) { c.field = to_int(name, v); }, \
        [](const PipelineConfig& c) { return std::to_string(c.field); }                    \
  }
#define LIST_ENTRY(sec, name, field)                                                 \
  Entry {                                                                            \
    sec, name, [](PipelineConfig& c, const std::string& v) { c.field = to_list(v); }, \
        [](const PipelineConfig& c) { return join(c.field); }                         \
  }
#define OPTIONAL_LIST_ENTRY(sec, name, field)                                  \
  Entry {                                                                      \
    sec, name,                                                                 \
        [](PipelineConfig& c, const std::string& v) {                          \
          auto l = to_list(v);                                                 \
          if (l.empty())                                                       \
            c.field.reset();                                                   \
          else                                                                 \
            c.field = std::move(l);                                            \
        },                                                                     \
        [](const PipelineConfig& c) { return c.field ? join(*c.field) : ""; } \
  }

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      DOUBLE_ENTRY("raster", "resolution", raster.resolution),
      INT_ENTRY("raster", "wall_thickness_px", raster.wall_thickness_px),
      INT_ENTRY("raster", "gap_bridge_px", raster.gap_bridge_px),
      DOUBLE_ENTRY("segmentation", "alpha", segmentation.alpha),
      DOUBLE_ENTRY("segmentation", "prune_clearance", segmentation.prune_clearance),
      DOUBLE_ENTRY("segmentation", "door_max_width", segmentation.door_max_width),
      DOUBLE_ENTRY("refine", "epsilon_simplify", refine.epsilon_simplify),
      DOUBLE_ENTRY("refine", "theta_spike", refine.theta_spike),
      DOUBLE_ENTRY("refine", "A_min", refine.A_min),
      DOUBLE_ENTRY("refine", "d_max_merge", refine.d_max_merge),
      DOUBLE_ENTRY("refine", "curve_turn_rate", refine.curve_turn_rate),
      INT_ENTRY("refine", "curve_window", refine.curve_window),
      DOUBLE_ENTRY("refine", "curve_factor", refine.curve_factor),
      DOUBLE_ENTRY("semantic", "rho_max", semantic.rho_max),
      DOUBLE_ENTRY("semantic", "D_max", semantic.D_max),
      DOUBLE_ENTRY("eval", "iou_threshold", eval.iou_threshold),
      DOUBLE_ENTRY("eval", "passage_max_distance", eval.passage_max_distance),
      LIST_ENTRY("fusion", "stair_keywords", stair_keywords),
      DOUBLE_ENTRY("fusion", "min_iou", fusion.min_iou),
      DOUBLE_ENTRY("fusion", "max_centroid_distance", fusion.max_centroid_distance),
      LIST_ENTRY("layers", "include_keywords", layers.include_keywords),
      LIST_ENTRY("layers", "exclude_keywords", layers.exclude_keywords),
      OPTIONAL_LIST_ENTRY("layers", "explicit_layers", layers.explicit_layers),
      OPTIONAL_LIST_ENTRY("layers", "text_layers", layers.text_layers),
      DOUBLE_ENTRY("geo", "lat0", origin.lat0),
      DOUBLE_ENTRY("geo", "lon0", origin.lon0),
      DOUBLE_ENTRY("geo", "rotation", origin.rotation),
      INT_ENTRY("geo", "level", level),
  };
  return entries;
}

#undef DOUBLE_ENTRY
#undef INT_ENTRY
#undef LIST_ENTRY
#undef OPTIONAL_LIST_ENTRY

}  // namespace

void PipelineConfig::validate() const {
  if (!(raster.resolution >= 0.005 && raster.resolution <= 0.2))
    throw InvalidResolution("raster.resolution must be within [0.005, 0.2] m/px");
  if (raster.wall_thickness_px < 1) throw ConfigError("raster.wall_thickness_px must be >= 1");
  if (raster.gap_bridge_px < 0) throw ConfigError("raster.gap_bridge_px must be >= 0");
  segmentation.validate();
  refine.validate();
  semantic.validate();
  if (!(eval.iou_threshold > 0.0 && eval.iou_threshold <= 1.0))
    throw ConfigError("eval.iou_threshold must be in (0, 1]");
  if (!(eval.passage_max_distance >= 0.0)) throw ConfigError("eval.passage_max_distance must be >= 0");
  if (!(fusion.min_iou >= 0.0 && fusion.min_iou <= 1.0)) throw ConfigError("fusion.min_iou must be in [0, 1]");
  if (!(fusion.max_centroid_distance >= 0.0)) throw ConfigError("fusion.max_centroid_distance must be >= 0");
  layers.validate();
  origin.validate();
}

void set_config_value(PipelineConfig& config, const std::string& dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos) throw ConfigError("expected section.key, got '" + dotted_key + "'");
  const std::string section = dotted_key.substr(0, dot);
  const std::string key = dotted_key.substr(dot + 1);
  for (const auto& e : registry())
    if (e.section == section && e.key == key) {
      e.set(config, trim(value));
      return;
    }
  throw ConfigError("unknown config key '" + dotted_key + "'");
}

PipelineConfig parse_config(std::string_view ini_text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(ini_text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  PipelineConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("key '" + section + "' outside of a section");
    for (const auto& [key, value] : body) set_config_value(config, section + "." + key, value.data());
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string format_config(const PipelineConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& e : registry()) {
    if (e.section != section) {
      if (!section.empty()) out << "\n";
      section = e.section;
      out << "[" << section << "]\n";
    }
    out << e.key << " = " << e.get(config) << "\n";
  }
  return out.str();
}

}  // namespace cad2osm
