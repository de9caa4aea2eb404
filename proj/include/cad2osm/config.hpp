#pragma once

// Every tunable of the pipeline, read from an INI file with one section per
// module. Unknown sections or keys are errors.

#include "cad2osm/cad.hpp"
#include "cad2osm/fusion.hpp"
#include "cad2osm/osm.hpp"
#include "cad2osm/refine.hpp"
#include "cad2osm/semantic.hpp"

#include <string>
#include <string_view>

namespace cad2osm {

struct RasterParams {
  double resolution = 0.05;  // m/px
  int wall_thickness_px = 3;
  int gap_bridge_px = 4;
};

struct EvalParams {
  double iou_threshold = 0.5;
  double passage_max_distance = 1.0;  // m
};

struct PipelineConfig {
  RasterParams raster;
  SegmentationParams segmentation;
  RefineParams refine;
  ScoreParams semantic;
  EvalParams eval;
  FusionParams fusion;
  std::vector<std::string> stair_keywords{"STAIR", "ELEV", "LIFT"};
  LayerFilter layers;
  GeoOrigin origin;
  int level = 0;

  /// Range checks of every module; throws the module's typed error.
  void validate() const;
};

/// Throws ConfigError on syntax errors, unknown keys and bad values.
PipelineConfig parse_config(std::string_view ini_text);
PipelineConfig load_config(const std::string& path);

/// Applies one "section.key" = value assignment.
void set_config_value(PipelineConfig& config, const std::string& dotted_key, const std::string& value);

/// INI text listing every key with its current value.
std::string format_config(const PipelineConfig& config);

}  // namespace cad2osm
