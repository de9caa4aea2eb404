#pragma once

// End-to-end conversion of one DXF floor plan into an osmAG map, with a JSON
// conversion report. Every stage failure is rethrown with the stage name in
// front of the message and the original error kind and category.

#include "cad2osm/area_graph.hpp"
#include "cad2osm/cad.hpp"
#include "cad2osm/config.hpp"
#include "cad2osm/osm.hpp"
#include "cad2osm/raster.hpp"
#include "cad2osm/semantic.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace cad2osm {

/// Everything up to (and including) semantic attribution, in world meters.
struct SegmentResult {
  FilterResult filtered;
  OccupancyGrid grid;  // thickened and closed
  VoronoiSkeleton skeleton;
  Segmentation segmentation;
  AreaGraph raw_graph;
  AreaGraph graph;  // refined and named
  AssociationResult association;
  nlohmann::json report;  // "timing" holds per-stage seconds and the total
};

SegmentResult segment_document(const CadDocument& doc, const PipelineConfig& config);

struct ConversionResult {
  SegmentResult segment;
  OsmMap map;
  std::string osm_xml;
  nlohmann::json report;
};

ConversionResult convert(std::string_view dxf_bytes, const PipelineConfig& config);

/// Serializes a (possibly hand-edited) graph and checks that the XML parses
/// back and passes the schema validator.
std::string export_osm(const AreaGraph& graph, const GeoOrigin& origin, int level);

/// Report without its "timing" member, for byte comparisons.
nlohmann::json strip_timing(nlohmann::json report);

}  // namespace cad2osm
