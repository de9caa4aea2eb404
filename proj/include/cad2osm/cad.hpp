#pragma once

// ASCII DXF ingestion: a layered vector document, keyword-based structural
// layer selection, and text annotation extraction.

#include "cad2osm/geometry.hpp"

#include <Eigen/Geometry>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cad2osm {

struct Line {
  Point2d p1, p2;
};

/// bulges is empty for straight polylines, otherwise one bulge per vertex
/// (the segment leaving that vertex), as in DXF group 42.
struct Polyline {
  std::vector<Point2d> vertices;
  bool closed = false;
  std::vector<double> bulges;
};

/// Angles in degrees, counter-clockwise from start to end.
struct Arc {
  Point2d center;
  double radius = 0.0;
  double start_deg = 0.0;
  double end_deg = 0.0;
};

struct Circle {
  Point2d center;
  double radius = 0.0;
};

/// MTEXT line breaks are kept as '\n' in content.
struct Text {
  Point2d anchor;
  std::string content;
  double height = 0.0;
};

using CadEntity = std::variant<Line, Polyline, Arc, Circle, Text>;

using Box2d = Eigen::AlignedBox2d;

struct CadDocument {
  std::map<std::string, std::vector<CadEntity>> layers;
  double drawing_unit_scale = 0.001;  // meters per drawing unit
  Box2d extents;                      // drawing units
  std::map<std::string, std::size_t> unsupported;  // entity kind -> count
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t entity_count() const;
  void recompute_extents();
};

/// Bounding box of one entity in drawing units (arcs and circles use their
/// full circle box).
Box2d entity_bounds(const CadEntity& e);

struct LayerFilter {
  std::vector<std::string> include_keywords{"WALL", "STAIR", "COLS", "COLUMN",
                                            "GLAZ", "WIND", "DOOR"};
  std::vector<std::string> exclude_keywords;
  std::optional<std::vector<std::string>> explicit_layers;
  std::optional<std::vector<std::string>> text_layers;

  /// Throws ConfigError when include and exclude keywords overlap.
  void validate() const;
  [[nodiscard]] bool matches(std::string_view layer) const;
};

struct TextAnnotation {
  std::string content;
  Point2d position;
  std::string source_layer;
};

struct FilterResult {
  CadDocument document;
  std::vector<std::string> dropped_layers;
};

CadDocument parse_dxf(std::string_view bytes);

/// Writes the supported entity subset as ASCII DXF (R12-style ENTITIES with a
/// HEADER carrying $INSUNITS). Coordinates use round-trip precision.
std::string write_dxf(const CadDocument& doc);

FilterResult filter_layers(const CadDocument& doc, const LayerFilter& filter);

std::vector<TextAnnotation> extract_text(const CadDocument& doc, const LayerFilter& filter);

/// Debug dump: {"layer": entity_count, ...}.
std::string layer_summary_json(const CadDocument& doc);

}  // namespace cad2osm
