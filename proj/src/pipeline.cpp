#include "cad2osm/pipeline.hpp"

#include "cad2osm/errors.hpp"
#include "cad2osm/refine.hpp"

#include <chrono>

namespace cad2osm {
namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class Stages {
 public:
  template <typename F>
  auto run(const std::string& name, F&& f) {
    const auto t0 = Clock::now();
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        timing_[name] = seconds_since(t0);
      } else {
        auto r = f();
        timing_[name] = seconds_since(t0);
        return r;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), e.category(), "[" + name + "] " + e.what());
    } catch (const std::exception& e) {
      throw Error("InternalError", ErrorCategory::Internal, "[" + name + "] " + e.what());
    }
  }

  json& timing() { return timing_; }

 private:
  json timing_ = json::object();
};

json counts(const AreaGraph& g) {
  return {{"rooms", g.rooms.size()}, {"passages", g.passages.size()}};
}

json text_json(const TextAnnotation& t) {
  return {{"content", t.content}, {"layer", t.source_layer}, {"x", t.position.x()}, {"y", t.position.y()}};
}

SegmentResult segment_with(Stages& stages, const CadDocument& doc, const PipelineConfig& config) {
  config.validate();
  SegmentResult out;
  json& report = out.report;

  json layers = json::object();
  for (const auto& [name, list] : doc.layers) layers[name] = list.size();
  json unsupported = json::object();
  for (const auto& [kind, n] : doc.unsupported) unsupported[kind] = n;
  report["input"] = {{"entities", doc.entity_count()},
                     {"layers", layers},
                     {"unsupported", unsupported},
                     {"drawing_unit_scale", doc.drawing_unit_scale}};
  std::vector<std::string> warnings = doc.warnings;

  out.filtered = stages.run("filter", [&] { return filter_layers(doc, config.layers); });
  std::vector<std::string> retained;
  for (const auto& [name, list] : out.filtered.document.layers) retained.push_back(name);
  report["layers"] = {{"retained", retained}, {"dropped", out.filtered.dropped_layers}};

  const OccupancyGrid strokes = stages.run(
      "rasterize", [&] { return rasterize(out.filtered.document, config.raster.resolution); });
  out.grid = stages.run("thicken", [&] {
    return thicken_and_close(strokes, config.raster.wall_thickness_px, config.raster.gap_bridge_px);
  });
  report["grid"] = {{"width", out.grid.width()},
                    {"height", out.grid.height()},
                    {"resolution", out.grid.transform.resolution},
                    {"origin", {out.grid.transform.origin_world.x(), out.grid.transform.origin_world.y()}},
                    {"occupied", (out.grid.cells != 0).count()}};

  const VoronoiSkeleton vd = stages.run("voronoi", [&] { return compute_voronoi(out.grid); });
  out.skeleton = stages.run("skeleton", [&] {
    return extract_skeleton(vd, config.segmentation.prune_clearance);
  });
  report["skeleton"] = {{"voronoi_vertices", vd.vertices.size()},
                        {"vertices", out.skeleton.vertices.size()},
                        {"edges", out.skeleton.edges.size()}};

  out.segmentation = stages.run("segment", [&] {
    return alpha_shape_segment(out.skeleton, out.grid, config.segmentation);
  });
  out.raw_graph = stages.run("area_graph", [&] { return build_area_graph(out.segmentation, out.grid); });
  report["door_chords"] = out.segmentation.chords.size();

  out.graph = stages.run("refine", [&] { return refine(out.raw_graph, config.refine, &warnings); });

  const auto texts = extract_text(doc, config.layers);
  out.association = stages.run("semantics", [&] {
    return annotate_rooms(out.graph, texts, doc.drawing_unit_scale, config.semantic);
  });

  report["stages"] = json::array({
      json{{"stage", "area_graph"}, {"counts", counts(out.raw_graph)}},
      json{{"stage", "refine"}, {"counts", counts(out.graph)}},
  });

  json assigned = json::array();
  for (const auto& a : out.association.assignments)
    assigned.push_back({{"text", a.text.content},
                        {"room", a.room_id},
                        {"score", a.score},
                        {"case", a.match_case == MatchCase::Inside ? "inside" : "nearby"}});
  json unassigned = json::array();
  for (const auto& t : out.association.unassigned) unassigned.push_back(text_json(t));
  report["texts"] = {{"total", texts.size()}, {"assigned", assigned}, {"unassigned", unassigned}};
  report["warnings"] = warnings;
  return out;
}

}  // namespace

SegmentResult segment_document(const CadDocument& doc, const PipelineConfig& config) {
  Stages stages;
  const auto t0 = Clock::now();
  SegmentResult out = segment_with(stages, doc, config);
  out.report["timing"] = {{"stages", stages.timing()}, {"total", seconds_since(t0)}};
  return out;
}

ConversionResult convert(std::string_view dxf_bytes, const PipelineConfig& config) {
  Stages stages;
  const auto t0 = Clock::now();
  ConversionResult out;
  const CadDocument doc = stages.run("parse", [&] { return parse_dxf(dxf_bytes); });
  out.segment = segment_with(stages, doc, config);
  out.map = stages.run("serialize", [&] {
    return serialize_area_graph(out.segment.graph, config.origin, config.level);
  });
  out.osm_xml = stages.run("write", [&] { return write_osm_xml(out.map); });

  out.report = out.segment.report;
  out.report["output"] = {{"nodes", out.map.nodes.size()},
                          {"ways", out.map.ways.size()},
                          {"level", config.level}};
  out.report["timing"] = {{"stages", stages.timing()}, {"total", seconds_since(t0)}};
  out.segment.report = out.report;
  return out;
}

std::string export_osm(const AreaGraph& graph, const GeoOrigin& origin, int level) {
  const OsmMap map = serialize_area_graph(graph, origin, level);
  std::string xml = write_osm_xml(map);
  const auto violations = validate_schema(read_osm_xml(xml));
  if (!violations.empty()) throw SerializationRefused("exported map fails the schema: " + violations.front());
  return xml;
}

json strip_timing(json report) {
  report.erase("timing");
  return report;
}

}  // namespace cad2osm
