#include "cad2osm/errors.hpp"
#include "cad2osm/pipeline.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace cad2osm;

namespace {

PipelineConfig config_for(const fixtures::Layout& layout) {
  PipelineConfig c;
  c.origin = fixtures::test_origin();
  if (layout.wall_layer == "Muri") c.layers.explicit_layers = std::vector<std::string>{"Muri"};
  return c;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cad2osm_pipeline_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& bytes) {
  std::ofstream(path, std::ios::binary) << bytes;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CAD2OSM_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("conversion report") {
  const auto layout = fixtures::two_rooms();
  const ConversionResult r = convert(fixtures::make_dxf(layout), config_for(layout));
  const auto& rep = r.report;
  for (const char* key : {"input", "layers", "grid", "skeleton", "door_chords", "stages", "texts", "warnings",
                          "output", "timing"})
    CHECK_MESSAGE(rep.contains(key), key);
  CHECK(rep["output"]["level"] == 0);
  CHECK(rep["output"]["nodes"] == r.map.nodes.size());
  CHECK(rep["texts"]["assigned"].size() == 2);
  CHECK(rep["texts"]["unassigned"].empty());
  CHECK(rep["stages"].back()["counts"]["rooms"] == 2);
  CHECK(rep["timing"]["total"].get<double>() >= 0.0);
  for (const char* stage : {"parse", "serialize", "write", "semantics"})
    CHECK_MESSAGE(rep["timing"]["stages"].contains(stage), stage);

  const auto stripped = strip_timing(rep);
  CHECK_FALSE(stripped.contains("timing"));
  CHECK(stripped.size() == rep.size() - 1);
}

TEST_CASE("errors name their stage") {
  const auto layout = fixtures::italian_muri();
  PipelineConfig c;
  c.origin = fixtures::test_origin();
  try {
    (void)convert(fixtures::make_dxf(layout), c);
    FAIL("expected NoStructuralLayers");
  } catch (const Error& e) {
    CHECK(e.kind() == "NoStructuralLayers");
    CHECK(e.category() == ErrorCategory::Input);
    CHECK(std::string(e.what()).rfind("[filter]", 0) == 0);
  }
  try {
    (void)convert("0\nSECTION\n2\nENTITIES\n0\nLINE\n", c);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::Input);
    CHECK(std::string(e.what()).rfind("[parse]", 0) == 0);
  }
  c.raster.resolution = 1.0;
  CHECK_THROWS_AS(convert(fixtures::make_dxf(fixtures::two_rooms()), c), InvalidResolution);
}

TEST_CASE("Italian layer names with an explicit layer list") {
  const auto layout = fixtures::italian_muri();
  const ConversionResult r = convert(fixtures::make_dxf(layout), config_for(layout));
  CHECK(r.segment.graph.rooms.size() == 4);
  CHECK(validate_schema(r.map).empty());
}

TEST_CASE("export after edits") {
  const auto layout = fixtures::three_room_path();
  const ConversionResult r = convert(fixtures::make_dxf(layout), config_for(layout));
  const std::string xml = export_osm(r.segment.graph, fixtures::test_origin(), 0);
  CHECK(xml == r.osm_xml);

  AreaGraph g = r.segment.graph;
  g = merge_rooms(g, {g.rooms[0].id, g.rooms[1].id});
  const OsmMap m = read_osm_xml(export_osm(g, fixtures::test_origin(), 2));
  CHECK(room_areas(m).size() == 2);
  CHECK(validate_schema(m).empty());

  AreaGraph overlapping = r.segment.graph;
  overlapping.rooms[1].polygon = overlapping.rooms[0].polygon;
  CHECK_THROWS_AS(export_osm(overlapping, fixtures::test_origin(), 0), SerializationRefused);
}

TEST_CASE("CLI exit codes") {
  TempDir tmp;
  write(tmp.file("plan.dxf"), fixtures::make_dxf(fixtures::two_rooms()));
  write(tmp.file("muri.dxf"), fixtures::make_dxf(fixtures::italian_muri()));

  CHECK(cli("convert " + tmp.file("plan.dxf") + " -o " + tmp.file("plan.osm") + " --report " +
            tmp.file("plan.json") + " --png " + tmp.file("plan.png") + " --set geo.lat0=31 --set geo.lon0=121") == 0);
  CHECK(read_osm_xml(slurp(tmp.file("plan.osm"))).ways.size() >= 3);
  CHECK(nlohmann::json::parse(slurp(tmp.file("plan.json"))).contains("timing"));
  CHECK(slurp(tmp.file("plan.png")).substr(1, 3) == "PNG");

  CHECK(cli("convert " + tmp.file("missing.dxf") + " -o " + tmp.file("x.osm")) == 2);
  CHECK(cli("convert " + tmp.file("muri.dxf") + " -o " + tmp.file("x.osm")) == 2);
  CHECK(cli("convert " + tmp.file("muri.dxf") + " -o " + tmp.file("x.osm") + " --layers Muri") == 0);
  CHECK(cli("convert " + tmp.file("plan.dxf") + " -o " + tmp.file("x.osm") + " --set raster.resolution=2") == 3);
  CHECK(cli("convert " + tmp.file("plan.dxf") + " -o " + tmp.file("x.osm") + " --set raster.bogus=1") == 3);
  CHECK(cli("frobnicate") == 3);
  CHECK(cli("config --print-defaults") == 0);
  CHECK(cli("merge " + tmp.file("nothing.json") + " -o " + tmp.file("x.osm")) == 2);
  write(tmp.file("bad.json"), "{\"not\": \"a list\"}");
  CHECK(cli("merge " + tmp.file("bad.json") + " -o " + tmp.file("x.osm")) == 3);
}
