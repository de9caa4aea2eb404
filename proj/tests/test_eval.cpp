#include "cad2osm/errors.hpp"
#include "cad2osm/eval.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace cad2osm;
namespace fs = std::filesystem;

namespace {

Ring2d box(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

/// Rooms written straight into a map, bypassing the serializer's invariant
/// checks so predictions may overlap.
OsmMap map_of(const std::vector<Ring2d>& rooms, const std::vector<std::string>& names = {}) {
  OsmMap m;
  m.origin = fixtures::test_origin();
  OsmId next = -1;
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    OsmWay w;
    for (const auto& p : rooms[i]) {
      const LatLon ll = cartesian_to_latlon(p, m.origin);
      m.nodes.push_back({next, quantize7(ll.lat), quantize7(ll.lon), {}});
      w.node_refs.push_back(next--);
    }
    w.node_refs.push_back(w.node_refs.front());
    w.tags = {{"osmAG:type", "area"}, {"indoor", "room"}, {"osmAG:areaType", "room"}, {"level", "0"}};
    if (i < names.size() && !names[i].empty()) w.tags["name"] = names[i];
    m.ways.push_back(std::move(w));
  }
  for (auto& w : m.ways) w.id = next--;
  return m;
}

/// Three 4 m rooms in a row with doors on the walls x = 4 and x = 8.
AreaGraph row_graph() {
  AreaGraph g;
  g.transform.resolution = 0.05;
  g.rooms.push_back({0, {{0, 0}, {4, 0}, {4, 1.5}, {4, 2.5}, {4, 4}, {0, 4}}, {{"name", "A"}}});
  g.rooms.push_back({1, {{4, 0}, {8, 0}, {8, 1.5}, {8, 2.5}, {8, 4}, {4, 4}, {4, 2.5}, {4, 1.5}}, {{"name", "B"}}});
  g.rooms.push_back({2, {{8, 0}, {12, 0}, {12, 4}, {8, 4}, {8, 2.5}, {8, 1.5}}, {{"name", "C"}}});
  return g;
}

Passage door(int id, double x, int a, int b) { return {id, {Point2d(x, 1.5), Point2d(x, 2.5)}, a, b}; }

OsmMap row_map(const std::vector<Passage>& doors) {
  AreaGraph g = row_graph();
  g.passages = doors;
  return serialize_area_graph(g, fixtures::test_origin(), 0);
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cad2osm-eval-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("counts") {
  Counts c;
  CHECK_FALSE(c.precision());
  CHECK_FALSE(c.recall());
  CHECK_FALSE(c.f1());
  c = {3, 1, 2};
  CHECK(*c.precision() == doctest::Approx(0.75));
  CHECK(*c.recall() == doctest::Approx(0.6));
  CHECK(*c.f1() == doctest::Approx(2 * 0.75 * 0.6 / 1.35));
  CHECK(c.gt() == 5);
}

TEST_CASE("identity matching") {
  const OsmMap m = row_map({door(0, 4, 0, 1), door(1, 8, 1, 2)});
  const FileMetrics f = evaluate_map(m, m);
  CHECK(f.rooms.tp == 3);
  CHECK(f.rooms.fp == 0);
  CHECK(f.rooms.fn == 0);
  CHECK(f.passages.tp == 2);
  CHECK(f.passages.fp == 0);
  CHECK(f.passages.fn == 0);
  CHECK(*f.rooms.f1() == 1.0);
  CHECK(*f.semantics.accuracy() == 1.0);
}

TEST_CASE("a split room is one hit and one false positive") {
  const OsmMap gt = map_of({box(0, 0, 10, 4)});
  const OsmMap pred = map_of({box(0, 0, 5, 4), box(5, 0, 9.5, 4)});
  const Matching m = match_rooms(pred, gt);
  CHECK(m.counts.tp == 1);
  CHECK(m.counts.fp == 1);
  CHECK(m.counts.fn == 0);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].first == pred.ways[0].id);
}

TEST_CASE("a merged pair of rooms is all misses") {
  const OsmMap gt = map_of({box(0, 0, 4, 4), box(4, 0, 8, 4)});
  const OsmMap pred = map_of({box(0, 0, 8.2, 4)});
  const Matching m = match_rooms(pred, gt);
  CHECK(m.counts.tp == 0);
  CHECK(m.counts.fp == 1);
  CHECK(m.counts.fn == 2);
}

TEST_CASE("matching is one-to-one and thresholded") {
  const OsmMap gt = map_of({box(0, 0, 4, 4)});
  const OsmMap pred = map_of({box(0, 0, 4, 4), box(0, 0, 4, 4.1)});
  const Matching m = match_rooms(pred, gt);
  CHECK(m.counts.tp == 1);
  CHECK(m.counts.fp == 1);
  CHECK(match_rooms(map_of({box(2.1, 0, 6.1, 4)}), gt, 0.5).counts.tp == 0);
  CHECK(match_rooms(map_of({box(2.1, 0, 6.1, 4)}), gt, 0.3).counts.tp == 1);
}

TEST_CASE("predictions in another frame are re-projected") {
  const OsmMap gt = map_of({box(0, 0, 4, 4)});
  AreaGraph g;
  g.transform.resolution = 0.05;
  // The same room expressed against an origin 10 m further east.
  g.rooms.push_back({0, box(-10, 0, -6, 4), {}});
  const LatLon shifted = cartesian_to_latlon({10, 0}, fixtures::test_origin());
  const OsmMap pred = serialize_area_graph(g, {shifted.lat, shifted.lon, 0.0}, 0);
  CHECK(match_rooms(pred, gt).counts.tp == 1);
}

TEST_CASE("passages") {
  const OsmMap gt = row_map({door(0, 4, 0, 1)});
  SUBCASE("identity") { CHECK(evaluate_map(gt, gt).passages.tp == 1); }
  SUBCASE("wrong pair") {
    const FileMetrics f = evaluate_map(row_map({door(0, 8, 1, 2)}), gt);
    CHECK(f.passages.tp == 0);
    CHECK(f.passages.fp == 1);
    CHECK(f.passages.fn == 1);
  }
  SUBCASE("duplicate on the same pair") {
    const FileMetrics f = evaluate_map(row_map({door(0, 4, 0, 1), door(1, 4, 0, 1)}), gt);
    CHECK(f.passages.tp == 1);
    CHECK(f.passages.fp == 1);
    CHECK(f.passages.fn == 0);
  }
  SUBCASE("right pair but too far away") {
    AreaGraph g = row_graph();
    g.passages = {door(0, 4, 0, 1)};
    const OsmMap pred = serialize_area_graph(g, fixtures::test_origin(), 0);
    EvalParams p;
    p.passage_max_distance = 1.0;
    CHECK(evaluate_map(pred, gt, p).passages.tp == 1);
    // Same door, judged against a ground-truth door at the other end of the wall.
    AreaGraph h = row_graph();
    h.rooms[0].polygon = {{0, 0}, {4, 0}, {4, 3}, {4, 4}, {0, 4}};
    h.rooms[1].polygon = {{4, 0}, {8, 0}, {8, 1.5}, {8, 2.5}, {8, 4}, {4, 4}, {4, 3}};
    h.passages = {{0, {Point2d(4, 3), Point2d(4, 4)}, 0, 1}};
    const OsmMap far_gt = serialize_area_graph(h, fixtures::test_origin(), 0);
    p.passage_max_distance = 0.5;
    const FileMetrics f = evaluate_map(pred, far_gt, p);
    CHECK(f.passages.tp == 0);
    CHECK(f.passages.fp == 1);
    CHECK(f.passages.fn == 1);
  }
}

TEST_CASE("semantic accuracy") {
  std::vector<Ring2d> rooms;
  std::vector<std::string> names, guessed;
  for (int i = 0; i < 10; ++i) {
    rooms.push_back(box(5.0 * i, 0, 5.0 * i + 4, 4));
    names.push_back("Room " + std::to_string(100 + i));
    guessed.push_back(i == 3 ? "Room 999" : (i == 5 ? "  ROOM   105 " : names.back()));
  }
  const OsmMap gt = map_of(rooms, names);
  const OsmMap pred = map_of(rooms, guessed);
  const SemanticScore s = semantic_accuracy(pred, gt, match_rooms(pred, gt));
  CHECK(s.labeled == 10);
  CHECK(s.correct == 9);
  CHECK(*s.accuracy() == doctest::Approx(0.9));

  // A labeled room with no matching prediction counts as wrong.
  const OsmMap partial = map_of({rooms[0]}, {names[0]});
  const OsmMap gt2 = map_of({rooms[0], rooms[1]}, {names[0], names[1]});
  const SemanticScore t = semantic_accuracy(partial, gt2, match_rooms(partial, gt2));
  CHECK(t.labeled == 2);
  CHECK(t.correct == 1);

  CHECK_FALSE(SemanticScore{}.accuracy());
  CHECK(normalize_name("  Office\t 101 \n") == "office 101");
}

TEST_CASE("deleting a prediction never adds hits or false positives") {
  const OsmMap gt = map_of({box(0, 0, 4, 4), box(4, 0, 8, 4), box(8, 0, 12, 4)});
  const std::vector<Ring2d> pred_rooms = {box(0, 0, 4, 4), box(4, 0, 6, 4), box(6, 0, 8, 4), box(8, 0, 12.5, 4)};
  const Counts all = match_rooms(map_of(pred_rooms), gt).counts;
  for (std::size_t k = 0; k < pred_rooms.size(); ++k) {
    std::vector<Ring2d> fewer = pred_rooms;
    fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(k));
    const Counts c = match_rooms(map_of(fewer), gt).counts;
    CHECK(c.tp <= all.tp);
    CHECK(c.fp <= all.fp);
  }
}

TEST_CASE("pooled counts are sums") {
  const OsmMap gt = row_map({door(0, 4, 0, 1), door(1, 8, 1, 2)});
  const FileMetrics a = evaluate_map(gt, gt, {}, "a");
  const FileMetrics b = evaluate_map(row_map({door(0, 8, 1, 2)}), gt, {}, "b");
  const FileMetrics c = evaluate_map(map_of({box(0, 0, 8.2, 4), box(8.2, 0, 12, 4)}), gt, {}, "c");
  const MetricsReport r = aggregate({a, b, c});
  CHECK(r.files.size() == 3);
  CHECK(r.pooled.rooms.tp == a.rooms.tp + b.rooms.tp + c.rooms.tp);
  CHECK(r.pooled.rooms.fp == a.rooms.fp + b.rooms.fp + c.rooms.fp);
  CHECK(r.pooled.rooms.fn == a.rooms.fn + b.rooms.fn + c.rooms.fn);
  CHECK(r.pooled.passages.tp == 3);
  CHECK(r.pooled.passages.fn == 3);
  CHECK(r.pooled.rooms.tp == 7);
  CHECK(r.pooled.rooms.fp == 1);
  CHECK(r.pooled.rooms.fn == 2);
  CHECK(*r.pooled.rooms.precision() == doctest::Approx(7.0 / 8.0));
  CHECK(r.pooled.semantics.labeled == 9);

  const std::string md = r.to_markdown();
  CHECK(md.find("| Element Type | GT | Precision | Recall | F1-Score |") != std::string::npos);
  CHECK(md.find("| Rooms | 9 |") != std::string::npos);
  CHECK(md.find("| Passages | 6 |") != std::string::npos);

  const auto j = r.to_json();
  CHECK(j["pooled"]["rooms"]["tp"] == 7);
  CHECK(j["files"].size() == 3);
}

TEST_CASE("benchmark manifests") {
  TempDir tmp;
  const fs::path manifest = tmp.path / "manifest.json";
  spit(manifest, "[]");
  CHECK_THROWS_AS(run_benchmark(manifest.string()), ManifestError);
  spit(manifest, "{not json");
  CHECK_THROWS_AS(run_benchmark(manifest.string()), ManifestError);
  CHECK_THROWS_AS(run_benchmark((tmp.path / "missing.json").string()), ManifestError);

  // Two converted fixtures and one pre-computed, perturbed prediction.
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& layout : {fixtures::two_rooms(), fixtures::three_room_path()}) {
    spit(tmp.path / (layout.name + ".dxf"), fixtures::make_dxf(layout));
    spit(tmp.path / (layout.name + ".osm"), write_osm_xml(fixtures::ground_truth(layout, {}, 0)));
    entries.push_back({{"dxf", layout.name + ".dxf"}, {"gt_osm", layout.name + ".osm"}});
  }
  const auto grid = fixtures::grid_with_corridor();
  OsmMap gt = fixtures::ground_truth(grid, {}, 0);
  spit(tmp.path / "grid.osm", write_osm_xml(gt));
  OsmMap pred = gt;
  // Drop the first room way; its passages then point at nothing.
  const auto first_room = std::find_if(pred.ways.begin(), pred.ways.end(),
                                       [](const OsmWay& w) { return w.tag("osmAG:type") == "area"; });
  const OsmId dropped = first_room->id;
  pred.ways.erase(first_room);
  std::size_t touching = 0;
  for (const auto& w : gt.ways)
    if (w.tag("osmAG:type") == "passage" &&
        (w.tag("osmAG:from") == std::to_string(dropped) || w.tag("osmAG:to") == std::to_string(dropped)))
      ++touching;
  spit(tmp.path / "grid_pred.osm", write_osm_xml(pred));
  entries.push_back({{"dxf", "unused.dxf"}, {"gt_osm", "grid.osm"}, {"pred_osm", "grid_pred.osm"}});
  spit(manifest, entries.dump(2));

  const MetricsReport r = run_benchmark(manifest.string());
  REQUIRE(r.files.size() == 3);
  CHECK(r.files[0].rooms.tp == 2);
  CHECK(r.files[0].rooms.fp == 0);
  CHECK(r.files[1].rooms.tp == 3);
  CHECK(r.files[1].passages.tp == 2);
  CHECK(r.files[2].rooms.fn == 1);
  CHECK(r.files[2].passages.fn == touching);
  CHECK(r.pooled.rooms.tp == 2 + 3 + 9);
  CHECK(r.pooled.rooms.fn == 1);
  CHECK(r.pooled.rooms.fp == 0);
  CHECK(r.pooled.passages.tp == 1 + 2 + 9 - touching);
  CHECK(r.pooled.passages.fn == touching);
  for (const auto& f : r.files) CHECK(f.processing_time_s >= 0.0);

  SUBCASE("a broken ground truth is reported") {
    spit(tmp.path / "grid.osm", "<osm version=\"0.6\"><way id=\"-1\"><nd ref=\"-5\"/></way></osm>");
    CHECK_THROWS(run_benchmark(manifest.string()));
  }
}
