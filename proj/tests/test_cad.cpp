#include "cad2osm/cad.hpp"
#include "cad2osm/errors.hpp"

#include <doctest.h>

#include <sstream>

using namespace cad2osm;

namespace {

// Minimal ASCII DXF writer for hand-made inputs: pairs of (code, value).
std::string dxf(std::initializer_list<std::pair<int, std::string>> pairs) {
  std::ostringstream out;
  for (const auto& [code, value] : pairs) out << code << "\n" << value << "\n";
  return out.str();
}

std::string with_header(const std::string& entities, int insunits = 6) {
  return dxf({{0, "SECTION"}, {2, "HEADER"}, {9, "$INSUNITS"}, {70, std::to_string(insunits)}, {0, "ENDSEC"},
              {0, "SECTION"}, {2, "ENTITIES"}}) +
         entities + dxf({{0, "ENDSEC"}, {0, "EOF"}});
}

std::string line(const char* layer, double x1, double y1, double x2, double y2) {
  return dxf({{0, "LINE"}, {8, layer}, {10, std::to_string(x1)}, {20, std::to_string(y1)},
              {11, std::to_string(x2)}, {21, std::to_string(y2)}});
}

}  // namespace

TEST_CASE("parse_dxf reads a single line") {
  const CadDocument doc = parse_dxf(with_header(line("A-WALL", 0, 0, 10, 0)));
  REQUIRE(doc.layers.size() == 1);
  const auto& list = doc.layers.at("A-WALL");
  REQUIRE(list.size() == 1);
  const auto* l = std::get_if<Line>(&list[0]);
  REQUIRE(l);
  CHECK(l->p1 == Point2d(0, 0));
  CHECK(l->p2 == Point2d(10, 0));
  CHECK(doc.drawing_unit_scale == 1.0);
  CHECK(doc.warnings.empty());
}

TEST_CASE("parse_dxf reads a closed LWPOLYLINE and a TEXT on separate layers") {
  const std::string body =
      dxf({{0, "LWPOLYLINE"}, {8, "A-WALL"}, {90, "4"}, {70, "1"},
           {10, "0"}, {20, "0"}, {10, "4"}, {20, "0"}, {10, "4"}, {20, "3"}, {10, "0"}, {20, "3"},
           {0, "TEXT"}, {8, "A-ANNO"}, {10, "2"}, {20, "1.5"}, {40, "0.25"}, {1, "Office 101"}});
  const CadDocument doc = parse_dxf(with_header(body));
  CHECK(doc.layers.size() == 2);
  const auto* pl = std::get_if<Polyline>(&doc.layers.at("A-WALL").at(0));
  REQUIRE(pl);
  CHECK(pl->closed);
  CHECK(pl->vertices.size() == 4);
  const auto* t = std::get_if<Text>(&doc.layers.at("A-ANNO").at(0));
  REQUIRE(t);
  CHECK(t->content == "Office 101");
  CHECK(t->anchor == Point2d(2, 1.5));
}

TEST_CASE("missing $INSUNITS defaults to millimetres with a warning") {
  const std::string bytes = dxf({{0, "SECTION"}, {2, "ENTITIES"}}) + line("A-WALL", 0, 0, 1000, 0) +
                            dxf({{0, "ENDSEC"}, {0, "EOF"}});
  const CadDocument doc = parse_dxf(bytes);
  CHECK(doc.drawing_unit_scale == doctest::Approx(0.001));
  CHECK_FALSE(doc.warnings.empty());
}

TEST_CASE("unsupported entities are counted, not fatal") {
  const std::string body = line("A-WALL", 0, 0, 1, 0) + dxf({{0, "HATCH"}, {8, "A-WALL"}, {10, "0"}, {20, "0"}});
  const CadDocument doc = parse_dxf(with_header(body));
  CHECK(doc.entity_count() == 1);
  CHECK(doc.unsupported.at("HATCH") == 1);
}

TEST_CASE("truncated input raises ParseError with an offset") {
  std::string bytes = with_header(line("A-WALL", 0, 0, 10, 0));
  bytes = bytes.substr(0, bytes.find("10.000000") + 3);
  CHECK_THROWS_AS(parse_dxf(bytes), ParseError);
  try {
    parse_dxf("0\nSECTION\n2\nENTITIES\n0\nLINE\n8\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.kind() == "ParseError");
    CHECK(e.offset() > 0);
  }
}

TEST_CASE("empty document") {
  CHECK_THROWS_AS(parse_dxf(""), EmptyDocument);
  CHECK_THROWS_AS(parse_dxf(with_header("")), EmptyDocument);
}

TEST_CASE("arcs and circles survive parsing") {
  const std::string body =
      dxf({{0, "ARC"}, {8, "A-WALL"}, {10, "1"}, {20, "2"}, {40, "3"}, {50, "0"}, {51, "90"},
           {0, "CIRCLE"}, {8, "A-COLS"}, {10, "5"}, {20, "5"}, {40, "0.5"}});
  const CadDocument doc = parse_dxf(with_header(body));
  const auto* arc = std::get_if<Arc>(&doc.layers.at("A-WALL").at(0));
  REQUIRE(arc);
  CHECK(arc->radius == 3.0);
  CHECK(arc->end_deg == 90.0);
  CHECK(std::holds_alternative<Circle>(doc.layers.at("A-COLS").at(0)));
}

TEST_CASE("write_dxf round-trips coordinates") {
  CadDocument doc;
  doc.drawing_unit_scale = 0.001;
  doc.layers["A-WALL"].push_back(Line{{0.1234567890123, -5.5}, {1e4 / 3.0, 2.0 / 7.0}});
  Polyline pl;
  pl.vertices = {{0, 0}, {10, 0}, {10, 10}};
  pl.bulges = {0.0, 0.5, 0.0};
  pl.closed = true;
  doc.layers["A-WALL"].push_back(pl);
  doc.layers["A-ANNO"].push_back(Text{{1.0 / 3.0, 2.0}, "Lab 2", 250.0});
  doc.recompute_extents();

  const CadDocument back = parse_dxf(write_dxf(doc));
  CHECK(back.drawing_unit_scale == doctest::Approx(0.001));
  const auto* l = std::get_if<Line>(&back.layers.at("A-WALL").at(0));
  REQUIRE(l);
  CHECK((l->p1 - Point2d(0.1234567890123, -5.5)).norm() < 1e-9);
  CHECK((l->p2 - Point2d(1e4 / 3.0, 2.0 / 7.0)).norm() < 1e-9);
  const auto* p = std::get_if<Polyline>(&back.layers.at("A-WALL").at(1));
  REQUIRE(p);
  CHECK(p->closed);
  REQUIRE(p->bulges.size() == 3);
  CHECK(p->bulges[1] == doctest::Approx(0.5));
  CHECK(std::get<Text>(back.layers.at("A-ANNO").at(0)).content == "Lab 2");
}

TEST_CASE("keyword layer filter keeps NCS structural layers") {
  CadDocument doc;
  for (const char* name : {"A-WALL", "A-FURN", "A-ANNO"}) doc.layers[name].push_back(Line{{0, 0}, {1, 1}});
  const FilterResult r = filter_layers(doc, LayerFilter{});
  CHECK(r.document.layers.size() == 1);
  CHECK(r.document.layers.count("A-WALL") == 1);
  CHECK(r.dropped_layers == std::vector<std::string>{"A-ANNO", "A-FURN"});

  SUBCASE("idempotent") {
    const FilterResult again = filter_layers(r.document, LayerFilter{});
    CHECK(again.document.layers.size() == 1);
    CHECK(again.dropped_layers.empty());
  }
  SUBCASE("case-insensitive") {
    CadDocument lower;
    lower.layers["a-wall-ext"].push_back(Line{{0, 0}, {1, 1}});
    CHECK(filter_layers(lower, LayerFilter{}).document.layers.size() == 1);
  }
  SUBCASE("exclude keywords win") {
    LayerFilter f;
    f.exclude_keywords = {"FURN"};
    CadDocument d;
    d.layers["A-WALL-FURN"].push_back(Line{{0, 0}, {1, 1}});
    d.layers["A-WALL"].push_back(Line{{0, 0}, {1, 1}});
    CHECK(filter_layers(d, f).document.layers.size() == 1);
  }
}

TEST_CASE("explicit layers override keywords") {
  CadDocument doc;
  doc.layers["Muri"].push_back(Line{{0, 0}, {1, 1}});
  doc.layers["A-WALL"].push_back(Line{{0, 0}, {1, 1}});
  LayerFilter f;
  f.explicit_layers = std::vector<std::string>{"Muri"};
  const FilterResult r = filter_layers(doc, f);
  REQUIRE(r.document.layers.size() == 1);
  CHECK(r.document.layers.begin()->first == "Muri");
}

TEST_CASE("no structural layer") {
  CadDocument doc;
  doc.layers["FURNITURE"].push_back(Line{{0, 0}, {1, 1}});
  CHECK_THROWS_AS(filter_layers(doc, LayerFilter{}), NoStructuralLayers);
}

TEST_CASE("overlapping include and exclude keywords are a config error") {
  LayerFilter f;
  f.exclude_keywords = {"wall"};
  CHECK_THROWS_AS(f.validate(), ConfigError);
}

TEST_CASE("extract_text") {
  CadDocument doc;
  SUBCASE("single text") {
    doc.layers["A-ANNO"].push_back(Text{{5, 5}, "  Lab 2 ", 0.3});
    const auto texts = extract_text(doc, LayerFilter{});
    REQUIRE(texts.size() == 1);
    CHECK(texts[0].content == "Lab 2");
    CHECK(texts[0].position == Point2d(5, 5));
    CHECK(texts[0].source_layer == "A-ANNO");
  }
  SUBCASE("multi-line MTEXT is split with a line-height offset") {
    const std::string body = dxf({{0, "MTEXT"}, {8, "A-ANNO"}, {10, "1"}, {20, "1"}, {40, "0.3"}, {1, "Room\\P101"}});
    doc = parse_dxf(with_header(body));
    const auto texts = extract_text(doc, LayerFilter{});
    REQUIRE(texts.size() == 2);
    CHECK(texts[0].content == "Room");
    CHECK(texts[1].content == "101");
    CHECK(texts[0].position == Point2d(1, 1));
    CHECK(texts[1].position.y() == doctest::Approx(0.7));
  }
  SUBCASE("text layers restrict the source") {
    doc.layers["A-ANNO"].push_back(Text{{0, 0}, "Kept", 1});
    doc.layers["A-DIMS"].push_back(Text{{0, 0}, "2400", 1});
    LayerFilter f;
    f.text_layers = std::vector<std::string>{"A-ANNO"};
    const auto texts = extract_text(doc, f);
    REQUIRE(texts.size() == 1);
    CHECK(texts[0].content == "Kept");
  }
  SUBCASE("no text") {
    doc.layers["A-WALL"].push_back(Line{{0, 0}, {1, 1}});
    CHECK(extract_text(doc, LayerFilter{}).empty());
  }
}

TEST_CASE("block inserts are expanded with their placement") {
  const std::string bytes =
      dxf({{0, "SECTION"}, {2, "HEADER"}, {9, "$INSUNITS"}, {70, "6"}, {0, "ENDSEC"},
           {0, "SECTION"}, {2, "BLOCKS"}, {0, "BLOCK"}, {8, "0"}, {2, "DOOR"}, {10, "0"}, {20, "0"}}) +
      line("A-DOOR", 0, 0, 1, 0) +
      dxf({{0, "ENDBLK"}, {0, "ENDSEC"}, {0, "SECTION"}, {2, "ENTITIES"},
           {0, "INSERT"}, {8, "A-DOOR"}, {2, "DOOR"}, {10, "5"}, {20, "5"}, {41, "2"}, {42, "2"}, {50, "90"},
           {0, "ENDSEC"}, {0, "EOF"}});
  const CadDocument doc = parse_dxf(bytes);
  REQUIRE(doc.layers.count("A-DOOR"));
  const auto* l = std::get_if<Line>(&doc.layers.at("A-DOOR").at(0));
  REQUIRE(l);
  CHECK((l->p1 - Point2d(5, 5)).norm() < 1e-9);
  CHECK((l->p2 - Point2d(5, 7)).norm() < 1e-9);
}

TEST_CASE("layer summary JSON") {
  CadDocument doc;
  doc.layers["A-WALL"].push_back(Line{{0, 0}, {1, 1}});
  doc.layers["A-WALL"].push_back(Line{{0, 0}, {1, 2}});
  CHECK(layer_summary_json(doc).find("\"A-WALL\": 2") != std::string::npos);
}
