#include "cad2osm/cad.hpp"

#include "cad2osm/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace cad2osm {
namespace {

struct GroupPair {
  int code = 0;
  std::string value;
  std::size_t offset = 0;  // byte offset of the code line
};

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string trim(std::string_view s) { return std::string(trim_view(s)); }

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<GroupPair> tokenize(std::string_view bytes) {
  std::vector<GroupPair> pairs;
  std::size_t pos = 0;
  auto next_line = [&](std::size_t& line_start) -> std::optional<std::string_view> {
    if (pos >= bytes.size()) return std::nullopt;
    line_start = pos;
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    return line;
  };

  while (true) {
    std::size_t code_offset = 0;
    auto code_line = next_line(code_offset);
    if (!code_line) break;
    const auto code_text = trim_view(*code_line);
    if (code_text.empty() && pos >= bytes.size()) break;  // trailing newline
    int code = 0;
    const auto* first = code_text.data();
    const auto* last = first + code_text.size();
    const auto [ptr, ec] = std::from_chars(first, last, code);
    if (ec != std::errc{} || ptr != last)
      throw ParseError("group code is not an integer: '" + std::string(code_text) + "'",
                       code_offset);
    std::size_t value_offset = 0;
    auto value_line = next_line(value_offset);
    if (!value_line)
      throw ParseError("truncated document: group code " + std::to_string(code) +
                           " has no value",
                       code_offset);
    // Group 1/3 string values keep interior whitespace; everything else is trimmed.
    std::string value = (code == 1 || code == 3) ? std::string(*value_line)
                                                 : trim(*value_line);
    pairs.push_back({code, std::move(value), code_offset});
  }
  return pairs;
}

double to_double(const GroupPair& g) {
  double v = 0.0;
  const auto* first = g.value.data();
  const auto* last = first + g.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParseError("group " + std::to_string(g.code) + " expects a number, got '" +
                         g.value + "'",
                     g.offset);
  return v;
}

long to_long(const GroupPair& g) {
  long v = 0;
  const auto* first = g.value.data();
  const auto* last = first + g.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParseError("group " + std::to_string(g.code) + " expects an integer, got '" +
                         g.value + "'",
                     g.offset);
  return v;
}

std::optional<double> units_scale(long code) {
  switch (code) {
    case 1: return 0.0254;
    case 2: return 0.3048;
    case 3: return 1609.344;
    case 4: return 0.001;
    case 5: return 0.01;
    case 6: return 1.0;
    case 7: return 1000.0;
    case 8: return 0.0254e-6;
    case 9: return 0.0254e-3;
    case 10: return 0.9144;
    case 11: return 1e-10;
    case 12: return 1e-9;
    case 13: return 1e-6;
    case 14: return 0.1;
    default: return std::nullopt;
  }
}

long units_code_for(double scale) {
  for (long code = 1; code <= 14; ++code) {
    const auto s = units_scale(code);
    if (s && std::abs(*s - scale) <= 1e-12 * std::max(1.0, scale)) return code;
  }
  return 0;
}

// Strips MTEXT inline formatting down to plain text; \P becomes '\n'.
std::string strip_mtext(std::string_view raw) {
  std::string out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c == '{' || c == '}') continue;
    if (c != '\\' || i + 1 >= raw.size()) {
      out.push_back(c);
      continue;
    }
    const char k = raw[++i];
    switch (k) {
      case 'P': out.push_back('\n'); break;
      case '~': out.push_back(' '); break;
      case '\\': case '{': case '}': out.push_back(k); break;
      case 'L': case 'l': case 'O': case 'o': case 'K': case 'k': break;
      case 'S': {
        // Stacked fraction "\Snum^den;" or "\Snum/den;".
        const std::size_t end = raw.find(';', i);
        std::string stacked(raw.substr(i + 1, end == std::string_view::npos ? raw.npos : end - i - 1));
        std::replace(stacked.begin(), stacked.end(), '^', '/');
        std::replace(stacked.begin(), stacked.end(), '#', '/');
        out += stacked;
        i = end == std::string_view::npos ? raw.size() : end;
        break;
      }
      default: {
        // \f \F \H \C \c \A \T \Q \W \p codes run to the next ';'.
        const std::size_t end = raw.find(';', i);
        i = end == std::string_view::npos ? raw.size() : end;
        break;
      }
    }
  }
  return out;
}

std::string replace_percent_codes(std::string s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && s[i + 1] == '%') {
      const char k = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i + 2])));
      if (k == 'd') { out += "\xC2\xB0"; i += 2; continue; }
      if (k == 'p') { out += "\xC2\xB1"; i += 2; continue; }
      if (k == 'c') { out += "\xE2\x8C\x80"; i += 2; continue; }
      if (k == '%') { out += '%'; i += 2; continue; }
      if (k == 'u' || k == 'o') { i += 2; continue; }
    }
    out.push_back(s[i]);
  }
  return out;
}

// A raw entity: its type and the group pairs up to the next group 0.
struct RawEntity {
  std::string type;
  std::size_t offset = 0;
  std::vector<GroupPair> groups;
  std::vector<RawEntity> vertices;  // POLYLINE only
  std::vector<RawEntity> block;     // BLOCK definition entities
};

std::string layer_of(const RawEntity& e) {
  for (const auto& g : e.groups)
    if (g.code == 8) return g.value.empty() ? std::string("0") : g.value;
  return "0";
}

// 2D similarity/affine transform used for block expansion.
struct Placement {
  Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
  Point2d offset = Point2d::Zero();

  [[nodiscard]] Point2d apply(const Point2d& p) const { return linear * p + offset; }
  [[nodiscard]] Placement then(const Placement& outer) const {
    return {outer.linear * linear, outer.linear * offset + outer.offset};
  }
  [[nodiscard]] double det() const { return linear.determinant(); }
  [[nodiscard]] bool identity() const {
    return linear == Eigen::Matrix2d::Identity() && offset == Point2d::Zero();
  }
};

double wrap_deg(double a) {
  a = std::fmod(a, 360.0);
  return a < 0 ? a + 360.0 : a;
}

CadEntity transform(const CadEntity& e, const Placement& t) {
  return std::visit(
      [&](const auto& v) -> CadEntity {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Line>) {
          return Line{t.apply(v.p1), t.apply(v.p2)};
        } else if constexpr (std::is_same_v<T, Polyline>) {
          Polyline out = v;
          for (auto& p : out.vertices) p = t.apply(p);
          if (t.det() < 0)
            for (auto& b : out.bulges) b = -b;
          return out;
        } else if constexpr (std::is_same_v<T, Arc>) {
          const double r_scale = std::sqrt(std::abs(t.det()));
          auto at = [&](double deg) {
            const double a = deg * kPi / 180.0;
            return t.apply(v.center + v.radius * Point2d(std::cos(a), std::sin(a)));
          };
          const Point2d c = t.apply(v.center);
          const Point2d s = at(v.start_deg) - c;
          const Point2d f = at(v.end_deg) - c;
          double sa = wrap_deg(std::atan2(s.y(), s.x()) * 180.0 / kPi);
          double ea = wrap_deg(std::atan2(f.y(), f.x()) * 180.0 / kPi);
          if (t.det() < 0) std::swap(sa, ea);
          return Arc{c, v.radius * r_scale, sa, ea};
        } else if constexpr (std::is_same_v<T, Circle>) {
          return Circle{t.apply(v.center), v.radius * std::sqrt(std::abs(t.det()))};
        } else {
          Text out = v;
          out.anchor = t.apply(v.anchor);
          out.height = v.height * std::sqrt(std::abs(t.det()));
          return out;
        }
      },
      e);
}

class DxfReader {
 public:
  explicit DxfReader(std::vector<GroupPair> pairs) : pairs_(std::move(pairs)) {}

  CadDocument read() {
    bool saw_units = false;
    while (i_ < pairs_.size()) {
      const auto& g = pairs_[i_];
      if (g.code == 999) { ++i_; continue; }  // comment
      if (g.code != 0)
        throw ParseError("expected group 0 at top level, got " + std::to_string(g.code),
                         g.offset);
      if (g.value == "EOF") break;
      if (g.value != "SECTION")
        throw ParseError("expected SECTION, got '" + g.value + "'", g.offset);
      ++i_;
      if (i_ >= pairs_.size() || pairs_[i_].code != 2)
        throw ParseError("SECTION without a name", g.offset);
      const std::string name = pairs_[i_].value;
      ++i_;
      if (name == "HEADER") {
        saw_units = read_header() || saw_units;
      } else if (name == "BLOCKS") {
        read_blocks();
      } else if (name == "ENTITIES") {
        read_entities_section();
      } else {
        skip_section();
      }
    }

    if (!saw_units) {
      doc_.drawing_unit_scale = 0.001;
      doc_.warnings.push_back("no $INSUNITS header; assuming 1 drawing unit = 1 mm");
    }
    for (const auto& raw : top_level_) place(raw, Placement{}, std::string{}, 1);
    doc_.recompute_extents();
    return std::move(doc_);
  }

 private:
  const GroupPair& expect_more(std::size_t after_offset, const char* where) {
    if (i_ >= pairs_.size())
      throw ParseError(std::string("unexpected end of document inside ") + where,
                       after_offset);
    return pairs_[i_];
  }

  std::size_t last_offset() const {
    return pairs_.empty() ? 0 : pairs_.back().offset;
  }

  bool read_header() {
    bool saw_units = false;
    while (true) {
      const auto& g = expect_more(last_offset(), "HEADER");
      if (g.code == 0 && g.value == "ENDSEC") { ++i_; return saw_units; }
      if (g.code == 9 && g.value == "$INSUNITS") {
        ++i_;
        const auto& v = expect_more(g.offset, "HEADER");
        if (v.code != 70) throw ParseError("$INSUNITS expects group 70", v.offset);
        const long code = to_long(v);
        if (const auto s = units_scale(code)) {
          doc_.drawing_unit_scale = *s;
          saw_units = true;
        } else {
          doc_.warnings.push_back("$INSUNITS=" + std::to_string(code) +
                                  " is unitless/unknown; assuming 1 drawing unit = 1 mm");
        }
      }
      ++i_;
    }
  }

  void skip_section() {
    while (true) {
      const auto& g = expect_more(last_offset(), "section");
      ++i_;
      if (g.code == 0 && g.value == "ENDSEC") return;
    }
  }

  // Reads one entity starting at a group 0; leaves i_ at the next group 0.
  RawEntity read_raw() {
    RawEntity e;
    e.type = pairs_[i_].value;
    e.offset = pairs_[i_].offset;
    ++i_;
    while (i_ < pairs_.size() && pairs_[i_].code != 0) e.groups.push_back(pairs_[i_++]);
    if (i_ >= pairs_.size())
      throw ParseError("unexpected end of document inside " + e.type + " entity", e.offset);
    return e;
  }

  // Reads entities until a group 0 with one of the terminators.
  std::vector<RawEntity> read_entity_list(std::initializer_list<std::string_view> stop,
                                          const char* where) {
    std::vector<RawEntity> out;
    while (true) {
      const auto& g = expect_more(last_offset(), where);
      if (g.code != 0)
        throw ParseError("expected group 0 inside " + std::string(where), g.offset);
      if (std::find(stop.begin(), stop.end(), g.value) != stop.end()) return out;
      RawEntity e = read_raw();
      if (e.type == "POLYLINE") {
        while (true) {
          const auto& v = expect_more(e.offset, "POLYLINE");
          if (v.value == "SEQEND") { read_raw(); break; }
          if (v.value != "VERTEX")
            throw ParseError("POLYLINE expects VERTEX or SEQEND, got '" + v.value + "'",
                             v.offset);
          e.vertices.push_back(read_raw());
        }
      } else if (e.type == "INSERT") {
        // Attribute sequences (group 66 = 1) end with SEQEND.
        bool has_attribs = false;
        for (const auto& gg : e.groups)
          if (gg.code == 66 && to_long(gg) == 1) has_attribs = true;
        if (has_attribs) {
          while (true) {
            const auto& v = expect_more(e.offset, "INSERT attributes");
            const bool end = v.value == "SEQEND";
            read_raw();
            if (end) break;
            ++doc_.unsupported["ATTRIB"];
          }
        }
      }
      out.push_back(std::move(e));
    }
  }

  void read_entities_section() {
    auto list = read_entity_list({"ENDSEC"}, "ENTITIES");
    ++i_;  // ENDSEC
    for (auto& e : list) top_level_.push_back(std::move(e));
  }

  void read_blocks() {
    while (true) {
      const auto& g = expect_more(last_offset(), "BLOCKS");
      if (g.code == 0 && g.value == "ENDSEC") { ++i_; return; }
      if (g.code != 0 || g.value != "BLOCK")
        throw ParseError("expected BLOCK inside BLOCKS, got '" + g.value + "'", g.offset);
      RawEntity block = read_raw();
      block.block = read_entity_list({"ENDBLK"}, "BLOCK");
      read_raw();  // ENDBLK
      std::string name;
      for (const auto& bg : block.groups)
        if (bg.code == 2) name = bg.value;
      blocks_[name] = std::move(block);
    }
  }

  static std::optional<double> find(const RawEntity& e, int code) {
    for (const auto& g : e.groups)
      if (g.code == code) return to_double(g);
    return std::nullopt;
  }

  static std::string find_string(const RawEntity& e, int code) {
    for (const auto& g : e.groups)
      if (g.code == code) return g.value;
    return {};
  }

  static Point2d point(const RawEntity& e, int xcode) {
    return {find(e, xcode).value_or(0.0), find(e, xcode + 10).value_or(0.0)};
  }

  void add(const std::string& layer, CadEntity entity) {
    doc_.layers[layer].push_back(std::move(entity));
  }

  void place(const RawEntity& raw, const Placement& t, const std::string& parent_layer,
             int depth) {
    std::string layer = layer_of(raw);
    if (!parent_layer.empty() && layer == "0") layer = parent_layer;

    auto emit = [&](CadEntity e) { add(layer, t.identity() ? std::move(e) : transform(e, t)); };

    if (raw.type == "LINE") {
      emit(Line{point(raw, 10), point(raw, 11)});
    } else if (raw.type == "LWPOLYLINE") {
      Polyline pl;
      bool any_bulge = false;
      std::vector<double> bulges;
      for (const auto& g : raw.groups) {
        if (g.code == 10) { pl.vertices.emplace_back(to_double(g), 0.0); bulges.push_back(0.0); }
        else if (g.code == 20 && !pl.vertices.empty()) pl.vertices.back().y() = to_double(g);
        else if (g.code == 42 && !bulges.empty()) { bulges.back() = to_double(g); any_bulge = any_bulge || bulges.back() != 0.0; }
        else if (g.code == 70) pl.closed = (to_long(g) & 1) != 0;
      }
      if (any_bulge) pl.bulges = std::move(bulges);
      emit_polyline(std::move(pl), layer, t, raw.offset);
    } else if (raw.type == "POLYLINE") {
      const long flags = static_cast<long>(find(raw, 70).value_or(0.0));
      if (flags & (16 | 64)) { ++doc_.unsupported["POLYLINE(mesh)"]; return; }
      Polyline pl;
      pl.closed = (flags & 1) != 0;
      bool any_bulge = false;
      std::vector<double> bulges;
      for (const auto& v : raw.vertices) {
        const long vflags = static_cast<long>(find(v, 70).value_or(0.0));
        if (vflags & 16) continue;  // spline frame control point
        pl.vertices.push_back(point(v, 10));
        bulges.push_back(find(v, 42).value_or(0.0));
        any_bulge = any_bulge || bulges.back() != 0.0;
      }
      if (any_bulge) pl.bulges = std::move(bulges);
      emit_polyline(std::move(pl), layer, t, raw.offset);
    } else if (raw.type == "ARC" || raw.type == "CIRCLE") {
      const double r = find(raw, 40).value_or(0.0);
      if (r <= 0.0) {
        doc_.warnings.push_back(raw.type + " with non-positive radius skipped at byte " +
                                std::to_string(raw.offset));
        return;
      }
      if (raw.type == "ARC")
        emit(Arc{point(raw, 10), r, find(raw, 50).value_or(0.0), find(raw, 51).value_or(360.0)});
      else
        emit(Circle{point(raw, 10), r});
    } else if (raw.type == "TEXT" || raw.type == "MTEXT") {
      std::string content;
      if (raw.type == "MTEXT") {
        for (const auto& g : raw.groups)
          if (g.code == 3) content += g.value;
        content = strip_mtext(content + find_string(raw, 1));
      } else {
        content = find_string(raw, 1);
      }
      content = replace_percent_codes(std::move(content));
      if (trim_view(content).empty()) {
        doc_.warnings.push_back("empty " + raw.type + " skipped at byte " +
                                std::to_string(raw.offset));
        return;
      }
      emit(Text{point(raw, 10), content, find(raw, 40).value_or(0.0)});
    } else if (raw.type == "INSERT") {
      expand_insert(raw, t, layer, depth);
    } else {
      ++doc_.unsupported[raw.type];
    }
  }

  void emit_polyline(Polyline pl, const std::string& layer, const Placement& t,
                     std::size_t offset) {
    if (pl.vertices.size() < 2) {
      doc_.warnings.push_back("polyline with fewer than 2 vertices skipped at byte " +
                              std::to_string(offset));
      return;
    }
    add(layer, t.identity() ? CadEntity(std::move(pl)) : transform(pl, t));
  }

  void expand_insert(const RawEntity& raw, const Placement& t, const std::string& layer,
                     int depth) {
    const std::string name = find_string(raw, 2);
    const auto it = blocks_.find(name);
    if (it == blocks_.end()) {
      doc_.warnings.push_back("INSERT of undefined block '" + name + "' skipped");
      return;
    }
    if (depth > 4) {
      doc_.warnings.push_back("block '" + name + "' nested deeper than 4 levels skipped");
      return;
    }
    const double sx = find(raw, 41).value_or(1.0);
    const double sy = find(raw, 42).value_or(1.0);
    const double rot = find(raw, 50).value_or(0.0) * kPi / 180.0;
    if (find(raw, 70).value_or(1.0) > 1.0 || find(raw, 71).value_or(1.0) > 1.0)
      doc_.warnings.push_back("array INSERT of '" + name + "' expanded once");
    if (std::abs(std::abs(sx) - std::abs(sy)) > 1e-9) {
      bool curved = false;
      for (const auto& e : it->second.block)
        curved = curved || e.type == "ARC" || e.type == "CIRCLE";
      if (curved)
        doc_.warnings.push_back("non-uniform scale on block '" + name +
                                "' approximates arcs by circles of mean radius");
    }
    const Point2d base = point(it->second, 10);
    Placement local;
    local.linear = Eigen::Rotation2Dd(rot).toRotationMatrix() *
                   Eigen::DiagonalMatrix<double, 2>(sx, sy);
    local.offset = point(raw, 10) - local.linear * base;
    const Placement combined = local.then(t);
    for (const auto& child : it->second.block) place(child, combined, layer, depth + 1);
  }

  std::vector<GroupPair> pairs_;
  std::size_t i_ = 0;
  CadDocument doc_;
  std::vector<RawEntity> top_level_;
  std::unordered_map<std::string, RawEntity> blocks_;
};

void append_bounds(Box2d& box, const CadEntity& e) { box.extend(entity_bounds(e)); }

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Box2d entity_bounds(const CadEntity& e) {
  Box2d box;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Line>) {
          box.extend(v.p1);
          box.extend(v.p2);
        } else if constexpr (std::is_same_v<T, Polyline>) {
          for (const auto& p : v.vertices) box.extend(p);
        } else if constexpr (std::is_same_v<T, Arc> || std::is_same_v<T, Circle>) {
          box.extend(v.center - Point2d::Constant(v.radius));
          box.extend(v.center + Point2d::Constant(v.radius));
        } else {
          box.extend(v.anchor);
        }
      },
      e);
  return box;
}

std::size_t CadDocument::entity_count() const {
  std::size_t n = 0;
  for (const auto& [name, list] : layers) n += list.size();
  return n;
}

void CadDocument::recompute_extents() {
  extents.setEmpty();
  for (const auto& [name, list] : layers)
    for (const auto& e : list) append_bounds(extents, e);
}

CadDocument parse_dxf(std::string_view bytes) {
  if (bytes.substr(0, 18) == "AutoCAD Binary DXF")
    throw ParseError("binary DXF is not supported", 0);
  auto pairs = tokenize(bytes);
  if (pairs.empty()) throw EmptyDocument("DXF document contains no group codes");
  CadDocument doc = DxfReader(std::move(pairs)).read();
  if (doc.entity_count() == 0 && doc.unsupported.empty())
    throw EmptyDocument("DXF document contains no entities");
  return doc;
}

std::string write_dxf(const CadDocument& doc) {
  std::ostringstream out;
  auto pair = [&](int code, const std::string& value) { out << code << '\n' << value << '\n'; };
  auto num = [&](int code, double v) { pair(code, fmt_num(v)); };

  pair(0, "SECTION");
  pair(2, "HEADER");
  pair(9, "$INSUNITS");
  pair(70, std::to_string(units_code_for(doc.drawing_unit_scale)));
  pair(0, "ENDSEC");
  pair(0, "SECTION");
  pair(2, "ENTITIES");
  for (const auto& [layer, list] : doc.layers) {
    for (const auto& e : list) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Line>) {
              pair(0, "LINE");
              pair(8, layer);
              num(10, v.p1.x()); num(20, v.p1.y()); num(30, 0.0);
              num(11, v.p2.x()); num(21, v.p2.y()); num(31, 0.0);
            } else if constexpr (std::is_same_v<T, Polyline>) {
              pair(0, "LWPOLYLINE");
              pair(8, layer);
              pair(90, std::to_string(v.vertices.size()));
              pair(70, v.closed ? "1" : "0");
              for (std::size_t k = 0; k < v.vertices.size(); ++k) {
                num(10, v.vertices[k].x());
                num(20, v.vertices[k].y());
                if (!v.bulges.empty() && v.bulges[k] != 0.0) num(42, v.bulges[k]);
              }
            } else if constexpr (std::is_same_v<T, Arc>) {
              pair(0, "ARC");
              pair(8, layer);
              num(10, v.center.x()); num(20, v.center.y()); num(30, 0.0);
              num(40, v.radius); num(50, v.start_deg); num(51, v.end_deg);
            } else if constexpr (std::is_same_v<T, Circle>) {
              pair(0, "CIRCLE");
              pair(8, layer);
              num(10, v.center.x()); num(20, v.center.y()); num(30, 0.0);
              num(40, v.radius);
            } else {
              const bool multiline = v.content.find('\n') != std::string::npos;
              pair(0, multiline ? "MTEXT" : "TEXT");
              pair(8, layer);
              num(10, v.anchor.x()); num(20, v.anchor.y()); num(30, 0.0);
              num(40, v.height);
              std::string content;
              for (const char c : v.content) {
                if (c == '\n') content += "\\P";
                else if (multiline && (c == '\\' || c == '{' || c == '}')) { content += '\\'; content += c; }
                else content += c;
              }
              pair(1, content);
            }
          },
          e);
    }
  }
  pair(0, "ENDSEC");
  pair(0, "EOF");
  return out.str();
}

void LayerFilter::validate() const {
  for (const auto& inc : include_keywords)
    for (const auto& exc : exclude_keywords)
      if (upper(inc) == upper(exc))
        throw ConfigError("layer keyword '" + inc + "' is both included and excluded");
}

bool LayerFilter::matches(std::string_view layer) const {
  if (explicit_layers)
    return std::find(explicit_layers->begin(), explicit_layers->end(), layer) !=
           explicit_layers->end();
  const std::string name = upper(layer);
  auto hit = [&](const std::vector<std::string>& keys) {
    return std::any_of(keys.begin(), keys.end(), [&](const std::string& k) {
      return !k.empty() && name.find(upper(k)) != std::string::npos;
    });
  };
  return hit(include_keywords) && !hit(exclude_keywords);
}

FilterResult filter_layers(const CadDocument& doc, const LayerFilter& filter) {
  filter.validate();
  FilterResult result;
  result.document.drawing_unit_scale = doc.drawing_unit_scale;
  result.document.warnings = doc.warnings;
  result.document.unsupported = doc.unsupported;
  for (const auto& [name, list] : doc.layers) {
    if (filter.matches(name))
      result.document.layers.emplace(name, list);
    else
      result.dropped_layers.push_back(name);
  }
  if (result.document.layers.empty())
    throw NoStructuralLayers(
        "no layer matches the structural layer filter; select layers explicitly");
  result.document.recompute_extents();
  return result;
}

std::vector<TextAnnotation> extract_text(const CadDocument& doc, const LayerFilter& filter) {
  std::vector<TextAnnotation> out;
  for (const auto& [name, list] : doc.layers) {
    if (filter.text_layers &&
        std::find(filter.text_layers->begin(), filter.text_layers->end(), name) ==
            filter.text_layers->end())
      continue;
    for (const auto& e : list) {
      const auto* text = std::get_if<Text>(&e);
      if (!text) continue;
      std::size_t line_no = 0;
      std::istringstream lines(text->content);
      for (std::string line; std::getline(lines, line); ++line_no) {
        std::string content = trim(line);
        if (content.empty()) continue;
        const Point2d pos = text->anchor - Point2d(0.0, double(line_no) * text->height);
        out.push_back({std::move(content), pos, name});
      }
    }
  }
  return out;
}

std::string layer_summary_json(const CadDocument& doc) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, list] : doc.layers) j[name] = list.size();
  return j.dump(2);
}

}  // namespace cad2osm
