#include "cad2osm/eval.hpp"

#include "cad2osm/boolean.hpp"
#include "cad2osm/errors.hpp"
#include "cad2osm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <tuple>

namespace cad2osm {
namespace {

using json = nlohmann::json;

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return double(num) / double(den);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Area {
  OsmId id;
  Ring2d polygon;
  Box2d box;
  std::string name;
};

Point2d reproject(const Point2d& p, const GeoOrigin& from, const GeoOrigin& to) {
  if (from == to) return p;
  return latlon_to_cartesian(cartesian_to_latlon(p, from), to);
}

std::vector<Area> areas_in(const OsmMap& map, const GeoOrigin& frame) {
  std::vector<Area> out;
  for (auto& a : room_areas(map)) {
    Area area{a.way_id, {}, Box2d(), {}};
    for (const auto& p : a.polygon) {
      area.polygon.push_back(reproject(p, map.origin, frame));
      area.box.extend(area.polygon.back());
    }
    if (auto it = a.tags.find("name"); it != a.tags.end()) area.name = it->second;
    out.push_back(std::move(area));
  }
  return out;
}

struct Door {
  OsmId id;
  std::pair<OsmId, OsmId> rooms;  // ordered (min, max)
  Point2d midpoint;
};

std::vector<Door> doors_in(const OsmMap& map, const GeoOrigin& frame) {
  std::vector<Door> out;
  for (const auto& p : passages(map)) {
    const OsmWay* way = map.find_way(p.way_id);
    const auto rooms = way ? passage_rooms(map, *way) : std::nullopt;
    if (!rooms) continue;
    const Point2d mid = (p.endpoints[0] + p.endpoints[1]) / 2.0;
    out.push_back({p.way_id, std::minmax(rooms->first, rooms->second), reproject(mid, map.origin, frame)});
  }
  return out;
}

std::string format_ratio(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *v * 100.0);
  return buf;
}

json counts_json(const Counts& c) {
  return {{"tp", c.tp},
          {"fp", c.fp},
          {"fn", c.fn},
          {"gt", c.gt()},
          {"precision", optional_json(c.precision())},
          {"recall", optional_json(c.recall())},
          {"f1", optional_json(c.f1())}};
}

json file_json(const FileMetrics& f) {
  return {{"name", f.name},
          {"rooms", counts_json(f.rooms)},
          {"passages", counts_json(f.passages)},
          {"semantic",
           {{"labeled", f.semantics.labeled},
            {"correct", f.semantics.correct},
            {"accuracy", optional_json(f.semantics.accuracy())}}},
          {"processing_time_s", f.processing_time_s}};
}

std::string slurp(const std::filesystem::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot read " + what + " " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

std::optional<double> Counts::precision() const { return ratio(tp, tp + fp); }
std::optional<double> Counts::recall() const { return ratio(tp, tp + fn); }
std::optional<double> Counts::f1() const {
  const auto p = precision(), r = recall();
  if (!p || !r) return std::nullopt;
  if (*p + *r == 0.0) return 0.0;
  return 2.0 * *p * *r / (*p + *r);
}

std::optional<double> SemanticScore::accuracy() const { return ratio(correct, labeled); }

Matching match_rooms(const OsmMap& pred, const OsmMap& gt, double iou_threshold) {
  const auto p = areas_in(pred, gt.origin);
  const auto g = areas_in(gt, gt.origin);
  std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!p[i].box.intersects(g[j].box)) continue;
      const double v = iou(p[i].polygon, g[j].polygon);
      if (v >= iou_threshold && v > 0.0) candidates.emplace_back(v, i, j);
    }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    return std::get<0>(a) > std::get<0>(b);
  });
  Matching m;
  std::vector<bool> used_p(p.size()), used_g(g.size());
  for (const auto& [v, i, j] : candidates) {
    if (used_p[i] || used_g[j]) continue;
    used_p[i] = used_g[j] = true;
    m.pairs.emplace_back(p[i].id, g[j].id);
    m.pred_to_gt[p[i].id] = g[j].id;
  }
  m.counts.tp = m.pairs.size();
  m.counts.fp = p.size() - m.pairs.size();
  m.counts.fn = g.size() - m.pairs.size();
  return m;
}

Matching match_passages(const OsmMap& pred, const OsmMap& gt, const Matching& rooms,
                        double max_distance) {
  const auto p = doors_in(pred, gt.origin);
  const auto g = doors_in(gt, gt.origin);
  std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto a = rooms.pred_to_gt.find(p[i].rooms.first);
    const auto b = rooms.pred_to_gt.find(p[i].rooms.second);
    if (a == rooms.pred_to_gt.end() || b == rooms.pred_to_gt.end()) continue;
    const std::pair<OsmId, OsmId> mapped = std::minmax(a->second, b->second);
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (g[j].rooms != mapped) continue;
      const double d = (p[i].midpoint - g[j].midpoint).norm();
      if (d <= max_distance) candidates.emplace_back(d, i, j);
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    return std::get<0>(a) < std::get<0>(b);
  });
  Matching m;
  std::vector<bool> used_p(p.size()), used_g(g.size());
  for (const auto& [d, i, j] : candidates) {
    if (used_p[i] || used_g[j]) continue;
    used_p[i] = used_g[j] = true;
    m.pairs.emplace_back(p[i].id, g[j].id);
    m.pred_to_gt[p[i].id] = g[j].id;
  }
  // Passages whose rooms cannot be resolved still count as predictions and
  // ground truth respectively.
  const std::size_t pred_total = passages(pred).size();
  const std::size_t gt_total = passages(gt).size();
  m.counts.tp = m.pairs.size();
  m.counts.fp = pred_total - m.pairs.size();
  m.counts.fn = gt_total - m.pairs.size();
  return m;
}

std::string normalize_name(const std::string& name) {
  std::string out;
  bool space = false;
  for (unsigned char ch : name) {
    if (std::isspace(ch)) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(ch));
  }
  return out;
}

SemanticScore semantic_accuracy(const OsmMap& pred, const OsmMap& gt, const Matching& rooms) {
  std::map<OsmId, OsmId> gt_to_pred;
  for (const auto& [p, g] : rooms.pairs) gt_to_pred[g] = p;
  std::map<OsmId, std::string> pred_names;
  for (const auto& a : room_areas(pred))
    if (auto it = a.tags.find("name"); it != a.tags.end()) pred_names[a.way_id] = it->second;

  SemanticScore s;
  for (const auto& a : room_areas(gt)) {
    const auto name = a.tags.find("name");
    if (name == a.tags.end() || normalize_name(name->second).empty()) continue;
    ++s.labeled;
    const auto match = gt_to_pred.find(a.way_id);
    if (match == gt_to_pred.end()) continue;
    const auto pn = pred_names.find(match->second);
    if (pn != pred_names.end() && normalize_name(pn->second) == normalize_name(name->second))
      ++s.correct;
  }
  return s;
}

FileMetrics evaluate_map(const OsmMap& pred, const OsmMap& gt, const EvalParams& params,
                         std::string name) {
  FileMetrics f;
  f.name = std::move(name);
  const Matching rooms = match_rooms(pred, gt, params.iou_threshold);
  f.rooms = rooms.counts;
  f.passages = match_passages(pred, gt, rooms, params.passage_max_distance).counts;
  f.semantics = semantic_accuracy(pred, gt, rooms);
  return f;
}

MetricsReport aggregate(std::vector<FileMetrics> files) {
  MetricsReport r;
  r.files = std::move(files);
  r.pooled.name = "pooled";
  for (const auto& f : r.files) {
    r.pooled.rooms += f.rooms;
    r.pooled.passages += f.passages;
    r.pooled.semantics.labeled += f.semantics.labeled;
    r.pooled.semantics.correct += f.semantics.correct;
    r.pooled.processing_time_s += f.processing_time_s;
  }
  return r;
}

json MetricsReport::to_json() const {
  json files_json = json::array();
  for (const auto& f : files) files_json.push_back(file_json(f));
  return {{"files", files_json}, {"pooled", file_json(pooled)}};
}

std::string MetricsReport::to_markdown() const {
  std::ostringstream out;
  out << "| Element Type | GT | Precision | Recall | F1-Score |\n";
  out << "|---|---|---|---|---|\n";
  auto row = [&](const char* label, const Counts& c) {
    out << "| " << label << " | " << c.gt() << " | " << format_ratio(c.precision()) << " | "
        << format_ratio(c.recall()) << " | " << format_ratio(c.f1()) << " |\n";
  };
  row("Rooms", pooled.rooms);
  row("Passages", pooled.passages);
  out << "\nSemantic accuracy: " << format_ratio(pooled.semantics.accuracy()) << " ("
      << pooled.semantics.correct << " of " << pooled.semantics.labeled << " labeled rooms)\n";
  char buf[64];
  const double mean = files.empty() ? 0.0 : pooled.processing_time_s / double(files.size());
  std::snprintf(buf, sizeof buf, "%.2f s", mean);
  out << "Mean processing time per file: " << buf << " over " << files.size() << " files\n";
  return out.str();
}

MetricsReport run_benchmark(const std::string& manifest_path, const PipelineConfig& base) {
  namespace fs = std::filesystem;
  const fs::path manifest(manifest_path);
  json entries;
  try {
    entries = json::parse(slurp(manifest, "manifest"));
  } catch (const json::exception& e) {
    throw ManifestError("manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!entries.is_array()) throw ManifestError("manifest must be a JSON array");
  if (entries.empty()) throw ManifestError("manifest lists no files");

  const fs::path dir = manifest.parent_path();
  auto path_of = [&](const json& e, const char* key) -> std::optional<fs::path> {
    if (!e.contains(key)) return std::nullopt;
    if (!e[key].is_string()) throw ManifestError(std::string("manifest field '") + key + "' must be a string");
    const fs::path p(e[key].get<std::string>());
    return p.is_absolute() ? p : dir / p;
  };

  struct Job {
    std::string name;
    std::optional<fs::path> dxf, gt, config, pred;
  };
  std::vector<Job> jobs;
  for (const auto& e : entries) {
    if (!e.is_object()) throw ManifestError("manifest entries must be objects");
    Job job{{}, path_of(e, "dxf"), path_of(e, "gt_osm"), path_of(e, "config"), path_of(e, "pred_osm")};
    if (!job.gt) throw ManifestError("manifest entry without gt_osm");
    if (!job.dxf && !job.pred) throw ManifestError("manifest entry needs dxf or pred_osm");
    job.name = (job.dxf ? *job.dxf : *job.pred).filename().string();
    jobs.push_back(std::move(job));
  }

  std::vector<FileMetrics> results(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());
  auto run_one = [&](std::size_t k) {
    const Job& job = jobs[k];
    try {
      const PipelineConfig config = job.config ? load_config(job.config->string()) : base;
      const OsmMap gt = read_osm_xml(slurp(*job.gt, "ground truth"));
      const auto violations = validate_schema(gt);
      if (!violations.empty())
        throw ManifestError("ground truth " + job.gt->string() + " fails the schema: " + violations.front());
      OsmMap pred;
      double seconds = 0.0;
      if (job.pred) {
        pred = read_osm_xml(slurp(*job.pred, "prediction"));
      } else {
        const auto t0 = std::chrono::steady_clock::now();
        pred = convert(slurp(*job.dxf, "drawing"), config).map;
        seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
      results[k] = evaluate_map(pred, gt, config.eval, job.name);
      results[k].processing_time_s = seconds;
    } catch (const Error& e) {
      failures[k] = std::make_exception_ptr(Error(e.kind(), e.category(), job.name + ": " + e.what()));
    } catch (...) {
      failures[k] = std::current_exception();
    }
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(jobs.size(), std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t k; (k = next++) < jobs.size();) run_one(k);
    });
  for (auto& t : pool) t.join();
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return aggregate(std::move(results));
}

}  // namespace cad2osm
