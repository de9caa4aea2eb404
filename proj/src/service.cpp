#include "cad2osm/service.hpp"

#include "cad2osm/errors.hpp"
#include "cad2osm/pipeline.hpp"
#include "cad2osm/refine.hpp"
#include "cad2osm/render.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>

namespace cad2osm {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct HttpError {
  int status;
  std::string kind;
  std::string message;
};

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << bytes;
  }
  fs::rename(tmp, p);
}

int status_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Input: return 422;
    case ErrorCategory::Config: return 400;
    case ErrorCategory::Internal: break;
  }
  return 500;
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw HttpError{400, "BadRequest", "request body must be a JSON object"};
    return j;
  } catch (const json::exception& e) {
    throw HttpError{400, "BadRequest", std::string("invalid JSON: ") + e.what()};
  }
}

std::string config_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) out += (out.empty() ? "" : ",") + config_value(item);
    return out;
  }
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw ConfigError("unsupported config value " + v.dump());
}

std::vector<std::string> string_list(const json& v, const char* field) {
  if (!v.is_array()) throw HttpError{400, "BadRequest", std::string(field) + " must be an array of strings"};
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw HttpError{400, "BadRequest", std::string(field) + " must be an array of strings"};
    out.push_back(item.get<std::string>());
  }
  return out;
}

/// {config: {"section.key": v} or {section: {key: v}}, layers, text_layers}
PipelineConfig config_from_request(PipelineConfig config, const json& body) {
  if (body.contains("config")) {
    const json& c = body["config"];
    if (!c.is_object()) throw HttpError{400, "BadRequest", "config must be an object"};
    for (const auto& [key, value] : c.items()) {
      if (value.is_object()) {
        for (const auto& [sub, v] : value.items()) set_config_value(config, key + "." + sub, config_value(v));
      } else {
        set_config_value(config, key, config_value(value));
      }
    }
  }
  if (body.contains("layers")) config.layers.explicit_layers = string_list(body["layers"], "layers");
  if (body.contains("text_layers")) config.layers.text_layers = string_list(body["text_layers"], "text_layers");
  config.validate();
  return config;
}

json graph_json(const AreaGraph& graph) {
  json features = json::array();
  for (const auto& room : graph.rooms) {
    json ring = json::array();
    for (const auto& p : room.polygon) ring.push_back({p.x(), p.y()});
    if (!room.polygon.empty()) ring.push_back({room.polygon.front().x(), room.polygon.front().y()});
    json props = {{"id", room.id}, {"area_m2", room.area_m2()}, {"tags", room.tags}};
    if (auto it = room.tags.find("name"); it != room.tags.end()) props["name"] = it->second;
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}},
                        {"properties", props}});
  }
  json passages = json::array();
  for (const auto& p : graph.passages)
    passages.push_back({{"id", p.id},
                        {"room_a", p.room_a},
                        {"room_b", p.room_b},
                        {"endpoints",
                         {{p.endpoints[0].x(), p.endpoints[0].y()}, {p.endpoints[1].x(), p.endpoints[1].y()}}}});
  return {{"rooms", {{"type", "FeatureCollection"}, {"features", features}}}, {"passages", passages}};
}

struct Document {
  std::mutex mutex;
  std::string id;
  fs::path dir;
  CadDocument cad;

  // Present once segmented.
  std::optional<json> segment_request;
  PipelineConfig config;
  std::vector<std::vector<int>> merges;
  std::optional<SegmentResult> result;
  AreaGraph graph;
  std::string png;

  void persist() const {
    json state = {{"segment", segment_request ? *segment_request : json(nullptr)}, {"merges", merges}};
    write_bytes(dir / "state.json", state.dump(2));
  }

  void segment(const PipelineConfig& defaults, const json& request) {
    PipelineConfig c = config_from_request(defaults, request);
    SegmentResult r = segment_document(cad, c);
    config = c;
    segment_request = request;
    merges.clear();
    graph = r.graph;
    png = render_png(r.grid, graph);
    result = std::move(r);
  }

  void merge(const std::vector<int>& ids) {
    AreaGraph merged = merge_rooms(graph, ids);
    const auto violations = check_area_graph(merged, {graph.transform.resolution, std::nullopt});
    if (!violations.empty()) throw SegmentationBug("merge would break the area graph: " + violations.front());
    graph = std::move(merged);
    merges.push_back(ids);
    png = render_png(result->grid, graph);
  }
};

}  // namespace

std::string default_session_dir() {
  if (const char* env = std::getenv("CAD2OSM_SESSION_DIR"); env && *env) return env;
  return (fs::temp_directory_path() / "cad2osm-sessions").string();
}

struct Service::Impl {
  ServiceOptions options;
  httplib::Server server;
  std::mutex documents_mutex;
  std::map<std::string, std::shared_ptr<Document>> documents;
  int next_id = 1;

  explicit Impl(ServiceOptions o) : options(std::move(o)) {
    fs::create_directories(options.session_dir);
    for (const auto& entry : fs::directory_iterator(options.session_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.size() > 4 && name.rfind("doc-", 0) == 0) {
        try {
          next_id = std::max(next_id, std::stoi(name.substr(4)) + 1);
        } catch (const std::exception&) {
        }
      }
    }
    const int threads = std::max(1, options.threads);
    server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    routes();
  }

  std::shared_ptr<Document> load(const std::string& id) {
    std::lock_guard lock(documents_mutex);
    if (auto it = documents.find(id); it != documents.end()) return it->second;
    const fs::path dir = fs::path(options.session_dir) / id;
    if (id.find('/') != std::string::npos || id.find("..") != std::string::npos ||
        !fs::exists(dir / "input.dxf"))
      throw HttpError{404, "UnknownDocument", "no document '" + id + "'"};

    // Rebuild a document left behind by an earlier service process.
    auto doc = std::make_shared<Document>();
    doc->id = id;
    doc->dir = dir;
    doc->cad = parse_dxf(read_bytes(dir / "input.dxf"));
    if (fs::exists(dir / "state.json")) {
      const json state = json::parse(read_bytes(dir / "state.json"), nullptr, false);
      if (!state.is_discarded() && state.contains("segment") && state["segment"].is_object()) {
        doc->segment(options.defaults, state["segment"]);
        for (const auto& ids : state.value("merges", json::array())) doc->merge(ids.get<std::vector<int>>());
      }
    }
    documents[id] = doc;
    return doc;
  }

  json layers_json(const CadDocument& cad) const {
    json layers = json::array();
    for (const auto& [name, list] : cad.layers)
      layers.push_back({{"name", name},
                        {"entities", list.size()},
                        {"structural", options.defaults.layers.matches(name)}});
    return layers;
  }

  template <typename F>
  static httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      auto fail = [&](int status, const std::string& kind, const std::string& message) {
        res.status = status;
        res.set_content(json{{"error", kind}, {"message", message}}.dump(), "application/json");
      };
      try {
        f(req, res);
      } catch (const HttpError& e) {
        fail(e.status, e.kind, e.message);
      } catch (const Error& e) {
        fail(status_for(e), e.kind(), e.what());
      } catch (const std::exception& e) {
        fail(500, "InternalError", e.what());
      }
    };
  }

  Document& segmented(Document& doc) {
    if (!doc.result) throw HttpError{409, "NotSegmented", "segment the document first"};
    return doc;
  }

  json graph_response(const Document& doc) const {
    json out = graph_json(doc.graph);
    out["id"] = doc.id;
    out["render_png"] = "/documents/" + doc.id + "/render.png";
    out["merges"] = doc.merges;
    return out;
  }

  void routes() {
    server.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
      res.set_content(json{{"status", "ok"}}.dump(), "application/json");
    }));

    server.Post("/documents", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::string bytes = req.body;
      if (req.is_multipart_form_data() && !req.files.empty()) bytes = req.files.begin()->second.content;
      if (bytes.empty()) throw HttpError{400, "BadRequest", "request body must contain the DXF file"};
      auto doc = std::make_shared<Document>();
      doc->cad = parse_dxf(bytes);
      {
        std::lock_guard lock(documents_mutex);
        char id[32];
        std::snprintf(id, sizeof id, "doc-%06d", next_id++);
        doc->id = id;
        doc->dir = fs::path(options.session_dir) / doc->id;
        fs::create_directories(doc->dir);
        write_bytes(doc->dir / "input.dxf", bytes);
        doc->persist();
        documents[doc->id] = doc;
      }
      res.status = 201;
      res.set_content(json{{"id", doc->id},
                           {"layers", layers_json(doc->cad)},
                           {"entities", doc->cad.entity_count()},
                           {"warnings", doc->cad.warnings}}
                          .dump(),
                      "application/json");
    }));

    server.Post(R"(/documents/([^/]+)/segment)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parse_body(req);
                  auto doc = load(req.matches[1]);
                  std::lock_guard lock(doc->mutex);
                  doc->segment(options.defaults, body);
                  doc->persist();
                  json out = graph_response(*doc);
                  out["report"] = doc->result->report;
                  res.set_content(out.dump(), "application/json");
                }));

    server.Get(R"(/documents/([^/]+)/render\.png)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 auto doc = load(req.matches[1]);
                 std::lock_guard lock(doc->mutex);
                 res.set_content(segmented(*doc).png, "image/png");
               }));

    server.Post(R"(/documents/([^/]+)/merge-rooms)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parse_body(req);
                  if (!body.contains("rooms") || !body["rooms"].is_array())
                    throw HttpError{400, "BadRequest", "rooms must be an array of room ids"};
                  std::vector<int> ids;
                  for (const auto& v : body["rooms"]) {
                    if (!v.is_number_integer()) throw HttpError{400, "BadRequest", "room ids must be integers"};
                    ids.push_back(v.get<int>());
                  }
                  auto doc = load(req.matches[1]);
                  std::lock_guard lock(doc->mutex);
                  segmented(*doc).merge(ids);
                  doc->persist();
                  res.set_content(graph_response(*doc).dump(), "application/json");
                }));

    server.Post(R"(/documents/([^/]+)/export)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parse_body(req);
                  auto doc = load(req.matches[1]);
                  std::lock_guard lock(doc->mutex);
                  segmented(*doc);
                  GeoOrigin origin = doc->config.origin;
                  int level = doc->config.level;
                  try {
                    if (body.contains("origin")) {
                      const json& o = body["origin"];
                      origin.lat0 = o.at("lat0").get<double>();
                      origin.lon0 = o.at("lon0").get<double>();
                      origin.rotation = o.value("rotation", 0.0);
                    }
                    level = body.value("level", level);
                  } catch (const json::exception& e) {
                    throw HttpError{400, "BadRequest", std::string("bad export request: ") + e.what()};
                  }
                  origin.validate();
                  const std::string xml = export_osm(doc->graph, origin, level);
                  res.set_header("Content-Disposition", "attachment; filename=\"" + doc->id + ".osm\"");
                  res.set_content(xml, "application/vnd.openstreetmap.data+xml");
                }));
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Service::~Service() { stop(); }

bool Service::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }
int Service::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }
void Service::stop() {
  if (impl_) impl_->server.stop();
}
bool Service::running() const { return impl_->server.is_running(); }

}  // namespace cad2osm
