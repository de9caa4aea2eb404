#pragma once

// Local HTTP service behind the review UI. JSON in, JSON out; documents and
// their edit history live in a session directory so a restarted service can
// rebuild them.
//
//   POST /documents                   raw DXF body -> {id, layers, ...}
//   POST /documents/{id}/segment      {config?, layers?, text_layers?}
//   GET  /documents/{id}/render.png
//   POST /documents/{id}/merge-rooms  {rooms: [id, ...]}
//   POST /documents/{id}/export       {origin: {lat0, lon0, rotation?}, level?}
//   GET  /health

#include "cad2osm/config.hpp"

#include <memory>
#include <string>

namespace cad2osm {

/// $CAD2OSM_SESSION_DIR, else <tmp>/cad2osm-sessions.
std::string default_session_dir();

struct ServiceOptions {
  std::string session_dir = default_session_dir();
  PipelineConfig defaults;
  int threads = 4;
};

class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and serves until stop(); false when the address cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and returns it; serve with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  [[nodiscard]] bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cad2osm
