// cad2osm command line: convert, merge, eval, serve, config.

#include "cad2osm/config.hpp"
#include "cad2osm/errors.hpp"
#include "cad2osm/eval.hpp"
#include "cad2osm/fusion.hpp"
#include "cad2osm/pipeline.hpp"
#include "cad2osm/render.hpp"
#include "cad2osm/service.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace cad2osm;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

int exit_code(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Input: return kExitInput;
    case ErrorCategory::Config: return kExitConfig;
    case ErrorCategory::Internal: break;
  }
  return kExitInternal;
}

class InputFileError : public Error {
 public:
  explicit InputFileError(const std::string& what) : Error("InputFileError", ErrorCategory::Input, what) {}
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFileError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << bytes)) throw InputFileError("cannot write " + path);
}

struct ConfigOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::string> layers;
  std::vector<std::string> text_layers;

  void add_to(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--set", sets, "Override one parameter, section.key=value (repeatable)");
    cmd->add_option("--layers", layers, "Use exactly these structural layers")->delimiter(',');
    cmd->add_option("--text-layers", text_layers, "Read room labels only from these layers")->delimiter(',');
  }

  [[nodiscard]] PipelineConfig build() const {
    PipelineConfig config = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + s + "'");
      set_config_value(config, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!layers.empty()) config.layers.explicit_layers = layers;
    if (!text_layers.empty()) config.layers.text_layers = text_layers;
    config.validate();
    return config;
  }
};

int run_convert(const std::string& input, const std::string& output, const std::string& report_path,
                const std::string& pgm, const std::string& png, const ConfigOptions& opts) {
  const PipelineConfig config = opts.build();
  const ConversionResult result = convert(read_file(input), config);
  write_file(output, result.osm_xml);
  if (!report_path.empty()) write_file(report_path, result.report.dump(2) + "\n");
  if (!pgm.empty()) write_file(pgm, write_pgm(result.segment.grid));
  if (!png.empty()) write_file(png, render_png(result.segment.grid, result.segment.graph));
  for (const auto& w : result.report["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
  std::cerr << "wrote " << output << ": " << result.segment.graph.rooms.size() << " rooms, "
            << result.segment.graph.passages.size() << " passages\n";
  return 0;
}

int run_merge(const std::string& manifest_path, const std::string& output, const ConfigOptions& opts) {
  const PipelineConfig config = opts.build();
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!manifest.is_array()) throw ManifestError("manifest must be a JSON array of {file, level, elevation}");

  const fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<FloorSpec> floors;
  for (const auto& entry : manifest) {
    FloorSpec floor;
    try {
      fs::path file(entry.at("file").get<std::string>());
      if (file.is_relative()) file = dir / file;
      floor.level = entry.at("level").get<int>();
      floor.elevation_m = entry.value("elevation", 0.0);
      floor.map = read_osm_xml(read_file(file.string()));
    } catch (const nlohmann::json::exception& e) {
      throw ManifestError(std::string("bad manifest entry: ") + e.what());
    }
    floor.stair_keywords = config.stair_keywords;
    floors.push_back(std::move(floor));
  }
  const FusionResult fused = fuse_floors(floors, config.fusion);
  for (const auto& w : fused.warnings) std::cerr << "warning: " << w << "\n";
  const HierarchyReport hierarchy = validate_hierarchy(fused.map);
  for (const auto& v : hierarchy.violations) std::cerr << "hierarchy: " << v << "\n";
  if (!hierarchy.ok()) throw SerializationRefused("fused map breaks the level hierarchy");
  write_file(output, write_osm_xml(fused.map));
  std::cerr << "wrote " << output << ": " << floors.size() << " levels, " << fused.links.size()
            << " vertical passages\n";
  return 0;
}

int run_eval(const std::string& manifest, const std::string& json_path, const std::string& md_path,
             const ConfigOptions& opts) {
  const MetricsReport report = run_benchmark(manifest, opts.build());
  const std::string md = report.to_markdown();
  if (!json_path.empty()) write_file(json_path, report.to_json().dump(2) + "\n");
  if (!md_path.empty()) write_file(md_path, md);
  std::cout << md;
  return 0;
}

Service* g_service = nullptr;

int run_serve(const std::string& host, int port, const std::string& session_dir, const ConfigOptions& opts) {
  ServiceOptions options;
  options.defaults = opts.build();
  if (!session_dir.empty()) options.session_dir = session_dir;
  Service service(options);
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  std::cerr << "serving on http://" << host << ":" << port << " (sessions in " << options.session_dir << ")\n";
  const bool ok = service.listen(host, port);
  g_service = nullptr;
  if (!ok) {
    std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
    return kExitConfig;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convert architectural DXF floor plans into osmAG indoor maps"};
  app.require_subcommand(1);

  std::string input, output, report, pgm, png, manifest, json_out, md_out, host = "127.0.0.1", session_dir;
  int port = 8088;
  bool print_defaults = false;

  ConfigOptions convert_opts, merge_opts, eval_opts, serve_opts;

  auto* convert_cmd = app.add_subcommand("convert", "Convert one DXF floor plan to .osm");
  convert_cmd->add_option("input", input, "DXF file")->required();
  convert_cmd->add_option("-o,--output", output, "Output .osm file")->required();
  convert_cmd->add_option("--report", report, "Write the JSON conversion report here");
  convert_cmd->add_option("--pgm", pgm, "Write the occupancy grid as PGM");
  convert_cmd->add_option("--png", png, "Write a segmentation preview PNG");
  convert_opts.add_to(convert_cmd);

  auto* merge_cmd = app.add_subcommand("merge", "Fuse per-floor .osm files into one building");
  merge_cmd->add_option("manifest", manifest, "JSON list of {file, level, elevation}")->required();
  merge_cmd->add_option("-o,--output", output, "Output .osm file")->required();
  merge_opts.add_to(merge_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Score conversions against ground truth");
  eval_cmd->add_option("manifest", manifest, "JSON list of {dxf, gt_osm, config?, pred_osm?}")->required();
  eval_cmd->add_option("--json", json_out, "Write the metrics as JSON");
  eval_cmd->add_option("--markdown", md_out, "Write the metrics table as markdown");
  eval_opts.add_to(eval_cmd);

  auto* serve_cmd = app.add_subcommand("serve", "Run the local HTTP service for the review UI");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("-p,--port", port, "Port")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--session-dir", session_dir, "Overrides CAD2OSM_SESSION_DIR");
  serve_opts.add_to(serve_cmd);

  auto* config_cmd = app.add_subcommand("config", "Inspect configuration");
  config_cmd->add_flag("--print-defaults", print_defaults, "Print every parameter with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*convert_cmd) return run_convert(input, output, report, pgm, png, convert_opts);
    if (*merge_cmd) return run_merge(manifest, output, merge_opts);
    if (*eval_cmd) return run_eval(manifest, json_out, md_out, eval_opts);
    if (*serve_cmd) return run_serve(host, port, session_dir, serve_opts);
    if (*config_cmd) {
      std::cout << format_config(PipelineConfig{});
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
