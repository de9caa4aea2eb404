#pragma once

// Scoring of predicted osmAG maps against hand-annotated ground truth:
// one-to-one room matching by IoU, passage matching through the room
// matching, name accuracy, and micro-averaged corpus metrics.

#include "cad2osm/config.hpp"
#include "cad2osm/osm.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cad2osm {

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;

  /// std::nullopt when the denominator is zero.
  [[nodiscard]] std::optional<double> precision() const;
  [[nodiscard]] std::optional<double> recall() const;
  [[nodiscard]] std::optional<double> f1() const;
  [[nodiscard]] std::size_t gt() const { return tp + fn; }

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

struct Matching {
  std::vector<std::pair<OsmId, OsmId>> pairs;  // (pred way, gt way)
  std::map<OsmId, OsmId> pred_to_gt;
  Counts counts;
};

/// Greedy by descending IoU; pairs below the threshold are never matched.
/// Predicted geometry is re-projected into the ground truth's frame.
Matching match_rooms(const OsmMap& pred, const OsmMap& gt, double iou_threshold = 0.5);

/// A predicted passage matches a ground-truth passage joining the matched
/// room pair with midpoints at most max_distance apart; greedy by distance.
Matching match_passages(const OsmMap& pred, const OsmMap& gt, const Matching& rooms,
                        double max_distance = 1.0);

struct SemanticScore {
  std::size_t labeled = 0;  // ground-truth rooms carrying a name
  std::size_t correct = 0;

  [[nodiscard]] std::optional<double> accuracy() const;
};

/// Names compare after case folding and whitespace collapsing; an unmatched
/// labeled room counts as wrong.
SemanticScore semantic_accuracy(const OsmMap& pred, const OsmMap& gt, const Matching& rooms);

/// Lower case, runs of whitespace collapsed to one space, trimmed.
std::string normalize_name(const std::string& name);

struct FileMetrics {
  std::string name;
  Counts rooms;
  Counts passages;
  SemanticScore semantics;
  double processing_time_s = 0.0;
};

FileMetrics evaluate_map(const OsmMap& pred, const OsmMap& gt, const EvalParams& params = {},
                         std::string name = {});

struct MetricsReport {
  std::vector<FileMetrics> files;
  FileMetrics pooled;  // sums of the per-file counts

  [[nodiscard]] nlohmann::json to_json() const;
  /// Element Type | GT | Precision | Recall | F1-Score table of the pooled
  /// counts, followed by semantic accuracy and timing.
  [[nodiscard]] std::string to_markdown() const;
};

MetricsReport aggregate(std::vector<FileMetrics> files);

/// Manifest: JSON array of {dxf, gt_osm, config?, pred_osm?}, paths relative
/// to the manifest. Entries with pred_osm are scored as-is; the others are
/// converted first with their config (or `base` when absent). Throws
/// ManifestError for unreadable, malformed or empty manifests.
MetricsReport run_benchmark(const std::string& manifest_path, const PipelineConfig& base = {});

}  // namespace cad2osm
