#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cad2osm {

/// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorCategory {
  Input,     // bad DXF, nothing structural, nothing enclosed
  Config,    // bad parameters, manifests, origins
  Internal,  // invariant violations inside the pipeline
};

class Error : public std::runtime_error {
 public:
  Error(std::string kind, ErrorCategory category, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)), category_(category) {}

  /// Stable machine-readable name, e.g. "NoStructuralLayers".
  [[nodiscard]] const std::string& kind() const noexcept { return kind_; }
  [[nodiscard]] ErrorCategory category() const noexcept { return category_; }

 private:
  std::string kind_;
  ErrorCategory category_;
};

#define CAD2OSM_DEFINE_ERROR(Name, Category)                 \
  class Name : public Error {                                \
   public:                                                   \
    explicit Name(const std::string& what)                   \
        : Error(#Name, ErrorCategory::Category, what) {}     \
  };

CAD2OSM_DEFINE_ERROR(EmptyDocument, Input)
CAD2OSM_DEFINE_ERROR(NoStructuralLayers, Input)
CAD2OSM_DEFINE_ERROR(DegenerateExtents, Input)
CAD2OSM_DEFINE_ERROR(NoInteriorSpace, Input)
CAD2OSM_DEFINE_ERROR(MalformedXml, Input)
CAD2OSM_DEFINE_ERROR(DanglingReference, Input)
CAD2OSM_DEFINE_ERROR(MixedIdSigns, Input)
CAD2OSM_DEFINE_ERROR(InvalidEdit, Input)
CAD2OSM_DEFINE_ERROR(InvalidResolution, Config)
CAD2OSM_DEFINE_ERROR(UnsupportedLatitude, Config)
CAD2OSM_DEFINE_ERROR(ConfigError, Config)
CAD2OSM_DEFINE_ERROR(ManifestError, Config)
CAD2OSM_DEFINE_ERROR(OriginMismatch, Config)
CAD2OSM_DEFINE_ERROR(DuplicateLevel, Config)
CAD2OSM_DEFINE_ERROR(WrongCase, Internal)
CAD2OSM_DEFINE_ERROR(SegmentationBug, Internal)
CAD2OSM_DEFINE_ERROR(SerializationRefused, Internal)

#undef CAD2OSM_DEFINE_ERROR

/// Malformed DXF group-code structure. Carries the byte offset of the
/// offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error("ParseError", ErrorCategory::Input,
              what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace cad2osm
