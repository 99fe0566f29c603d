#ifndef STILLACT_DATASET_IO_HPP
#define STILLACT_DATASET_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stillact/annotation.hpp"
#include "stillact/dbn.hpp"
#include "stillact/geometry.hpp"
#include "stillact/thresholds.hpp"

namespace stillact {

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kThresholdFormatVersion = 1;

/// JSON-lines annotations, one image per line. Parsers reject malformed or
/// unknown fields with the 1-based line number; only `label` may be absent.
std::vector<ImageAnnotation> load_annotations(const std::filesystem::path& path);
void save_annotations(const std::vector<ImageAnnotation>& annotations,
                      const std::filesystem::path& path);

/// Versioned JSON model document. Parameters are serialized as hexadecimal
/// float literals so load(save(m)) reproduces every bit; a checksum guards
/// against truncation and tampering.
void save_model(const DbnModel& model, const std::filesystem::path& path);
DbnModel load_model(const std::filesystem::path& path);

void save_thresholds(const ThresholdSet& thresholds, const std::filesystem::path& path);
ThresholdSet load_thresholds(const std::filesystem::path& path);

/// Encoded-feature records emitted by the `encode` subcommand.
struct FeatureRecord {
    std::string image_id;
    std::optional<int> label;
    FeatureVector feature;
};

void save_features(const std::vector<FeatureRecord>& records, const std::filesystem::path& path);
std::vector<FeatureRecord> load_features(const std::filesystem::path& path);

}  // namespace stillact

#endif
