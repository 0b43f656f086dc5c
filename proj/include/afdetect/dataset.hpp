#pragma once

// Segment ingestion, cleaning and stratified hold-out splitting.
//
// On-disk layout: a manifest.csv with columns subject_id,segment_id,label,path
// (paths relative to the manifest's directory) and one CSV per segment with
// header `index,ppg,ecg` and one sample per row. Lines starting with '#' are
// comments. An empty or unparseable sample cell is read as a missing value
// (quiet NaN) rather than rejected; clean_dataset() discards such segments.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "afdetect/label.hpp"

namespace afdetect::dataset {

inline constexpr std::size_t kSegmentLength = 10000;
inline constexpr double kSamplingRateHz = 125.0;

struct Segment {
  std::string subject_id;
  std::uint32_t segment_id = 0;
  Label label = Label::NAF;
  std::vector<double> ppg;
  std::vector<double> ecg;
  double fs_hz = kSamplingRateHz;

  /// Number of missing samples across both channels.
  std::size_t missing_count() const noexcept;
};

struct LabelCounts {
  std::size_t af = 0;
  std::size_t naf = 0;
  std::size_t total() const noexcept { return af + naf; }
  friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

/// Segments ordered by (subject_id, segment_id), keys unique.
class Dataset {
 public:
  Dataset() = default;
  /// Sorts the segments; throws DuplicateSegment on a repeated key.
  explicit Dataset(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  std::size_t size() const noexcept { return segments_.size(); }
  bool empty() const noexcept { return segments_.empty(); }
  const Segment& operator[](std::size_t i) const { return segments_[i]; }
  LabelCounts counts() const noexcept { return counts_; }
  std::vector<Label> labels() const;

 private:
  std::vector<Segment> segments_;
  LabelCounts counts_;
};

struct ManifestEntry {
  std::string subject_id;
  std::uint32_t segment_id = 0;
  Label label = Label::NAF;
  std::filesystem::path path;  // absolute, or relative to the working directory
};

/// Reads manifest.csv; relative segment paths are resolved against its directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path);

/// Reads one segment file; ids and label come from the manifest entry.
Segment parse_segment_csv(const std::filesystem::path& path, const ManifestEntry& meta);

/// Parses every entry (in parallel) and assembles the sorted dataset.
Dataset merge_dataset(std::span<const ManifestEntry> entries);
Dataset load_dataset(const std::filesystem::path& manifest_path);

enum class DiscardReason { MissingValues, WrongLength, ZeroVariance };
std::string_view to_string(DiscardReason reason) noexcept;

struct Discard {
  std::string subject_id;
  std::uint32_t segment_id = 0;
  Label label = Label::NAF;
  DiscardReason reason = DiscardReason::MissingValues;
};

struct CleaningReport {
  std::vector<Discard> discarded;
  std::size_t missing_values = 0;
  std::size_t wrong_length = 0;
  std::size_t zero_variance = 0;
  LabelCounts kept;
};

struct CleanResult {
  Dataset dataset;
  CleaningReport report;
};

/// Keeps segments with no missing samples, the expected length and nonzero
/// variance in both channels. Throws EmptyDataset if nothing survives.
CleanResult clean_dataset(const Dataset& d, std::size_t expected_length = kSegmentLength);

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
  std::uint64_t seed = 0;
};

/// Per class c: |test ∩ c| = floor(test_fraction * |c| + 0.5), members chosen
/// uniformly by a seeded shuffle.
SplitIndices stratified_split(std::span<const Label> labels, double test_fraction,
                              std::uint64_t seed);
SplitIndices stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed);

/// Writers for the on-disk layout. `header_comment` (when non-empty) is written
/// as the first line and must start with '#'.
void write_segment_csv(const std::filesystem::path& path, const Segment& s,
                       const std::string& header_comment = {});
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries,
                    const std::string& header_comment = {});
void write_cleaning_report(const std::filesystem::path& path, const CleaningReport& report,
                           const std::string& header_comment = {});

}  // namespace afdetect::dataset
