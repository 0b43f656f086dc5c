#include "afdetect/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include "afdetect/csv.hpp"
#include "afdetect/error.hpp"
#include "afdetect/parallel.hpp"
#include "afdetect/random.hpp"

namespace afdetect::dataset {

namespace fs = std::filesystem;

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string read_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw Error(ErrorKind::FileNotFound, path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

// Calls fn(line_number, line) for every non-blank, non-comment line.
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = csv::trim(text.substr(start, end - start));
    if (!line.empty() && line.front() != '#') fn(line_no, line);
    start = end + 1;
  }
}

std::uint32_t parse_segment_id(std::string_view cell, const fs::path& path, std::size_t line_no) {
  cell = csv::trim(cell);
  std::uint32_t value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error(ErrorKind::MalformedRow, path.string() + ":" + std::to_string(line_no) +
                                             ": bad segment_id '" + std::string(cell) + "'");
  }
  return value;
}

void expect_header(const std::vector<std::string_view>& cells,
                   std::initializer_list<std::string_view> expected, const fs::path& path,
                   std::size_t line_no) {
  bool ok = cells.size() == expected.size();
  for (std::size_t i = 0; ok && i < cells.size(); ++i) {
    ok = csv::trim(cells[i]) == *(expected.begin() + i);
  }
  if (!ok) {
    throw Error(ErrorKind::MalformedRow,
                path.string() + ":" + std::to_string(line_no) + ": unexpected header");
  }
}

bool is_constant(const std::vector<double>& x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

void finish_write(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace

std::size_t Segment::missing_count() const noexcept {
  const auto nan = [](double v) { return std::isnan(v); };
  return static_cast<std::size_t>(std::count_if(ppg.begin(), ppg.end(), nan) +
                                  std::count_if(ecg.begin(), ecg.end(), nan));
}

Dataset::Dataset(std::vector<Segment> segments) : segments_(std::move(segments)) {
  std::sort(segments_.begin(), segments_.end(), [](const Segment& a, const Segment& b) {
    return std::tie(a.subject_id, a.segment_id) < std::tie(b.subject_id, b.segment_id);
  });
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    const auto& a = segments_[i - 1];
    const auto& b = segments_[i];
    if (a.subject_id == b.subject_id && a.segment_id == b.segment_id) {
      throw Error(ErrorKind::DuplicateSegment,
                  "subject " + a.subject_id + " segment " + std::to_string(a.segment_id));
    }
  }
  for (const auto& s : segments_) (s.label == Label::AF ? counts_.af : counts_.naf) += 1;
}

std::vector<Label> Dataset::labels() const {
  std::vector<Label> out;
  out.reserve(segments_.size());
  for (const auto& s : segments_) out.push_back(s.label);
  return out;
}

std::vector<ManifestEntry> read_manifest(const fs::path& manifest_path) {
  const std::string text = read_file(manifest_path);
  const fs::path base = manifest_path.parent_path();
  std::vector<ManifestEntry> entries;
  bool header_seen = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto cells = csv::split(line);
    if (!header_seen) {
      expect_header(cells, {"subject_id", "segment_id", "label", "path"}, manifest_path, line_no);
      header_seen = true;
      return;
    }
    if (cells.size() != 4) {
      throw Error(ErrorKind::MalformedRow, manifest_path.string() + ":" + std::to_string(line_no) +
                                               ": expected 4 columns, got " +
                                               std::to_string(cells.size()));
    }
    ManifestEntry e;
    e.subject_id = std::string(csv::trim(cells[0]));
    e.segment_id = parse_segment_id(cells[1], manifest_path, line_no);
    e.label = parse_label(csv::trim(cells[2]));
    fs::path p{std::string(csv::trim(cells[3]))};
    e.path = p.is_absolute() ? p : base / p;
    entries.push_back(std::move(e));
  });
  if (!header_seen) throw Error(ErrorKind::MalformedRow, manifest_path.string() + ": empty manifest");
  return entries;
}

Segment parse_segment_csv(const fs::path& path, const ManifestEntry& meta) {
  const std::string text = read_file(path);
  Segment s;
  s.subject_id = meta.subject_id;
  s.segment_id = meta.segment_id;
  s.label = meta.label;
  s.ppg.reserve(kSegmentLength);
  s.ecg.reserve(kSegmentLength);
  bool header_seen = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto cells = csv::split(line);
    if (!header_seen) {
      expect_header(cells, {"index", "ppg", "ecg"}, path, line_no);
      header_seen = true;
      return;
    }
    if (cells.size() != 3) {
      throw Error(ErrorKind::MalformedRow, path.string() + ":" + std::to_string(line_no) +
                                               ": expected 3 columns, got " +
                                               std::to_string(cells.size()));
    }
    s.ppg.push_back(csv::parse_double(cells[1]).value_or(kMissing));
    s.ecg.push_back(csv::parse_double(cells[2]).value_or(kMissing));
  });
  if (!header_seen) throw Error(ErrorKind::MalformedRow, path.string() + ": missing header");
  return s;
}

Dataset merge_dataset(std::span<const ManifestEntry> entries) {
  if (entries.empty()) throw Error(ErrorKind::EmptyDataset, "no segment files given");
  std::vector<Segment> segments(entries.size());
  parallel_for(entries.size(),
               [&](std::size_t i) { segments[i] = parse_segment_csv(entries[i].path, entries[i]); });
  return Dataset(std::move(segments));
}

Dataset load_dataset(const fs::path& manifest_path) {
  const auto entries = read_manifest(manifest_path);
  return merge_dataset(entries);
}

std::string_view to_string(DiscardReason reason) noexcept {
  switch (reason) {
    case DiscardReason::MissingValues: return "MissingValues";
    case DiscardReason::WrongLength: return "WrongLength";
    case DiscardReason::ZeroVariance: return "ZeroVariance";
  }
  return "Unknown";
}

CleanResult clean_dataset(const Dataset& d, std::size_t expected_length) {
  CleaningReport report;
  std::vector<Segment> kept;
  kept.reserve(d.size());
  for (const auto& s : d.segments()) {
    std::optional<DiscardReason> reason;
    if (s.missing_count() > 0) {
      reason = DiscardReason::MissingValues;
      ++report.missing_values;
    } else if (s.ppg.size() != expected_length || s.ecg.size() != expected_length) {
      reason = DiscardReason::WrongLength;
      ++report.wrong_length;
    } else if (is_constant(s.ppg) || is_constant(s.ecg)) {
      reason = DiscardReason::ZeroVariance;
      ++report.zero_variance;
    }
    if (reason) {
      report.discarded.push_back({s.subject_id, s.segment_id, s.label, *reason});
    } else {
      kept.push_back(s);
    }
  }
  if (kept.empty()) throw Error(ErrorKind::EmptyDataset, "no segment survived cleaning");
  CleanResult result{Dataset(std::move(kept)), std::move(report)};
  result.report.kept = result.dataset.counts();
  return result;
}

SplitIndices stratified_split(std::span<const Label> labels, double test_fraction,
                              std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::BadConfig, "test fraction must lie in (0, 1)");
  }
  SplitIndices split;
  split.seed = seed;
  for (Label cls : {Label::AF, Label::NAF}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.size() < 2) {
      throw Error(ErrorKind::DegenerateClass, "class " + std::string(to_string(cls)) + " has " +
                                                  std::to_string(members.size()) + " member(s)");
    }
    Rng rng(derive_seed(seed, 0x5b11u, static_cast<std::uint64_t>(cls)));
    rng.shuffle(std::span(members));
    const auto n_test = static_cast<std::size_t>(
        std::floor(test_fraction * static_cast<double>(members.size()) + 0.5));
    split.test.insert(split.test.end(), members.begin(), members.begin() + n_test);
    split.train.insert(split.train.end(), members.begin() + n_test, members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

SplitIndices stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
  const auto labels = d.labels();
  return stratified_split(labels, test_fraction, seed);
}

void write_segment_csv(const fs::path& path, const Segment& s, const std::string& header_comment) {
  auto out = open_for_write(path);
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "index,ppg,ecg\n";
  const std::size_t n = std::max(s.ppg.size(), s.ecg.size());
  const auto cell = [](const std::vector<double>& x, std::size_t i) -> std::string {
    if (i >= x.size() || std::isnan(x[i])) return {};
    return csv::format_double(x[i]);
  };
  std::string line;
  for (std::size_t i = 0; i < n; ++i) {
    line.clear();
    line += std::to_string(i);
    line += ',';
    line += cell(s.ppg, i);
    line += ',';
    line += cell(s.ecg, i);
    line += '\n';
    out << line;
  }
  finish_write(out, path);
}

void write_manifest(const fs::path& path, std::span<const ManifestEntry> entries,
                    const std::string& header_comment) {
  auto out = open_for_write(path);
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "subject_id,segment_id,label,path\n";
  for (const auto& e : entries) {
    out << e.subject_id << ',' << e.segment_id << ',' << to_string(e.label) << ','
        << e.path.generic_string() << '\n';
  }
  finish_write(out, path);
}

void write_cleaning_report(const fs::path& path, const CleaningReport& report,
                           const std::string& header_comment) {
  auto out = open_for_write(path);
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "# kept_af=" << report.kept.af << " kept_naf=" << report.kept.naf
      << " missing_values=" << report.missing_values << " wrong_length=" << report.wrong_length
      << " zero_variance=" << report.zero_variance << '\n';
  out << "subject_id,segment_id,label,reason\n";
  for (const auto& d : report.discarded) {
    out << d.subject_id << ',' << d.segment_id << ',' << to_string(d.label) << ','
        << to_string(d.reason) << '\n';
  }
  finish_write(out, path);
}

}  // namespace afdetect::dataset
