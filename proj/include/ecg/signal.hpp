#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ecg/common.hpp"

namespace ecg {

// ---------------------------------------------------------------------------
// Rhythm categories. Five classes with a stable index order N,V,S,A,Q.
// ---------------------------------------------------------------------------
enum class RhythmCategory : int { N = 0, V = 1, S = 2, A = 3, Q = 4 };

constexpr int kNumCategories = 5;

char category_symbol(RhythmCategory c);
RhythmCategory category_from_symbol(char sym);
RhythmCategory category_from_index(int idx);
inline int category_index(RhythmCategory c) { return static_cast<int>(c); }

/// The five categories in index order.
const std::array<RhythmCategory, kNumCategories>& all_categories();

// ---------------------------------------------------------------------------
// Records and annotations
// ---------------------------------------------------------------------------

/// One expert-labelled beat span inside a record. end/qrs_end are exclusive.
struct BeatAnnotation {
  int64_t start_index = 0;
  int64_t end_index = 0;
  RhythmCategory category = RhythmCategory::N;
  int64_t qrs_start = 0;
  int64_t qrs_end = 0;
};

/// A sampled single-lead voltage trace. Samples are millivolts, stored as
/// 32-bit floats so file round-trips are bit-exact.
struct EcgRecord {
  std::string record_id;
  double sampling_rate_hz = 0.0;
  std::vector<float> samples;
  std::vector<BeatAnnotation> annotations;
  double scale = 1.0;  // metadata carried through I/O, not applied

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

enum class Provenance : int { original = 0, window_augmented = 1 };

const char* provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

struct LabeledSegment {
  std::vector<double> samples;
  RhythmCategory category = RhythmCategory::N;
  std::string source_record;
  Provenance provenance = Provenance::original;
};

// ---------------------------------------------------------------------------
// Dataset: segments of one shared length with O(1) category counts.
// ---------------------------------------------------------------------------
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(int segment_length) : segment_length_(segment_length) {}

  void add(LabeledSegment seg);
  void reserve(size_t n) { segments_.reserve(n); }

  size_t size() const { return segments_.size(); }
  bool empty() const { return segments_.empty(); }
  int segment_length() const { return segment_length_; }

  const LabeledSegment& operator[](size_t i) const { return segments_[i]; }
  LabeledSegment& operator[](size_t i) { return segments_[i]; }
  const std::vector<LabeledSegment>& segments() const { return segments_; }

  const std::array<int64_t, kNumCategories>& counts() const { return counts_; }

 private:
  std::vector<LabeledSegment> segments_;
  int segment_length_ = 0;
  std::array<int64_t, kNumCategories> counts_{};
};

std::map<RhythmCategory, int64_t> category_counts(const Dataset& ds);

// ---------------------------------------------------------------------------
// File I/O.
//   <base>.bin      raw little-endian float32 samples
//   <base>.hdr      text sidecar: record_id, sampling_rate_hz, sample_count, scale
//   <base>.ann.csv  annotations: record_id,start,end,qrs_start,qrs_end,category
// ---------------------------------------------------------------------------

/// Loads samples from `path` described by `header_path`; picks up the sibling
/// annotation CSV when present.
EcgRecord load_record(const std::string& path, const std::string& header_path);

/// Writes <path>, the .hdr sidecar, and the .ann.csv sidecar (only when the
/// record has annotations).
void save_record(const EcgRecord& record, const std::string& path);

std::string header_path_for(const std::string& sample_path);
std::string annotation_path_for(const std::string& sample_path);

// ---------------------------------------------------------------------------
// Segment archive.
//   <base>.seg         magic "ECGSEGV1", u32 segment_length, u64 count,
//                      then count*segment_length little-endian float32
//   <base>.labels.csv  index,category,source_record,provenance
// ---------------------------------------------------------------------------

void save_segments(const Dataset& ds, const std::string& base_path);
Dataset load_segments(const std::string& base_path);

}  // namespace ecg
