#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ecg/signal.hpp"

namespace ecg::prep {

/// Sliding-window enlargement parameters: window size N, step n (samples).
struct WindowConfig {
  int window_size = 600;
  int step = 20;
};

struct SplitConfig {
  double train_fraction = 0.8;
  uint64_t seed = 0;
  bool record_disjoint = false;
};

/// Zero mean, unit population variance. Throws ValidationError("zero
/// variance ...") on a constant segment; the caller decides to drop it.
std::vector<double> standardize(const std::vector<double>& segment);

/// All windows of length N that fully contain the annotation's QRS interval
/// and lie inside the record, anchored at s_min = max(0, qrs_end - N) and
/// stepping by n. Returns an empty list when the record edges leave no room.
std::vector<LabeledSegment> slide_windows(const EcgRecord& record,
                                          const BeatAnnotation& annotation,
                                          const WindowConfig& config);

/// slide_windows over every annotation of the record.
std::vector<LabeledSegment> slide_windows(const EcgRecord& record,
                                          const WindowConfig& config);

/// Exactly per_class segments of each category, drawn by seeded uniform
/// sampling without replacement. Throws naming any under-populated category.
Dataset balance_classes(const Dataset& dataset, int64_t per_class,
                        uint64_t seed);

/// Disjoint, exhaustive partition via a seeded shuffle;
/// |train| = round(train_fraction * |dataset|). With record_disjoint set, all
/// segments of one source_record land on the same side.
std::pair<Dataset, Dataset> split(const Dataset& dataset,
                                  const SplitConfig& config);

}  // namespace ecg::prep
