#include "ecg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace ecg::prep {

std::vector<double> standardize(const std::vector<double>& segment) {
  const size_t n = segment.size();
  if (n < 2) throw ValidationError("standardize requires length >= 2");
  double mean = 0.0;
  for (double v : segment) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : segment) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);  // population variance
  if (var == 0.0) throw ValidationError("zero variance segment");
  const double inv_std = 1.0 / std::sqrt(var);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = (segment[i] - mean) * inv_std;
  return out;
}

std::vector<LabeledSegment> slide_windows(const EcgRecord& record,
                                          const BeatAnnotation& annotation,
                                          const WindowConfig& config) {
  const int64_t N = config.window_size;
  const int64_t n = config.step;
  if (N <= 0 || n <= 0)
    throw ValidationError("window_size and step must be positive");
  const int64_t qrs_len = annotation.qrs_end - annotation.qrs_start;
  if (qrs_len > N)
    throw ValidationError("QRS length " + std::to_string(qrs_len) +
                          " exceeds window size " + std::to_string(N));
  const int64_t record_len = static_cast<int64_t>(record.samples.size());

  // Window [s, s+N) must contain [qrs_start, qrs_end) and lie in the record.
  const int64_t s_min = std::max<int64_t>(0, annotation.qrs_end - N);
  const int64_t s_max = std::min(annotation.qrs_start, record_len - N);

  std::vector<LabeledSegment> out;
  for (int64_t s = s_min; s <= s_max; s += n) {
    LabeledSegment seg;
    seg.samples.assign(record.samples.begin() + s,
                       record.samples.begin() + s + N);
    seg.category = annotation.category;
    seg.source_record = record.record_id;
    seg.provenance = Provenance::window_augmented;
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<LabeledSegment> slide_windows(const EcgRecord& record,
                                          const WindowConfig& config) {
  std::vector<LabeledSegment> out;
  for (const auto& a : record.annotations) {
    auto w = slide_windows(record, a, config);
    out.insert(out.end(), std::make_move_iterator(w.begin()),
               std::make_move_iterator(w.end()));
  }
  return out;
}

Dataset balance_classes(const Dataset& dataset, int64_t per_class,
                        uint64_t seed) {
  if (per_class <= 0) throw ValidationError("per_class must be positive");
  for (RhythmCategory c : all_categories()) {
    const int64_t have = dataset.counts()[category_index(c)];
    if (have < per_class)
      throw ValidationError(std::string("category ") + category_symbol(c) +
                            " has " + std::to_string(have) + " < " +
                            std::to_string(per_class));
  }

  // Per-category index pools in dataset order, then a seeded partial shuffle.
  std::array<std::vector<size_t>, kNumCategories> pools;
  for (size_t i = 0; i < dataset.size(); ++i)
    pools[category_index(dataset[i].category)].push_back(i);

  Rng rng = Rng(seed).split(rng_stream::kBalance);
  Dataset out(dataset.segment_length());
  out.reserve(static_cast<size_t>(per_class) * kNumCategories);
  for (int c = 0; c < kNumCategories; ++c) {
    auto& pool = pools[c];
    rng.shuffle(pool);
    for (int64_t k = 0; k < per_class; ++k) out.add(dataset[pool[k]]);
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset,
                                  const SplitConfig& config) {
  if (dataset.empty()) throw ValidationError("cannot split an empty dataset");
  if (config.train_fraction <= 0.0 || config.train_fraction >= 1.0)
    throw ValidationError("train_fraction must lie in (0,1)");

  const size_t n = dataset.size();
  const size_t n_train = static_cast<size_t>(
      std::llround(config.train_fraction * static_cast<double>(n)));
  Rng rng = Rng(config.seed).split(rng_stream::kSplit);

  Dataset train(dataset.segment_length());
  Dataset test(dataset.segment_length());

  if (!config.record_disjoint) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    for (size_t i = 0; i < n; ++i)
      (i < n_train ? train : test).add(dataset[idx[i]]);
    return {std::move(train), std::move(test)};
  }

  // Record-disjoint: shuffle record ids, then fill the train side record by
  // record until the target segment count is reached.
  std::map<std::string, std::vector<size_t>> by_record;
  for (size_t i = 0; i < n; ++i)
    by_record[dataset[i].source_record].push_back(i);
  std::vector<std::string> ids;
  ids.reserve(by_record.size());
  for (const auto& [id, _] : by_record) ids.push_back(id);
  rng.shuffle(ids);

  size_t assigned = 0;
  for (const auto& id : ids) {
    const auto& members = by_record[id];
    const bool to_train = assigned < n_train;
    for (size_t i : members) (to_train ? train : test).add(dataset[i]);
    if (to_train) assigned += members.size();
  }
  if (test.empty() && by_record.size() > 1) {
    // Keep both sides non-empty when more than one record exists: move the
    // last assigned record's segments over.
    Dataset train2(dataset.segment_length());
    Dataset test2(dataset.segment_length());
    const std::string& last = ids.back();
    for (const auto& id : ids) {
      const auto& members = by_record[id];
      for (size_t i : members) (id == last ? test2 : train2).add(dataset[i]);
    }
    return {std::move(train2), std::move(test2)};
  }
  return {std::move(train), std::move(test)};
}

}  // namespace ecg::prep
