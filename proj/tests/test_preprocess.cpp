#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "ecg/preprocess.hpp"

using namespace ecg;
using namespace ecg::prep;

namespace {

// Brute-force enumerator: every start offset in the record, kept when the
// window contains the whole QRS and sits on the step grid anchored at the
// smallest admissible offset.
std::vector<int64_t> enumerate_starts(int64_t record_len, int64_t qrs_start,
                                      int64_t qrs_end, int64_t N, int64_t n) {
  const int64_t s_min = std::max<int64_t>(0, qrs_end - N);
  std::vector<int64_t> starts;
  for (int64_t s = 0; s + N <= record_len; ++s) {
    const bool contains = s <= qrs_start && s + N >= qrs_end;
    const bool on_grid = s >= s_min && (s - s_min) % n == 0;
    if (contains && on_grid) starts.push_back(s);
  }
  return starts;
}

EcgRecord make_record(int64_t len, int64_t qrs_start, int64_t qrs_end,
                      RhythmCategory cat = RhythmCategory::N) {
  EcgRecord rec;
  rec.record_id = "w";
  rec.sampling_rate_hz = 300.0;
  rec.samples.resize(len);
  for (int64_t i = 0; i < len; ++i)
    rec.samples[i] = static_cast<float>(i % 97) * 0.01f;
  BeatAnnotation a;
  a.start_index = std::max<int64_t>(0, qrs_start - 5);
  a.end_index = std::min(len, qrs_end + 5);
  a.qrs_start = qrs_start;
  a.qrs_end = qrs_end;
  a.category = cat;
  rec.annotations.push_back(a);
  return rec;
}

}  // namespace

TEST_CASE("standardize produces the forced zero-mean unit-variance values") {
  const auto out = standardize({1.0, 2.0, 3.0});
  REQUIRE(out.size() == 3);
  CHECK(out[0] == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(out[2] == doctest::Approx(1.224744871391589).epsilon(1e-12));

  double mean = 0.0;
  for (double v : out) mean += v;
  CHECK(std::abs(mean / 3.0) < 1e-12);
  double var = 0.0;
  for (double v : out) var += v * v;
  CHECK(std::abs(var / 3.0 - 1.0) < 1e-12);
}

TEST_CASE("standardize is idempotent and scale/shift invariant") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(50);
    for (auto& v : x) v = rng.normal(2.0, 5.0);
    const auto s = standardize(x);
    const auto ss = standardize(s);
    for (size_t i = 0; i < x.size(); ++i)
      CHECK(std::abs(ss[i] - s[i]) < 1e-10);

    const double a = rng.uniform(0.1, 10.0);
    const double b = rng.uniform(-20.0, 20.0);
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
    const auto sy = standardize(y);
    for (size_t i = 0; i < x.size(); ++i)
      CHECK(std::abs(sy[i] - s[i]) < 1e-10);
  }
}

TEST_CASE("standardize rejects constant segments") {
  CHECK_THROWS_WITH_AS(standardize({5.0, 5.0, 5.0}),
                       doctest::Contains("zero variance"), ValidationError);
  CHECK_THROWS_AS(standardize({1.0}), ValidationError);
}

TEST_CASE("canonical enlargement: N=600, n=20, L=100 gives 26 windows") {
  // QRS far from both edges; count frozen from the brute-force enumerator:
  // floor((600-100)/20)+1 = 26
  const EcgRecord rec = make_record(3000, 1400, 1500);
  const WindowConfig cfg{600, 20};
  const auto windows = slide_windows(rec, rec.annotations[0], cfg);
  CHECK(windows.size() == 26);
  CHECK(enumerate_starts(3000, 1400, 1500, 600, 20).size() == 26);
  for (const auto& w : windows) {
    CHECK(w.samples.size() == 600);
    CHECK(w.category == RhythmCategory::N);
    CHECK(w.provenance == Provenance::window_augmented);
    CHECK(w.source_record == "w");
  }
}

TEST_CASE("window exactly the QRS length admits a single start") {
  const EcgRecord rec = make_record(1000, 450, 550);
  const auto windows = slide_windows(rec, rec.annotations[0], {100, 7});
  REQUIRE(windows.size() == 1);
  // the single admissible window is [qrs_start, qrs_end)
  for (int i = 0; i < 100; ++i)
    CHECK(windows[0].samples[i] == doctest::Approx(rec.samples[450 + i]));
}

TEST_CASE("QRS flush against the record start truncates the window set") {
  const EcgRecord rec = make_record(800, 10, 110);
  const WindowConfig cfg{300, 25};
  const auto windows = slide_windows(rec, rec.annotations[0], cfg);
  const auto starts = enumerate_starts(800, 10, 110, 300, 25);
  REQUIRE(windows.size() == starts.size());
  for (size_t i = 0; i < starts.size(); ++i)
    for (int j = 0; j < 300; ++j)
      CHECK(windows[i].samples[j] ==
            doctest::Approx(rec.samples[starts[i] + j]));
}

TEST_CASE("record edges too tight give an empty list, not an error") {
  // window longer than the whole record
  const EcgRecord rec = make_record(200, 90, 120);
  const auto windows = slide_windows(rec, rec.annotations[0], {300, 10});
  CHECK(windows.empty());
}

TEST_CASE("QRS longer than the window is a validation error") {
  const EcgRecord rec = make_record(1000, 100, 400);
  CHECK_THROWS_AS(slide_windows(rec, rec.annotations[0], {200, 10}),
                  ValidationError);
}

TEST_CASE("randomized windows match the brute-force enumerator") {
  Rng rng(17);
  int nonempty = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int64_t N = 20 + static_cast<int64_t>(rng.uniform_int(600));
    const int64_t n = 1 + static_cast<int64_t>(rng.uniform_int(40));
    const int64_t L = 1 + static_cast<int64_t>(rng.uniform_int(N));
    const int64_t len = N + static_cast<int64_t>(rng.uniform_int(1200));
    const int64_t qrs_start = static_cast<int64_t>(rng.uniform_int(len - L + 1));
    const int64_t qrs_end = qrs_start + L;

    const EcgRecord rec = make_record(len, qrs_start, qrs_end);
    const auto windows = slide_windows(
        rec, rec.annotations[0],
        {static_cast<int>(N), static_cast<int>(n)});
    const auto starts = enumerate_starts(len, qrs_start, qrs_end, N, n);

    REQUIRE(windows.size() == starts.size());
    if (!windows.empty()) ++nonempty;
    for (size_t i = 0; i < windows.size(); ++i) {
      const int64_t s = starts[i];
      CHECK(s <= qrs_start);
      CHECK(s + N >= qrs_end);
      // spot-check contents
      CHECK(windows[i].samples.front() == doctest::Approx(rec.samples[s]));
      CHECK(windows[i].samples.back() ==
            doctest::Approx(rec.samples[s + N - 1]));
    }
  }
  CHECK(nonempty > 100);  // the generator covers non-trivial cases
}

TEST_CASE("slide_windows over a whole record concatenates per annotation") {
  EcgRecord rec = make_record(2000, 300, 360);
  BeatAnnotation b;
  b.start_index = 1000;
  b.end_index = 1500;
  b.qrs_start = 1200;
  b.qrs_end = 1260;
  b.category = RhythmCategory::Q;
  rec.annotations.push_back(b);
  const auto windows = slide_windows(rec, {200, 50});
  const auto first = slide_windows(rec, rec.annotations[0], {200, 50});
  const auto second = slide_windows(rec, rec.annotations[1], {200, 50});
  CHECK(windows.size() == first.size() + second.size());
}

TEST_CASE("balance_classes draws exactly per_class from every category") {
  Rng rng(23);
  Dataset ds(4);
  const int want[5] = {3, 2, 2, 2, 2};
  for (int c = 0; c < 5; ++c)
    for (int i = 0; i < want[c]; ++i) {
      LabeledSegment s;
      s.samples = {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
      s.category = category_from_index(c);
      ds.add(std::move(s));
    }
  const Dataset out = balance_classes(ds, 2, 7);
  CHECK(out.size() == 10);
  for (int c = 0; c < 5; ++c) CHECK(out.counts()[c] == 2);

  // determinism
  const Dataset out2 = balance_classes(ds, 2, 7);
  REQUIRE(out2.size() == out.size());
  for (size_t i = 0; i < out.size(); ++i)
    CHECK(out2[i].samples == out[i].samples);

  CHECK_THROWS_WITH_AS(balance_classes(ds, 3, 7),
                       doctest::Contains("category V has 2 < 3"),
                       ValidationError);
}

TEST_CASE("split gives a deterministic disjoint exhaustive partition") {
  Dataset ds(2);
  for (int i = 0; i < 10; ++i) {
    LabeledSegment s;
    s.samples = {static_cast<double>(i), 0.0};
    s.category = RhythmCategory::N;
    s.source_record = "r" + std::to_string(i);
    ds.add(std::move(s));
  }
  SplitConfig cfg;
  cfg.train_fraction = 0.8;
  cfg.seed = 11;
  auto [train, test] = split(ds, cfg);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);

  std::multiset<double> seen;
  for (size_t i = 0; i < train.size(); ++i) seen.insert(train[i].samples[0]);
  for (size_t i = 0; i < test.size(); ++i) seen.insert(test[i].samples[0]);
  CHECK(seen.size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(seen.count(static_cast<double>(i)) == 1);

  auto [train2, test2] = split(ds, cfg);
  for (size_t i = 0; i < train.size(); ++i)
    CHECK(train2[i].samples[0] == train[i].samples[0]);
  for (size_t i = 0; i < test.size(); ++i)
    CHECK(test2[i].samples[0] == test[i].samples[0]);
}

TEST_CASE("record-disjoint split keeps each record on one side") {
  Dataset ds(2);
  for (int i = 0; i < 12; ++i) {
    LabeledSegment s;
    s.samples = {static_cast<double>(i), 1.0};
    s.category = RhythmCategory::N;
    s.source_record = i < 7 ? "recA" : "recB";
    ds.add(std::move(s));
  }
  SplitConfig cfg;
  cfg.train_fraction = 0.8;
  cfg.seed = 5;
  cfg.record_disjoint = true;
  auto [train, test] = split(ds, cfg);
  CHECK(train.size() + test.size() == 12);
  CHECK(!train.empty());
  CHECK(!test.empty());
  std::set<std::string> train_records, test_records;
  for (size_t i = 0; i < train.size(); ++i)
    train_records.insert(train[i].source_record);
  for (size_t i = 0; i < test.size(); ++i)
    test_records.insert(test[i].source_record);
  for (const auto& r : train_records) CHECK(test_records.count(r) == 0);
}
