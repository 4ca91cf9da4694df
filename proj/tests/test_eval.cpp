#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ecg/eval.hpp"

using namespace ecg;
using namespace ecg::eval;

namespace {

// independent counting oracle: nested loops over categories
std::vector<int64_t> tally(const std::vector<int>& preds,
                           const std::vector<int>& labels, int k) {
  std::vector<int64_t> cells(static_cast<size_t>(k) * k, 0);
  for (int t = 0; t < k; ++t)
    for (int p = 0; p < k; ++p) {
      int64_t n = 0;
      for (size_t i = 0; i < preds.size(); ++i)
        if (labels[i] == t && preds[i] == p) ++n;
      cells[static_cast<size_t>(t) * k + p] = n;
    }
  return cells;
}

}  // namespace

TEST_CASE("a perfect classifier yields a diagonal matrix") {
  Rng rng(1);
  std::vector<int> labels(200);
  for (auto& l : labels) l = static_cast<int>(rng.uniform_int(5));
  const ConfusionMatrix m = confusion(labels, labels);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c)
      if (r != c) CHECK(m.at(r, c) == 0);
  CHECK(m.trace() == 200);
}

TEST_CASE("cells count true/predicted pairs") {
  const ConfusionMatrix m = confusion({0, 1}, {1, 1});
  CHECK(m.at(1, 0) == 1);
  CHECK(m.at(1, 1) == 1);
  CHECK(m.total() == 2);
}

TEST_CASE("10,000 fuzzed pairs match the brute-force tally") {
  Rng rng(7);
  std::vector<int> preds(10000), labels(10000);
  for (auto& p : preds) p = static_cast<int>(rng.uniform_int(5));
  for (auto& l : labels) l = static_cast<int>(rng.uniform_int(5));
  const ConfusionMatrix m = confusion(preds, labels);
  CHECK(m.total() == 10000);
  CHECK(m.cells == tally(preds, labels, 5));
  CHECK(m.trace() <= m.total());
}

TEST_CASE("permuting the pairs leaves the matrix unchanged") {
  Rng rng(9);
  std::vector<int> preds(500), labels(500);
  for (auto& p : preds) p = static_cast<int>(rng.uniform_int(5));
  for (auto& l : labels) l = static_cast<int>(rng.uniform_int(5));
  const ConfusionMatrix m1 = confusion(preds, labels);

  std::vector<size_t> idx(500);
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  rng.shuffle(idx);
  std::vector<int> p2(500), l2(500);
  for (size_t i = 0; i < idx.size(); ++i) {
    p2[i] = preds[idx[i]];
    l2[i] = labels[idx[i]];
  }
  const ConfusionMatrix m2 = confusion(p2, l2);
  CHECK(m1.cells == m2.cells);
}

TEST_CASE("identity matrix scores perfect metrics") {
  ConfusionMatrix m(5);
  for (int i = 0; i < 5; ++i) m.at(i, i) = 10;
  const Metrics met = metrics(m);
  CHECK(met.accuracy == 1.0);
  for (int c = 0; c < 5; ++c) {
    CHECK(met.precision[c] == 1.0);
    CHECK(met.recall[c] == 1.0);
    CHECK(met.precision_defined[c]);
    CHECK(met.recall_defined[c]);
  }
}

TEST_CASE("randomized matrices agree exactly with the formula oracle") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    ConfusionMatrix m(5);
    for (auto& c : m.cells) c = static_cast<int64_t>(rng.uniform_int(40));
    if (m.total() == 0) m.at(0, 0) = 1;
    const Metrics met = metrics(m);

    CHECK(met.accuracy >= 0.0);
    CHECK(met.accuracy <= 1.0);
    CHECK(met.accuracy ==
          static_cast<double>(m.trace()) / static_cast<double>(m.total()));
    for (int c = 0; c < 5; ++c) {
      int64_t col = 0, row = 0;
      for (int i = 0; i < 5; ++i) {
        col += m.at(i, c);
        row += m.at(c, i);
      }
      if (col > 0)
        CHECK(met.precision[c] ==
              static_cast<double>(m.at(c, c)) / static_cast<double>(col));
      else
        CHECK_FALSE(met.precision_defined[c]);
      if (row > 0)
        CHECK(met.recall[c] ==
              static_cast<double>(m.at(c, c)) / static_cast<double>(row));
      else
        CHECK_FALSE(met.recall_defined[c]);
    }
  }
}

TEST_CASE("empty rows and columns flag precision/recall as undefined zeros") {
  ConfusionMatrix m(5);
  m.at(0, 0) = 5;
  m.at(1, 0) = 3;  // nothing ever predicted as category 1; row 2..4 empty
  const Metrics met = metrics(m);
  CHECK_FALSE(met.precision_defined[1]);
  CHECK(met.precision[1] == 0.0);
  CHECK_FALSE(met.recall_defined[2]);
  CHECK(met.recall[2] == 0.0);
}

TEST_CASE("mismatched and out-of-range inputs are rejected") {
  CHECK_THROWS_AS(confusion({0, 1}, {0}), ValidationError);
  CHECK_THROWS_AS(confusion({0, 7}, {0, 0}), ValidationError);
  CHECK_THROWS_AS(confusion({0, 0}, {0, -2}), ValidationError);
  ConfusionMatrix empty(5);
  CHECK_THROWS_AS(metrics(empty), ValidationError);
}

TEST_CASE("confusion CSV carries category symbols and all cells") {
  namespace fs = std::filesystem;
  ConfusionMatrix m(5);
  m.at(0, 0) = 3;
  m.at(4, 1) = 2;
  const std::string path =
      (fs::temp_directory_path() / "ecg_confusion.csv").string();
  write_confusion_csv(m, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "true\\pred,N,V,S,A,Q");
  std::string row;
  int rows = 0;
  while (std::getline(in, row))
    if (!row.empty()) ++rows;
  CHECK(rows == 5);

  const std::string report = format_report(m, metrics(m));
  CHECK(report.find("accuracy") != std::string::npos);
  CHECK(report.find("undef") != std::string::npos);
}
