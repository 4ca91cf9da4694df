#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecg/signal.hpp"

namespace ecg::eval {

/// K x K counts; rows are true categories, columns are predictions.
struct ConfusionMatrix {
  int k = 0;
  std::vector<int64_t> cells;  // row-major

  explicit ConfusionMatrix(int k = kNumCategories)
      : k(k), cells(static_cast<size_t>(k) * k, 0) {}

  int64_t& at(int true_cat, int pred_cat) {
    return cells[static_cast<size_t>(true_cat) * k + pred_cat];
  }
  int64_t at(int true_cat, int pred_cat) const {
    return cells[static_cast<size_t>(true_cat) * k + pred_cat];
  }
  int64_t total() const;
  int64_t trace() const;
};

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> precision;       // per category (PPV)
  std::vector<double> recall;          // per category
  std::vector<bool> precision_defined;  // false when the column was empty
  std::vector<bool> recall_defined;     // false when the row was empty
};

ConfusionMatrix confusion(const std::vector<int>& preds,
                          const std::vector<int>& labels,
                          int k = kNumCategories);

Metrics metrics(const ConfusionMatrix& matrix);

/// CSV: header row of predicted symbols, one row per true category.
void write_confusion_csv(const ConfusionMatrix& m, const std::string& path);

/// Human-readable block: matrix plus accuracy/precision/recall table.
std::string format_report(const ConfusionMatrix& m, const Metrics& met);

}  // namespace ecg::eval
