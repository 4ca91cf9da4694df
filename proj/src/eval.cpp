#include "ecg/eval.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace ecg::eval {

int64_t ConfusionMatrix::total() const {
  int64_t s = 0;
  for (int64_t c : cells) s += c;
  return s;
}

int64_t ConfusionMatrix::trace() const {
  int64_t s = 0;
  for (int i = 0; i < k; ++i) s += at(i, i);
  return s;
}

ConfusionMatrix confusion(const std::vector<int>& preds,
                          const std::vector<int>& labels, int k) {
  if (preds.size() != labels.size())
    throw ValidationError("confusion: " + std::to_string(preds.size()) +
                          " predictions vs " + std::to_string(labels.size()) +
                          " labels");
  ConfusionMatrix m(k);
  for (size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k)
      throw ValidationError("confusion: label " + std::to_string(labels[i]) +
                            " out of range at index " + std::to_string(i));
    if (preds[i] < 0 || preds[i] >= k)
      throw ValidationError("confusion: prediction " +
                            std::to_string(preds[i]) +
                            " out of range at index " + std::to_string(i));
    m.at(labels[i], preds[i])++;
  }
  return m;
}

Metrics metrics(const ConfusionMatrix& matrix) {
  const int64_t total = matrix.total();
  if (total <= 0) throw ValidationError("metrics: empty confusion matrix");
  Metrics met;
  met.accuracy =
      static_cast<double>(matrix.trace()) / static_cast<double>(total);
  met.precision.assign(matrix.k, 0.0);
  met.recall.assign(matrix.k, 0.0);
  met.precision_defined.assign(matrix.k, true);
  met.recall_defined.assign(matrix.k, true);
  for (int c = 0; c < matrix.k; ++c) {
    int64_t col = 0, row = 0;
    for (int i = 0; i < matrix.k; ++i) {
      col += matrix.at(i, c);
      row += matrix.at(c, i);
    }
    if (col == 0)
      met.precision_defined[c] = false;
    else
      met.precision[c] =
          static_cast<double>(matrix.at(c, c)) / static_cast<double>(col);
    if (row == 0)
      met.recall_defined[c] = false;
    else
      met.recall[c] =
          static_cast<double>(matrix.at(c, c)) / static_cast<double>(row);
  }
  return met;
}

void write_confusion_csv(const ConfusionMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write confusion matrix '" + path + "'");
  out << "true\\pred";
  for (int c = 0; c < m.k; ++c)
    out << ',' << category_symbol(category_from_index(c));
  out << "\n";
  for (int r = 0; r < m.k; ++r) {
    out << category_symbol(category_from_index(r));
    for (int c = 0; c < m.k; ++c) out << ',' << m.at(r, c);
    out << "\n";
  }
}

std::string format_report(const ConfusionMatrix& m, const Metrics& met) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "confusion matrix (rows = true, cols = predicted)\n      ";
  for (int c = 0; c < m.k; ++c)
    os << std::setw(9) << category_symbol(category_from_index(c));
  os << "\n";
  for (int r = 0; r < m.k; ++r) {
    os << "  " << category_symbol(category_from_index(r)) << "   ";
    for (int c = 0; c < m.k; ++c) os << std::setw(9) << m.at(r, c);
    os << "\n";
  }
  os << "accuracy " << met.accuracy << "\n";
  os << "category  precision  recall\n";
  for (int c = 0; c < m.k; ++c) {
    os << "  " << category_symbol(category_from_index(c)) << "      ";
    if (met.precision_defined[c])
      os << std::setw(9) << met.precision[c];
    else
      os << std::setw(9) << "undef";
    if (met.recall_defined[c])
      os << std::setw(9) << met.recall[c];
    else
      os << std::setw(9) << "undef";
    os << "\n";
  }
  return os.str();
}

}  // namespace ecg::eval
