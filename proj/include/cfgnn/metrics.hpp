#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfgnn/types.hpp"

namespace cfgnn {

/// counts(k, l) = number of samples of true class k predicted as l.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(Index classes = 0)
      : classes_(classes), counts_(static_cast<std::size_t>(classes * classes), 0) {}

  Index classes() const noexcept { return classes_; }
  long long& at(Index truth, Index pred) {
    return counts_[static_cast<std::size_t>(truth * classes_ + pred)];
  }
  long long at(Index truth, Index pred) const {
    return counts_[static_cast<std::size_t>(truth * classes_ + pred)];
  }
  long long total() const;
  long long row_sum(Index k) const;  // true-class support
  long long col_sum(Index l) const;  // predicted count
  long long trace() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  Index classes_;
  std::vector<long long> counts_;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred, Index classes);
/// Restricted to the samples listed in `nodes`.
ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred,
                          std::span<const Index> nodes, Index classes);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long long support = 0;
};

/// Per-class scores plus macro and support-weighted averages. Any ratio with
/// a zero denominator is reported as 0.
struct PrecisionRecallF1 {
  std::vector<ClassScores> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
};

PrecisionRecallF1 precision_recall_f1(const ConfusionMatrix& cm);

double accuracy(const ConfusionMatrix& cm);

/// Geometric mean of per-class recalls over classes that occur in the truth.
/// For two classes this is sqrt(TPR * TNR).
double g_mean(const ConfusionMatrix& cm);

/// Multiclass Matthews correlation (Gorodkin's R_K statistic); 0 when the
/// denominator vanishes.
double mcc_multiclass(const ConfusionMatrix& cm);

struct CmaResult {
  double value = 0.0;
  std::vector<Index> excluded;  // classes with no true samples
};

/// Mean per-class recall over classes present in the truth.
CmaResult cma(const ConfusionMatrix& cm);

struct MetricsReport {
  std::vector<std::string> class_names;
  PrecisionRecallF1 prf;
  double accuracy = 0.0;
  double g_mean = 0.0;
  double mcc = 0.0;
  double cma = 0.0;
};

MetricsReport evaluate(const ConfusionMatrix& cm, std::vector<std::string> class_names);

/// Keys: accuracy, per_class[{name, precision, recall, f1, support}],
/// macro_f1, weighted_f1, g_mean, mcc, cma.
nlohmann::ordered_json report_json(const MetricsReport& report);

/// Header row and first column carry the class names.
std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names);

}  // namespace cfgnn
