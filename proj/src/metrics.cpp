#include "cfgnn/metrics.hpp"

#include <cmath>
#include <sstream>

#include "cfgnn/csv.hpp"
#include "cfgnn/error.hpp"

namespace cfgnn {
namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

void tally(ConfusionMatrix& cm, int t, int p) {
  const Index c = cm.classes();
  if (t < 0 || t >= c || p < 0 || p >= c) {
    throw DataError("label outside [0, " + std::to_string(c) + ")");
  }
  ++cm.at(t, p);
}

}  // namespace

long long ConfusionMatrix::total() const {
  long long s = 0;
  for (long long v : counts_) s += v;
  return s;
}

long long ConfusionMatrix::row_sum(Index k) const {
  long long s = 0;
  for (Index l = 0; l < classes_; ++l) s += at(k, l);
  return s;
}

long long ConfusionMatrix::col_sum(Index l) const {
  long long s = 0;
  for (Index k = 0; k < classes_; ++k) s += at(k, l);
  return s;
}

long long ConfusionMatrix::trace() const {
  long long s = 0;
  for (Index k = 0; k < classes_; ++k) s += at(k, k);
  return s;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred, Index classes) {
  if (truth.size() != pred.size()) throw DataError("confusion: label vectors differ in length");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truth.size(); ++i) tally(cm, truth[i], pred[i]);
  return cm;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred,
                          std::span<const Index> nodes, Index classes) {
  if (truth.size() != pred.size()) throw DataError("confusion: label vectors differ in length");
  ConfusionMatrix cm(classes);
  for (Index i : nodes) {
    if (i < 0 || static_cast<std::size_t>(i) >= truth.size()) {
      throw DataError("confusion: node index out of range");
    }
    tally(cm, truth[static_cast<std::size_t>(i)], pred[static_cast<std::size_t>(i)]);
  }
  return cm;
}

PrecisionRecallF1 precision_recall_f1(const ConfusionMatrix& cm) {
  PrecisionRecallF1 out;
  const Index c = cm.classes();
  const double total = static_cast<double>(cm.total());
  for (Index k = 0; k < c; ++k) {
    const double tp = static_cast<double>(cm.at(k, k));
    ClassScores s;
    s.support = cm.row_sum(k);
    s.precision = ratio(tp, static_cast<double>(cm.col_sum(k)));
    s.recall = ratio(tp, static_cast<double>(s.support));
    s.f1 = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
    out.per_class.push_back(s);

    out.macro_precision += s.precision;
    out.macro_recall += s.recall;
    out.macro_f1 += s.f1;
    const double w = ratio(static_cast<double>(s.support), total);
    out.weighted_precision += w * s.precision;
    out.weighted_recall += w * s.recall;
    out.weighted_f1 += w * s.f1;
  }
  if (c > 0) {
    out.macro_precision /= static_cast<double>(c);
    out.macro_recall /= static_cast<double>(c);
    out.macro_f1 /= static_cast<double>(c);
  }
  return out;
}

double accuracy(const ConfusionMatrix& cm) {
  return ratio(static_cast<double>(cm.trace()), static_cast<double>(cm.total()));
}

double g_mean(const ConfusionMatrix& cm) {
  double log_sum = 0.0;
  Index present = 0;
  for (Index k = 0; k < cm.classes(); ++k) {
    const long long support = cm.row_sum(k);
    if (support == 0) continue;
    const double recall = static_cast<double>(cm.at(k, k)) / static_cast<double>(support);
    if (recall == 0.0) return 0.0;
    log_sum += std::log(recall);
    ++present;
  }
  return present == 0 ? 0.0 : std::exp(log_sum / static_cast<double>(present));
}

double mcc_multiclass(const ConfusionMatrix& cm) {
  const double s = static_cast<double>(cm.total());
  const double c = static_cast<double>(cm.trace());
  double pt = 0.0, pp = 0.0, tt = 0.0;
  for (Index k = 0; k < cm.classes(); ++k) {
    const double t = static_cast<double>(cm.row_sum(k));
    const double p = static_cast<double>(cm.col_sum(k));
    pt += p * t;
    pp += p * p;
    tt += t * t;
  }
  const double den = std::sqrt((s * s - pp) * (s * s - tt));
  return den == 0.0 ? 0.0 : (c * s - pt) / den;
}

CmaResult cma(const ConfusionMatrix& cm) {
  CmaResult out;
  double sum = 0.0;
  Index present = 0;
  for (Index k = 0; k < cm.classes(); ++k) {
    const long long support = cm.row_sum(k);
    if (support == 0) {
      out.excluded.push_back(k);
      continue;
    }
    sum += static_cast<double>(cm.at(k, k)) / static_cast<double>(support);
    ++present;
  }
  out.value = present == 0 ? 0.0 : sum / static_cast<double>(present);
  return out;
}

MetricsReport evaluate(const ConfusionMatrix& cm, std::vector<std::string> class_names) {
  if (static_cast<Index>(class_names.size()) != cm.classes()) {
    throw DataError("class name count does not match confusion matrix");
  }
  MetricsReport r;
  r.class_names = std::move(class_names);
  r.prf = precision_recall_f1(cm);
  r.accuracy = accuracy(cm);
  r.g_mean = g_mean(cm);
  r.mcc = mcc_multiclass(cm);
  r.cma = cma(cm).value;
  return r;
}

nlohmann::ordered_json report_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  auto per_class = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < report.prf.per_class.size(); ++k) {
    const ClassScores& s = report.prf.per_class[k];
    per_class.push_back({{"name", report.class_names[k]},
                         {"precision", s.precision},
                         {"recall", s.recall},
                         {"f1", s.f1},
                         {"support", s.support}});
  }
  j["per_class"] = std::move(per_class);
  j["macro_f1"] = report.prf.macro_f1;
  j["weighted_f1"] = report.prf.weighted_f1;
  j["g_mean"] = report.g_mean;
  j["mcc"] = report.mcc;
  j["cma"] = report.cma;
  return j;
}

std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names) {
  if (static_cast<Index>(class_names.size()) != cm.classes()) {
    throw DataError("class name count does not match confusion matrix");
  }
  std::ostringstream os;
  std::vector<std::string> header{"true\\predicted"};
  header.insert(header.end(), class_names.begin(), class_names.end());
  csv::write_row(os, header);
  for (Index k = 0; k < cm.classes(); ++k) {
    std::vector<std::string> row{class_names[static_cast<std::size_t>(k)]};
    for (Index l = 0; l < cm.classes(); ++l) row.push_back(std::to_string(cm.at(k, l)));
    csv::write_row(os, row);
  }
  return os.str();
}

}  // namespace cfgnn
