#include <cmath>
#include <random>

#include "doctest.h"

#include "cfgnn/metrics.hpp"
#include "oracles.hpp"

using namespace cfgnn;

namespace {

ConfusionMatrix from_rows(std::initializer_list<std::initializer_list<long long>> rows) {
  ConfusionMatrix cm(static_cast<Index>(rows.size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (long long v : r) cm.at(i, j++) = v;
    ++i;
  }
  return cm;
}

// Expands a confusion matrix back into label vectors.
void expand(const ConfusionMatrix& cm, std::vector<int>& truth, std::vector<int>& pred) {
  for (Index i = 0; i < cm.classes(); ++i)
    for (Index j = 0; j < cm.classes(); ++j)
      for (long long k = 0; k < cm.at(i, j); ++k) {
        truth.push_back(static_cast<int>(i));
        pred.push_back(static_cast<int>(j));
      }
}

}  // namespace

TEST_CASE("confusion counting") {
  const std::vector<int> t = {0, 0, 1, 1}, p = {0, 1, 0, 1};
  CHECK(confusion(t, p, 2) == from_rows({{1, 1}, {1, 1}}));
  CHECK(confusion(t, t, 2) == from_rows({{2, 0}, {0, 2}}));
  CHECK(confusion(std::vector<int>{}, std::vector<int>{}, 3).total() == 0);
  const std::vector<Index> nodes = {1, 3};
  CHECK(confusion(t, p, nodes, 2) == from_rows({{0, 1}, {0, 1}}));
  CHECK_THROWS(confusion(t, std::vector<int>{0}, 2));
  CHECK_THROWS(confusion(t, std::vector<int>{0, 0, 5, 0}, 2));
}

TEST_CASE("reference confusion matrix [[8,2],[1,9]]") {
  const ConfusionMatrix cm = from_rows({{8, 2}, {1, 9}});
  const auto prf = precision_recall_f1(cm);
  CHECK(prf.per_class[0].precision == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  CHECK(prf.per_class[0].recall == 0.8);
  CHECK(prf.per_class[0].f1 == doctest::Approx(16.0 / 19.0).epsilon(1e-15));
  CHECK(prf.per_class[0].f1 == doctest::Approx(0.8421).epsilon(1e-4));
  CHECK(g_mean(cm) == doctest::Approx(std::sqrt(0.72)).epsilon(1e-15));
  CHECK(g_mean(cm) == doctest::Approx(0.8485).epsilon(1e-4));
  CHECK(mcc_multiclass(cm) == doctest::Approx(70.0 / std::sqrt(9900.0)).epsilon(1e-15));
  CHECK(mcc_multiclass(cm) == doctest::Approx(0.7035).epsilon(1e-4));
  CHECK(cma(cm).value == doctest::Approx(0.85).epsilon(1e-15));
  CHECK(accuracy(cm) == 0.85);
  CHECK(prf.weighted_f1 == doctest::Approx((10 * 16.0 / 19.0 + 10 * (18.0 / 21.0)) / 20.0));
}

TEST_CASE("degenerate cases") {
  const ConfusionMatrix diag = from_rows({{3, 0, 0}, {0, 4, 0}, {0, 0, 5}});
  const auto prf = precision_recall_f1(diag);
  CHECK(prf.macro_f1 == 1.0);
  CHECK(g_mean(diag) == 1.0);
  CHECK(mcc_multiclass(diag) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cma(diag).value == 1.0);

  const ConfusionMatrix absent = from_rows({{3, 0, 0}, {0, 4, 0}, {0, 0, 0}});
  const auto pa = precision_recall_f1(absent);
  CHECK(pa.per_class[2].precision == 0.0);
  CHECK(pa.per_class[2].recall == 0.0);
  CHECK(pa.per_class[2].f1 == 0.0);
  const CmaResult ca = cma(absent);
  CHECK(ca.value == 1.0);
  CHECK(ca.excluded == std::vector<Index>{2});
  CHECK(g_mean(absent) == 1.0);

  CHECK(g_mean(from_rows({{5, 0}, {3, 0}})) == 0.0);
  CHECK(mcc_multiclass(from_rows({{2, 2}, {2, 2}})) == 0.0);
  CHECK(mcc_multiclass(from_rows({{4, 0}, {4, 0}})) == 0.0);
  CHECK(cma(from_rows({{0, 5}, {0, 5}})).value == 0.5);
  CHECK(accuracy(ConfusionMatrix(2)) == 0.0);
}

TEST_CASE("multiclass MCC agrees with the covariance definition") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> count(0, 12);
  for (int t = 0; t < 300; ++t) {
    const Index c = 2 + t % 5;
    ConfusionMatrix cm(c);
    for (Index i = 0; i < c; ++i)
      for (Index j = 0; j < c; ++j) cm.at(i, j) = count(rng);
    std::vector<int> truth, pred;
    expand(cm, truth, pred);
    CHECK(std::abs(mcc_multiclass(cm) - oracle::mcc_covariance(truth, pred, static_cast<int>(c))) < 1e-12);
    if (c == 2) {
      CHECK(std::abs(mcc_multiclass(cm) - oracle::mcc_binary(double(cm.at(0, 0)), double(cm.at(0, 1)),
                                                             double(cm.at(1, 0)), double(cm.at(1, 1)))) < 1e-12);
    }
  }
}

TEST_CASE("report json and confusion csv") {
  const ConfusionMatrix cm = from_rows({{8, 2}, {1, 9}});
  const MetricsReport r = evaluate(cm, {"normal", "fault"});
  const auto j = report_json(r);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"accuracy", "per_class", "macro_f1", "weighted_f1", "g_mean", "mcc", "cma"});
  REQUIRE(j["per_class"].size() == 2);
  std::vector<std::string> class_keys;
  for (const auto& [k, v] : j["per_class"][0].items()) class_keys.push_back(k);
  CHECK(class_keys == std::vector<std::string>{"name", "precision", "recall", "f1", "support"});
  CHECK(j["per_class"][1]["support"] == 10);
  CHECK(confusion_csv(cm, {"normal", "fault"}) == "true\\predicted,normal,fault\nnormal,8,2\nfault,1,9\n");
  CHECK_THROWS(evaluate(cm, {"only-one"}));
}
