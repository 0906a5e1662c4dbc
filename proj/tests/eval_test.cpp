#include "pdd/eval.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "support/metrics_oracle.hpp"

using namespace pdd;

TEST_SUITE_BEGIN("eval");

namespace {

ColumnVerdict pred(const std::string& name, bool personal) {
  ColumnVerdict v;
  v.column_name = name;
  v.is_personal = personal;
  v.detector = "rules";
  return v;
}

AnnotationSet truth_of(const std::vector<std::pair<std::string, bool>>& kv) {
  AnnotationSet ann;
  for (const auto& [name, value] : kv) ann.insert(name, value);
  return ann;
}

MetricsReport fixture(const std::string& detector, const std::string& dataset,
                      double macro, double micro, double balanced) {
  MetricsReport r;
  r.detector_id = detector;
  r.dataset_id = dataset;
  r.macro_f1 = macro;
  r.micro_f1 = micro;
  r.balanced_accuracy = balanced;
  return r;
}

// The published comparison grid: per-dataset headline metrics for the three
// detectors.
std::vector<MetricsReport> benchmark_fixture() {
  return {
      fixture("Presidio", "DeSSI", 0.793, 0.794, 0.791),
      fixture("CASSED", "DeSSI", 0.996, 0.996, 0.996),
      fixture("GPT-4o", "DeSSI", 0.766, 0.772, 0.764),
      fixture("Presidio", "Kaggle", 0.293, 0.297, 0.299),
      fixture("CASSED", "Kaggle", 0.349, 0.386, 0.481),
      fixture("GPT-4o", "Kaggle", 0.902, 0.907, 0.910),
      fixture("Presidio", "OpenML", 0.684, 0.733, 0.518),
      fixture("CASSED", "OpenML", 0.501, 0.686, 0.535),
      fixture("GPT-4o", "OpenML", 0.964, 0.969, 0.968),
      fixture("Presidio", "MIMIC-Demo-Ext", 0.662, 0.730, 0.667),
      fixture("CASSED", "MIMIC-Demo-Ext", 0.724, 0.798, 0.713),
      fixture("GPT-4o", "MIMIC-Demo-Ext", 0.829, 0.859, 0.852),
  };
}

}  // namespace

TEST_CASE("confusion counts the four cases") {
  auto preds = {pred("a", true), pred("b", true), pred("c", false),
                pred("d", false)};
  AnnotationSet truth = truth_of(
      {{"a", true}, {"b", false}, {"c", true}, {"d", false}});
  ConfusionMatrix cm = confusion({preds.begin(), preds.end()}, truth);
  CHECK(cm.tp == 1);
  CHECK(cm.fp == 1);
  CHECK(cm.fn == 1);
  CHECK(cm.tn == 1);
}

TEST_CASE("perfect predictions land on the diagonal") {
  std::vector<ColumnVerdict> preds;
  AnnotationSet truth;
  for (int i = 0; i < 8; ++i) {
    std::string name = "c" + std::to_string(i);
    preds.push_back(pred(name, i % 2 == 0));
    truth.insert(name, i % 2 == 0);
  }
  ConfusionMatrix cm = confusion(preds, truth);
  CHECK(cm.tp + cm.tn == 8);
  CHECK(cm.fp == 0);
  CHECK(cm.fn == 0);
}

TEST_CASE("all-personal predictions against all-non-personal truth") {
  std::vector<ColumnVerdict> preds;
  AnnotationSet truth;
  for (int i = 0; i < 5; ++i) {
    std::string name = "c" + std::to_string(i);
    preds.push_back(pred(name, true));
    truth.insert(name, false);
  }
  ConfusionMatrix cm = confusion(preds, truth);
  CHECK(cm.fp == 5);
  CHECK(cm.tp + cm.fn + cm.tn == 0);
}

TEST_CASE("labels may cover more columns than were predicted") {
  AnnotationSet truth =
      truth_of({{"a", true}, {"b", false}, {"unscanned", true}});
  ConfusionMatrix cm = confusion({pred("a", true), pred("b", false)}, truth);
  CHECK(cm.tp == 1);
  CHECK(cm.tn == 1);
  CHECK(cm.total() == 2);
}

TEST_CASE("confusion demands a label for every prediction") {
  AnnotationSet truth = truth_of({{"a", true}});
  try {
    confusion({pred("a", true), pred("b", false)}, truth);
    FAIL("expected MissingLabel");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::missing_label);
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
}

TEST_CASE("metric values on hand-computed matrices") {
  ConfusionMatrix balanced{1, 1, 1, 1};
  CHECK(macro_f1(balanced) == doctest::Approx(0.5));
  CHECK(micro_f1(balanced) == doctest::Approx(0.5));
  CHECK(balanced_accuracy(balanced) == doctest::Approx(0.5));

  ConfusionMatrix perfect{3, 0, 0, 4};
  CHECK(macro_f1(perfect) == doctest::Approx(1.0));
  CHECK(micro_f1(perfect) == doctest::Approx(1.0));
  CHECK(balanced_accuracy(perfect) == doctest::Approx(1.0));

  // Never predicts personal: F1_P = 0, F1_N = 2*(0.5*1)/(1.5) = 2/3.
  ConfusionMatrix never_p{0, 0, 2, 2};
  CHECK(macro_f1(never_p) == doctest::Approx(1.0 / 3.0));

  // (3+6)/10.
  ConfusionMatrix m{3, 0, 1, 6};
  CHECK(micro_f1(m) == doctest::Approx(0.9));

  // Recalls 4/5 and 2/4.
  ConfusionMatrix b{4, 2, 1, 2};
  CHECK(balanced_accuracy(b) == doctest::Approx(0.65));
}

TEST_CASE("degenerate matrices") {
  ConfusionMatrix empty;
  CHECK_THROWS_AS(macro_f1(empty), Error);
  CHECK_THROWS_AS(micro_f1(empty), Error);
  CHECK_THROWS_AS(balanced_accuracy(empty), Error);

  ConfusionMatrix single_class{3, 0, 1, 0};  // no negatives in truth
  try {
    balanced_accuracy(single_class);
    FAIL("expected SingleClassTruth");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::single_class_truth);
  }
  // Macro and micro stay defined.
  CHECK(macro_f1(single_class) > 0.0);
  CHECK(micro_f1(single_class) == doctest::Approx(0.75));
}

TEST_CASE("metrics match the brute-force oracle on random vectors") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = 2 + rng() % 49;
    std::vector<bool> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng() % 2 == 0;
      t[i] = rng() % 2 == 0;
    }
    t[0] = true;
    t[1] = false;  // both classes present

    std::vector<ColumnVerdict> preds;
    AnnotationSet truth;
    for (std::size_t i = 0; i < n; ++i) {
      std::string name = "c" + std::to_string(i);
      preds.push_back(pred(name, p[i]));
      truth.insert(name, t[i]);
    }
    ConfusionMatrix cm = confusion(preds, truth);
    auto oracle = pdd_test::oracle_metrics(p, t);
    CHECK(std::abs(macro_f1(cm) - oracle.macro_f1) < 1e-12);
    CHECK(std::abs(micro_f1(cm) - oracle.micro_f1) < 1e-12);
    CHECK(std::abs(balanced_accuracy(cm) - oracle.balanced_accuracy) < 1e-12);
  }
}

TEST_CASE("micro f1 equals accuracy exactly") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 10000; ++trial) {
    ConfusionMatrix cm{rng() % 200, rng() % 200, rng() % 200, rng() % 200};
    if (cm.total() == 0) cm.tp = 1;
    double accuracy = static_cast<double>(cm.tp + cm.tn) /
                      static_cast<double>(cm.total());
    CHECK(micro_f1(cm) == accuracy);  // bitwise, not approximate
  }
}

TEST_CASE("macro f1 and balanced accuracy are class-swap invariant") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    ConfusionMatrix cm{1 + rng() % 50, rng() % 50, rng() % 50, 1 + rng() % 50};
    ConfusionMatrix swapped{cm.tn, cm.fn, cm.fp, cm.tp};
    CHECK(macro_f1(cm) == doctest::Approx(macro_f1(swapped)).epsilon(1e-12));
    CHECK(balanced_accuracy(cm) ==
          doctest::Approx(balanced_accuracy(swapped)).epsilon(1e-12));
  }
}

TEST_CASE("metrics are permutation-invariant in column order") {
  std::mt19937 rng(17);
  std::vector<ColumnVerdict> preds;
  AnnotationSet truth;
  for (int i = 0; i < 20; ++i) {
    std::string name = "c" + std::to_string(i);
    preds.push_back(pred(name, rng() % 2 == 0));
    truth.insert(name, i % 3 == 0);
  }
  ConfusionMatrix base = confusion(preds, truth);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(preds.begin(), preds.end(), rng);
    ConfusionMatrix cm = confusion(preds, truth);
    CHECK(cm.tp == base.tp);
    CHECK(cm.fp == base.fp);
    CHECK(cm.fn == base.fn);
    CHECK(cm.tn == base.tn);
  }
}

TEST_CASE("dessi class map covers 20 classes, 15 personal") {
  const auto& map = dessi_class_map();
  CHECK(map.size() == 20);
  std::size_t personal = 0;
  for (const auto& [name, is_personal] : map) {
    if (is_personal) ++personal;
    CHECK(dessi_class_is_personal(name) == is_personal);
  }
  CHECK(personal == 15);
}

TEST_CASE("map_dessi applies the at-least-one rule") {
  CHECK(map_dessi({"Email"}));
  CHECK_FALSE(map_dessi({"Organization", "GPE"}));
  CHECK(map_dessi({"Organization", "Email"}));
  CHECK_FALSE(map_dessi({}));

  try {
    map_dessi({"Klingon"});
    FAIL("expected UnknownClass");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_class);
  }
}

TEST_CASE("map_dessi is monotone under adding classes") {
  std::mt19937 rng(21);
  const auto& map = dessi_class_map();
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> classes;
    for (const auto& [name, _] : map) {
      if (rng() % 3 == 0) classes.push_back(name);
    }
    bool before = map_dessi(classes);
    classes.push_back(map[rng() % map.size()].first);
    bool after = map_dessi(classes);
    if (before) CHECK(after);
  }
}

TEST_CASE("report renders the published grid values") {
  std::string md = render_report(benchmark_fixture(), ReportFormat::markdown);

  // The DeSSI macro row carries the three published values in order.
  auto row_start = md.find("| DeSSI | Macro F1 |");
  REQUIRE(row_start != std::string::npos);
  auto row_end = md.find('\n', row_start);
  std::string row = md.substr(row_start, row_end - row_start);
  CHECK(row.find("0.793") != std::string::npos);
  CHECK(row.find("0.996") != std::string::npos);
  CHECK(row.find("0.766") != std::string::npos);
  CHECK(row.find("0.793") < row.find("0.996"));
  CHECK(row.find("0.996") < row.find("0.766"));

  CHECK(md.find("| Average | Macro F1 |") != std::string::npos);
}

TEST_CASE("report average block reproduces the published means") {
  std::string json_text = render_report(benchmark_fixture(), ReportFormat::json);
  nlohmann::json doc = nlohmann::json::parse(json_text);
  const auto& avg = doc["average"]["macro_f1"];
  // Published averages, tolerance from three-decimal rounding.
  CHECK(std::abs(avg["Presidio"].get<double>() - 0.608) <= 0.0005 + 1e-9);
  CHECK(std::abs(avg["CASSED"].get<double>() - 0.643) <= 0.0005 + 1e-9);
  CHECK(std::abs(avg["GPT-4o"].get<double>() - 0.865) <= 0.0005 + 1e-9);
}

TEST_CASE("single report renders one block without an average") {
  std::string md = render_report({fixture("rules", "Tiny", 0.5, 0.5, 0.5)},
                                 ReportFormat::markdown);
  CHECK(md.find("| Tiny | Macro F1 | 0.500 |") != std::string::npos);
  CHECK(md.find("Average") == std::string::npos);
}

TEST_CASE("mixed detectors over one dataset share a block") {
  std::string md = render_report({fixture("rules", "D", 0.4, 0.5, 0.6),
                                  fixture("llm", "D", 0.7, 0.8, 0.9)},
                                 ReportFormat::markdown);
  CHECK(md.find("| D | Macro F1 | 0.400 | 0.700 |") != std::string::npos);
  CHECK(md.find("Average") == std::string::npos);
}

TEST_CASE("metrics reports round-trip through json") {
  ConfusionMatrix cm{3, 1, 2, 4};
  MetricsReport report = MetricsReport::from_confusion(cm, "rules", "D", 1);
  MetricsReport back = metrics_from_json(metrics_to_json(report));
  CHECK(back.detector_id == "rules");
  CHECK(back.dataset_id == "D");
  CHECK(back.n_errors == 1);
  CHECK(back.macro_f1 == report.macro_f1);
  CHECK(back.micro_f1 == report.micro_f1);
  CHECK(back.balanced_accuracy == report.balanced_accuracy);
  CHECK(back.cm.tp == 3);
  CHECK(back.cm.tn == 4);
}

TEST_SUITE_END();
