#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "subrep/eval.hpp"

using namespace subrep;

namespace {

RankedList make_list(std::vector<std::string> ids) {
  RankedList list;
  list.ids = std::move(ids);
  for (std::size_t i = 0; i < list.ids.size(); ++i)
    list.scores.push_back(1.0 - 0.01 * static_cast<double>(i));
  return list;
}

// textbook definition evaluated by an explicit loop, independent of the
// implementation under test
double oracle_ap(const std::vector<std::string>& ranking,
                 const std::set<std::string>& relevant) {
  if (relevant.empty()) return 0.0;
  double sum = 0.0;
  int hits = 0;
  for (std::size_t k = 0; k < ranking.size(); ++k) {
    bool rel = relevant.count(ranking[k]) != 0;
    if (rel) {
      ++hits;
      int retrieved_relevant = 0;
      for (std::size_t j = 0; j <= k; ++j)
        if (relevant.count(ranking[j])) ++retrieved_relevant;
      sum += static_cast<double>(retrieved_relevant) /
             static_cast<double>(k + 1);
    }
  }
  (void)hits;
  return sum / static_cast<double>(relevant.size());
}

}  // namespace

TEST_CASE("AP hand example") {
  auto list = make_list({"a", "b", "c", "d"});
  double ap = average_precision(list, {"a", "c"});
  CHECK(ap == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("AP perfect and empty rankings") {
  auto list = make_list({"a", "b", "c", "d"});
  CHECK(average_precision(list, {"a", "b"}) == doctest::Approx(1.0));
  CHECK(average_precision(list, {"z", "w"}) == 0.0);  // nothing ranked
  CHECK(average_precision(list, {}) == 0.0);          // warning path
}

TEST_CASE("AP penalizes relevant items missing from the ranking") {
  auto list = make_list({"a"});
  // two relevant, only one ranked (at the top)
  CHECK(average_precision(list, {"a", "missing"}) == doctest::Approx(0.5));
}

TEST_CASE("AP exhaustive oracle over all rankings of <= 6 items") {
  std::vector<std::string> universe = {"a", "b", "c", "d", "e", "f"};
  for (int n = 1; n <= 6; ++n) {
    std::vector<std::string> items(universe.begin(), universe.begin() + n);
    std::sort(items.begin(), items.end());
    do {
      for (int mask = 0; mask < (1 << n); ++mask) {
        std::set<std::string> relevant;
        for (int b = 0; b < n; ++b)
          if (mask & (1 << b)) relevant.insert(universe[b]);
        if (relevant.empty()) continue;
        double got = average_precision(make_list(items), relevant);
        double want = oracle_ap(items, relevant);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
        // AP = 1 iff the relevant items fill the top ranks
        bool top_block = true;
        for (std::size_t k = 0; k < relevant.size(); ++k)
          if (!relevant.count(items[k])) top_block = false;
        CHECK((got == doctest::Approx(1.0)) == top_block);
      }
    } while (std::next_permutation(items.begin(), items.end()));
  }
}

TEST_CASE("prefix dominance: promoting a relevant item never hurts") {
  std::vector<std::string> items = {"a", "b", "c", "d", "e"};
  std::set<std::string> relevant = {"c", "e"};
  std::sort(items.begin(), items.end());
  do {
    double base = average_precision(make_list(items), relevant);
    for (std::size_t k = 1; k < items.size(); ++k) {
      if (!relevant.count(items[k])) continue;
      auto promoted = items;
      std::swap(promoted[k], promoted[k - 1]);
      if (relevant.count(items[k - 1])) continue;  // swap with relevant: no-op
      double better = average_precision(make_list(promoted), relevant);
      CHECK(better >= base - 1e-12);
    }
  } while (std::next_permutation(items.begin(), items.end()));
}

TEST_CASE("map_over_classes") {
  std::map<std::string, RankedList> results;
  results["sky"] = make_list({"s1", "s2", "f1", "f2"});
  results["food"] = make_list({"f1", "s1", "f2", "s2"});
  std::map<std::string, std::string> truth = {
      {"s1", "sky"}, {"s2", "sky"}, {"f1", "food"}, {"f2", "food"}};
  auto report = map_over_classes(results, truth);
  CHECK(report.per_class_ap["sky"] == doctest::Approx(1.0));
  // food: hits at ranks 1 and 3 -> (1 + 2/3)/2
  CHECK(report.per_class_ap["food"] ==
        doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
  double mean = (report.per_class_ap["sky"] + report.per_class_ap["food"]) / 2;
  CHECK(report.map == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("map_over_classes rejects unknown test ids") {
  std::map<std::string, RankedList> results;
  results["sky"] = make_list({"mystery"});
  CHECK_THROWS_AS(map_over_classes(results, {}), ValidationError);
}

TEST_CASE("learning curve table") {
  std::vector<std::string> classes = {"sky", "food"};
  auto make_report = [](int size, double ap1, double ap2) {
    MAPReport r;
    r.train_size = size;
    r.per_class_ap = {{"sky", ap1}, {"food", ap2}};
    r.map = (ap1 + ap2) / 2;
    return r;
  };
  std::vector<MAPReport> reports = {make_report(100, 0.5, 0.7),
                                    make_report(200, 0.6, 0.8),
                                    make_report(400, 0.7, 0.9)};
  std::string csv = learning_curve_csv(reports, classes);
  CHECK(csv.find("train_size,map,ap_sky,ap_food\n") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows

  std::string single = learning_curve_csv({make_report(50, 0.1, 0.2)}, classes);
  CHECK(std::count(single.begin(), single.end(), '\n') == 2);

  std::vector<MAPReport> unsorted = {make_report(200, 0.6, 0.8),
                                     make_report(100, 0.5, 0.7)};
  CHECK_THROWS_AS(learning_curve_csv(unsorted, classes), ValidationError);
  std::vector<MAPReport> dup = {make_report(100, 0.5, 0.7),
                                make_report(100, 0.6, 0.8)};
  CHECK_THROWS_AS(learning_curve_csv(dup, classes), ValidationError);
}
