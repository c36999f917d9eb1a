#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "subrep/pipeline.hpp"
#include "subrep/rng.hpp"
#include "synth.hpp"

using namespace subrep;
using testsupport::make_cluster_corpus;

namespace {

ImageRecord rec(const std::string& id, const std::string& label,
                std::set<std::string> tags, std::vector<double> features) {
  ImageRecord r;
  r.id = id;
  r.label = label;
  r.tags = std::move(tags);
  r.features = std::move(features);
  return r;
}

// two linearly separable classes, each with its own distinctive tag
void separable_corpus(std::vector<ImageRecord>& train,
                      std::vector<ImageRecord>& test, int per_class,
                      std::uint64_t seed) {
  Rng rng(seed);
  auto emit = [&](std::vector<ImageRecord>& out, const std::string& prefix,
                  int n, bool tags) {
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 2; ++c) {
        double offset = c == 0 ? -6.0 : 6.0;
        std::set<std::string> t;
        if (tags) t.insert(c == 0 ? "lefty" : "righty");
        out.push_back(rec(prefix + std::to_string(c) + "_" + std::to_string(i),
                          c == 0 ? "left" : "right", std::move(t),
                          {offset + rng.gaussian(), rng.gaussian()}));
      }
    }
  };
  emit(train, "tr", per_class, true);
  emit(test, "te", per_class / 2, false);
}

SubclassCatalog toy_catalog() {
  SubclassCatalog catalog;
  catalog.entries.push_back({"left", "lefty", 0, 1.0});
  catalog.entries.push_back({"right", "righty", 0, 1.0});
  return catalog;
}

}  // namespace

TEST_CASE("train_subclass_bank aligns with the catalog") {
  std::vector<ImageRecord> train, test;
  separable_corpus(train, test, 40, 1);
  PipelineConfig config;
  config.seed = 5;
  auto catalog = toy_catalog();
  auto bank = train_subclass_bank(catalog, train, config);
  REQUIRE(bank.size() == 2);
  CHECK(bank.models[0].subclass.tag == "lefty");
  CHECK(bank.models[0].subclass.parent == "left");
  CHECK(bank.models[1].subclass.tag == "righty");
}

TEST_CASE("bank of one entry projects to dimension 1") {
  std::vector<ImageRecord> train, test;
  separable_corpus(train, test, 40, 2);
  SubclassCatalog catalog;
  catalog.entries.push_back({"left", "lefty", 0, 1.0});
  PipelineConfig config;
  auto bank = train_subclass_bank(catalog, train, config);
  REQUIRE(bank.size() == 1);
  auto repvec = project(train[0].features, bank,
                        RepresentationMode::Probability);
  CHECK(repvec.size() == 1);
}

TEST_CASE("bank training is deterministic and parallel-safe") {
  std::vector<ImageRecord> train, test;
  separable_corpus(train, test, 40, 3);
  PipelineConfig config;
  config.seed = 9;
  auto a = train_subclass_bank(toy_catalog(), train, config);
  config.jobs = 4;
  auto b = train_subclass_bank(toy_catalog(), train, config);
  REQUIRE(a.size() == b.size());
  for (int m = 0; m < a.size(); ++m) {
    CHECK(a.models[m].model.weights == b.models[m].model.weights);
    CHECK(a.models[m].platt.a == b.models[m].platt.a);
  }
}

TEST_CASE("bank entry with zero positives names the subclass") {
  std::vector<ImageRecord> train, test;
  separable_corpus(train, test, 20, 4);
  SubclassCatalog catalog;
  catalog.entries.push_back({"left", "ghost-tag", 0, 1.0});
  PipelineConfig config;
  try {
    train_subclass_bank(catalog, train, config);
    FAIL("expected error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("ghost-tag") != std::string::npos);
  }
}

TEST_CASE("project range, midpoint, and errors") {
  SubclassModelBank bank;
  SubclassModel m;
  m.subclass = {"left", "lefty"};
  m.model.weights = {1.0};
  m.model.bias = 0.0;
  m.platt = {-1.0, 0.0};
  bank.models.push_back(m);

  // decision 0 through the sigmoid midpoint
  auto repvec = project({0.0}, bank, RepresentationMode::Probability);
  CHECK(repvec[0] == doctest::Approx(0.5));
  // margin mode returns the raw decision value
  auto margins = project({3.0}, bank, RepresentationMode::Margin);
  CHECK(margins[0] == doctest::Approx(3.0));

  CHECK_THROWS_AS(project({0.0}, SubclassModelBank{},
                          RepresentationMode::Probability),
                  ValidationError);
  CHECK_THROWS_AS(project({0.0, 1.0}, bank, RepresentationMode::Probability),
                  ValidationError);
}

TEST_CASE("probability-mode projections stay in [0,1]") {
  std::vector<ImageRecord> train, test;
  separable_corpus(train, test, 40, 6);
  PipelineConfig config;
  auto bank = train_subclass_bank(toy_catalog(), train, config);
  for (const auto& r : test) {
    auto repvec = project(r.features, bank, RepresentationMode::Probability);
    for (double v : repvec) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("train_top on one-hot representations classifies perfectly") {
  // synthetic ideal subclass detectors: one subclass per class
  Rng rng(7);
  std::vector<std::vector<double>> reps;
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 12; ++i) {
      std::vector<double> hot(3, 0.05);
      hot[c] = 0.95;
      for (auto& v : hot) v += 0.01 * rng.gaussian();
      reps.push_back(hot);
      labels.push_back(c);
    }
  PipelineConfig config;
  auto top = train_top(reps, labels, {"a", "b", "c"}, config, 3);
  int correct = 0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    auto p = predict_class_probs(top, reps[i]);
    int arg = 0;
    for (int c = 1; c < 3; ++c)
      if (p[c] > p[arg]) arg = c;
    if (arg == labels[i]) ++correct;
  }
  CHECK(correct == static_cast<int>(reps.size()));
}

TEST_CASE("hygiene: overlapping parts are rejected") {
  std::vector<ImageRecord> train, test;
  separable_corpus(train, test, 10, 8);
  DatasetSplit split;
  split.part_subclass = train;
  split.part_top = train;  // same ids in both stages
  PipelineConfig config;
  CHECK_THROWS_AS(run_method(MethodKind::VisFeat, split, test, config),
                  InternalError);

  DatasetSplit ok = split_dataset(train, 4, 3, 1, 0);
  auto leaky_test = std::vector<ImageRecord>{ok.part_top[0]};
  CHECK_THROWS_AS(run_method(MethodKind::VisFeat, ok, leaky_test, config),
                  InternalError);
}

TEST_CASE("two separable classes give MAP 1.0 for every method") {
  std::vector<ImageRecord> train, test;
  separable_corpus(train, test, 60, 11);
  DatasetSplit split = split_dataset(train, 4, 3, 1, 3);
  std::map<std::string, std::string> truth;
  for (const auto& r : test) truth[r.id] = r.label;

  PipelineConfig config;
  config.seed = 21;
  for (MethodKind method : {MethodKind::SubClassProb, MethodKind::VisFeat,
                            MethodKind::ClassProb}) {
    auto results = run_method(method, split, test, config);
    REQUIRE(results.size() == 1);
    auto report = map_over_classes(results[0].rankings, truth);
    CHECK(report.map == doctest::Approx(1.0));
  }
}

TEST_CASE("rankings are complete permutations of the test set") {
  auto corpus = make_cluster_corpus(240, 120, 6, 0.1, 5);
  DatasetSplit split = split_dataset(corpus.train, 4, 3, 1, 1);
  PipelineConfig config;
  config.seed = 2;
  auto results = run_method(MethodKind::SubClassProb, split, corpus.test,
                            config);
  std::set<std::string> universe;
  for (const auto& r : corpus.test) universe.insert(r.id);
  for (const auto& [cls, list] : results[0].rankings) {
    std::set<std::string> seen(list.ids.begin(), list.ids.end());
    CHECK(seen == universe);
    for (std::size_t k = 1; k < list.scores.size(); ++k)
      CHECK(list.scores[k] <= list.scores[k - 1]);
  }
}

TEST_CASE("per_class_train_sizes yields one result per size") {
  std::vector<ImageRecord> train, test;
  separable_corpus(train, test, 60, 13);
  DatasetSplit split = split_dataset(train, 4, 3, 1, 0);
  PipelineConfig config;
  config.per_class_train_sizes = {20, 40};
  auto results = run_method(MethodKind::VisFeat, split, test, config);
  REQUIRE(results.size() == 2);
  CHECK(results[0].train_size == 20);
  CHECK(results[1].train_size == 40);
  CHECK(!results[0].clamped);

  // oversized request clamps with a warning flag
  config.per_class_train_sizes = {100000};
  auto clamped = run_method(MethodKind::VisFeat, split, test, config);
  CHECK(clamped[0].clamped);
}

TEST_CASE("pipeline reproducibility") {
  auto corpus = make_cluster_corpus(240, 90, 6, 0.1, 9);
  DatasetSplit split = split_dataset(corpus.train, 4, 3, 1, 4);
  PipelineConfig config;
  config.seed = 31;
  for (MethodKind method : {MethodKind::SubClassProb, MethodKind::ClassProb}) {
    auto a = run_method(method, split, corpus.test, config);
    auto b = run_method(method, split, corpus.test, config);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].rankings.size() == b[i].rankings.size());
      for (const auto& [cls, list] : a[i].rankings) {
        CHECK(list.ids == b[i].rankings.at(cls).ids);
        CHECK(list.scores == b[i].rankings.at(cls).scores);
      }
    }
  }
}

TEST_CASE("pairwise model JSON round trip") {
  PairwiseModel m;
  m.classes = {"a", "b", "c"};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      PairBinary bin;
      bin.pos_class = i;
      bin.neg_class = j;
      bin.model.weights = {0.125 * i, -1.75 * j};
      bin.model.bias = 1e-9 * (i + j);
      bin.platt = {-1.25, 0.0625};
      m.binaries.push_back(bin);
    }
  auto back = pairwise_model_from_json(pairwise_model_json(m));
  REQUIRE(back.binaries.size() == m.binaries.size());
  CHECK(back.classes == m.classes);
  for (std::size_t i = 0; i < m.binaries.size(); ++i) {
    CHECK(back.binaries[i].model.weights == m.binaries[i].model.weights);
    CHECK(back.binaries[i].model.bias == m.binaries[i].model.bias);
    CHECK(back.binaries[i].platt.a == m.binaries[i].platt.a);
  }
}
