#include "subrep/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "json.hpp"
#include "subrep/parallel.hpp"
#include "subrep/rng.hpp"

namespace subrep {

using nlohmann::json;

std::string method_name(MethodKind m) {
  switch (m) {
    case MethodKind::SubClassProb: return "SVM_SubClassProb";
    case MethodKind::VisFeat: return "SVM_VisFeat";
    case MethodKind::ClassProb: return "SVM_ClassProb";
  }
  throw InternalError("unknown method kind");
}

MethodKind method_from_name(const std::string& name) {
  if (name == "SVM_SubClassProb") return MethodKind::SubClassProb;
  if (name == "SVM_VisFeat") return MethodKind::VisFeat;
  if (name == "SVM_ClassProb") return MethodKind::ClassProb;
  throw ValidationError("unknown method: " + name);
}

SubclassModelBank train_subclass_bank(
    const SubclassCatalog& catalog,
    const std::vector<ImageRecord>& part_subclass,
    const PipelineConfig& config) {
  if (catalog.entries.empty())
    throw ValidationError("bank: empty subclass catalog");

  SubclassModelBank bank;
  bank.models.resize(catalog.entries.size());
  parallel_for(catalog.entries.size(), config.jobs, [&](std::size_t m) {
    const auto& entry = catalog.entries[m];
    SubclassId id{entry.parent, entry.tag};
    std::uint64_t job_seed = derive_seed(config.seed, 0xba00ULL + m);
    BinaryTrainingSet set = build_binary_set(part_subclass, id,
                                             config.subclass_cap,
                                             config.neg_ratio, job_seed);
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    for (const auto& r : set.positives) { xs.push_back(r.features); ys.push_back(+1); }
    for (const auto& r : set.negatives) { xs.push_back(r.features); ys.push_back(-1); }

    SubclassModel model;
    model.subclass = id;
    model.platt = cross_fit_platt(xs, ys, config.train,
                                  config.calibration_folds, job_seed);
    TrainConfig fc = config.train;
    fc.seed = derive_seed(job_seed, 0xf1ULL);
    model.model = train_binary(xs, ys, fc).model;
    bank.models[m] = std::move(model);
  });
  return bank;
}

std::vector<double> project(const std::vector<double>& features,
                            const SubclassModelBank& bank,
                            RepresentationMode mode) {
  if (bank.models.empty()) throw ValidationError("project: empty model bank");
  std::vector<double> rep(bank.models.size());
  for (std::size_t m = 0; m < bank.models.size(); ++m) {
    double f = bank.models[m].model.decision_value(features);
    rep[m] = mode == RepresentationMode::Probability
                 ? sigmoid_prob(bank.models[m].platt, f)
                 : f;
  }
  return rep;
}

PairwiseModel train_top(const std::vector<std::vector<double>>& representations,
                        const std::vector<int>& labels,
                        const std::vector<std::string>& class_labels,
                        const PipelineConfig& config, std::uint64_t seed) {
  TrainConfig tc = config.train;
  tc.seed = derive_seed(seed, 0x70ULL);
  return train_one_vs_one(representations, labels, class_labels, tc,
                          config.calibration_folds, derive_seed(seed, 0x71ULL),
                          config.jobs);
}

namespace {

void check_hygiene(const DatasetSplit& split,
                   const std::vector<ImageRecord>& test) {
  std::unordered_set<std::string> stage1, stage2;
  for (const auto& r : split.part_subclass) stage1.insert(r.id);
  for (const auto& r : split.part_top) {
    if (stage1.count(r.id))
      throw InternalError("hygiene: id '" + r.id +
                          "' in both stage-1 and stage-2 parts");
    stage2.insert(r.id);
  }
  for (const auto& r : test)
    if (stage1.count(r.id) || stage2.count(r.id))
      throw InternalError("hygiene: test id '" + r.id +
                          "' appears in a training part");
}

// per-class seeded subsample; n <= 0 means take everything
std::vector<ImageRecord> subsample_per_class(
    const std::vector<ImageRecord>& pool, const ClassIndex& classes, int n,
    std::uint64_t seed, bool* clamped) {
  if (n <= 0) return pool;
  std::vector<std::vector<std::size_t>> by_class(classes.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    int c = classes.index_of(pool[i].label);
    if (c >= 0) by_class[c].push_back(i);
  }
  std::vector<std::size_t> keep;
  for (int c = 0; c < classes.size(); ++c) {
    auto& idx = by_class[c];
    std::size_t want = static_cast<std::size_t>(n);
    if (want > idx.size()) {
      if (clamped && !*clamped) {
        std::fprintf(stderr,
                     "warning: class '%s' has %zu records, clamping requested "
                     "per-class size %d\n",
                     classes.label(c).c_str(), idx.size(), n);
        *clamped = true;
      }
      want = idx.size();
    }
    Rng rng(derive_seed(seed, 0x5ab5ULL + static_cast<std::uint64_t>(c)));
    auto sel = sample_indices(idx.size(), want, rng);
    std::sort(sel.begin(), sel.end());
    for (auto s : sel) keep.push_back(idx[s]);
  }
  std::sort(keep.begin(), keep.end());  // preserve pool order
  std::vector<ImageRecord> out;
  out.reserve(keep.size());
  for (auto i : keep) out.push_back(pool[i]);
  return out;
}

void features_and_labels(const std::vector<ImageRecord>& records,
                         const ClassIndex& classes,
                         std::vector<std::vector<double>>& xs,
                         std::vector<int>& ys) {
  for (const auto& r : records) {
    int c = classes.index_of(r.label);
    if (c < 0) throw InternalError("record label missing from class index");
    xs.push_back(r.features);
    ys.push_back(c);
  }
}

std::map<std::string, RankedList> build_rankings(
    const std::vector<ImageRecord>& test, const ClassIndex& classes,
    const std::map<std::string, std::vector<double>>& probs) {
  std::map<std::string, RankedList> rankings;
  for (int c = 0; c < classes.size(); ++c) {
    std::vector<std::pair<double, std::string>> order;
    order.reserve(test.size());
    for (const auto& r : test) order.emplace_back(probs.at(r.id)[c], r.id);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;  // tie: id ascending
    });
    RankedList list;
    for (auto& [p, id] : order) {
      list.ids.push_back(id);
      list.scores.push_back(p);
    }
    rankings[classes.label(c)] = std::move(list);
  }
  return rankings;
}

std::map<std::string, std::vector<double>> predict_all(
    const PairwiseModel& top, const std::vector<ImageRecord>& test,
    const std::vector<std::vector<double>>& test_reps, int jobs) {
  std::vector<std::vector<double>> probs(test.size());
  parallel_for(test.size(), jobs, [&](std::size_t i) {
    probs[i] = predict_class_probs(top, test_reps[i]);
  });
  std::map<std::string, std::vector<double>> out;
  for (std::size_t i = 0; i < test.size(); ++i) out[test[i].id] = probs[i];
  return out;
}

MethodResult run_one(MethodKind method, const DatasetSplit& split,
                     const std::vector<ImageRecord>& test,
                     const ClassIndex& classes, int size,
                     const PipelineConfig& config, std::uint64_t run_seed) {
  MethodResult result;
  result.method = method;
  result.classes = classes.labels();

  if (method == MethodKind::VisFeat) {
    // baselines get the full training pool, no stage split needed
    std::vector<ImageRecord> pool = split.part_subclass;
    pool.insert(pool.end(), split.part_top.begin(), split.part_top.end());
    pool = subsample_per_class(pool, classes, size, derive_seed(run_seed, 1),
                               &result.clamped);
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    features_and_labels(pool, classes, xs, ys);
    TrainConfig tc = config.train;
    tc.seed = derive_seed(run_seed, 2);
    PairwiseModel model = train_one_vs_one(xs, ys, classes.labels(), tc,
                                           config.calibration_folds,
                                           derive_seed(run_seed, 3),
                                           config.jobs);
    std::vector<std::vector<double>> test_feats;
    for (const auto& r : test) test_feats.push_back(r.features);
    result.probabilities = predict_all(model, test, test_feats, config.jobs);
  } else if (method == MethodKind::ClassProb) {
    // stage 1: K-class model on raw features; representation = its posterior
    std::vector<ImageRecord> stage1 = subsample_per_class(
        split.part_subclass, classes, size, derive_seed(run_seed, 4),
        &result.clamped);
    std::vector<ImageRecord> stage2 = subsample_per_class(
        split.part_top, classes, size, derive_seed(run_seed, 5),
        &result.clamped);
    std::vector<std::vector<double>> xs1;
    std::vector<int> ys1;
    features_and_labels(stage1, classes, xs1, ys1);
    TrainConfig tc = config.train;
    tc.seed = derive_seed(run_seed, 6);
    PairwiseModel stage1_model = train_one_vs_one(
        xs1, ys1, classes.labels(), tc, config.calibration_folds,
        derive_seed(run_seed, 7), config.jobs);

    std::vector<std::vector<double>> reps2(stage2.size());
    parallel_for(stage2.size(), config.jobs, [&](std::size_t i) {
      reps2[i] = predict_class_probs(stage1_model, stage2[i].features);
    });
    std::vector<int> ys2;
    for (const auto& r : stage2) ys2.push_back(classes.index_of(r.label));
    tc.seed = derive_seed(run_seed, 8);
    PairwiseModel top = train_one_vs_one(reps2, ys2, classes.labels(), tc,
                                         config.calibration_folds,
                                         derive_seed(run_seed, 9),
                                         config.jobs);
    std::vector<std::vector<double>> test_reps(test.size());
    parallel_for(test.size(), config.jobs, [&](std::size_t i) {
      test_reps[i] = predict_class_probs(stage1_model, test[i].features);
    });
    result.probabilities = predict_all(top, test, test_reps, config.jobs);
  } else {  // SubClassProb
    // stage budgets drawn from the designated parts, split by the 4:3 ratio
    int n1 = size, n2 = size;
    if (size > 0) {
      double frac = static_cast<double>(config.split_r1) /
                    static_cast<double>(config.split_r1 + config.split_r2);
      n1 = std::max(1, static_cast<int>(std::lround(size * frac)));
      n2 = std::max(1, size - n1);
    }
    std::vector<ImageRecord> stage1 = subsample_per_class(
        split.part_subclass, classes, n1, derive_seed(run_seed, 10),
        &result.clamped);
    std::vector<ImageRecord> stage2 = subsample_per_class(
        split.part_top, classes, n2, derive_seed(run_seed, 11),
        &result.clamped);

    CooccurrenceMatrix c = build_cooccurrence(stage1, classes);
    DistinctiveScores s = distinctive_scores(c);
    result.catalog = select_subclasses(s, c, config.mining);
    if (result.catalog.entries.empty())
      throw ValidationError("pipeline: mining produced an empty catalog");

    PipelineConfig bank_config = config;
    bank_config.seed = derive_seed(run_seed, 12);
    SubclassModelBank bank =
        train_subclass_bank(result.catalog, stage1, bank_config);

    std::vector<std::vector<double>> reps2(stage2.size());
    parallel_for(stage2.size(), config.jobs, [&](std::size_t i) {
      reps2[i] = project(stage2[i].features, bank,
                         config.representation_mode);
    });
    std::vector<int> ys2;
    for (const auto& r : stage2) ys2.push_back(classes.index_of(r.label));
    TrainConfig tc = config.train;
    tc.seed = derive_seed(run_seed, 13);
    PairwiseModel top = train_one_vs_one(reps2, ys2, classes.labels(), tc,
                                         config.calibration_folds,
                                         derive_seed(run_seed, 14),
                                         config.jobs);
    // test-time path consumes features only, never tags
    std::vector<std::vector<double>> test_reps(test.size());
    parallel_for(test.size(), config.jobs, [&](std::size_t i) {
      test_reps[i] = project(test[i].features, bank,
                             config.representation_mode);
    });
    result.probabilities = predict_all(top, test, test_reps, config.jobs);
  }

  result.rankings = build_rankings(test, classes, result.probabilities);
  return result;
}

}  // namespace

std::vector<MethodResult> run_method(MethodKind method,
                                     const DatasetSplit& split,
                                     const std::vector<ImageRecord>& test,
                                     const PipelineConfig& config) {
  check_hygiene(split, test);
  if (test.empty()) throw ValidationError("run: empty test set");

  std::vector<ImageRecord> train_pool = split.part_subclass;
  train_pool.insert(train_pool.end(), split.part_top.begin(),
                    split.part_top.end());
  ClassIndex classes = ClassIndex::from_records(train_pool);

  std::vector<int> sizes = config.per_class_train_sizes;
  if (sizes.empty()) sizes.push_back(0);  // full pools

  std::vector<MethodResult> results;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    std::uint64_t run_seed = derive_seed(
        config.seed, 0x2000ULL * (static_cast<std::uint64_t>(method) + 1) + si);
    MethodResult r = run_one(method, split, test, classes, sizes[si], config,
                             run_seed);
    if (sizes[si] > 0) {
      r.train_size = sizes[si];
    } else {
      // full-pool run: record the largest per-class pool size
      std::size_t best = 0;
      for (int c = 0; c < classes.size(); ++c) {
        std::size_t count = 0;
        for (const auto& rec : train_pool)
          if (rec.label == classes.label(c)) ++count;
        best = std::max(best, count);
      }
      r.train_size = static_cast<int>(best);
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::string linear_model_json(const LinearModel& m, const TrainConfig& config,
                              const SolverReport& report) {
  json obj;
  obj["dim"] = m.dim();
  obj["weights"] = m.weights;
  obj["bias"] = m.bias;
  obj["config"] = {{"c", config.c},
                   {"tolerance", config.tolerance},
                   {"max_epochs", config.max_epochs},
                   {"seed", config.seed}};
  obj["report"] = {{"epochs_run", report.epochs_run},
                   {"final_violation", report.final_violation},
                   {"converged", report.converged},
                   {"dual_objective", report.dual_objective}};
  return obj.dump(2);
}

std::string pairwise_model_json(const PairwiseModel& m) {
  json obj;
  obj["classes"] = m.classes;
  json arr = json::array();
  for (const auto& bin : m.binaries) {
    json b;
    b["pair"] = {bin.pos_class, bin.neg_class};
    b["model"] = {{"dim", bin.model.dim()},
                  {"weights", bin.model.weights},
                  {"bias", bin.model.bias}};
    b["platt"] = {{"a", bin.platt.a}, {"b", bin.platt.b}};
    arr.push_back(std::move(b));
  }
  obj["binaries"] = std::move(arr);
  return obj.dump(2);
}

PairwiseModel pairwise_model_from_json(const std::string& text) {
  json obj = json::parse(text);
  PairwiseModel m;
  m.classes = obj.at("classes").get<std::vector<std::string>>();
  for (const auto& b : obj.at("binaries")) {
    PairBinary bin;
    bin.pos_class = b.at("pair")[0].get<int>();
    bin.neg_class = b.at("pair")[1].get<int>();
    bin.model.weights = b.at("model").at("weights").get<std::vector<double>>();
    bin.model.bias = b.at("model").at("bias").get<double>();
    bin.platt.a = b.at("platt").at("a").get<double>();
    bin.platt.b = b.at("platt").at("b").get<double>();
    m.binaries.push_back(std::move(bin));
  }
  return m;
}

}  // namespace subrep
