#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "subrep/dataset.hpp"
#include "subrep/eval.hpp"
#include "subrep/prob.hpp"
#include "subrep/svm.hpp"
#include "subrep/tagmine.hpp"

namespace subrep {

enum class MethodKind { SubClassProb, VisFeat, ClassProb };

std::string method_name(MethodKind m);
MethodKind method_from_name(const std::string& name);  // "SVM_SubClassProb" etc.

enum class RepresentationMode { Probability, Margin };

struct SubclassModel {
  SubclassId subclass;
  LinearModel model;
  PlattParams platt;
};

struct SubclassModelBank {
  std::vector<SubclassModel> models;  // aligned with the catalog
  int size() const { return static_cast<int>(models.size()); }
};

struct PipelineConfig {
  MiningConfig mining;
  TrainConfig train;
  int calibration_folds = 3;
  int subclass_cap = 10000;
  double neg_ratio = 1.0;
  RepresentationMode representation_mode = RepresentationMode::Probability;
  std::vector<int> per_class_train_sizes;  // empty = one run on full pools
  std::uint64_t seed = 0;
  int jobs = 1;
  int split_r1 = 4, split_r2 = 3, split_r3 = 1;  // used for stage budgets
};

struct MethodResult {
  MethodKind method = MethodKind::VisFeat;
  int train_size = 0;                          // per-class size actually used
  bool clamped = false;                        // requested size exceeded pool
  std::map<std::string, RankedList> rankings;  // class label -> ranking
  std::map<std::string, std::vector<double>> probabilities;  // id -> K probs
  std::vector<std::string> classes;
  SubclassCatalog catalog;  // SubClassProb only
};

SubclassModelBank train_subclass_bank(const SubclassCatalog& catalog,
                                      const std::vector<ImageRecord>& part_subclass,
                                      const PipelineConfig& config);

std::vector<double> project(const std::vector<double>& features,
                            const SubclassModelBank& bank,
                            RepresentationMode mode);

// Top-level one-vs-one model in subclass-representation space. The
// representations must come from stage-2 records; id disjointness against
// stage 1 is enforced by run_method's hygiene check.
PairwiseModel train_top(const std::vector<std::vector<double>>& representations,
                        const std::vector<int>& labels,
                        const std::vector<std::string>& class_labels,
                        const PipelineConfig& config, std::uint64_t seed);

// One MethodResult per requested train size (one result on full pools when
// per_class_train_sizes is empty). Throws InternalError if the stage-1/
// stage-2/test id sets overlap.
std::vector<MethodResult> run_method(MethodKind method,
                                     const DatasetSplit& split,
                                     const std::vector<ImageRecord>& test,
                                     const PipelineConfig& config);

// JSON persistence (External Interfaces)
std::string linear_model_json(const LinearModel& m, const TrainConfig& config,
                              const SolverReport& report);
std::string pairwise_model_json(const PairwiseModel& m);
PairwiseModel pairwise_model_from_json(const std::string& text);

}  // namespace subrep
