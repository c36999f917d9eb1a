#pragma once

#include <cstdint>
#include <vector>

#include "subrep/svm.hpp"
#include "subrep/types.hpp"

namespace subrep {

// p(f) = 1 / (1 + exp(a*f + b)); a < 0 fits "larger decision value = more
// likely positive".
struct PlattParams {
  double a = 0.0;
  double b = 0.0;
};

// Regularized sigmoid fit: targets (N+ + 1)/(N+ + 2) and 1/(N- + 2), Newton
// with backtracking. labels in {-1, +1}.
PlattParams fit_platt(const std::vector<double>& decisions,
                      const std::vector<int>& labels);

double sigmoid_prob(const PlattParams& params, double f);

struct PairBinary {
  int pos_class = 0;  // i of the canonical pair (i, j), i < j
  int neg_class = 0;
  LinearModel model;
  PlattParams platt;
};

struct PairwiseModel {
  std::vector<std::string> classes;       // size K
  std::vector<PairBinary> binaries;       // K(K-1)/2, canonical order
  int num_classes() const { return static_cast<int>(classes.size()); }
};

// Per pair (i, j): binary model on the two classes' examples, Platt params by
// k-fold cross-fitting (decisions pooled from held-out folds, sigmoid fit
// once), final model refit on the whole pair.
PairwiseModel train_one_vs_one(const std::vector<std::vector<double>>& xs,
                               const std::vector<int>& ys,
                               const std::vector<std::string>& class_labels,
                               const TrainConfig& train_config,
                               int calibration_folds, std::uint64_t seed,
                               int jobs = 1);

// Pairwise coupling: p minimizing sum_{i<j} (r_ji p_i - r_ij p_j)^2 on the
// simplex. r is K x K with r_ij in (0,1), r_ij + r_ji = 1; diagonal unused.
std::vector<double> couple(const std::vector<std::vector<double>>& r,
                           double tolerance = 1e-10, int max_iter = 0);

// r matrix from the calibrated binaries, then couple.
std::vector<double> predict_class_probs(const PairwiseModel& model,
                                        const std::vector<double>& x);

// Shared cross-fitting helper (also used by the subclass bank): pooled
// held-out decisions from a stratified k-fold over (xs, ys).
PlattParams cross_fit_platt(const std::vector<std::vector<double>>& xs,
                            const std::vector<int>& ys,
                            const TrainConfig& train_config, int folds,
                            std::uint64_t seed);

}  // namespace subrep
