#pragma once

#include <cstdint>
#include <vector>

#include "subrep/types.hpp"

namespace subrep {

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  int dim() const { return static_cast<int>(weights.size()); }
  double decision_value(const std::vector<double>& x) const;
};

struct TrainConfig {
  double c = 1.0;
  double tolerance = 1e-3;  // stop on max KKT violation
  int max_epochs = 1000;
  std::uint64_t seed = 0;
  bool track_objective = false;  // record dual objective per epoch
};

struct SolverReport {
  int epochs_run = 0;
  double final_violation = 0.0;
  bool converged = false;
  double dual_objective = 0.0;
  std::vector<double> objective_trace;  // filled when track_objective
};

// Model plus the dual variables it was solved with (the alphas live on the
// bias-augmented problem; weights/bias are unpacked from the augmented w).
struct SvmSolution {
  LinearModel model;
  SolverReport report;
  std::vector<double> alpha;
};

// L1-loss soft-margin SVM dual, coordinate descent with a seeded random
// permutation per epoch. Bias via feature augmentation. labels in {-1, +1}.
SvmSolution train_binary(const std::vector<std::vector<double>>& xs,
                         const std::vector<int>& ys, const TrainConfig& config);

// Max KKT complementarity violation of the solution on its training data;
// 0 at an exact optimum.
double kkt_violation(const SvmSolution& sol,
                     const std::vector<std::vector<double>>& xs,
                     const std::vector<int>& ys, double c);

}  // namespace subrep
