#include "subrep/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subrep/rng.hpp"

namespace subrep {

double LinearModel::decision_value(const std::vector<double>& x) const {
  if (x.size() != weights.size())
    throw ValidationError("decision_value: dimension mismatch (" +
                          std::to_string(x.size()) + " vs " +
                          std::to_string(weights.size()) + ")");
  double s = bias;
  for (std::size_t k = 0; k < x.size(); ++k) s += weights[k] * x[k];
  return s;
}

namespace {

// gradient of the dual at coordinate i: y_i <w, x~_i> - 1 (augmented w)
double coord_gradient(const std::vector<double>& w,
                      const std::vector<double>& x, int y) {
  double dot = w.back();  // augmented constant 1.0
  for (std::size_t k = 0; k < x.size(); ++k) dot += w[k] * x[k];
  return y * dot - 1.0;
}

double projected_gradient(double g, double alpha, double c) {
  if (alpha <= 0.0) return std::min(g, 0.0);
  if (alpha >= c) return std::max(g, 0.0);
  return g;
}

}  // namespace

SvmSolution train_binary(const std::vector<std::vector<double>>& xs,
                         const std::vector<int>& ys,
                         const TrainConfig& config) {
  const std::size_t n = xs.size();
  if (n == 0 || ys.size() != n)
    throw ValidationError("train: empty or mismatched training data");
  const std::size_t d = xs[0].size();
  if (d == 0) throw ValidationError("train: zero-dimension features");
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (xs[i].size() != d) throw ValidationError("train: ragged feature rows");
    if (ys[i] > 0) has_pos = true; else has_neg = true;
  }
  if (!has_pos || !has_neg)
    throw ValidationError("train: need at least one example of each label");
  if (config.c <= 0 || config.tolerance <= 0 || config.max_epochs < 1)
    throw ValidationError("train: invalid config");

  // squared norms of the bias-augmented rows
  std::vector<double> qii(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 1.0;
    for (double v : xs[i]) s += v * v;
    qii[i] = s;
  }

  std::vector<double> w(d + 1, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(config.seed, 0x57a1ULL));

  SolverReport report;
  double max_viol = 0.0;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    shuffle(order, rng);
    max_viol = 0.0;
    for (std::size_t i : order) {
      double g = coord_gradient(w, xs[i], ys[i]);
      double pg = projected_gradient(g, alpha[i], config.c);
      max_viol = std::max(max_viol, std::fabs(pg));
      if (std::fabs(pg) < 1e-14) continue;
      double next = std::clamp(alpha[i] - g / qii[i], 0.0, config.c);
      double delta = (next - alpha[i]) * ys[i];
      alpha[i] = next;
      for (std::size_t k = 0; k < d; ++k) w[k] += delta * xs[i][k];
      w[d] += delta;
    }
    report.epochs_run = epoch + 1;
    if (config.track_objective) {
      double wn = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
      double sa = std::accumulate(alpha.begin(), alpha.end(), 0.0);
      report.objective_trace.push_back(sa - 0.5 * wn);
    }
    if (max_viol <= config.tolerance) break;
  }

  SvmSolution sol;
  sol.model.weights.assign(w.begin(), w.begin() + d);
  sol.model.bias = w[d];
  sol.alpha = std::move(alpha);
  report.final_violation = max_viol;
  report.converged = max_viol <= config.tolerance;
  double wn = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
  double sa = std::accumulate(sol.alpha.begin(), sol.alpha.end(), 0.0);
  report.dual_objective = sa - 0.5 * wn;
  sol.report = std::move(report);
  return sol;
}

double kkt_violation(const SvmSolution& sol,
                     const std::vector<std::vector<double>>& xs,
                     const std::vector<int>& ys, double c) {
  if (sol.alpha.size() != xs.size())
    throw ValidationError("kkt: duals unavailable or wrong size");
  std::vector<double> w(sol.model.weights);
  w.push_back(sol.model.bias);
  double max_viol = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double g = coord_gradient(w, xs[i], ys[i]);
    double pg = projected_gradient(g, sol.alpha[i], c);
    max_viol = std::max(max_viol, std::fabs(pg));
  }
  return max_viol;
}

}  // namespace subrep
