#include "subrep/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subrep/parallel.hpp"
#include "subrep/rng.hpp"

namespace subrep {

double sigmoid_prob(const PlattParams& params, double f) {
  if (!std::isfinite(f)) throw ValidationError("sigmoid: non-finite input");
  double t = params.a * f + params.b;
  // evaluate with exp of a negative argument only
  if (t >= 0) {
    double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

PlattParams fit_platt(const std::vector<double>& decisions,
                      const std::vector<int>& labels) {
  const std::size_t n = decisions.size();
  if (n == 0 || labels.size() != n)
    throw ValidationError("platt: empty or mismatched input");
  std::size_t num_pos = 0, num_neg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(decisions[i]))
      throw ValidationError("platt: non-finite decision value");
    if (labels[i] > 0) ++num_pos; else ++num_neg;
  }
  if (num_pos == 0 || num_neg == 0)
    throw ValidationError("platt: both labels must be present");

  // regularized targets
  const double hi = (static_cast<double>(num_pos) + 1.0) /
                    (static_cast<double>(num_pos) + 2.0);
  const double lo = 1.0 / (static_cast<double>(num_neg) + 2.0);
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = labels[i] > 0 ? hi : lo;

  const int max_iter = 100;
  const double min_step = 1e-10;
  const double sigma = 1e-12;  // Hessian ridge
  const double grad_eps = 1e-8;

  double a = 0.0;
  double b = std::log((static_cast<double>(num_neg) + 1.0) /
                      (static_cast<double>(num_pos) + 1.0));

  auto nll = [&](double pa, double pb) {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double t = pa * decisions[i] + pb;
      // log(1 + exp(-|t|)) + positive part, in terms of target
      if (t >= 0)
        v += target[i] * t + std::log1p(std::exp(-t));
      else
        v += (target[i] - 1.0) * t + std::log1p(std::exp(t));
    }
    return v;
  };

  double fval = nll(a, b);
  for (int iter = 0; iter < max_iter; ++iter) {
    double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double t = a * decisions[i] + b;
      double p, q;  // p = 1/(1+exp(t)), q = 1-p
      if (t >= 0) {
        double e = std::exp(-t);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        double e = std::exp(t);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      double d2 = p * q;
      h11 += decisions[i] * decisions[i] * d2;
      h22 += d2;
      h21 += decisions[i] * d2;
      double d1 = target[i] - p;
      g1 += decisions[i] * d1;
      g2 += d1;
    }
    if (std::max(std::fabs(g1), std::fabs(g2)) <= grad_eps) break;

    double det = h11 * h22 - h21 * h21;
    double da = -(h22 * g1 - h21 * g2) / det;
    double db = -(-h21 * g1 + h11 * g2) / det;
    double gd = g1 * da + g2 * db;

    double step = 1.0;
    while (step >= min_step) {
      double na = a + step * da;
      double nb = b + step * db;
      double nf = nll(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na; b = nb; fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < min_step) break;  // line search failed
  }
  return {a, b};
}

std::vector<double> couple(const std::vector<std::vector<double>>& r,
                           double tolerance, int max_iter) {
  const int k = static_cast<int>(r.size());
  if (k < 2) throw ValidationError("couple: need at least 2 classes");
  for (int i = 0; i < k; ++i) {
    if (static_cast<int>(r[i].size()) != k)
      throw ValidationError("couple: r must be K x K");
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      if (!(r[i][j] > 0.0 && r[i][j] < 1.0))
        throw ValidationError("couple: r entries must lie in (0,1)");
      if (std::fabs(r[i][j] + r[j][i] - 1.0) > 1e-9)
        throw ValidationError("couple: r and its transpose must sum to 1");
    }
  }
  if (max_iter <= 0) max_iter = 100 * k;

  // objective = p' Q p with Q_ii = sum_{j != i} r_ji^2, Q_ij = -r_ji r_ij
  std::vector<std::vector<double>> q(k, std::vector<double>(k, 0.0));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      q[i][i] += r[j][i] * r[j][i];
      q[i][j] = -r[j][i] * r[i][j];
    }
  }

  std::vector<double> p(k, 1.0 / k), qp(k, 0.0);
  for (int sweep = 0; sweep < max_iter; ++sweep) {
    double pqp = 0.0;
    for (int i = 0; i < k; ++i) {
      qp[i] = 0.0;
      for (int j = 0; j < k; ++j) qp[i] += q[i][j] * p[j];
      pqp += p[i] * qp[i];
    }
    double max_change = 0.0;
    for (int t = 0; t < k; ++t) {
      double diff = (-qp[t] + pqp) / q[t][t];
      double old = p[t];
      p[t] += diff;
      pqp = (pqp + diff * (diff * q[t][t] + 2.0 * qp[t])) /
            ((1.0 + diff) * (1.0 + diff));
      for (int j = 0; j < k; ++j) {
        qp[j] = (qp[j] + diff * q[t][j]) / (1.0 + diff);
        p[j] /= (1.0 + diff);
      }
      max_change = std::max(max_change, std::fabs(p[t] - old));
    }
    if (max_change <= tolerance) break;
  }
  // clean tiny negatives from roundoff
  double sum = 0.0;
  for (auto& v : p) { v = std::max(v, 0.0); sum += v; }
  for (auto& v : p) v /= sum;
  return p;
}

PlattParams cross_fit_platt(const std::vector<std::vector<double>>& xs,
                            const std::vector<int>& ys,
                            const TrainConfig& train_config, int folds,
                            std::uint64_t seed) {
  const std::size_t n = xs.size();
  if (folds < 2) throw ValidationError("cross-fit: folds must be >= 2");

  // stratified fold assignment
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (ys[i] > 0 ? pos : neg).push_back(i);
  if (pos.size() < static_cast<std::size_t>(folds) ||
      neg.size() < static_cast<std::size_t>(folds))
    throw ValidationError("cross-fit: each label needs >= folds examples");
  Rng rng(derive_seed(seed, 0xf01dULL));
  shuffle(pos, rng);
  shuffle(neg, rng);
  std::vector<int> fold_of(n);
  for (std::size_t i = 0; i < pos.size(); ++i)
    fold_of[pos[i]] = static_cast<int>(i % folds);
  for (std::size_t i = 0; i < neg.size(); ++i)
    fold_of[neg[i]] = static_cast<int>(i % folds);

  std::vector<double> decisions;
  std::vector<int> labels;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::vector<double>> tx;
    std::vector<int> ty;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] != f) {
        tx.push_back(xs[i]);
        ty.push_back(ys[i]);
      }
    }
    TrainConfig fc = train_config;
    fc.seed = derive_seed(seed, 0xcf00ULL + static_cast<std::uint64_t>(f));
    SvmSolution sol = train_binary(tx, ty, fc);
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] == f) {
        decisions.push_back(sol.model.decision_value(xs[i]));
        labels.push_back(ys[i]);
      }
    }
  }
  return fit_platt(decisions, labels);
}

PairwiseModel train_one_vs_one(const std::vector<std::vector<double>>& xs,
                               const std::vector<int>& ys,
                               const std::vector<std::string>& class_labels,
                               const TrainConfig& train_config,
                               int calibration_folds, std::uint64_t seed,
                               int jobs) {
  const int k = static_cast<int>(class_labels.size());
  if (k < 2) throw ValidationError("one-vs-one: need at least 2 classes");
  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ys[i] < 0 || ys[i] >= k)
      throw ValidationError("one-vs-one: class index out of range");
    by_class[ys[i]].push_back(i);
  }
  for (int c = 0; c < k; ++c)
    if (by_class[c].size() < static_cast<std::size_t>(calibration_folds))
      throw ValidationError("one-vs-one: class '" + class_labels[c] +
                            "' has fewer examples than calibration folds");

  PairwiseModel model;
  model.classes = class_labels;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
  model.binaries.resize(pairs.size());

  parallel_for(pairs.size(), jobs, [&](std::size_t pi) {
    auto [ci, cj] = pairs[pi];
    std::vector<std::vector<double>> px;
    std::vector<int> py;
    for (auto idx : by_class[ci]) { px.push_back(xs[idx]); py.push_back(+1); }
    for (auto idx : by_class[cj]) { px.push_back(xs[idx]); py.push_back(-1); }

    std::uint64_t pair_seed = derive_seed(seed, 0x0101ULL + pi);
    PairBinary bin;
    bin.pos_class = ci;
    bin.neg_class = cj;
    bin.platt = cross_fit_platt(px, py, train_config, calibration_folds,
                                pair_seed);
    TrainConfig fc = train_config;
    fc.seed = derive_seed(pair_seed, 0xf1ULL);
    bin.model = train_binary(px, py, fc).model;
    model.binaries[pi] = std::move(bin);
  });
  return model;
}

std::vector<double> predict_class_probs(const PairwiseModel& model,
                                        const std::vector<double>& x) {
  const int k = model.num_classes();
  std::vector<std::vector<double>> r(k, std::vector<double>(k, 0.0));
  const double eps = 1e-7;  // keep r inside couple's open interval
  for (const auto& bin : model.binaries) {
    double p = sigmoid_prob(bin.platt, bin.model.decision_value(x));
    p = std::clamp(p, eps, 1.0 - eps);
    r[bin.pos_class][bin.neg_class] = p;
    r[bin.neg_class][bin.pos_class] = 1.0 - p;
  }
  return couple(r);
}

}  // namespace subrep
