// Copyright 2026 The Microest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "microest/classifier.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "microest/binning.h"
#include "microest/error.h"
#include "microest/rng.h"
#include "tree.h"

namespace microest {
namespace {

constexpr double kMaxLogOdds = 30.0;

double sigmoid(double z) {
  z = std::clamp(z, -kMaxLogOdds, kMaxLogOdds);
  return 1.0 / (1.0 + std::exp(-z));
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double target(const LabeledExample& e) { return e.positive() ? 1.0 : 0.0; }

void check_training_set(std::span<const LabeledExample> train) {
  if (train.empty()) throw Error(ErrorCode::kSingleClass, "empty training set");
  const size_t d = train.front().features.size();
  double wpos = 0, wneg = 0;
  for (const auto& e : train) {
    if (e.features.size() != d) {
      throw Error(ErrorCode::kDimensionMismatch, "training vectors differ in length");
    }
    if (e.label == Label::kUnlabeled) {
      throw Error(ErrorCode::kInvalidArgument, "training set contains unlabeled examples");
    }
    if (!(e.weight >= 0) || !std::isfinite(e.weight)) {
      throw Error(ErrorCode::kInvalidArgument, "example weights must be finite and >= 0");
    }
    (e.positive() ? wpos : wneg) += e.weight;
  }
  if (!(wpos > 0) || !(wneg > 0)) {
    throw Error(ErrorCode::kSingleClass, "training set needs weight on both classes");
  }
  bool varies = false;
  for (size_t j = 0; j < d && !varies; ++j) {
    for (const auto& e : train) {
      if (e.features[j] != train.front().features[j]) {
        varies = true;
        break;
      }
    }
  }
  if (!varies) {
    throw Error(ErrorCode::kDegenerateData, "every feature is constant in the training set");
  }
}

nlohmann::json trees_to_json(const std::vector<detail::Tree>& trees) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : trees) arr.push_back(t.to_json());
  return arr;
}

std::vector<detail::Tree> trees_from_json(const nlohmann::json& j) {
  std::vector<detail::Tree> out;
  for (const auto& t : j) out.push_back(detail::Tree::from_json(t));
  return out;
}

std::vector<uint32_t> all_features(size_t d) {
  std::vector<uint32_t> f(d);
  std::iota(f.begin(), f.end(), 0u);
  return f;
}

std::vector<uint32_t> sample_features(size_t d, double rate, Rng& rng) {
  std::vector<uint32_t> f = all_features(d);
  const size_t k = std::clamp<size_t>(static_cast<size_t>(std::llround(rate * d)), 1, d);
  if (k == d) return f;
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + uniform_index(rng, d - i);
    std::swap(f[i], f[j]);
  }
  f.resize(k);
  std::sort(f.begin(), f.end());
  return f;
}

// ---------------------------------------------------------------------------
// Naive Bayes over per-dimension histogram bins.

class NaiveBayesModel final : public ClassifierModel {
 public:
  NaiveBayesModel(size_t d, uint64_t seed, double prior_log_odds,
                  std::vector<std::vector<double>> cuts,
                  std::vector<std::vector<double>> log_ratio)
      : ClassifierModel(ModelKind::kNaiveBayes, d, seed),
        prior_log_odds_(prior_log_odds),
        cuts_(std::move(cuts)),
        log_ratio_(std::move(log_ratio)) {}

  nlohmann::json to_json() const override {
    nlohmann::json j = header();
    j["prior_log_odds"] = prior_log_odds_;
    j["cuts"] = cuts_;
    j["log_ratio"] = log_ratio_;
    return j;
  }

  static ModelPtr from_json(const nlohmann::json& j, size_t d, uint64_t seed) {
    auto cuts = j.at("cuts").get<std::vector<std::vector<double>>>();
    auto ratio = j.at("log_ratio").get<std::vector<std::vector<double>>>();
    if (cuts.size() != d || ratio.size() != d) {
      throw Error(ErrorCode::kParseError, "naive bayes tables do not match feature count");
    }
    return std::make_shared<NaiveBayesModel>(d, seed, j.at("prior_log_odds").get<double>(),
                                             std::move(cuts), std::move(ratio));
  }

 protected:
  double do_predict(std::span<const double> x) const override {
    double lo = prior_log_odds_;
    for (size_t d = 0; d < x.size(); ++d) {
      const auto& c = cuts_[d];
      size_t b = static_cast<size_t>(std::lower_bound(c.begin(), c.end(), x[d]) - c.begin());
      lo += log_ratio_[d][b];
    }
    return sigmoid(lo);
  }

 private:
  double prior_log_odds_;
  std::vector<std::vector<double>> cuts_;
  std::vector<std::vector<double>> log_ratio_;
};

ModelPtr fit_naive_bayes(const ModelConfig& cfg, std::span<const LabeledExample> train,
                         uint64_t seed) {
  const size_t d = train.front().features.size();
  const size_t nbins = static_cast<size_t>(cfg.nbins_or_default());
  double wpos = 0, wneg = 0;
  for (const auto& e : train) (e.positive() ? wpos : wneg) += e.weight;

  std::vector<std::vector<double>> cuts(d), ratio(d);
  std::vector<double> column(train.size());
  for (size_t j = 0; j < d; ++j) {
    for (size_t i = 0; i < train.size(); ++i) column[i] = train[i].features[j];
    cuts[j] = fit_quantile_binning(column, nbins).cuts;
    const size_t bins = cuts[j].size() + 1;
    std::vector<double> cp(bins, 0.0), cn(bins, 0.0);
    for (size_t i = 0; i < train.size(); ++i) {
      size_t b = static_cast<size_t>(
          std::lower_bound(cuts[j].begin(), cuts[j].end(), column[i]) - cuts[j].begin());
      (train[i].positive() ? cp : cn)[b] += train[i].weight;
    }
    ratio[j].resize(bins);
    const double B = static_cast<double>(bins);
    for (size_t b = 0; b < bins; ++b) {
      // Laplace smoothing keeps every bin probability strictly positive.
      ratio[j][b] = std::log((cp[b] + 1.0) / (wpos + B)) - std::log((cn[b] + 1.0) / (wneg + B));
    }
  }
  const double prior = std::log((wpos + 1.0) / (wneg + 1.0));
  return std::make_shared<NaiveBayesModel>(d, seed, prior, std::move(cuts), std::move(ratio));
}

// ---------------------------------------------------------------------------
// Tree ensembles. One class serves decision_tree (one tree, no sampling),
// random_forest (averaged Gini trees) and gbt (summed Newton trees on the
// log-odds scale).

class TreeEnsembleModel final : public ClassifierModel {
 public:
  TreeEnsembleModel(ModelKind kind, size_t d, uint64_t seed, double base_score,
                    std::vector<detail::Tree> trees, std::vector<double> importance)
      : ClassifierModel(kind, d, seed),
        base_score_(base_score),
        trees_(std::move(trees)),
        importance_(std::move(importance)) {}

  const std::vector<double>& importance() const { return importance_; }

  nlohmann::json to_json() const override {
    nlohmann::json j = header();
    j["base_score"] = base_score_;
    j["trees"] = trees_to_json(trees_);
    j["importance"] = importance_;
    return j;
  }

  static ModelPtr from_json(const nlohmann::json& j, ModelKind kind, size_t d,
                            uint64_t seed) {
    auto trees = trees_from_json(j.at("trees"));
    if (trees.empty()) throw Error(ErrorCode::kParseError, "tree model without trees");
    for (const auto& t : trees) {
      for (const auto& n : t.nodes) {
        if (n.feature >= static_cast<int32_t>(d)) {
          throw Error(ErrorCode::kParseError, "tree splits on a feature out of range");
        }
      }
    }
    return std::make_shared<TreeEnsembleModel>(kind, d, seed, j.at("base_score").get<double>(),
                                               std::move(trees),
                                               j.at("importance").get<std::vector<double>>());
  }

 protected:
  double do_predict(std::span<const double> x) const override {
    if (kind() == ModelKind::kGbt) {
      double f = base_score_;
      for (const auto& t : trees_) f += t.predict(x);
      return sigmoid(f);
    }
    double s = 0;
    for (const auto& t : trees_) s += t.predict(x);
    return std::clamp(s / static_cast<double>(trees_.size()), 0.0, 1.0);
  }

 private:
  double base_score_;
  std::vector<detail::Tree> trees_;
  std::vector<double> importance_;
};

ModelPtr fit_decision_tree(const ModelConfig& cfg, std::span<const LabeledExample> train,
                           uint64_t seed) {
  const size_t n = train.size();
  const size_t d = train.front().features.size();
  detail::BinnedMatrix x(train, static_cast<size_t>(cfg.nbins_or_default()));
  std::vector<double> a(n), b(n);
  for (size_t i = 0; i < n; ++i) {
    a[i] = train[i].weight;
    b[i] = train[i].weight * target(train[i]);
  }
  std::vector<uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  detail::TreeParams params;
  params.max_depth = cfg.max_depth_or_default();
  params.min_rows = static_cast<size_t>(cfg.min_rows_or_default());
  Rng rng(seed);
  std::vector<double> importance(d, 0.0);
  std::vector<uint32_t> features = all_features(d);
  std::vector<detail::Tree> trees;
  trees.push_back(detail::grow_tree(x, std::move(rows), a, b, features, params,
                                    detail::SplitCriterion::kGini, rng, &importance));
  return std::make_shared<TreeEnsembleModel>(ModelKind::kDecisionTree, d, seed, 0.0,
                                             std::move(trees), std::move(importance));
}

ModelPtr fit_random_forest(const ModelConfig& cfg, std::span<const LabeledExample> train,
                           uint64_t seed) {
  const size_t n = train.size();
  const size_t d = train.front().features.size();
  detail::BinnedMatrix x(train, static_cast<size_t>(cfg.nbins_or_default()));
  std::vector<double> a(n), b(n);
  for (size_t i = 0; i < n; ++i) {
    a[i] = train[i].weight;
    b[i] = train[i].weight * target(train[i]);
  }
  const int ntrees = cfg.ntrees_or_default();
  const size_t sample =
      std::max<size_t>(1, static_cast<size_t>(std::llround(cfg.sample_rate_or_default() * n)));
  detail::TreeParams params;
  params.max_depth = cfg.max_depth_or_default();
  params.min_rows = static_cast<size_t>(cfg.min_rows_or_default());

  std::vector<double> importance(d, 0.0);
  std::vector<detail::Tree> trees;
  trees.reserve(ntrees);
  for (int t = 0; t < ntrees; ++t) {
    // Per-tree seeds make the forest independent of how trees are scheduled.
    Rng rng(derive_seed(seed, {static_cast<uint64_t>(t)}));
    std::vector<uint32_t> rows(sample);
    for (auto& r : rows) r = static_cast<uint32_t>(uniform_index(rng, n));
    std::vector<uint32_t> features = sample_features(d, cfg.col_sample_rate_or_default(), rng);
    params.mtries = std::max<size_t>(
        1, static_cast<size_t>(std::floor(std::sqrt(static_cast<double>(features.size())))));
    trees.push_back(detail::grow_tree(x, std::move(rows), a, b, features, params,
                                      detail::SplitCriterion::kGini, rng, &importance));
  }
  return std::make_shared<TreeEnsembleModel>(ModelKind::kRandomForest, d, seed, 0.0,
                                             std::move(trees), std::move(importance));
}

ModelPtr fit_gbt(const ModelConfig& cfg, std::span<const LabeledExample> train,
                 uint64_t seed) {
  const size_t n = train.size();
  const size_t d = train.front().features.size();
  detail::BinnedMatrix x(train, static_cast<size_t>(cfg.nbins_or_default()));
  double wpos = 0, wtot = 0;
  for (const auto& e : train) {
    wtot += e.weight;
    wpos += e.weight * target(e);
  }
  const double base = logit(std::clamp(wpos / wtot, 1e-6, 1.0 - 1e-6));
  const double lr = cfg.learning_rate_or_default();
  const int ntrees = cfg.ntrees_or_default();
  const double rate = cfg.sample_rate_or_default();
  const size_t sample = std::clamp<size_t>(static_cast<size_t>(std::llround(rate * n)), 1, n);

  detail::TreeParams params;
  params.max_depth = cfg.max_depth_or_default();
  params.min_rows = static_cast<size_t>(cfg.min_rows_or_default());

  std::vector<double> margin(n, base), grad(n), hess(n);
  std::vector<detail::Tree> trees;
  trees.reserve(ntrees);
  std::vector<uint32_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0u);
  for (int t = 0; t < ntrees; ++t) {
    Rng rng(derive_seed(seed, {static_cast<uint64_t>(t)}));
    for (size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = train[i].weight * (p - target(train[i]));
      hess[i] = train[i].weight * std::max(p * (1.0 - p), 1e-12);
    }
    std::vector<uint32_t> rows = all_rows;
    if (sample < n) {
      for (size_t k = 0; k < sample; ++k) {
        size_t j = k + uniform_index(rng, n - k);
        std::swap(rows[k], rows[j]);
      }
      rows.resize(sample);
      std::sort(rows.begin(), rows.end());
    }
    std::vector<uint32_t> features = sample_features(d, cfg.col_sample_rate_or_default(), rng);
    detail::Tree tree = detail::grow_tree(x, std::move(rows), grad, hess, features, params,
                                          detail::SplitCriterion::kNewton, rng, nullptr);
    for (auto& node : tree.nodes) node.value *= lr;
    for (size_t i = 0; i < n; ++i) margin[i] += tree.predict(train[i].features);
    trees.push_back(std::move(tree));
  }
  return std::make_shared<TreeEnsembleModel>(ModelKind::kGbt, d, seed, base, std::move(trees),
                                             std::vector<double>{});
}

// ---------------------------------------------------------------------------
// Elastic-net logistic regression.

struct GlmFit {
  std::vector<double> beta;
  double intercept = 0;
};

double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

class GlmSolver {
 public:
  GlmSolver(std::span<const LabeledExample> train, double alpha)
      : n_(train.size()), d_(train.front().features.size()), alpha_(alpha) {
    x_.resize(n_ * d_);
    y_.resize(n_);
    w_.resize(n_);
    double wsum = 0;
    for (const auto& e : train) wsum += e.weight;
    for (size_t i = 0; i < n_; ++i) {
      for (size_t j = 0; j < d_; ++j) x_[j * n_ + i] = train[i].features[j];
      y_[i] = target(train[i]);
      w_[i] = train[i].weight / wsum;
    }
  }

  GlmFit initial() const {
    GlmFit f;
    f.beta.assign(d_, 0.0);
    double py = 0;
    for (size_t i = 0; i < n_; ++i) py += w_[i] * y_[i];
    f.intercept = logit(std::clamp(py, 1e-6, 1.0 - 1e-6));
    return f;
  }

  double objective(const GlmFit& f, double lambda) const {
    std::vector<double> eta = linear(f);
    double loss = 0;
    for (size_t i = 0; i < n_; ++i) {
      // log(1 + e^eta) - y eta, computed stably.
      const double z = eta[i];
      const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      loss += w_[i] * (softplus - y_[i] * z);
    }
    double l1 = 0, l2 = 0;
    for (double b : f.beta) {
      l1 += std::abs(b);
      l2 += b * b;
    }
    return loss + lambda * (alpha_ * l1 + 0.5 * (1.0 - alpha_) * l2);
  }

  void solve(GlmFit& f, double lambda) const {
    double current = objective(f, lambda);
    for (int outer = 0; outer < 100; ++outer) {
      std::vector<double> eta = linear(f);
      std::vector<double> v(n_), r(n_);
      for (size_t i = 0; i < n_; ++i) {
        const double p = 1.0 / (1.0 + std::exp(-std::clamp(eta[i], -kMaxLogOdds, kMaxLogOdds)));
        const double var = std::max(p * (1.0 - p), 1e-5);
        v[i] = w_[i] * var;
        r[i] = eta[i] + (y_[i] - p) / var;
      }
      GlmFit next = f;
      coordinate_descent(next, v, r, lambda);

      double candidate = objective(next, lambda);
      double step = 1.0;
      GlmFit trial = next;
      while (candidate > current + 1e-15 && step > 1e-6) {
        step *= 0.5;
        trial.intercept = f.intercept + step * (next.intercept - f.intercept);
        for (size_t j = 0; j < d_; ++j) {
          trial.beta[j] = f.beta[j] + step * (next.beta[j] - f.beta[j]);
        }
        candidate = objective(trial, lambda);
      }
      if (candidate > current + 1e-15) break;
      double change = std::abs(trial.intercept - f.intercept);
      for (size_t j = 0; j < d_; ++j) change = std::max(change, std::abs(trial.beta[j] - f.beta[j]));
      f = std::move(trial);
      const double improvement = current - candidate;
      current = candidate;
      if (change < 1e-9 || improvement < 1e-14) break;
    }
  }

  size_t dimension() const { return d_; }

 private:
  std::vector<double> linear(const GlmFit& f) const {
    std::vector<double> eta(n_, f.intercept);
    for (size_t j = 0; j < d_; ++j) {
      const double b = f.beta[j];
      if (b == 0) continue;
      const double* col = &x_[j * n_];
      for (size_t i = 0; i < n_; ++i) eta[i] += b * col[i];
    }
    return eta;
  }

  // Minimizes 1/2 sum v_i (r_i - b0 - x_i b)^2 + penalty from the current fit.
  void coordinate_descent(GlmFit& f, const std::vector<double>& v,
                          const std::vector<double>& r, double lambda) const {
    std::vector<double> e(n_);
    std::vector<double> eta = linear(f);
    for (size_t i = 0; i < n_; ++i) e[i] = r[i] - eta[i];
    double vsum = 0;
    for (double vi : v) vsum += vi;
    std::vector<double> xvx(d_, 0.0);
    for (size_t j = 0; j < d_; ++j) {
      const double* col = &x_[j * n_];
      for (size_t i = 0; i < n_; ++i) xvx[j] += v[i] * col[i] * col[i];
    }
    for (int sweep = 0; sweep < 1000; ++sweep) {
      double max_change = 0;
      double num = 0;
      for (size_t i = 0; i < n_; ++i) num += v[i] * e[i];
      const double db0 = num / vsum;
      f.intercept += db0;
      for (size_t i = 0; i < n_; ++i) e[i] -= db0;
      max_change = std::abs(db0);
      for (size_t j = 0; j < d_; ++j) {
        if (xvx[j] <= 0) continue;
        const double* col = &x_[j * n_];
        double z = 0;
        for (size_t i = 0; i < n_; ++i) z += v[i] * col[i] * e[i];
        z += xvx[j] * f.beta[j];
        const double updated = soft_threshold(z, lambda * alpha_) /
                               (xvx[j] + lambda * (1.0 - alpha_));
        const double delta = updated - f.beta[j];
        if (delta != 0) {
          for (size_t i = 0; i < n_; ++i) e[i] -= delta * col[i];
          f.beta[j] = updated;
          max_change = std::max(max_change, std::abs(delta) * std::sqrt(xvx[j]));
        }
      }
      if (max_change < 1e-10) break;
    }
  }

  size_t n_, d_;
  double alpha_;
  std::vector<double> x_;  // column-major
  std::vector<double> y_;
  std::vector<double> w_;
};

double weighted_log_loss(const GlmModel& m, std::span<const LabeledExample> rows) {
  double loss = 0, w = 0;
  for (const auto& e : rows) {
    const double p = std::clamp(m.predict_proba(e.features), 1e-12, 1.0 - 1e-12);
    loss -= e.weight * (e.positive() ? std::log(p) : std::log(1.0 - p));
    w += e.weight;
  }
  return w > 0 ? loss / w : 0.0;
}

double choose_lambda(std::span<const LabeledExample> train, double alpha, uint64_t seed) {
  constexpr size_t kFolds = 3;
  const std::vector<double> path = glm_lambda_path();
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < train.size(); ++i) (train[i].positive() ? pos : neg).push_back(i);
  if (pos.size() < kFolds || neg.size() < kFolds) return 1e-3;

  Rng rng(derive_seed(seed, {0x6c616d6264ULL}));
  shuffle_in_place(pos, rng);
  shuffle_in_place(neg, rng);
  std::vector<size_t> fold(train.size());
  for (size_t k = 0; k < pos.size(); ++k) fold[pos[k]] = k % kFolds;
  for (size_t k = 0; k < neg.size(); ++k) fold[neg[k]] = k % kFolds;

  std::vector<double> loss(path.size(), 0.0);
  for (size_t f = 0; f < kFolds; ++f) {
    std::vector<LabeledExample> fit_rows, held;
    for (size_t i = 0; i < train.size(); ++i) {
      (fold[i] == f ? held : fit_rows).push_back(train[i]);
    }
    GlmSolver solver(fit_rows, alpha);
    GlmFit state = solver.initial();
    for (size_t k = 0; k < path.size(); ++k) {
      solver.solve(state, path[k]);  // warm start down the path
      GlmModel m(state.beta, state.intercept, alpha, path[k]);
      loss[k] += weighted_log_loss(m, held);
    }
  }
  size_t best = 0;
  for (size_t k = 1; k < path.size(); ++k) {
    if (loss[k] < loss[best] - 1e-12) best = k;
  }
  return path[best];
}

ModelPtr fit_glm_config(const ModelConfig& cfg, std::span<const LabeledExample> train,
                        uint64_t seed) {
  const double alpha = cfg.alpha_or_default();
  const double lambda = cfg.lambda ? *cfg.lambda : choose_lambda(train, alpha, seed);
  return fit_glm(train, alpha, lambda, seed);
}

}  // namespace

// ---------------------------------------------------------------------------

double Predictor::predict_proba(std::span<const double> x) const {
  if (x.size() != feature_count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected " + std::to_string(feature_count()) + " features, got " +
                    std::to_string(x.size()));
  }
  return do_predict(x);
}

std::vector<double> Predictor::predict_proba(std::span<const LabeledExample> examples) const {
  std::vector<double> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(predict_proba(e.features));
  return out;
}

nlohmann::json ClassifierModel::header() const {
  return {{"format", kModelFormat},
          {"version", kModelFormatVersion},
          {"kind", std::string(to_string(kind_))},
          {"feature_count", feature_count_},
          {"seed", seed_}};
}

GlmModel::GlmModel(std::vector<double> coefficients, double intercept, double alpha,
                   double lambda, uint64_t seed)
    : ClassifierModel(ModelKind::kGlm, coefficients.size(), seed),
      coefficients_(std::move(coefficients)),
      intercept_(intercept),
      alpha_(alpha),
      lambda_(lambda) {}

double GlmModel::l1_norm() const {
  double s = 0;
  for (double b : coefficients_) s += std::abs(b);
  return s;
}

double GlmModel::do_predict(std::span<const double> x) const {
  double z = intercept_;
  for (size_t j = 0; j < x.size(); ++j) z += coefficients_[j] * x[j];
  return sigmoid(z);
}

nlohmann::json GlmModel::to_json() const {
  nlohmann::json j = header();
  j["coefficients"] = coefficients_;
  j["intercept"] = intercept_;
  j["alpha"] = alpha_;
  j["lambda"] = lambda_;
  return j;
}

std::vector<double> glm_lambda_path() { return {0.1, 0.03, 0.01, 0.003, 0.001, 0.0001}; }

std::shared_ptr<const GlmModel> fit_glm(std::span<const LabeledExample> train, double alpha,
                                        double lambda, uint64_t seed) {
  check_training_set(train);
  GlmSolver solver(train, alpha);
  GlmFit f = solver.initial();
  solver.solve(f, lambda);
  return std::make_shared<GlmModel>(std::move(f.beta), f.intercept, alpha, lambda, seed);
}

ModelPtr fit(const ModelConfig& config, std::span<const LabeledExample> train, uint64_t seed) {
  config.validate();
  check_training_set(train);
  switch (config.kind) {
    case ModelKind::kNaiveBayes: return fit_naive_bayes(config, train, seed);
    case ModelKind::kDecisionTree: return fit_decision_tree(config, train, seed);
    case ModelKind::kRandomForest: return fit_random_forest(config, train, seed);
    case ModelKind::kGbt: return fit_gbt(config, train, seed);
    case ModelKind::kGlm: return fit_glm_config(config, train, seed);
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown model kind");
}

std::vector<double> dimension_importance(const ClassifierModel& model) {
  const auto* forest = dynamic_cast<const TreeEnsembleModel*>(&model);
  if (forest == nullptr || model.kind() != ModelKind::kRandomForest) {
    throw Error(ErrorCode::kWrongModelKind,
                "feature importance needs a random_forest, got " +
                    std::string(to_string(model.kind())));
  }
  std::vector<double> imp = forest->importance();
  double total = 0;
  for (double v : imp) total += v;
  if (total > 0) {
    for (double& v : imp) v /= total;
  } else if (!imp.empty()) {
    std::fill(imp.begin(), imp.end(), 1.0 / static_cast<double>(imp.size()));
  }
  return imp;
}

std::vector<FeatureImportance> feature_importance(
    const ClassifierModel& model, const std::vector<std::string>& dimension_sources) {
  std::vector<double> imp = dimension_importance(model);
  if (dimension_sources.size() != imp.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dimension sources do not match the model's feature count");
  }
  std::map<std::string, double> by_feature;
  for (size_t d = 0; d < imp.size(); ++d) by_feature[dimension_sources[d]] += imp[d];
  std::vector<FeatureImportance> out;
  for (const auto& [name, v] : by_feature) out.push_back({name, v});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.importance > b.importance;
  });
  return out;
}

Metrics evaluate(const Predictor& model, std::span<const LabeledExample> test,
                 double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must lie in (0, 1)");
  }
  std::vector<bool> predicted, actual;
  for (const auto& e : test) {
    if (e.label == Label::kUnlabeled) continue;
    predicted.push_back(model.predict_proba(e.features) >= threshold);
    actual.push_back(e.positive());
  }
  if (predicted.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "evaluation set has no labeled examples");
  }
  return confusion_metrics(predicted, actual);
}

ModelPtr load_model(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != kModelFormat) {
    throw Error(ErrorCode::kParseError, "not a microest model document");
  }
  if (j.at("version").get<int>() != kModelFormatVersion) {
    throw Error(ErrorCode::kParseError, "unsupported model format version");
  }
  const ModelKind kind = parse_model_kind(j.at("kind").get<std::string>());
  const size_t d = j.at("feature_count").get<size_t>();
  const uint64_t seed = j.at("seed").get<uint64_t>();
  switch (kind) {
    case ModelKind::kNaiveBayes: return NaiveBayesModel::from_json(j, d, seed);
    case ModelKind::kDecisionTree:
    case ModelKind::kRandomForest:
    case ModelKind::kGbt: return TreeEnsembleModel::from_json(j, kind, d, seed);
    case ModelKind::kGlm: {
      auto coef = j.at("coefficients").get<std::vector<double>>();
      if (coef.size() != d) throw Error(ErrorCode::kParseError, "glm coefficient count");
      return std::make_shared<GlmModel>(std::move(coef), j.at("intercept").get<double>(),
                                        j.at("alpha").get<double>(),
                                        j.at("lambda").get<double>(), seed);
    }
  }
  throw Error(ErrorCode::kParseError, "unknown model kind");
}

}  // namespace microest
