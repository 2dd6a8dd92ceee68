#pragma once

// Per-game features (the 13 model columns plus per-guess rows), sampling,
// evaluation and the auxiliary analyses of the amusement classifier.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wordfun/common.hpp"
#include "wordfun/lexres.hpp"
#include "wordfun/normalizer.hpp"
#include "wordfun/wordle.hpp"

namespace wordfun {

// Insert/delete/substitute edit distance.
std::size_t levenshtein(std::string_view a, std::string_view b);

// -cos(emb[a], emb[b]); unavailable when either word is missing or has a zero vector.
Outcome<double> semantic_distance(std::string_view a, std::string_view b, const EmbeddingTable& embeddings);

inline constexpr std::size_t kGameFeatureCount = 13;
using GameFeatureVector = Eigen::Matrix<double, kGameFeatureCount, 1>;
// Rows are plies 1..6; columns reduction, semantic distance to the previous guess, funniness.
using PerGuessMatrix = Eigen::Matrix<double, static_cast<int>(kMaxPlies), 3>;

// Model feature order.
const std::array<std::string_view, kGameFeatureCount>& game_feature_names();
// f1_reduction, f1_gdist, f1_fun, ..., f6_fun
const std::vector<std::string>& per_guess_column_names();
// n_pairs, n_glove_pairs, glove_last_available, n_humor_words, humor_last_available
const std::vector<std::string>& availability_column_names();

struct FeatureAvailability {
  std::size_t pairs = 0;        // consecutive guess pairs
  std::size_t glove_pairs = 0;  // pairs with a semantic distance
  bool glove_last = false;
  std::size_t words = 0;  // guesses
  std::size_t humor_words = 0;
  bool humor_last = false;
};

struct GameFeatures {
  GameFeatureVector values = GameFeatureVector::Zero();
  PerGuessMatrix per_guess = PerGuessMatrix::Zero();
  FeatureAvailability availability;
  std::optional<std::string> exclusion;  // set when too many inputs are unavailable for training

  bool trainable() const noexcept { return !exclusion.has_value(); }
};

using FunninessLookup = std::function<std::optional<double>(std::string_view)>;

struct GameFeatureContext {
  const WordList& words;
  const EmbeddingTable& embeddings;  // guess-to-guess semantic distance
  FunninessLookup funniness;
  TrajectoryOptions trajectory;
};

// Requires typed guesses. Distance features use consecutive pairs; unavailable
// pairs and words are left out of max/mean, and an unavailable last one is 0.
// A game is marked excluded when at least half its pairs or words are unavailable.
GameFeatures extract_game_features(const GameRecord& game, const GameFeatureContext& context);

// ---------------------------------------------------------------------------
// Sampling

// Keeps every minority-class index and a seeded sample of the majority class of
// the same size. Returns indices in ascending order.
std::vector<std::size_t> balanced_subsample(std::span<const int> labels, std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Seeded shuffle of 0..n-1 cut at round(f0 n) and round((f0+f1) n). Each part is sorted.
SplitIndices split_dataset(std::size_t n, std::array<double, 3> fractions = {0.6, 0.2, 0.2}, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Evaluation

struct EvalReport {
  std::string split;
  std::size_t n = 0;
  double accuracy = 0;
  double base_rate = 0;  // majority-class fraction
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

// Predictions are p > 0.5.
EvalReport evaluate(const Eigen::VectorXd& probabilities, const Eigen::VectorXd& labels, std::string split = {});

template <typename Model, typename Derived>
EvalReport evaluate(const Model& model, const Eigen::MatrixBase<Derived>& x, const Eigen::VectorXd& labels,
                    std::string split = {}) {
  return evaluate(Eigen::VectorXd(model.predict_proba(x)), labels, std::move(split));
}

// Mean over rows of p(z + delta e_f) - p(z), z the normalized rows. Model takes
// normalized inputs.
template <typename Model>
double marginal_effect(const Model& model, const Normalizer<double>& normalizer, const Eigen::MatrixXd& x_raw,
                       Eigen::Index feature, double delta_sd = 1.0) {
  if (x_raw.rows() == 0) throw InputError("marginal effect: empty evaluation set");
  if (feature < 0 || feature >= x_raw.cols()) throw InputError("marginal effect: feature index out of range");
  Eigen::MatrixXd z = zscore_apply(normalizer, x_raw);
  const Eigen::VectorXd p0 = model.predict_proba(z);
  z.col(feature).array() += delta_sd;
  const Eigen::VectorXd p1 = model.predict_proba(z);
  return (p1 - p0).mean();
}

struct AuxRegression {
  std::size_t n = 0;
  double r2 = 0;
  Eigen::Index rank = 0;
  std::vector<std::string> dropped;  // columns found linearly dependent
  Eigen::VectorXd coefficients;
  double intercept = 0;
};

// OLS of y on x with an intercept, minimum-norm solution when x is rank deficient.
AuxRegression fit_aux_length_regression(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        const std::vector<std::string>& names);

}  // namespace wordfun
