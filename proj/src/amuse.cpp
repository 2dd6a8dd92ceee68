#include "wordfun/amuse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wordfun {

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Outcome<double> semantic_distance(std::string_view a, std::string_view b, const EmbeddingTable& embeddings) {
  const auto va = embeddings.find(to_lower(a));
  const auto vb = embeddings.find(to_lower(b));
  std::vector<std::string> missing;
  if (!va) missing.push_back("embedding for '" + std::string(a) + "'");
  if (!vb) missing.push_back("embedding for '" + std::string(b) + "'");
  if (!missing.empty()) return Outcome<double>::unavailable(std::move(missing));
  const Eigen::VectorXd x = va->cast<double>();
  const Eigen::VectorXd y = vb->cast<double>();
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0 || ny == 0) return Outcome<double>::unavailable({"degenerate (zero-norm embedding)"});
  return Outcome<double>::ok(-std::clamp(x.dot(y) / (nx * ny), -1.0, 1.0));
}

const std::array<std::string_view, kGameFeatureCount>& game_feature_names() {
  static constexpr std::array<std::string_view, kGameFeatureCount> names = {
      "num_possible_guesses_reduction_max", "num_possible_guesses_reduction_mean",
      "num_possible_guesses_reduction_last", "levenshtein_distance_max",
      "levenshtein_distance_mean",          "levenshtein_distance_last",
      "glove_distance_max",                 "glove_distance_mean",
      "glove_distance_last",                "intrinsic_humor_of_words_max",
      "intrinsic_humor_of_words_mean",      "intrinsic_humor_of_words_last",
      "num_possible_guesses_length"};
  return names;
}

const std::vector<std::string>& per_guess_column_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (std::size_t ply = 1; ply <= kMaxPlies; ++ply) {
      for (const char* kind : {"reduction", "gdist", "fun"}) out.push_back("f" + std::to_string(ply) + "_" + kind);
    }
    return out;
  }();
  return names;
}

const std::vector<std::string>& availability_column_names() {
  static const std::vector<std::string> names = {"n_pairs", "n_glove_pairs", "glove_last_available", "n_humor_words",
                                                 "humor_last_available"};
  return names;
}

namespace {

struct Summary {
  double max = 0;
  double mean = 0;
  double last = 0;
  std::size_t available = 0;
  bool last_available = false;
};

Summary summarize(const std::vector<std::optional<double>>& values) {
  Summary s;
  double sum = 0;
  for (const auto& v : values) {
    if (!v) continue;
    s.max = s.available == 0 ? *v : std::max(s.max, *v);
    sum += *v;
    ++s.available;
  }
  if (s.available > 0) s.mean = sum / static_cast<double>(s.available);
  if (!values.empty() && values.back()) {
    s.last = *values.back();
    s.last_available = true;
  }
  return s;
}

}  // namespace

GameFeatures extract_game_features(const GameRecord& game, const GameFeatureContext& ctx) {
  if (!game.has_guesses()) throw InputError("game features need typed guess words");
  const CandidateTrajectory trajectory = candidate_trajectory(game, ctx.words, ctx.trajectory);
  const ReductionFeatures red = reduction_features(trajectory);
  const std::size_t n = game.guesses.size();

  std::vector<std::optional<double>> lev;
  std::vector<std::optional<double>> glove;
  std::vector<std::optional<double>> fun;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string word = game.guesses[i].str();
    fun.push_back(ctx.funniness ? ctx.funniness(word) : std::nullopt);
    if (i == 0) continue;
    const std::string prev = game.guesses[i - 1].str();
    lev.emplace_back(static_cast<double>(levenshtein(prev, word)));
    const auto d = semantic_distance(prev, word, ctx.embeddings);
    glove.push_back(d ? std::optional<double>(*d) : std::nullopt);
  }

  const Summary l = summarize(lev);
  const Summary g = summarize(glove);
  const Summary h = summarize(fun);

  GameFeatures out;
  out.values << red.max, red.mean, red.last, l.max, l.mean, l.last, g.max, g.mean, g.last, h.max, h.mean, h.last,
      static_cast<double>(red.length);
  out.availability.pairs = lev.size();
  out.availability.glove_pairs = g.available;
  out.availability.glove_last = g.last_available;
  out.availability.words = n;
  out.availability.humor_words = h.available;
  out.availability.humor_last = h.last_available;

  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.per_guess(r, 0) = static_cast<double>(trajectory.counts[i]) - static_cast<double>(trajectory.counts[i + 1]);
    out.per_guess(r, 1) = i > 0 && glove[i - 1] ? *glove[i - 1] : 0.0;
    out.per_guess(r, 2) = fun[i] ? *fun[i] : 0.0;
  }

  const std::size_t missing_pairs = lev.size() - g.available;
  const std::size_t missing_words = n - h.available;
  if (!lev.empty() && 2 * missing_pairs >= lev.size()) {
    out.exclusion = "semantic distance unavailable for " + std::to_string(missing_pairs) + " of " +
                    std::to_string(lev.size()) + " guess pairs";
  } else if (2 * missing_words >= n) {
    out.exclusion = "funniness unavailable for " + std::to_string(missing_words) + " of " + std::to_string(n) +
                    " guesses";
  }
  return out;
}

std::vector<std::size_t> balanced_subsample(std::span<const int> labels, std::uint64_t seed) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      pos.push_back(i);
    } else if (labels[i] == 0) {
      neg.push_back(i);
    } else {
      throw InputError("balanced subsample: label at index " + std::to_string(i) + " is not 0/1");
    }
  }
  if (pos.empty() || neg.empty()) throw InputError("balanced subsample: need both classes");
  auto& majority = pos.size() > neg.size() ? pos : neg;
  const std::size_t keep = std::min(pos.size(), neg.size());
  Rng rng(seed);
  rng.shuffle(majority);
  majority.resize(keep);
  std::vector<std::size_t> out = pos;
  out.insert(out.end(), neg.begin(), neg.end());
  std::sort(out.begin(), out.end());
  return out;
}

SplitIndices split_dataset(std::size_t n, std::array<double, 3> fractions, std::uint64_t seed) {
  if (n < 5) throw InputError("split: need at least 5 items, got " + std::to_string(n));
  double total = 0;
  for (const double f : fractions) {
    if (!(f > 0)) throw InputError("split: fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("split: fractions must sum to 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const auto dn = static_cast<double>(n);
  const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * dn));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(fractions[1] * dn)));
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                      order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

EvalReport evaluate(const Eigen::VectorXd& probabilities, const Eigen::VectorXd& labels, std::string split) {
  if (probabilities.size() == 0) throw InputError("evaluate: empty evaluation set");
  if (probabilities.size() != labels.size()) throw NumericError("evaluate: prediction and label counts differ");
  EvalReport r;
  r.split = std::move(split);
  r.n = static_cast<std::size_t>(labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities(i) > 0.5;
    const bool actual = labels(i) == 1.0;
    if (predicted && actual) ++r.tp;
    if (predicted && !actual) ++r.fp;
    if (!predicted && !actual) ++r.tn;
    if (!predicted && actual) ++r.fn;
  }
  const auto n = static_cast<double>(r.n);
  r.accuracy = static_cast<double>(r.tp + r.tn) / n;
  const double pos = static_cast<double>(r.tp + r.fn) / n;
  r.base_rate = std::max(pos, 1.0 - pos);
  return r;
}

AuxRegression fit_aux_length_regression(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        const std::vector<std::string>& names) {
  if (x.rows() < 2) throw InputError("auxiliary regression: need at least 2 rows");
  if (x.rows() != y.size()) throw NumericError("auxiliary regression: X and y row counts differ");
  if (static_cast<Eigen::Index>(names.size()) != x.cols()) throw NumericError("auxiliary regression: name count mismatch");
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  const double sst = yc.squaredNorm();
  if (!(sst > 0)) throw NumericError("auxiliary regression: response is constant");

  AuxRegression out;
  out.n = static_cast<std::size_t>(x.rows());
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xc);
  cod.setThreshold(1e-10);
  cod.compute(xc);
  out.rank = cod.rank();
  out.coefficients = cod.solve(yc);
  out.intercept = y_mean - x_mean.dot(out.coefficients);
  if (out.rank < x.cols()) {
    // Columns that column pivoting places after the rank are the dependent ones.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xc);
    qr.setThreshold(1e-10);
    qr.compute(xc);
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < x.cols(); ++k) out.dropped.push_back(names[static_cast<std::size_t>(perm(k))]);
    std::sort(out.dropped.begin(), out.dropped.end());
  }
  const double sse = (yc - xc * out.coefficients).squaredNorm();
  out.r2 = 1.0 - sse / sst;
  return out;
}

}  // namespace wordfun
