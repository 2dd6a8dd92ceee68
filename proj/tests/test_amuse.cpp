#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "support.hpp"
#include "wordfun/amuse.hpp"
#include "wordfun/pipeline.hpp"

using namespace wordfun;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Word w(std::string_view s) { return Word::parse(s); }

// Full Wagner-Fischer table.
std::size_t edit_distance_oracle(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

EmbeddingTable three_embeddings(bool with_trace = true) {
  EmbeddingTable t(2);
  t.add("crane", std::vector<float>{1, 0});
  t.add("crate", std::vector<float>{1, 0});
  if (with_trace) t.add("trace", std::vector<float>{0, 1});
  return t;
}

FunninessLookup fun_table(std::map<std::string, double> m) {
  return [m = std::move(m)](std::string_view word) -> std::optional<double> {
    const auto it = m.find(std::string(word));
    if (it == m.end()) return std::nullopt;
    return it->second;
  };
}

Eigen::Index col(std::string_view name) {
  const auto& names = game_feature_names();
  return std::find(names.begin(), names.end(), name) - names.begin();
}

// Synthetic feature table: label depends on the last Levenshtein distance.
FeatureTable synthetic_table(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  FeatureTable t;
  const auto header = feature_csv_header(false);
  t.columns.assign(header.begin() + 2, header.end());
  t.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index c = 0; c < t.values.cols(); ++c) t.values(r, c) = rng.normal();
    t.values(r, col("num_possible_guesses_length")) = 1 + static_cast<double>(rng.below(6));
    const double eta = -1.0 + 0.8 * t.values(r, col("levenshtein_distance_last"));
    t.ids.push_back("g" + std::to_string(i));
    t.labels.push_back(rng.uniform() < 1 / (1 + std::exp(-eta)) ? 1 : 0);
  }
  return t;
}

}  // namespace

TEST_CASE("levenshtein") {
  CHECK(levenshtein("apple", "apple") == 0);
  CHECK(levenshtein("crane", "crate") == 1);
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("", "abc") == 3);
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const std::string a = testsupport::random_letters(rng, rng.below(8), "abcd");
    const std::string b = testsupport::random_letters(rng, rng.below(8), "abcd");
    const std::string c = testsupport::random_letters(rng, rng.below(8), "abcd");
    REQUIRE(levenshtein(a, b) == edit_distance_oracle(a, b));
    CHECK(levenshtein(a, b) == levenshtein(b, a));
    CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
    CHECK(levenshtein(a, a) == 0);
  }
}

TEST_CASE("semantic_distance") {
  EmbeddingTable t(2);
  t.add("a", std::vector<float>{1, 0});
  t.add("b", std::vector<float>{2, 0});
  t.add("c", std::vector<float>{0, 3});
  t.add("d", std::vector<float>{-1, 0});
  t.add("z", std::vector<float>{0, 0});
  CHECK(*semantic_distance("a", "b", t) == doctest::Approx(-1));
  CHECK(*semantic_distance("a", "c", t) == doctest::Approx(0));
  CHECK(*semantic_distance("a", "d", t) == doctest::Approx(1));
  CHECK_FALSE(semantic_distance("a", "nope", t));
  const auto zero = semantic_distance("a", "z", t);
  CHECK_FALSE(zero);
  CHECK(zero.missing.front().find("degenerate") != std::string::npos);

  Rng rng(2);
  EmbeddingTable r(4);
  for (int i = 0; i < 30; ++i) {
    std::vector<float> v(4);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    r.add("w" + std::to_string(i), v);
  }
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) {
      const double d = *semantic_distance("w" + std::to_string(i), "w" + std::to_string(j), r);
      CHECK(d >= -1);
      CHECK(d <= 1);
      CHECK(d == *semantic_distance("w" + std::to_string(j), "w" + std::to_string(i), r));
    }
  }
}

TEST_CASE("game feature names") {
  CHECK(game_feature_names().size() == 13);
  CHECK(game_feature_names()[0] == "num_possible_guesses_reduction_max");
  CHECK(game_feature_names()[12] == "num_possible_guesses_length");
  CHECK(per_guess_column_names().size() == 18);
  CHECK(per_guess_column_names()[4] == "f2_gdist");
}

TEST_CASE("extract_game_features") {
  const WordList words({w("crane"), w("crate"), w("trace")});
  const EmbeddingTable emb = three_embeddings();
  const GameFeatureContext ctx{words, emb, fun_table({{"crane", 50}, {"crate", 60}, {"trace", 70}}), {}};

  SUBCASE("three guesses") {
    const GameRecord g = testsupport::play({w("crane"), w("crate"), w("trace")}, w("trace"));
    const GameFeatures f = extract_game_features(g, ctx);
    CHECK(f.trainable());
    CHECK(f.values(col("levenshtein_distance_max")) == 2);
    CHECK(f.values(col("levenshtein_distance_mean")) == 1.5);
    CHECK(f.values(col("levenshtein_distance_last")) == 2);
    CHECK(f.values(col("num_possible_guesses_reduction_max")) == 2);
    CHECK(f.values(col("num_possible_guesses_reduction_mean")) == 1);
    CHECK(f.values(col("num_possible_guesses_reduction_last")) == 1);
    CHECK(f.values(col("glove_distance_max")) == doctest::Approx(0));
    CHECK(f.values(col("glove_distance_mean")) == doctest::Approx(-0.5));
    CHECK(f.values(col("glove_distance_last")) == doctest::Approx(0));
    CHECK(f.values(col("intrinsic_humor_of_words_max")) == 70);
    CHECK(f.values(col("intrinsic_humor_of_words_mean")) == 60);
    CHECK(f.values(col("intrinsic_humor_of_words_last")) == 70);
    CHECK(f.values(col("num_possible_guesses_length")) == 3);
    PerGuessMatrix expect = PerGuessMatrix::Zero();
    expect.row(0) << 2, 0, 50;
    expect.row(1) << 0, -1, 60;
    expect.row(2) << 1, 0, 70;
    CHECK((f.per_guess - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("one guess") {
    const GameRecord g = testsupport::play({w("trace")}, w("trace"));
    const GameFeatures f = extract_game_features(g, ctx);
    CHECK(f.values(col("num_possible_guesses_reduction_max")) == 3);
    CHECK(f.values(col("num_possible_guesses_length")) == 1);
    for (const auto name : {"levenshtein_distance_max", "levenshtein_distance_mean", "levenshtein_distance_last",
                            "glove_distance_max", "glove_distance_mean", "glove_distance_last"}) {
      CHECK(f.values(col(name)) == 0);
    }
    CHECK(f.availability.pairs == 0);
    CHECK(f.per_guess.bottomRows(5).isZero(0));
  }
  SUBCASE("two guesses pad with zeros") {
    const GameRecord g = testsupport::play({w("crane"), w("trace")}, w("trace"));
    const GameFeatures f = extract_game_features(g, ctx);
    CHECK(f.per_guess.bottomRows(4).isZero(0));
    CHECK_FALSE(f.per_guess.topRows(2).isZero(0));
  }
  SUBCASE("missing embedding excludes the game") {
    const EmbeddingTable partial = three_embeddings(false);
    const GameFeatureContext c2{words, partial, ctx.funniness, {}};
    const GameRecord g = testsupport::play({w("crane"), w("crate"), w("trace")}, w("trace"));
    const GameFeatures f = extract_game_features(g, c2);
    CHECK_FALSE(f.trainable());
    CHECK(f.availability.glove_pairs == 1);
    CHECK_FALSE(f.availability.glove_last);
    CHECK(f.values(col("glove_distance_last")) == 0);
    CHECK(f.values(col("glove_distance_max")) == doctest::Approx(-1));
  }
  SUBCASE("missing funniness excludes the game") {
    const GameFeatureContext c3{words, emb, fun_table({{"crane", 50}}), {}};
    const GameRecord g = testsupport::play({w("crane"), w("crate"), w("trace")}, w("trace"));
    const GameFeatures f = extract_game_features(g, c3);
    CHECK_FALSE(f.trainable());
    CHECK(f.values(col("intrinsic_humor_of_words_max")) == 50);
    CHECK(f.values(col("intrinsic_humor_of_words_last")) == 0);
  }
  SUBCASE("feedback-only games are refused") {
    GameRecord g;
    g.feedbacks = {Feedback::all_green()};
    g.solved = true;
    CHECK_THROWS_AS(extract_game_features(g, ctx), InputError);
  }
}

TEST_CASE("balanced_subsample") {
  std::vector<int> labels(8000, 0);
  labels.resize(10667, 1);
  const auto s = balanced_subsample(labels, 5);
  CHECK(s.size() == 2 * 2667);
  std::size_t ones = 0;
  for (const auto i : s) ones += static_cast<std::size_t>(labels[i]);
  CHECK(ones == 2667);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
  CHECK(balanced_subsample(labels, 5) == s);
  CHECK(balanced_subsample(labels, 6) != s);

  const std::vector<int> even{0, 1, 1, 0, 1, 0};
  CHECK(balanced_subsample(even, 1) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK_THROWS_AS(balanced_subsample(std::vector<int>{1, 1, 1}, 1), InputError);
  CHECK_THROWS_AS(balanced_subsample(std::vector<int>{0, 2}, 1), InputError);
}

TEST_CASE("split_dataset") {
  const auto s = split_dataset(10, {0.6, 0.2, 0.2}, 3);
  CHECK(s.train.size() == 6);
  CHECK(s.validation.size() == 2);
  CHECK(s.test.size() == 2);
  for (const std::size_t n : {5u, 7u, 101u, 1000u}) {
    const auto p = split_dataset(n, {0.6, 0.2, 0.2}, n);
    std::vector<std::size_t> all;
    all.insert(all.end(), p.train.begin(), p.train.end());
    all.insert(all.end(), p.validation.begin(), p.validation.end());
    all.insert(all.end(), p.test.begin(), p.test.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(n);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(all == expect);
    CHECK(std::abs(static_cast<double>(p.train.size()) - 0.6 * static_cast<double>(n)) <= 1);
    CHECK(std::abs(static_cast<double>(p.validation.size()) - 0.2 * static_cast<double>(n)) <= 1);
    CHECK(std::abs(static_cast<double>(p.test.size()) - 0.2 * static_cast<double>(n)) <= 1);
  }
  CHECK(split_dataset(100, {0.6, 0.2, 0.2}, 8).train == split_dataset(100, {0.6, 0.2, 0.2}, 8).train);
  CHECK_THROWS_AS(split_dataset(4), InputError);
  CHECK_THROWS_AS(split_dataset(10, {0.5, 0.2, 0.2}), InputError);
  CHECK_THROWS_AS(split_dataset(10, {0.8, 0.2, 0.0}), InputError);
}

TEST_CASE("evaluate") {
  VectorXd half = VectorXd::Constant(4, 0.5);
  VectorXd y(4);
  y << 1, 0, 1, 0;
  const auto r = evaluate(half, y, "test");
  CHECK(r.accuracy == 0.5);
  CHECK(r.base_rate == 0.5);
  CHECK(r.tn == 2);
  CHECK(r.fn == 2);
  VectorXd p(4);
  p << 0.9, 0.2, 0.4, 0.7;
  const auto q = evaluate(p, y);
  CHECK(q.tp == 1);
  CHECK(q.fp == 1);
  CHECK(q.tn == 1);
  CHECK(q.fn == 1);
  CHECK_THROWS_AS(evaluate(VectorXd(), VectorXd()), InputError);
}

TEST_CASE("marginal_effect") {
  Normalizer<double> norm;
  norm.names = {"x"};
  norm.mean = VectorXd::Zero(1);
  norm.sd = VectorXd::Ones(1);
  LogisticModel<double> m;
  m.feature_names = {"x"};
  m.coefficients = VectorXd::Constant(1, 0.16);
  const MatrixXd x0 = MatrixXd::Zero(1, 1);
  const double e = marginal_effect(m, norm, x0, 0);
  CHECK(std::abs(e - (1 / (1 + std::exp(-0.16)) - 0.5)) < 1e-12);
  CHECK(e == doctest::Approx(0.040).epsilon(0.01));
  m.coefficients(0) = 0.153;
  CHECK(marginal_effect(m, norm, x0, 0) == doctest::Approx(0.038).epsilon(0.01));
  m.coefficients(0) = 0;
  Rng rng(3);
  MatrixXd xr(50, 1);
  for (Eigen::Index i = 0; i < 50; ++i) xr(i, 0) = rng.normal();
  CHECK(marginal_effect(m, norm, xr, 0) == 0.0);
  CHECK_THROWS_AS(marginal_effect(m, norm, MatrixXd(0, 1), 0), InputError);
}

TEST_CASE("aux length regression") {
  Rng rng(4);
  MatrixXd x(200, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const VectorXd y = 2 * x.col(0) - x.col(2) + VectorXd::Constant(200, 3.0);
  const auto exact = fit_aux_length_regression(x, y, {"a", "b", "c"});
  CHECK(std::abs(exact.r2 - 1) < 1e-9);
  CHECK(exact.intercept == doctest::Approx(3));

  MatrixXd self(200, 2);
  self.col(0) = x.col(1);
  self.col(1) = y;
  CHECK(std::abs(fit_aux_length_regression(self, y, {"b", "length"}).r2 - 1) < 1e-9);

  MatrixXd dup(200, 3);
  dup << x.col(0), x.col(0), x.col(1);
  const auto d = fit_aux_length_regression(dup, y, {"a", "a_copy", "b"});
  CHECK(d.rank == 2);
  CHECK(d.dropped.size() == 1);

  MatrixXd noise(10000, 12);
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = rng.normal();
  VectorXd yn(10000);
  for (Eigen::Index i = 0; i < yn.size(); ++i) yn(i) = rng.normal();
  std::vector<std::string> names;
  for (int i = 0; i < 12; ++i) names.push_back("f" + std::to_string(i));
  CHECK(fit_aux_length_regression(noise, yn, names).r2 < 0.05);
  CHECK_THROWS_AS(fit_aux_length_regression(x, VectorXd::Ones(200), {"a", "b", "c"}), NumericError);
}

TEST_CASE("features csv") {
  const WordList words({w("crane"), w("crate"), w("trace")});
  const EmbeddingTable emb = three_embeddings();
  const GameFeatureContext ctx{words, emb, fun_table({{"crane", 50.25}, {"crate", 60}, {"trace", 70.125}}), {}};
  std::vector<FeatureRow> rows;
  rows.push_back({"a", 1, extract_game_features(testsupport::play({w("crane"), w("crate"), w("trace")}, w("trace")), ctx)});
  rows.push_back({"b", 0, extract_game_features(testsupport::play({w("crate")}, w("crate")), ctx)});

  for (const bool per_guess : {false, true}) {
    CHECK(feature_csv_header(per_guess).size() == (per_guess ? 38u : 20u));
    std::ostringstream out;
    write_feature_csv(out, rows, per_guess);
    const FeatureTable t = parse_feature_csv(out.str());
    REQUIRE(t.size() == 2);
    CHECK(t.ids == std::vector<std::string>{"a", "b"});
    CHECK(t.labels == std::vector<int>{1, 0});
    const auto v = feature_row_values(rows[0].features, per_guess);
    for (std::size_t c = 0; c < v.size(); ++c) CHECK(t.values(0, static_cast<Eigen::Index>(c)) == v[c]);
    CHECK(t.has_column("f1_fun") == per_guess);
  }

  std::ostringstream out;
  write_feature_csv(out, rows, false);
  std::string text = out.str();
  const std::string renamed = std::string(text).replace(text.find("glove_distance_max"), 18, "glove_dist_max");
  CHECK_THROWS_WITH_AS(parse_feature_csv(renamed),
                       doctest::Contains("missing columns: glove_distance_max; unexpected columns: glove_dist_max"),
                       InputError);
  const std::string dup = text + text.substr(text.find('\n') + 1, text.find('\n', text.find('\n') + 1) - text.find('\n'));
  CHECK_THROWS_WITH_AS(parse_feature_csv(dup), doctest::Contains("duplicate"), ParseError);
  const std::string bad_label = std::string(text).replace(text.find("\na,1,") + 3, 1, "7");
  CHECK_THROWS_AS(parse_feature_csv(bad_label), ParseError);
}

TEST_CASE("train_amusement") {
  const FeatureTable t = synthetic_table(3000, 5);
  AmusementTrainOptions o;
  o.l2_grid = {0.0, 1.0, 10.0};
  const auto a = train_amusement(t, o);
  const AmusementModel& m = a.model;

  std::size_t ones = 0;
  for (const auto i : a.sample) ones += static_cast<std::size_t>(t.labels[i]);
  CHECK(ones * 2 == a.sample.size());
  CHECK(m.n_train + m.n_validation + m.n_test == m.n_sample);
  CHECK(m.l2_validation_accuracy.size() == 3);
  REQUIRE(a.inference);
  CHECK(a.inference->rows.size() == 14);
  CHECK(a.test.accuracy > 0.55);
  CHECK(a.marginal_effects.size() == 13);
  REQUIRE(a.aux);

  const Eigen::Index last = col("levenshtein_distance_last");
  CHECK(a.inference->rows[static_cast<std::size_t>(last + 1)].p < 1e-3);
  for (Eigen::Index k = 0; k < 14; ++k) {
    const auto& r = a.inference->rows[static_cast<std::size_t>(k)];
    CHECK(r.std_error > 0);
    CHECK(r.z == doctest::Approx(r.estimate / r.std_error));
  }

  SUBCASE("deterministic") {
    CHECK(amusement_model_to_json(train_amusement(t, o).model) == amusement_model_to_json(m));
  }
  SUBCASE("json round-trip") {
    const AmusementModel back = amusement_model_from_json(amusement_model_to_json(m));
    CHECK(amusement_model_to_json(back) == amusement_model_to_json(m));
    const MatrixXd x = t.select(m.feature_names);
    CHECK((back.predict_proba(x) - m.predict_proba(x)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("compare") {
    const auto self = compare_models(m, m);
    CHECK(self.statistic == 0);
    CHECK(self.p == 1);
    AmusementTrainOptions on = o;
    on.features = {"num_possible_guesses_length"};
    const auto nested = train_amusement(t, on);
    const auto r = compare_models(m, nested.model);
    CHECK(r.dof == 12);
    CHECK(r.p < 0.01);
    CHECK_THROWS_AS(compare_models(nested.model, m), InputError);
    AmusementTrainOptions other = on;
    other.split_seed = 99;
    CHECK_THROWS_AS(compare_models(m, train_amusement(t, other).model), InputError);
  }
  SUBCASE("mlp trainer") {
    AmusementTrainOptions om = o;
    om.trainer = Trainer::mlp;
    om.mlp.epochs = 30;
    const auto b = train_amusement(t, om);
    REQUIRE(b.model.mlp);
    CHECK_FALSE(b.inference);
    const AmusementModel back = amusement_model_from_json(amusement_model_to_json(b.model));
    const MatrixXd x = t.select(b.model.feature_names);
    CHECK((back.predict_proba(x) - b.model.predict_proba(x)).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(compare_models(b.model, m), InputError);
  }
  SUBCASE("constant feature on the training split") {
    FeatureTable flat = t;
    flat.values.col(col("glove_distance_max")).setConstant(1.0);
    CHECK_THROWS_WITH_AS(train_amusement(flat, o), doctest::Contains("glove_distance_max"), NumericError);
  }
}
