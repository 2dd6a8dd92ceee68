#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "support.hpp"
#include "wordfun/csv.hpp"
#include "wordfun/funny.hpp"

using namespace wordfun;
using testsupport::TempDir;

namespace {

void add(EmbeddingTable& t, std::string_view w, std::vector<float> v) { t.add(w, v); }

Eigen::VectorXd vec(const EmbeddingTable& t, std::string_view w) { return t.find(w)->cast<double>(); }

// Cosine ranking written out directly: sort (−cos, word) pairs.
std::vector<std::string> brute_top_k(const EmbeddingTable& t, const Eigen::VectorXd& center,
                                     const std::vector<std::string>& vocab, std::size_t k) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& w : vocab) {
    const Eigen::VectorXd v = vec(t, w);
    scored.emplace_back(-v.dot(center) / (v.norm() * center.norm()), w);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
  return out;
}

struct Resources {
  EmbeddingTable emb{2};
  PronunciationTable pron;
  FrequencyTable freq;
  SymbolProbabilityTable letters;
  SymbolProbabilityTable phonemes;
  AffectNorms affect;

  FunnyResources view() const { return {emb, pron, freq, letters, phonemes, affect}; }
};

CdvSet axis_cdvs() {
  CdvSet s;
  for (const auto c : kSemanticCategories) s.semantic.push_back(Cdv{std::string(c), Eigen::Vector2d(1, 0), {}});
  s.consle = Cdv{"consle", Eigen::Vector2d(0, 1), {}};
  return s;
}

}  // namespace

TEST_CASE("seed files") {
  CHECK(normalize_category("Body function") == "bodyfunction");
  CHECK(normalize_category("body_function") == "bodyfunction");
  std::string text = "category,word\n";
  for (const auto c : kSemanticCategories) text += std::string(c) + ",x" + std::string(c) + "\n";
  text += "Other,zzz\n";
  const auto seeds = parse_seeds(text);
  REQUIRE(seeds.size() == 6);
  CHECK(seeds[4].category == "bodyfunction");
  CHECK(seeds[4].words == std::vector<std::string>{"xbodyfunction"});
  CHECK_THROWS_WITH_AS(parse_seeds("category,word\nsex,a\n"), doctest::Contains("party"), InputError);
}

TEST_CASE("build_cdv") {
  EmbeddingTable t(2);
  add(t, "s1", {1, 0.1f});
  add(t, "s2", {1, -0.3f});
  add(t, "far", {-1, 0});
  add(t, "near", {1, 0});
  const CategorySeeds seeds{"sex", {"s1", "s2"}};

  SUBCASE("vocab equal to the seeds gives the seed mean") {
    const std::vector<std::string> vocab{"s1", "s2"};
    const Cdv c = build_cdv(seeds, t, vocab, 2);
    CHECK((c.vector - (vec(t, "s1") + vec(t, "s2")) / 2).norm() < 1e-12);
  }
  SUBCASE("k = 1 picks the nearest word") {
    const std::vector<std::string> vocab{"far", "near", "s1"};
    const Cdv c = build_cdv(seeds, t, vocab, 1);
    CHECK((c.vector - vec(t, "near")).norm() < 1e-12);
  }
  SUBCASE("errors") {
    const std::vector<std::string> vocab{"far", "near"};
    CHECK_THROWS_AS(build_cdv(seeds, t, vocab, 3), InputError);
    CHECK_THROWS_AS(build_cdv(CategorySeeds{"sex", {"nope", "gone"}}, t, vocab, 1), InputError);
    CHECK_THROWS_AS(build_cdv(CategorySeeds{"sex", {"s1", "nope", "gone"}}, t, vocab, 1), InputError);
    const Cdv half = build_cdv(CategorySeeds{"sex", {"s1", "nope"}}, t, vocab, 1);
    CHECK(half.missing_seeds == std::vector<std::string>{"nope"});
  }
}

TEST_CASE("build_cdv top-k matches a brute-force ranking on an angular grid") {
  EmbeddingTable t(2);
  add(t, "seeda", {1, 0});
  add(t, "seedb", {2, 0});
  std::vector<std::string> vocab;
  Rng rng(17);
  for (int i = 0; i < 72; ++i) {
    const double angle = i * 5.0 * std::numbers::pi / 180.0;
    const double r = 0.5 + rng.uniform();
    const std::string w = "g" + std::to_string(i);
    add(t, w, {static_cast<float>(r * std::cos(angle)), static_cast<float>(r * std::sin(angle))});
    vocab.push_back(w);
  }
  for (const std::size_t k : {1u, 5u, 12u, 40u}) {
    const Cdv c = build_cdv(CategorySeeds{"animals", {"seeda", "seedb"}}, t, vocab, k);
    Eigen::VectorXd expect = Eigen::VectorXd::Zero(2);
    for (const auto& w : brute_top_k(t, Eigen::Vector2d(1, 0), vocab, k)) expect += vec(t, w);
    expect /= static_cast<double>(k);
    CHECK((c.vector - expect).norm() < 1e-9);
  }
}

TEST_CASE("build_consle_cdv") {
  EmbeddingTable all(3);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
  for (std::size_t i = 0; i < kConsLeWords.size(); ++i) {
    const std::vector<float> v{static_cast<float>(i), 1, static_cast<float>(i * i)};
    add(all, kConsLeWords[i], v);
    sum += vec(all, kConsLeWords[i]);
  }
  CHECK((build_consle_cdv(all).vector - sum / 8).norm() < 1e-12);

  EmbeddingTable same(2);
  for (const auto w : kConsLeWords) add(same, w, {0.5f, -2});
  CHECK((build_consle_cdv(same).vector - Eigen::Vector2d(0.5, -2)).norm() < 1e-12);

  EmbeddingTable four(2);
  for (std::size_t i = 0; i < 4; ++i) add(four, kConsLeWords[i], {1, static_cast<float>(i)});
  const Cdv c = build_consle_cdv(four);
  CHECK(c.missing_seeds.size() == 4);
  CHECK((c.vector - Eigen::Vector2d(1, 1.5)).norm() < 1e-12);

  EmbeddingTable three(2);
  for (std::size_t i = 0; i < 3; ++i) add(three, kConsLeWords[i], {1, 0});
  CHECK_THROWS_AS(build_consle_cdv(three), InputError);
}

TEST_CASE("word_features") {
  Resources r;
  add(r.emb, "ab", {1, 0});
  add(r.emb, "monkey", {0, 1});
  add(r.emb, "nopron", {1, 1});
  r.pron.entries.insert("ab", {"AE", "B"});
  r.pron.entries.insert("monkey", {"M", "AH", "NG", "K", "IY"});
  r.pron.entries.insert("flu", {"F", "L", "UW"});
  r.freq.counts.insert("ab", 10);
  r.freq.counts.insert("monkey", 30);
  r.freq.counts.insert("nopron", 60);
  r.freq.total = 100;
  r.letters.entries.insert("a", 0.25);
  r.letters.entries.insert("b", 0.0625);
  for (const char c : std::string("monkeyprfl")) r.letters.entries.insert(std::string(1, c), 0.04);
  r.phonemes.kind = SymbolKind::phoneme;
  for (const auto p : arpabet_inventory()) r.phonemes.entries.insert(std::string(p), 1.0 / 39);
  r.affect.entries.insert("ab", AffectRating{2, 3, 4, 5});
  r.affect.entries.insert("monkey", AffectRating{6, 5, 4, 3});
  r.affect.entries.insert("nopron", AffectRating{1, 1, 1, 1});
  const CdvSet cdvs = axis_cdvs();

  const auto ab = word_features("ab", r.view(), cdvs);
  REQUIRE(ab);
  CHECK((*ab)(8) == doctest::Approx(-2.0794).epsilon(1e-4));
  CHECK((*ab)(8) == doctest::Approx((std::log(0.25) + std::log(0.0625)) / 2));
  CHECK((*ab)(0) == doctest::Approx(0.0));
  CHECK((*ab)(12) == doctest::Approx(1.0));
  CHECK((*ab)(6) == 0.0);
  CHECK((*ab)(7) == doctest::Approx(std::log(0.1)));
  CHECK((*ab)(9) == doctest::Approx(std::log(1.0 / 39)));
  CHECK((*ab)(10) == doctest::Approx((*ab)(8) / (*ab)(9)));
  CHECK((*ab)(13) == 6);
  CHECK((*ab)(14) == 24);
  CHECK((*ab)(15) == 12);
  CHECK((*ab)(18) == 5);

  const auto monkey = word_features("Monkey", r.view(), cdvs);
  REQUIRE(monkey);
  CHECK((*monkey)(6) == 1.0);
  CHECK((*monkey)(11) == 0.0);
  CHECK((*monkey)(0) == doctest::Approx(1.0));
  CHECK((*monkey)(12) == doctest::Approx(0.0));

  WordFeatureOptions lom;
  lom.convention = ProbabilityConvention::log_of_mean;
  const auto ab2 = word_features("ab", r.view(), cdvs, lom);
  CHECK((*ab2)(8) == doctest::Approx(std::log((0.25 + 0.0625) / 2)));

  const auto missing = word_features("nopron", r.view(), cdvs);
  CHECK_FALSE(missing);
  CHECK(missing.missing == std::vector<std::string>{"pronunciation"});
  const auto flu = word_features("flu", r.view(), cdvs);
  CHECK(flu.missing == std::vector<std::string>{"embedding", "frequency", "affect_norms", "letter_probability"});
}

TEST_CASE("log_average_probability") {
  const std::vector<double> p{0.5, 0.125};
  CHECK(log_average_probability(p, ProbabilityConvention::mean_of_logs) == doctest::Approx(std::log(0.25)));
  CHECK(log_average_probability(p, ProbabilityConvention::log_of_mean) == doctest::Approx(std::log(0.3125)));
  CHECK_THROWS_AS(log_average_probability({}, ProbabilityConvention::mean_of_logs), InputError);
}

namespace {

struct LoadedLexicon {
  EmbeddingTable emb;
  PronunciationTable pron;
  FrequencyTable freq;
  SymbolProbabilityTable letters;
  SymbolProbabilityTable phonemes;
  AffectNorms affect;
  HumorNorms humor;
  std::vector<CategorySeeds> seeds;

  explicit LoadedLexicon(const testsupport::SyntheticLexicon& lex)
      : emb(load_embeddings(lex.embeddings)),
        pron(load_pronunciations(lex.pronunciations)),
        freq(load_frequencies(lex.frequencies)),
        letters(load_symbol_probabilities(lex.letter_probs, SymbolKind::letter)),
        phonemes(load_symbol_probabilities(lex.phoneme_probs, SymbolKind::phoneme)),
        affect(load_affect_norms(lex.affect_norms)),
        humor(load_humor_norms(lex.humor_norms)),
        seeds(load_seeds(lex.seeds)) {}

  FunnyResources view() const { return {emb, pron, freq, letters, phonemes, affect}; }
};

FunninessTrainOptions small_options() {
  FunninessTrainOptions o;
  o.cdv_k = 20;
  o.cv.folds = 5;
  o.cv.seed = 3;
  return o;
}

}  // namespace

TEST_CASE("fit_funniness on a synthetic lexicon") {
  TempDir dir;
  const auto lex = testsupport::make_synthetic_lexicon(dir.path(), 600, 21);
  const LoadedLexicon l(lex);
  const auto fit = fit_funniness(l.humor, l.view(), l.seeds, small_options());
  const FunninessModel& m = fit.model;

  CHECK(m.retained + m.dropped == l.humor.ratings.size());
  CHECK(m.retained == fit.words.size());
  CHECK(m.ridge.report.fold_of.size() == m.retained);
  CHECK(m.ridge.report.fold_rmse.size() == 5);
  CHECK(std::isfinite(m.ridge.report.rmse));
  CHECK(m.ridge.report.r2 > 0.2);

  for (Eigen::Index i = 0; i < fit.features.rows(); ++i) {
    for (const Eigen::Index c : {0, 1, 2, 3, 4, 5, 12}) {
      CHECK(fit.features(i, c) >= -1e-12);
      CHECK(fit.features(i, c) <= 2 + 1e-12);
    }
    CHECK((fit.features(i, 6) == 0.0 || fit.features(i, 6) == 1.0));
    CHECK((fit.features(i, 11) == 0.0 || fit.features(i, 11) == 1.0));
  }

  SUBCASE("same seed, same model") {
    const auto again = fit_funniness(l.humor, l.view(), l.seeds, small_options());
    CHECK(funniness_model_to_json(again.model) == funniness_model_to_json(m));
  }
  SUBCASE("json round-trip keeps predictions") {
    const FunninessModel back = funniness_model_from_json(funniness_model_to_json(m));
    CHECK(funniness_model_to_json(back) == funniness_model_to_json(m));
    for (std::size_t i = 0; i < fit.words.size(); i += 37) {
      CHECK(*predict_funniness(back, fit.words[i], l.view()) == *predict_funniness(m, fit.words[i], l.view()));
    }
    CHECK_THROWS_AS(funniness_model_from_json("{\"format\":\"other\"}"), InputError);
  }
  SUBCASE("predictions") {
    const auto p = predict_funniness(m, fit.words[0], l.view());
    REQUIRE(p);
    CHECK(std::isfinite(*p));
    CHECK(*p > 0);
    CHECK(*p < 150);
    const auto gone = predict_funniness(m, "qqqqqqqqq", l.view());
    CHECK_FALSE(gone);
    CHECK(gone.missing.front() == "embedding");

    FunninessModel flat = m;
    flat.ridge.weights.setZero();
    flat.ridge.intercept = 42.5;
    CHECK(*predict_funniness(flat, fit.words[3], l.view()) == 42.5);
  }
  SUBCASE("plot data round-trips") {
    std::ostringstream out;
    const std::size_t rows = export_fit_plot_data(m, l.humor, l.view(), out);
    CHECK(rows == m.retained);
    const auto table = csv::parse(out.str());
    REQUIRE(table.rows.size() == rows);
    for (std::size_t i = 0; i < rows; i += 11) {
      const auto& row = table.rows[i].fields;
      CHECK(*parse_double(row[2]) == *predict_funniness(m, row[0], l.view()));
      CHECK(*parse_double(row[1]) == *l.humor.ratings.find(row[0]));
    }
    HumorNorms empty;
    std::ostringstream header_only;
    CHECK(export_fit_plot_data(m, empty, l.view(), header_only) == 0);
    CHECK(header_only.str() == "word,actual,predicted\n");
  }
  SUBCASE("a word without features does not change the fit") {
    HumorNorms more = l.humor;
    more.ratings.insert("zzzznotaword", 50);
    const auto other = fit_funniness(more, l.view(), m.cdvs, small_options());
    CHECK(other.model.dropped == m.dropped + 1);
    CHECK((other.model.ridge.weights - m.ridge.weights).norm() == 0.0);
  }
  SUBCASE("too few words") {
    FunninessTrainOptions o = small_options();
    o.min_words = 100000;
    CHECK_THROWS_AS(fit_funniness(l.humor, l.view(), m.cdvs, o), InputError);
  }
}
