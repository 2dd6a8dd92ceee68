#pragma once

// Intrinsic word funniness: category-defining vectors, the 19 lexical
// features, and the ridge model fitted to humor norms.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wordfun/common.hpp"
#include "wordfun/lexres.hpp"
#include "wordfun/ridge.hpp"

namespace wordfun {

inline constexpr std::array<std::string_view, 6> kSemanticCategories = {"sex",       "party",        "insult",
                                                                        "profanity", "bodyfunction", "animals"};

// Consonant + "le" words whose mean embedding is the seventh CDV.
inline constexpr std::array<std::string_view, 8> kConsLeWords = {"gaggle", "jiggle", "tinkle", "waddle",
                                                                 "wiggle", "wriggle", "gobble", "nibble"};

struct CategorySeeds {
  std::string category;
  std::vector<std::string> words;
};

// "Body function", "body_function" -> "bodyfunction".
std::string normalize_category(std::string_view name);

// CSV "category,word". Returns the six semantic categories in canonical order;
// a missing category is an error, unknown categories are ignored.
std::vector<CategorySeeds> parse_seeds(std::string_view text, std::string_view source = "<memory>");
std::vector<CategorySeeds> load_seeds(const std::filesystem::path& path);

struct Cdv {
  std::string category;
  Eigen::VectorXd vector;
  std::vector<std::string> missing_seeds;
};

// Mean of the seed embeddings, then the mean embedding of the k search-vocabulary
// words most cosine-similar to it (ties broken lexicographically). At least half
// of the seeds must have embeddings.
Cdv build_cdv(const CategorySeeds& seeds, const EmbeddingTable& embeddings, std::span<const std::string> search_vocab,
              std::size_t k = 100);

// Plain mean of the Cons+"le" embeddings; needs at least 4 of the 8.
Cdv build_consle_cdv(const EmbeddingTable& embeddings);

struct CdvSet {
  std::vector<Cdv> semantic;  // kSemanticCategories order
  Cdv consle;
};

inline constexpr std::size_t kWordFeatureCount = 19;
using WordFeatureVector = Eigen::Matrix<double, kWordFeatureCount, 1>;

const std::array<std::string_view, kWordFeatureCount>& word_feature_names();

enum class ProbabilityConvention {
  mean_of_logs,  // mean of ln p over symbols
  log_of_mean,   // ln of the mean p
};

struct WordFeatureOptions {
  ProbabilityConvention convention = ProbabilityConvention::mean_of_logs;
  std::string u_phoneme = "UW";
};

struct FunnyResources {
  const EmbeddingTable& embeddings;  // the CDV embedding space
  const PronunciationTable& pronunciations;
  const FrequencyTable& frequencies;
  const SymbolProbabilityTable& letters;
  const SymbolProbabilityTable& phonemes;
  const AffectNorms& affect;
};

double log_average_probability(std::span<const double> probabilities, ProbabilityConvention convention);

// Unavailable (with the missing resources named) when the word is absent from any
// required resource.
Outcome<WordFeatureVector> word_features(std::string_view word, const FunnyResources& resources, const CdvSet& cdvs,
                                         const WordFeatureOptions& options = {});

enum class SearchVocabulary {
  humor_words,      // humor-norm words that have embeddings
  embedding_words,  // the whole embedding vocabulary
};

struct FunninessTrainOptions {
  RidgeCvOptions cv;
  WordFeatureOptions features;
  std::size_t cdv_k = 100;
  SearchVocabulary search_vocab = SearchVocabulary::humor_words;
  std::size_t min_words = 100;
};

struct FunninessModel {
  static constexpr int kVersion = 1;

  std::vector<std::string> feature_names;
  RidgeModel<double> ridge;
  CdvSet cdvs;
  WordFeatureOptions options;
  std::size_t cdv_k = 100;
  SearchVocabulary search_vocab = SearchVocabulary::humor_words;
  std::size_t retained = 0;
  std::size_t dropped = 0;
};

struct FunninessTraining {
  FunninessModel model;
  std::vector<std::string> words;  // retained, humor-norm order
  Eigen::MatrixXd features;
  Eigen::VectorXd ratings;
  std::map<std::string, std::size_t> drop_reasons;
};

CdvSet build_cdvs(const std::vector<CategorySeeds>& seeds, const EmbeddingTable& embeddings,
                  std::span<const std::string> search_vocab, std::size_t k);

FunninessTraining fit_funniness(const HumorNorms& humor, const FunnyResources& resources,
                                const std::vector<CategorySeeds>& seeds, const FunninessTrainOptions& options = {});

// Same, with prebuilt CDVs.
FunninessTraining fit_funniness(const HumorNorms& humor, const FunnyResources& resources, CdvSet cdvs,
                                const FunninessTrainOptions& options = {});

double predict_funniness(const FunninessModel& model, const WordFeatureVector& features);
Outcome<double> predict_funniness(const FunninessModel& model, std::string_view word, const FunnyResources& resources);

// CSV "word,actual,predicted", one row per humor-norm word with available features.
std::size_t export_fit_plot_data(const FunninessModel& model, const HumorNorms& humor, const FunnyResources& resources,
                                 std::ostream& out);

std::string funniness_model_to_json(const FunninessModel& model);
FunninessModel funniness_model_from_json(std::string_view text);

}  // namespace wordfun
