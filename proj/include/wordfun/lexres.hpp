#pragma once

// Loaders for the external lexical resources. Every table is built once by its
// loader and then only read, so sharing across threads needs no locking.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "wordfun/common.hpp"
#include "wordfun/word.hpp"

namespace wordfun {

struct LoadStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;    // rows violating a table invariant
  std::size_t duplicates = 0;  // later rows for an already-present key (first wins)
  std::size_t variants = 0;    // pronunciation variant lines such as "WORD(2)"
};

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

// String-keyed table that keeps insertion order and refuses overwrites.
template <typename T>
class Lexicon {
 public:
  bool insert(std::string key, T value) {
    if (index_.find(key) != index_.end()) return false;
    index_.emplace(key, values_.size());
    keys_.push_back(std::move(key));
    values_.push_back(std::move(value));
    return true;
  }

  const T* find(std::string_view key) const {
    const auto it = index_.find(key);
    return it == index_.end() ? nullptr : &values_[it->second];
  }
  bool contains(std::string_view key) const { return find(key) != nullptr; }

  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }
  const std::vector<std::string>& keys() const noexcept { return keys_; }
  const std::vector<T>& values() const noexcept { return values_; }

  friend bool operator==(const Lexicon& a, const Lexicon& b) {
    return a.keys_ == b.keys_ && a.values_ == b.values_;
  }

 private:
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> index_;
  std::vector<std::string> keys_;
  std::vector<T> values_;
};

class WordList {
 public:
  // Sorts and deduplicates both lists; allowed guesses become answers ∪ allowed.
  WordList(std::vector<Word> answers, std::vector<Word> allowed = {});

  std::span<const Word> answers() const noexcept { return answers_; }
  std::span<const Word> allowed_guesses() const noexcept { return allowed_; }
  bool is_answer(const Word& w) const;
  bool is_allowed(const Word& w) const;

  LoadStats stats;

 private:
  std::vector<Word> answers_;
  std::vector<Word> allowed_;
};

// One word per line; blank lines ignored, duplicates kept once and counted.
// Without a guesses file the allowed-guess list equals the answers.
WordList load_word_list(const std::filesystem::path& answers,
                        const std::optional<std::filesystem::path>& guesses = std::nullopt);

template <typename Scalar>
class BasicEmbeddingTable {
 public:
  using Vector = VectorX<Scalar>;
  using ConstMap = Eigen::Map<const Vector>;

  explicit BasicEmbeddingTable(std::size_t dimension);

  // Returns false (and stores nothing) if the word is already present.
  bool add(std::string_view word, std::span<const Scalar> values);

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return words_.size(); }
  bool contains(std::string_view word) const { return index_.find(word) != index_.end(); }
  std::optional<ConstMap> find(std::string_view word) const;
  const std::vector<std::string>& words() const noexcept { return words_; }

  LoadStats stats;

 private:
  std::size_t dim_;
  std::vector<Scalar> data_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> index_;
};

using EmbeddingTable = BasicEmbeddingTable<float>;

// Text format "word v1 ... vd". A leading "<count> <dim>" line is treated as a header.
template <typename Scalar = float>
BasicEmbeddingTable<Scalar> load_embeddings(const std::filesystem::path& path,
                                            std::optional<std::size_t> expected_dim = std::nullopt);

// The 39 ARPAbet phonemes without stress digits.
std::span<const std::string_view> arpabet_inventory();
bool is_arpabet_phoneme(std::string_view symbol);
std::string strip_stress(std::string_view symbol);

struct PronunciationTable {
  Lexicon<std::vector<std::string>> entries;
  LoadStats stats;
  const std::vector<std::string>* find(std::string_view word) const { return entries.find(word); }
};

// CMU-dictionary text: "WORD  PH1 PH2 ...", ";;;" comments, variants "WORD(2)" skipped.
PronunciationTable load_pronunciations(const std::filesystem::path& path, bool strip_stress_digits = true);

struct FrequencyTable {
  Lexicon<double> counts;
  double total = 0;
  LoadStats stats;
  std::optional<double> probability(std::string_view word) const;
};

FrequencyTable load_frequencies(const std::filesystem::path& path);

enum class SymbolKind { letter, phoneme };

struct SymbolProbabilityTable {
  SymbolKind kind = SymbolKind::letter;
  Lexicon<double> entries;
  LoadStats stats;
  std::optional<double> probability(std::string_view symbol) const;
};

using LetterProbabilityTable = SymbolProbabilityTable;
using PhonemeProbabilityTable = SymbolProbabilityTable;

// CSV "symbol,probability". Letters are lowercased; phonemes uppercased and stress-stripped.
// Probabilities must lie in (0,1] and sum to within [0.99, 1.01].
SymbolProbabilityTable load_symbol_probabilities(const std::filesystem::path& path, SymbolKind kind);

struct AffectRating {
  double valence = 0;
  double arousal = 0;
  double dominance = 0;
  double concreteness = 0;
  friend bool operator==(const AffectRating&, const AffectRating&) = default;
};

struct AffectNorms {
  Lexicon<AffectRating> entries;
  LoadStats stats;
  const AffectRating* find(std::string_view word) const { return entries.find(word); }
};

AffectNorms load_affect_norms(const std::filesystem::path& path);

inline constexpr double kHumorRatingMin = 27.31;
inline constexpr double kHumorRatingMax = 100.0;

struct HumorNorms {
  Lexicon<double> ratings;
  LoadStats stats;
};

// CSV "word,rating"; rows outside [27.31, 100] are rejected and counted.
HumorNorms load_humor_norms(const std::filesystem::path& path);

}  // namespace wordfun
