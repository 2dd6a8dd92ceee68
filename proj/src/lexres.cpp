#include "wordfun/lexres.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "wordfun/csv.hpp"

namespace wordfun {

namespace {

void sort_unique(std::vector<Word>& words) {
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
}

std::vector<Word> read_words(const std::filesystem::path& path, std::string_view label, LoadStats& stats) {
  const std::string text = read_text_file(path, label);
  std::vector<Word> words;
  std::vector<Word> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto word = Word::try_parse(line);
    if (!word) {
      const std::string why = line.size() != Word::kLength
                                  ? "expected a 5-letter word, got length " + std::to_string(line.size())
                                  : "non-letter character in '" + std::string(line) + "'";
      throw ParseError(path.string(), line_no, why);
    }
    words.push_back(*word);
  }
  if (words.empty()) throw InputError(std::string(label) + ": " + path.string() + " contains no words");
  const std::size_t before = words.size();
  sort_unique(words);
  stats.duplicates += before - words.size();
  stats.accepted += words.size();
  return words;
}

double require_number(const csv::Row& row, std::size_t col, const std::string& source, std::string_view what) {
  if (col >= row.fields.size()) {
    throw ParseError(source, row.line, "missing " + std::string(what) + " field");
  }
  const auto v = parse_double(row.fields[col]);
  if (!v) {
    throw ParseError(source, row.line, "non-numeric " + std::string(what) + " '" + row.fields[col] + "'");
  }
  return *v;
}

std::string field_or_empty(const csv::Row& row, std::size_t col) {
  return col < row.fields.size() ? std::string(trim(row.fields[col])) : std::string();
}

}  // namespace

Word Word::parse(std::string_view text) {
  if (auto w = try_parse(text)) return *w;
  throw InputError("invalid word '" + std::string(text) + "': expected exactly 5 letters a-z");
}

std::optional<Word> Word::try_parse(std::string_view text) noexcept {
  if (text.size() != kLength) return std::nullopt;
  Word w;
  for (std::size_t i = 0; i < kLength; ++i) {
    char c = text[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c < 'a' || c > 'z') return std::nullopt;
    w.letters_[i] = c;
  }
  return w;
}

WordList::WordList(std::vector<Word> answers, std::vector<Word> allowed)
    : answers_(std::move(answers)), allowed_(std::move(allowed)) {
  sort_unique(answers_);
  allowed_.insert(allowed_.end(), answers_.begin(), answers_.end());
  sort_unique(allowed_);
}

bool WordList::is_answer(const Word& w) const { return std::binary_search(answers_.begin(), answers_.end(), w); }

bool WordList::is_allowed(const Word& w) const { return std::binary_search(allowed_.begin(), allowed_.end(), w); }

WordList load_word_list(const std::filesystem::path& answers, const std::optional<std::filesystem::path>& guesses) {
  LoadStats stats;
  std::vector<Word> ans = read_words(answers, "answers", stats);
  std::vector<Word> allowed;
  if (guesses) allowed = read_words(*guesses, "allowed guesses", stats);
  WordList list(std::move(ans), std::move(allowed));
  list.stats = stats;
  return list;
}

// ---------------------------------------------------------------------------
// Embeddings

template <typename Scalar>
BasicEmbeddingTable<Scalar>::BasicEmbeddingTable(std::size_t dimension) : dim_(dimension) {
  if (dimension == 0) throw InputError("embedding dimension must be positive");
}

template <typename Scalar>
bool BasicEmbeddingTable<Scalar>::add(std::string_view word, std::span<const Scalar> values) {
  if (values.size() != dim_) {
    throw InputError("embedding for '" + std::string(word) + "' has dimension " + std::to_string(values.size()) +
                     ", table dimension is " + std::to_string(dim_));
  }
  for (const Scalar v : values) {
    if (!std::isfinite(static_cast<double>(v))) {
      throw InputError("embedding for '" + std::string(word) + "' has a non-finite component");
    }
  }
  if (index_.find(word) != index_.end()) return false;
  index_.emplace(std::string(word), words_.size());
  words_.emplace_back(word);
  data_.insert(data_.end(), values.begin(), values.end());
  return true;
}

template <typename Scalar>
std::optional<typename BasicEmbeddingTable<Scalar>::ConstMap> BasicEmbeddingTable<Scalar>::find(
    std::string_view word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return ConstMap(data_.data() + it->second * dim_, static_cast<Eigen::Index>(dim_));
}

namespace {

template <typename Scalar>
bool parse_real(std::string_view token, Scalar& out) {
  const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  return res.ec == std::errc{} && res.ptr == token.data() + token.size();
}

bool is_unsigned_integer(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

template <typename Scalar>
BasicEmbeddingTable<Scalar> load_embeddings(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
  if (expected_dim && *expected_dim == 0) throw InputError("embeddings: expected dimension must be positive");
  const std::string text = read_text_file(path, "embeddings");
  std::optional<BasicEmbeddingTable<Scalar>> table;
  std::vector<Scalar> values;
  LoadStats stats;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line = std::string_view(text).substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    if (line_no == 1 && tokens.size() == 2 && is_unsigned_integer(tokens[0]) && is_unsigned_integer(tokens[1])) {
      continue;  // word2vec-style "<count> <dim>" header
    }
    if (tokens.size() < 2) throw ParseError(path.string(), line_no, "expected a word followed by components");
    const std::size_t dim = tokens.size() - 1;
    if (!table) {
      if (expected_dim && *expected_dim != dim) {
        throw ParseError(path.string(), line_no,
                         "dimension mismatch: expected " + std::to_string(*expected_dim) + ", got " + std::to_string(dim));
      }
      table.emplace(dim);
    } else if (dim != table->dimension()) {
      throw ParseError(path.string(), line_no,
                       "dimension mismatch: expected " + std::to_string(table->dimension()) + ", got " +
                           std::to_string(dim));
    }
    values.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      if (!parse_real(tokens[i + 1], values[i])) {
        throw ParseError(path.string(), line_no, "non-numeric component '" + std::string(tokens[i + 1]) + "'");
      }
      if (!std::isfinite(static_cast<double>(values[i]))) {
        throw ParseError(path.string(), line_no, "non-finite component '" + std::string(tokens[i + 1]) + "'");
      }
    }
    if (table->add(to_lower(tokens[0]), values)) {
      ++stats.accepted;
    } else {
      ++stats.duplicates;
    }
  }
  if (!table) throw InputError("embeddings: " + path.string() + " contains no vectors");
  table->stats = stats;
  return std::move(*table);
}

template class BasicEmbeddingTable<float>;
template class BasicEmbeddingTable<double>;
template BasicEmbeddingTable<float> load_embeddings<float>(const std::filesystem::path&, std::optional<std::size_t>);
template BasicEmbeddingTable<double> load_embeddings<double>(const std::filesystem::path&, std::optional<std::size_t>);

// ---------------------------------------------------------------------------
// Pronunciations

namespace {

constexpr std::array<std::string_view, 39> kArpabet = {
    "AA", "AE", "AH", "AO", "AW", "AY", "B",  "CH", "D", "DH", "EH", "ER", "EY",
    "F",  "G",  "HH", "IH", "IY", "JH", "K",  "L",  "M", "N",  "NG", "OW", "OY",
    "P",  "R",  "S",  "SH", "T",  "TH", "UH", "UW", "V", "W",  "Y",  "Z",  "ZH"};

}  // namespace

std::span<const std::string_view> arpabet_inventory() { return kArpabet; }

bool is_arpabet_phoneme(std::string_view symbol) {
  return std::find(kArpabet.begin(), kArpabet.end(), symbol) != kArpabet.end();
}

std::string strip_stress(std::string_view symbol) {
  std::string out;
  for (const char c : symbol) {
    if (c < '0' || c > '9') out.push_back(c);
  }
  return out;
}

PronunciationTable load_pronunciations(const std::filesystem::path& path, bool strip_stress_digits) {
  const std::string text = read_text_file(path, "pronunciations");
  PronunciationTable table;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line = std::string_view(text).substr(pos, end - pos);
    pos = end + 1;
    if (line.starts_with(";;;")) continue;
    const auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    const std::string_view head = tokens[0];
    if (head.find('(') != std::string_view::npos) {
      ++table.stats.variants;
      continue;
    }
    if (tokens.size() < 2) {
      ++table.stats.rejected;
      continue;
    }
    std::vector<std::string> phones;
    bool valid = true;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const std::string upper = to_upper(tokens[i]);
      const std::string base = strip_stress(upper);
      if (!is_arpabet_phoneme(base)) {
        valid = false;
        break;
      }
      phones.push_back(strip_stress_digits ? base : upper);
    }
    if (!valid) {
      ++table.stats.rejected;
      continue;
    }
    if (table.entries.insert(to_lower(head), std::move(phones))) {
      ++table.stats.accepted;
    } else {
      ++table.stats.duplicates;
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// CSV tables

FrequencyTable load_frequencies(const std::filesystem::path& path) {
  const csv::Table csv = csv::read_file(path, "frequencies");
  const std::size_t word_col = csv.require_column("word");
  const std::size_t count_col = csv.require_column("count");
  FrequencyTable table;
  for (const auto& row : csv.rows) {
    const std::string word = to_lower(field_or_empty(row, word_col));
    const double count = require_number(row, count_col, csv.source, "count");
    if (word.empty() || !(count > 0) || !std::isfinite(count)) {
      ++table.stats.rejected;
      continue;
    }
    if (table.counts.insert(word, count)) {
      ++table.stats.accepted;
      table.total += count;
    } else {
      ++table.stats.duplicates;
    }
  }
  return table;
}

std::optional<double> FrequencyTable::probability(std::string_view word) const {
  const double* c = counts.find(word);
  if (!c || total <= 0) return std::nullopt;
  return *c / total;
}

SymbolProbabilityTable load_symbol_probabilities(const std::filesystem::path& path, SymbolKind kind) {
  const std::string_view label = kind == SymbolKind::letter ? "letter probabilities" : "phoneme probabilities";
  const csv::Table csv = csv::read_file(path, label);
  const std::size_t sym_col = csv.require_column("symbol");
  const std::size_t p_col = csv.require_column("probability");
  SymbolProbabilityTable table;
  table.kind = kind;
  double sum = 0;
  for (const auto& row : csv.rows) {
    const std::string raw = field_or_empty(row, sym_col);
    const std::string symbol = kind == SymbolKind::letter ? to_lower(raw) : strip_stress(to_upper(raw));
    const double p = require_number(row, p_col, csv.source, "probability");
    if (symbol.empty() || !(p > 0) || p > 1) {
      ++table.stats.rejected;
      continue;
    }
    if (table.entries.insert(symbol, p)) {
      ++table.stats.accepted;
      sum += p;
    } else {
      ++table.stats.duplicates;
    }
  }
  if (sum < 0.99 || sum > 1.01) {
    throw InputError(std::string(label) + ": probabilities in " + path.string() + " sum to " + format_double(sum) +
                     ", outside [0.99, 1.01]");
  }
  return table;
}

std::optional<double> SymbolProbabilityTable::probability(std::string_view symbol) const {
  const double* p = entries.find(symbol);
  return p ? std::optional<double>(*p) : std::nullopt;
}

AffectNorms load_affect_norms(const std::filesystem::path& path) {
  const csv::Table csv = csv::read_file(path, "affect norms");
  const std::size_t word_col = csv.require_column("word");
  const std::size_t v_col = csv.require_column("valence");
  const std::size_t a_col = csv.require_column("arousal");
  const std::size_t d_col = csv.require_column("dominance");
  const std::size_t c_col = csv.require_column("concreteness");
  AffectNorms norms;
  for (const auto& row : csv.rows) {
    const std::string word = to_lower(field_or_empty(row, word_col));
    const AffectRating rating{require_number(row, v_col, csv.source, "valence"),
                              require_number(row, a_col, csv.source, "arousal"),
                              require_number(row, d_col, csv.source, "dominance"),
                              require_number(row, c_col, csv.source, "concreteness")};
    const bool finite = std::isfinite(rating.valence) && std::isfinite(rating.arousal) &&
                        std::isfinite(rating.dominance) && std::isfinite(rating.concreteness);
    if (word.empty() || !finite) {
      ++norms.stats.rejected;
      continue;
    }
    if (norms.entries.insert(word, rating)) {
      ++norms.stats.accepted;
    } else {
      ++norms.stats.duplicates;
    }
  }
  return norms;
}

HumorNorms load_humor_norms(const std::filesystem::path& path) {
  const csv::Table csv = csv::read_file(path, "humor norms");
  const std::size_t word_col = csv.require_column("word");
  const std::size_t rating_col = csv.require_column("rating");
  HumorNorms norms;
  for (const auto& row : csv.rows) {
    const std::string word = to_lower(field_or_empty(row, word_col));
    const double rating = require_number(row, rating_col, csv.source, "rating");
    if (word.empty() || !(rating >= kHumorRatingMin && rating <= kHumorRatingMax)) {
      ++norms.stats.rejected;
      continue;
    }
    if (norms.ratings.insert(word, rating)) {
      ++norms.stats.accepted;
    } else {
      ++norms.stats.duplicates;
    }
  }
  return norms;
}

}  // namespace wordfun
