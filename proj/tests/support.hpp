#pragma once

// Helpers shared by the test binaries: scratch directories, independent
// oracles, and a small synthetic lexical world written to disk.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wordfun/common.hpp"
#include "wordfun/lexres.hpp"
#include "wordfun/wordle.hpp"

namespace testsupport {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "wordfun-test-XXXXXX").string();
    if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

inline std::string read_all(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

inline std::string random_letters(wordfun::Rng& rng, std::size_t n, std::string_view alphabet) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[rng.below(alphabet.size())]);
  return s;
}

// Distinct random 5-letter words.
inline std::vector<wordfun::Word> random_words(wordfun::Rng& rng, std::size_t n,
                                               std::string_view alphabet = "abcdefghijklmnopqrstuvwxyz") {
  std::set<std::string> seen;
  std::vector<wordfun::Word> out;
  while (out.size() < n) {
    std::string w = random_letters(rng, 5, alphabet);
    if (seen.insert(w).second) out.push_back(wordfun::Word::parse(w));
  }
  return out;
}

// Marking written from the rule text: greens first, then yellows left to right
// against a letter multiset of the unmatched answer positions. Returns "GYB" marks.
inline std::string oracle_feedback(const std::string& guess, const std::string& answer) {
  std::string marks(5, 'B');
  std::map<char, int> remaining;
  for (int i = 0; i < 5; ++i) {
    if (guess[i] == answer[i]) {
      marks[i] = 'G';
    } else {
      remaining[answer[i]] += 1;
    }
  }
  for (int i = 0; i < 5; ++i) {
    if (marks[i] == 'G') continue;
    auto it = remaining.find(guess[i]);
    if (it != remaining.end() && it->second > 0) {
      marks[i] = 'Y';
      it->second -= 1;
    }
  }
  return marks;
}

// Plays guesses against an answer, returning the record.
inline wordfun::GameRecord play(const std::vector<wordfun::Word>& guesses, const wordfun::Word& answer) {
  wordfun::GameRecord g;
  for (const auto& w : guesses) {
    g.guesses.push_back(w);
    g.feedbacks.push_back(wordfun::compute_feedback(w, answer));
    if (w == answer) break;
  }
  g.solved = g.guesses.back() == answer;
  g.answer = answer;
  return g;
}

// A self-consistent set of resource files for the funniness pipeline. Words are
// random letter strings; the humor rating is linear in a few word properties.
struct SyntheticLexicon {
  std::vector<std::string> words;
  fs::path embeddings, pronunciations, frequencies, letter_probs, phoneme_probs, affect_norms, humor_norms, seeds;
};

inline std::string phoneme_for(char c) {
  static const std::map<char, std::string> m = {
      {'a', "AE1"}, {'b', "B"},  {'c', "K"},  {'d', "D"},   {'e', "EH0"}, {'f', "F"}, {'g', "G"},
      {'h', "HH"},  {'i', "IH1"}, {'j', "JH"}, {'k', "K"},   {'l', "L"},   {'m', "M"}, {'n', "N"},
      {'o', "AA1"}, {'p', "P"},  {'q', "K"},  {'r', "R"},   {'s', "S"},   {'t', "T"}, {'u', "UW1"},
      {'v', "V"},   {'w', "W"},  {'x', "Z"},  {'y', "Y"},   {'z', "Z"}};
  return m.at(c);
}

inline SyntheticLexicon make_synthetic_lexicon(const fs::path& dir, std::size_t n_words, std::uint64_t seed,
                                               std::size_t dim = 8, std::vector<std::string> extra_words = {}) {
  wordfun::Rng rng(seed);
  SyntheticLexicon lex;
  std::set<std::string> seen;
  for (auto& w : extra_words) {
    if (seen.insert(w).second) lex.words.push_back(w);
  }
  const std::array<std::string_view, 6> cats = {"sex", "party", "insult", "profanity", "bodyfunction", "animals"};
  std::vector<std::string> seed_words;
  for (std::size_t c = 0; c < cats.size(); ++c) {
    for (int k = 0; k < 4; ++k) {
      std::string w = std::string(cats[c].substr(0, 3)) + static_cast<char>('a' + k) + "seed";
      if (seen.insert(w).second) lex.words.push_back(w);
      seed_words.push_back(w);
    }
  }
  for (const char* w : {"gaggle", "jiggle", "tinkle", "waddle", "wiggle", "wriggle", "gobble", "nibble"}) {
    if (seen.insert(w).second) lex.words.push_back(w);
  }
  while (lex.words.size() < n_words) {
    std::string w = random_letters(rng, 3 + rng.below(6), "abcdefghijklmnopqrstuvwxyz");
    if (seen.insert(w).second) lex.words.push_back(w);
  }

  std::ostringstream emb, pron, freq, affect, humor, seeds;
  freq << "word,count\n";
  affect << "word,valence,arousal,dominance,concreteness\n";
  humor << "word,rating\n";
  seeds << "category,word\n";
  for (std::size_t c = 0; c < cats.size(); ++c) {
    for (int k = 0; k < 4; ++k) seeds << cats[c] << "," << seed_words[c * 4 + static_cast<std::size_t>(k)] << "\n";
  }
  pron << ";;; synthetic dictionary\n";
  for (const auto& w : lex.words) {
    emb << w;
    double first = 0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double v = rng.normal();
      if (d == 0) first = v;
      emb << " " << wordfun::format_double(v);
    }
    emb << "\n";
    pron << wordfun::to_upper(w) << " ";
    for (const char ch : w) pron << " " << phoneme_for(ch);
    pron << "\n";
    const double count = 1.0 + static_cast<double>(rng.below(10000));
    freq << w << "," << wordfun::format_double(count) << "\n";
    const double val = 1 + 8 * rng.uniform();
    const double aro = 1 + 8 * rng.uniform();
    const double dom = 1 + 8 * rng.uniform();
    const double con = 1 + 4 * rng.uniform();
    affect << w << "," << wordfun::format_double(val) << "," << wordfun::format_double(aro) << ","
           << wordfun::format_double(dom) << "," << wordfun::format_double(con) << "\n";
    double rating = 55 + 6 * first - 1.5 * std::log(count) + 2.0 * (w.find('k') != std::string::npos) + 1.2 * val +
                    2.5 * rng.normal();
    rating = std::clamp(rating, 28.0, 99.0);
    humor << w << "," << wordfun::format_double(rating) << "\n";
  }

  std::ostringstream letters;
  letters << "symbol,probability\n";
  // Non-uniform so the probability features vary across words.
  for (char c = 'a'; c <= 'z'; ++c) letters << c << "," << wordfun::format_double((c - 'a' + 1) / 351.0) << "\n";
  std::ostringstream phonemes;
  phonemes << "symbol,probability\n";
  const auto inventory = wordfun::arpabet_inventory();
  const double n_ph = static_cast<double>(inventory.size());
  for (std::size_t i = 0; i < inventory.size(); ++i) {
    phonemes << inventory[i] << "," << wordfun::format_double((static_cast<double>(i) + 1) / (n_ph * (n_ph + 1) / 2))
             << "\n";
  }

  lex.embeddings = dir / "embeddings.txt";
  lex.pronunciations = dir / "cmudict.txt";
  lex.frequencies = dir / "frequencies.csv";
  lex.letter_probs = dir / "letters.csv";
  lex.phoneme_probs = dir / "phonemes.csv";
  lex.affect_norms = dir / "affect.csv";
  lex.humor_norms = dir / "humor.csv";
  lex.seeds = dir / "seeds.csv";
  write_text(lex.embeddings, emb.str());
  write_text(lex.pronunciations, pron.str());
  write_text(lex.frequencies, freq.str());
  write_text(lex.letter_probs, letters.str());
  write_text(lex.phoneme_probs, phonemes.str());
  write_text(lex.affect_norms, affect.str());
  write_text(lex.humor_norms, humor.str());
  write_text(lex.seeds, seeds.str());
  return lex;
}

// Lexicon plus a word list, simulated games, labels and a config file that ties
// them together with relative paths.
struct SyntheticCorpus {
  SyntheticLexicon lexicon;
  std::vector<wordfun::Word> answers;
  fs::path answers_path, games, labels, config;
  std::size_t n_games = 0;
};

inline SyntheticCorpus make_synthetic_corpus(const fs::path& dir, std::size_t n_games, std::uint64_t seed,
                                             std::size_t n_answers = 80, std::size_t n_words = 400) {
  wordfun::Rng rng(seed);
  SyntheticCorpus c;
  c.answers = random_words(rng, n_answers);
  std::vector<std::string> extra;
  for (const auto& w : c.answers) extra.push_back(w.str());
  c.lexicon = make_synthetic_lexicon(dir, n_words, seed + 1, 8, extra);

  std::ostringstream answers;
  for (const auto& w : c.answers) answers << w.str() << "\n";
  std::ostringstream games;
  std::ostringstream labels;
  labels << "comment_id,label\n";
  for (std::size_t g = 0; g < n_games; ++g) {
    const wordfun::Word answer = c.answers[rng.below(c.answers.size())];
    std::vector<wordfun::Word> guesses;
    for (int k = 0; k < 6; ++k) {
      guesses.push_back(rng.uniform() < 0.3 ? answer : c.answers[rng.below(c.answers.size())]);
      if (guesses.back() == answer) break;
    }
    const wordfun::GameRecord game = play(guesses, answer);
    const std::string id = "game" + std::to_string(g);
    games << "{\"game_id\":\"" << id << "\",\"comment_id\":\"" << id << "\",\"guesses\":[";
    for (std::size_t i = 0; i < game.guesses.size(); ++i) games << (i ? "," : "") << '"' << game.guesses[i].str() << '"';
    games << "],\"feedback\":[";
    for (std::size_t i = 0; i < game.feedbacks.size(); ++i) games << (i ? "," : "") << '"' << game.feedbacks[i].str() << '"';
    games << "],\"solved\":" << (game.solved ? "true" : "false") << "}\n";
    const double eta = -0.8 + 0.35 * static_cast<double>(game.guesses.size()) - (game.solved ? 0.0 : 1.0);
    labels << id << "," << (rng.uniform() < 1 / (1 + std::exp(-eta)) ? 1 : 0) << "\n";
  }
  c.n_games = n_games;
  c.answers_path = dir / "answers.txt";
  c.games = dir / "games.jsonl";
  c.labels = dir / "labels.csv";
  c.config = dir / "run.conf";
  write_text(c.answers_path, answers.str());
  write_text(c.games, games.str());
  write_text(c.labels, labels.str());
  write_text(c.config,
             "# synthetic run\n"
             "answers = answers.txt\n"
             "glove = embeddings.txt\n"
             "cdv_embeddings = embeddings.txt\n"
             "pronunciations = cmudict.txt\n"
             "frequencies = frequencies.csv\n"
             "letter_probs = letters.csv\n"
             "phoneme_probs = phonemes.csv\n"
             "affect_norms = affect.csv\n"
             "humor_norms = humor.csv\n"
             "seeds = seeds.csv\n"
             "funniness_model = fun/funniness_model.json\n"
             "cdv_k = 20\n"
             "cv_folds = 5\n"
             "cv_seed = 7\n");
  return c;
}

}  // namespace testsupport
