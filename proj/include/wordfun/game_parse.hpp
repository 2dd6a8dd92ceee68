#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wordfun/lexres.hpp"
#include "wordfun/wordle.hpp"

namespace wordfun {

// ---------------------------------------------------------------------------
// Share text: "Wordle 902 3/6" followed by rows of colored squares, each row
// optionally followed by the guessed word.

enum class GraySymbol { dark, light };  // ⬛ or ⬜

struct SharePost {
  std::string game_id;
  std::string puzzle_number;
  std::string score_text;  // "3/6" or "X/6"
  bool hard_mode = false;
  bool solved = false;
  std::vector<Feedback> grid;
  std::optional<std::vector<Word>> guess_words;
  GraySymbol gray = GraySymbol::dark;
  std::string raw_text;

  GameRecord to_game() const;
};

SharePost parse_share_text(std::string_view text, std::string game_id = {});

// Grid body as colored squares, one row per line, no trailing newline.
std::string serialize_grid(const SharePost& post);

// Splits a document into share posts; each "Wordle <n> <k>/6" header opens a new post.
// Posts get ids "<id_prefix><index>" (index from 1).
struct ShareParseResult {
  std::vector<SharePost> posts;
  std::vector<std::string> errors;  // one message per rejected block
};
ShareParseResult parse_share_document(std::string_view text, std::string_view id_prefix = "post-");

// ---------------------------------------------------------------------------
// Dataset files

struct GameEntry {
  std::string game_id;
  std::string comment_id;
  GameRecord game;
};

struct SkippedGame {
  std::size_t line = 0;
  std::string game_id;
  std::string reason;
};

struct GameLoadResult {
  std::vector<GameEntry> games;
  std::vector<SkippedGame> skipped;
};

// JSON lines: {"game_id", "guesses"?, "feedback", "solved", "comment_id", "answer"?}.
// Malformed records are skipped and listed unless strict is set, in which case the
// first one throws. Duplicate game ids always throw.
GameLoadResult parse_games_jsonl(std::string_view text, std::string_view source = "<memory>", bool strict = false);
GameLoadResult load_games(const std::filesystem::path& path, bool strict = false);

std::string game_to_json_line(const GameEntry& entry);

struct LabelTable {
  Lexicon<int> labels;  // comment_id -> {0,1}
};

// CSV "comment_id,label".
LabelTable parse_labels(std::string_view text, std::string_view source = "<memory>");
LabelTable load_labels(const std::filesystem::path& path);

struct LabeledGame {
  GameEntry entry;
  int label = 0;
};

struct JoinResult {
  std::vector<LabeledGame> games;  // sorted by game_id
  std::size_t unlabeled_games = 0;
  std::size_t orphan_labels = 0;
};

JoinResult join(const std::vector<GameEntry>& games, const LabelTable& labels);

// ---------------------------------------------------------------------------
// Inter-rater agreement

using BinaryLabels = std::vector<std::optional<int>>;

struct AnnotationTable {
  std::vector<std::string> items;
  std::vector<std::string> raters;
  std::vector<std::vector<std::optional<int>>> ratings;  // [rater][item], values 1..5
  std::optional<std::string> machine_name;
  BinaryLabels machine;  // [item], values 0/1; empty when absent
};

// CSV "item_id,rater1,...,raterK[,machine]"; blank cells are missing.
AnnotationTable parse_annotations(std::string_view text, std::string_view source = "<memory>");
AnnotationTable load_annotations(const std::filesystem::path& path);

// 1 iff rating > threshold; missing stays missing.
std::vector<BinaryLabels> threshold_ratings(const AnnotationTable& table, int threshold = 2);

// Pairwise-complete Cohen's kappa. Identical constant vectors give 1.
double cohens_kappa(const BinaryLabels& a, const BinaryLabels& b);
double cohens_kappa(const std::vector<int>& a, const std::vector<int>& b);

struct KappaMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
};

// Raters (thresholded) plus the machine column when present.
KappaMatrix kappa_matrix(const AnnotationTable& table, int threshold = 2);

}  // namespace wordfun
