#include "wordfun/game_parse.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include <json.hpp>

#include "wordfun/csv.hpp"

namespace wordfun {

namespace {

constexpr char32_t kGreenSquare = 0x1F7E9;
constexpr char32_t kYellowSquare = 0x1F7E8;
constexpr char32_t kBlackSquare = 0x2B1B;
constexpr char32_t kWhiteSquare = 0x2B1C;
constexpr char32_t kVariationSelector = 0xFE0F;

// Decodes one code point; returns 0xFFFD on malformed input and always advances.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  const unsigned char b0 = byte(i);
  std::size_t len = 1;
  char32_t cp = b0;
  if (b0 >= 0xF0 && b0 < 0xF8) {
    len = 4;
    cp = b0 & 0x07;
  } else if (b0 >= 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if (b0 >= 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if (b0 >= 0x80) {
    ++i;
    return 0xFFFD;
  }
  if (i + len > s.size()) {
    i = s.size();
    return 0xFFFD;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const unsigned char b = byte(i + k);
    if ((b & 0xC0) != 0x80) {
      i += k;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += len;
  return cp;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

bool is_square(char32_t cp) {
  return cp == kGreenSquare || cp == kYellowSquare || cp == kBlackSquare || cp == kWhiteSquare;
}

struct GridLine {
  std::vector<Mark> marks;
  std::optional<GraySymbol> gray;
  std::string trailing;  // text after the squares
};

// nullopt when the line holds no squares at all.
std::optional<GridLine> scan_grid_line(std::string_view line) {
  GridLine out;
  std::size_t i = 0;
  bool any = false;
  while (i < line.size()) {
    const std::size_t start = i;
    const char32_t cp = next_code_point(line, i);
    if (cp == kVariationSelector) continue;
    if (!is_square(cp)) {
      if (any) {
        out.trailing = std::string(trim(line.substr(start)));
        break;
      }
      if (cp == ' ' || cp == '\t') continue;
      return std::nullopt;
    }
    any = true;
    if (cp == kGreenSquare) {
      out.marks.push_back(Mark::green);
    } else if (cp == kYellowSquare) {
      out.marks.push_back(Mark::yellow);
    } else {
      out.marks.push_back(Mark::gray);
      if (!out.gray) out.gray = cp == kBlackSquare ? GraySymbol::dark : GraySymbol::light;
    }
  }
  if (!any) return std::nullopt;
  return out;
}

const std::regex& header_regex() {
  static const std::regex re(R"(^\s*wordle\s+([0-9][0-9,\.]*)\s+([1-6xX])/6(\*?))", std::regex::icase);
  return re;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

bool is_header_line(std::string_view line) {
  const std::string s(line);
  return std::regex_search(s, header_regex());
}

}  // namespace

GameRecord SharePost::to_game() const {
  GameRecord game;
  game.feedbacks = grid;
  game.solved = solved;
  if (guess_words) {
    game.guesses = *guess_words;
    if (solved && !guess_words->empty()) game.answer = guess_words->back();
  }
  return game;
}

SharePost parse_share_text(std::string_view text, std::string game_id) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  std::smatch m;
  std::string header;
  for (; i < lines.size(); ++i) {
    header = std::string(lines[i]);
    if (std::regex_search(header, m, header_regex())) break;
  }
  if (i == lines.size()) throw InputError("not a Wordle game: no 'Wordle <n> <k>/6' header");

  SharePost post;
  post.game_id = std::move(game_id);
  post.raw_text = std::string(text);
  post.puzzle_number = m[1].str();
  const std::string score = m[2].str();
  post.solved = score != "X" && score != "x";
  post.score_text = (post.solved ? score : std::string("X")) + "/6";
  post.hard_mode = !m[3].str().empty();

  std::vector<Word> words;
  bool saw_any_word = false;
  bool grid_started = false;
  bool saw_gray = false;
  for (++i; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    const auto row = scan_grid_line(line);
    if (!row) {
      if (grid_started) break;
      continue;  // blank or text lines between the header and the grid
    }
    grid_started = true;
    const std::size_t row_index = post.grid.size() + 1;
    if (row->marks.size() != Word::kLength) {
      throw InputError("grid row " + std::to_string(row_index) + " has " + std::to_string(row->marks.size()) +
                       " squares, expected 5");
    }
    std::array<Mark, Word::kLength> marks{};
    std::copy(row->marks.begin(), row->marks.end(), marks.begin());
    post.grid.emplace_back(marks);
    if (row->gray && !saw_gray) {
      post.gray = *row->gray;
      saw_gray = true;
    }
    if (!row->trailing.empty()) {
      const auto tokens = split_whitespace(row->trailing);
      const auto word = Word::try_parse(tokens.front());
      if (!word) {
        throw InputError("grid row " + std::to_string(row_index) + ": '" + std::string(tokens.front()) +
                         "' is not a 5-letter guess word");
      }
      words.push_back(*word);
      saw_any_word = true;
    }
  }
  if (post.grid.empty()) throw InputError("Wordle header without any grid rows");
  if (post.solved) {
    const auto k = static_cast<std::size_t>(std::stoi(score));
    if (k != post.grid.size()) {
      throw InputError("header says " + post.score_text + " but the grid has " + std::to_string(post.grid.size()) +
                       " rows");
    }
  } else if (post.grid.size() != kMaxPlies) {
    throw InputError("header says X/6 but the grid has " + std::to_string(post.grid.size()) + " rows");
  }
  if (saw_any_word) {
    if (words.size() != post.grid.size()) {
      throw InputError("guess words given for " + std::to_string(words.size()) + " of " +
                       std::to_string(post.grid.size()) + " rows");
    }
    post.guess_words = std::move(words);
  }
  post.to_game().validate();
  return post;
}

std::string serialize_grid(const SharePost& post) {
  const std::string green = encode_utf8(kGreenSquare);
  const std::string yellow = encode_utf8(kYellowSquare);
  const std::string gray = encode_utf8(post.gray == GraySymbol::dark ? kBlackSquare : kWhiteSquare);
  std::string out;
  for (std::size_t r = 0; r < post.grid.size(); ++r) {
    if (r) out.push_back('\n');
    for (const Mark m : post.grid[r].marks()) out += m == Mark::green ? green : m == Mark::yellow ? yellow : gray;
    if (post.guess_words) out += " " + to_upper((*post.guess_words)[r].view());
  }
  return out;
}

ShareParseResult parse_share_document(std::string_view text, std::string_view id_prefix) {
  const auto lines = split_lines(text);
  std::vector<std::pair<std::size_t, std::size_t>> blocks;  // [begin, end) line ranges
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_header_line(lines[i])) {
      if (!blocks.empty()) blocks.back().second = i;
      blocks.emplace_back(i, lines.size());
    }
  }
  ShareParseResult result;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::string block;
    for (std::size_t i = blocks[b].first; i < blocks[b].second; ++i) {
      block.append(lines[i]);
      block.push_back('\n');
    }
    const std::string id = std::string(id_prefix) + std::to_string(b + 1);
    try {
      result.posts.push_back(parse_share_text(block, id));
    } catch (const InputError& e) {
      result.errors.push_back(id + ": " + e.what());
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

namespace {

GameEntry game_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("record is not a JSON object");
  GameEntry entry;
  if (!j.contains("game_id") || !j["game_id"].is_string()) throw InputError("missing string field 'game_id'");
  entry.game_id = j["game_id"].get<std::string>();
  if (entry.game_id.empty()) throw InputError("empty 'game_id'");
  entry.comment_id = entry.game_id;
  if (j.contains("comment_id") && !j["comment_id"].is_null()) {
    if (!j["comment_id"].is_string()) throw InputError("'comment_id' must be a string");
    entry.comment_id = j["comment_id"].get<std::string>();
  }
  if (!j.contains("feedback") || !j["feedback"].is_array()) throw InputError("missing array field 'feedback'");
  for (const auto& f : j["feedback"]) {
    if (!f.is_string()) throw InputError("'feedback' entries must be strings");
    entry.game.feedbacks.push_back(Feedback::parse(f.get<std::string>()));
  }
  if (j.contains("guesses") && !j["guesses"].is_null()) {
    if (!j["guesses"].is_array()) throw InputError("'guesses' must be an array");
    for (const auto& g : j["guesses"]) {
      if (!g.is_string()) throw InputError("'guesses' entries must be strings");
      entry.game.guesses.push_back(Word::parse(g.get<std::string>()));
    }
  }
  if (j.contains("solved") && !j["solved"].is_null()) {
    if (!j["solved"].is_boolean()) throw InputError("'solved' must be a boolean");
    entry.game.solved = j["solved"].get<bool>();
  } else {
    entry.game.solved = !entry.game.feedbacks.empty() && entry.game.feedbacks.back().is_all_green();
  }
  if (j.contains("answer") && !j["answer"].is_null()) {
    entry.game.answer = Word::parse(j["answer"].get<std::string>());
  } else if (entry.game.solved && !entry.game.guesses.empty()) {
    entry.game.answer = entry.game.guesses.back();
  }
  entry.game.validate();
  return entry;
}

}  // namespace

GameLoadResult parse_games_jsonl(std::string_view text, std::string_view source, bool strict) {
  GameLoadResult result;
  Lexicon<std::size_t> seen;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    const std::size_t line_no = i + 1;
    nlohmann::json j;
    std::string id;
    try {
      j = nlohmann::json::parse(line);
      if (j.is_object() && j.contains("game_id") && j["game_id"].is_string()) id = j["game_id"].get<std::string>();
      GameEntry entry = game_from_json(j);
      if (!seen.insert(entry.game_id, line_no)) {
        throw ParseError(std::string(source), line_no,
                         "duplicate game_id '" + entry.game_id + "' (first seen on line " +
                             std::to_string(*seen.find(entry.game_id)) + ")");
      }
      result.games.push_back(std::move(entry));
    } catch (const ParseError&) {
      throw;
    } catch (const nlohmann::json::exception& e) {
      if (strict) throw ParseError(std::string(source), line_no, std::string("invalid JSON: ") + e.what());
      result.skipped.push_back({line_no, id, std::string("invalid JSON: ") + e.what()});
    } catch (const InputError& e) {
      if (strict) throw ParseError(std::string(source), line_no, e.what());
      result.skipped.push_back({line_no, id, e.what()});
    }
  }
  return result;
}

GameLoadResult load_games(const std::filesystem::path& path, bool strict) {
  return parse_games_jsonl(read_text_file(path, "games"), path.string(), strict);
}

std::string game_to_json_line(const GameEntry& entry) {
  nlohmann::ordered_json j;
  j["game_id"] = entry.game_id;
  if (entry.game.has_guesses()) {
    std::vector<std::string> guesses;
    for (const auto& g : entry.game.guesses) guesses.push_back(g.str());
    j["guesses"] = guesses;
  }
  std::vector<std::string> fb;
  for (const auto& f : entry.game.feedbacks) fb.push_back(f.str());
  j["feedback"] = fb;
  j["solved"] = entry.game.solved;
  j["comment_id"] = entry.comment_id;
  if (entry.game.answer && !(entry.game.solved && entry.game.has_guesses())) j["answer"] = entry.game.answer->str();
  return j.dump();
}

LabelTable parse_labels(std::string_view text, std::string_view source) {
  const csv::Table csv = csv::parse(text, std::string(source));
  LabelTable table;
  if (csv.header.empty()) return table;
  const std::size_t id_col = csv.require_column("comment_id");
  const std::size_t label_col = csv.require_column("label");
  for (const auto& row : csv.rows) {
    if (id_col >= row.fields.size() || label_col >= row.fields.size()) {
      throw ParseError(csv.source, row.line, "expected comment_id and label");
    }
    const std::string id(trim(row.fields[id_col]));
    const std::string value(trim(row.fields[label_col]));
    if (value != "0" && value != "1") {
      throw ParseError(csv.source, row.line, "label '" + value + "' for '" + id + "' is not 0 or 1");
    }
    if (!table.labels.insert(id, value == "1" ? 1 : 0)) {
      throw ParseError(csv.source, row.line, "duplicate comment_id '" + id + "'");
    }
  }
  return table;
}

LabelTable load_labels(const std::filesystem::path& path) {
  return parse_labels(read_text_file(path, "labels"), path.string());
}

JoinResult join(const std::vector<GameEntry>& games, const LabelTable& labels) {
  JoinResult result;
  Lexicon<char> used;
  for (const auto& entry : games) {
    const int* label = labels.labels.find(entry.comment_id);
    if (!label) {
      ++result.unlabeled_games;
      continue;
    }
    used.insert(entry.comment_id, 1);
    result.games.push_back(LabeledGame{entry, *label});
  }
  for (const auto& id : labels.labels.keys()) {
    if (!used.contains(id)) ++result.orphan_labels;
  }
  std::sort(result.games.begin(), result.games.end(),
            [](const LabeledGame& a, const LabeledGame& b) { return a.entry.game_id < b.entry.game_id; });
  return result;
}

// ---------------------------------------------------------------------------

AnnotationTable parse_annotations(std::string_view text, std::string_view source) {
  const csv::Table csv = csv::parse(text, std::string(source));
  if (csv.header.size() < 2) throw InputError(std::string(source) + ": expected item_id and at least one rater");
  AnnotationTable table;
  std::optional<std::size_t> machine_col;
  for (std::size_t c = 1; c < csv.header.size(); ++c) {
    if (to_lower(csv.header[c]) == "machine") {
      machine_col = c;
      table.machine_name = csv.header[c];
    } else {
      table.raters.push_back(csv.header[c]);
    }
  }
  table.ratings.resize(table.raters.size());
  for (const auto& row : csv.rows) {
    table.items.emplace_back(row.fields.empty() ? "" : std::string(trim(row.fields[0])));
    std::size_t r = 0;
    for (std::size_t c = 1; c < csv.header.size(); ++c) {
      const std::string cell = c < row.fields.size() ? std::string(trim(row.fields[c])) : std::string();
      std::optional<int> value;
      if (!cell.empty()) {
        const auto v = parse_double(cell);
        if (!v || *v != std::floor(*v)) throw ParseError(csv.source, row.line, "non-integer rating '" + cell + "'");
        value = static_cast<int>(*v);
      }
      if (machine_col && c == *machine_col) {
        if (value && *value != 0 && *value != 1) {
          throw ParseError(csv.source, row.line, "machine label '" + cell + "' is not 0 or 1");
        }
        table.machine.push_back(value);
      } else {
        if (value && (*value < 1 || *value > 5)) {
          throw ParseError(csv.source, row.line, "rating '" + cell + "' outside 1-5");
        }
        table.ratings[r++].push_back(value);
      }
    }
  }
  return table;
}

AnnotationTable load_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_text_file(path, "annotations"), path.string());
}

std::vector<BinaryLabels> threshold_ratings(const AnnotationTable& table, int threshold) {
  std::vector<BinaryLabels> out;
  out.reserve(table.ratings.size());
  for (const auto& rater : table.ratings) {
    BinaryLabels labels;
    labels.reserve(rater.size());
    for (const auto& r : rater) {
      labels.push_back(r ? std::optional<int>(*r > threshold ? 1 : 0) : std::nullopt);
    }
    out.push_back(std::move(labels));
  }
  return out;
}

double cohens_kappa(const BinaryLabels& a, const BinaryLabels& b) {
  if (a.size() != b.size()) throw InputError("kappa: label vectors differ in length");
  double n = 0;
  double agree = 0;
  double a1 = 0;
  double b1 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i] || !b[i]) continue;
    n += 1;
    agree += *a[i] == *b[i] ? 1 : 0;
    a1 += *a[i];
    b1 += *b[i];
  }
  if (n == 0) throw InputError("kappa: no items rated by both raters");
  const double po = agree / n;
  const double pa = a1 / n;
  const double pb = b1 / n;
  const double pe = pa * pb + (1 - pa) * (1 - pb);
  if (pe >= 1.0) return 1.0;
  return std::clamp((po - pe) / (1 - pe), -1.0, 1.0);
}

double cohens_kappa(const std::vector<int>& a, const std::vector<int>& b) {
  const auto wrap = [](const std::vector<int>& v) {
    BinaryLabels out;
    for (const int x : v) {
      if (x != 0 && x != 1) throw InputError("kappa: labels must be 0 or 1");
      out.emplace_back(x);
    }
    return out;
  };
  return cohens_kappa(wrap(a), wrap(b));
}

KappaMatrix kappa_matrix(const AnnotationTable& table, int threshold) {
  std::vector<BinaryLabels> columns = threshold_ratings(table, threshold);
  KappaMatrix km;
  km.names = table.raters;
  if (table.machine_name) {
    columns.push_back(table.machine);
    km.names.push_back(*table.machine_name);
  }
  const auto k = static_cast<Eigen::Index>(columns.size());
  if (k < 2) throw InputError("kappa matrix needs at least two raters");
  km.values = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      double kappa = 0;
      try {
        kappa = cohens_kappa(columns[static_cast<std::size_t>(i)], columns[static_cast<std::size_t>(j)]);
      } catch (const InputError& e) {
        throw InputError(km.names[static_cast<std::size_t>(i)] + " vs " + km.names[static_cast<std::size_t>(j)] +
                         ": " + e.what());
      }
      km.values(i, j) = km.values(j, i) = kappa;
    }
  }
  return km;
}

}  // namespace wordfun
