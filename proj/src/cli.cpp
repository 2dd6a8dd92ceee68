#include "wordfun/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>

#include "wordfun/csv.hpp"
#include "wordfun/funny.hpp"
#include "wordfun/game_parse.hpp"
#include "wordfun/lexres.hpp"
#include "wordfun/pipeline.hpp"

namespace wordfun::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

namespace {

const std::map<std::string, std::string, std::less<>>& resource_labels() {
  static const std::map<std::string, std::string, std::less<>> labels = {
      {"answers", "answers"},
      {"guesses", "guesses"},
      {"glove", "glove embeddings"},
      {"cdv_embeddings", "cdv embeddings"},
      {"pronunciations", "pronunciations"},
      {"frequencies", "frequencies"},
      {"letter_probs", "letter probabilities"},
      {"phoneme_probs", "phoneme probabilities"},
      {"affect_norms", "affect norms"},
      {"humor_norms", "humor norms"},
      {"seeds", "seeds"},
      {"funniness_model", "funniness model"},
  };
  return labels;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string_view part = s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!trim(part).empty()) out.emplace_back(trim(part));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [key, label] : resource_labels()) k.push_back(key);
    for (const char* key :
         {"cv_seed", "cv_folds", "lambda_grid", "holdout_fraction", "cdv_k", "search_vocab", "probability_convention",
          "u_phoneme", "min_words", "universe", "solved_count", "strict", "per_guess", "features", "trainer",
          "subsample_seed", "split_seed", "fit_seed", "split", "balance", "l2_grid", "irls_tol", "irls_max_iter",
          "architecture", "epochs", "learning_rate", "batch_size", "patience", "mlp_init", "kappa_threshold"}) {
      k.emplace_back(key);
    }
    std::sort(k.begin(), k.end());
    return k;
  }();
  return keys;
}

RunConfig RunConfig::parse(std::string_view text, std::string_view source) {
  RunConfig config;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(std::string(source), line_no, "expected key = value");
    try {
      config.set(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
    } catch (const InputError& e) {
      throw ParseError(std::string(source), line_no, e.what());
    }
  }
  return config;
}

RunConfig RunConfig::load(const fs::path& path) {
  RunConfig config = parse(read_text_file(path, "config"), path.string());
  // Resource paths in a config file are relative to the file.
  const fs::path base = path.parent_path();
  for (auto& [key, value] : config.values_) {
    if (resource_labels().count(key) && !value.empty() && fs::path(value).is_relative()) {
      value = (base / value).lexically_normal().string();
    }
  }
  return config;
}

void RunConfig::set(std::string key, std::string value) {
  const auto& keys = known_keys();
  if (!std::binary_search(keys.begin(), keys.end(), key)) throw InputError("config: unknown key '" + key + "'");
  values_[std::move(key)] = std::move(value);
}

void RunConfig::assign(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw InputError("--set expects key=value, got '" + std::string(assignment) + "'");
  set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

std::optional<std::string> RunConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::get_string(std::string_view key, std::string_view fallback) const {
  return get(key).value_or(std::string(fallback));
}

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw InputError("config: '" + std::string(key) + "' = '" + std::string(value) + "' is not " + std::string(expected));
}

}  // namespace

std::uint64_t RunConfig::get_u64(std::string_view key, std::uint64_t fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) bad_value(key, *v, "a non-negative integer");
  return out;
}

int RunConfig::get_int(std::string_view key, int fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) bad_value(key, *v, "an integer");
  return out;
}

double RunConfig::get_double(std::string_view key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  const auto d = parse_double(*v);
  if (!d || !std::isfinite(*d)) bad_value(key, *v, "a number");
  return *d;
}

bool RunConfig::get_bool(std::string_view key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  const std::string s = to_lower(*v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad_value(key, *v, "a boolean");
}

std::vector<double> RunConfig::get_doubles(std::string_view key, const std::vector<double>& fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& part : split_list(*v)) {
    const auto d = parse_double(part);
    if (!d || !std::isfinite(*d)) bad_value(key, *v, "a comma-separated list of numbers");
    out.push_back(*d);
  }
  if (out.empty()) bad_value(key, *v, "a non-empty list");
  return out;
}

std::vector<std::string> RunConfig::get_strings(std::string_view key, const std::vector<std::string>& fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  auto out = split_list(*v);
  if (out.empty()) bad_value(key, *v, "a non-empty list");
  return out;
}

fs::path RunConfig::resource(std::string_view key) const {
  const auto it = resource_labels().find(key);
  const std::string label = it == resource_labels().end() ? std::string(key) : it->second;
  const auto v = get(key);
  if (!v || v->empty()) throw InputError(label + ": file not found (config key '" + std::string(key) + "' is not set)");
  if (!fs::exists(*v)) throw InputError(label + ": file not found (" + *v + ")");
  return *v;
}

std::optional<fs::path> RunConfig::optional_resource(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return resource(key);
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Shared plumbing

namespace {

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f << content;
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

template <typename F>
auto stage(std::string_view name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const InputError& e) {
    throw InputError(std::string(name) + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(std::string(name) + ": " + e.what());
  }
}

struct FunnyData {
  explicit FunnyData(const RunConfig& c)
      : embeddings(load_embeddings<float>(c.resource("cdv_embeddings"))),
        pronunciations(load_pronunciations(c.resource("pronunciations"))),
        frequencies(load_frequencies(c.resource("frequencies"))),
        letters(load_symbol_probabilities(c.resource("letter_probs"), SymbolKind::letter)),
        phonemes(load_symbol_probabilities(c.resource("phoneme_probs"), SymbolKind::phoneme)),
        affect(load_affect_norms(c.resource("affect_norms"))) {}

  FunnyResources view() const { return FunnyResources{embeddings, pronunciations, frequencies, letters, phonemes, affect}; }

  EmbeddingTable embeddings;
  PronunciationTable pronunciations;
  FrequencyTable frequencies;
  SymbolProbabilityTable letters;
  SymbolProbabilityTable phonemes;
  AffectNorms affect;
};

FunninessTrainOptions funniness_options(const RunConfig& c) {
  FunninessTrainOptions o;
  o.cv.seed = c.get_u64("cv_seed", 0);
  o.cv.folds = c.get_int("cv_folds", 10);
  o.cv.lambdas = c.get_doubles("lambda_grid", default_lambda_grid());
  o.cv.holdout_fraction = c.get_double("holdout_fraction", 0.2);
  const int k = c.get_int("cdv_k", 100);
  if (k <= 0) throw InputError("config: cdv_k must be positive");
  o.cdv_k = static_cast<std::size_t>(k);
  const std::string vocab = c.get_string("search_vocab", "humor");
  if (vocab == "humor") {
    o.search_vocab = SearchVocabulary::humor_words;
  } else if (vocab == "embedding") {
    o.search_vocab = SearchVocabulary::embedding_words;
  } else {
    bad_value("search_vocab", vocab, "'humor' or 'embedding'");
  }
  const std::string conv = c.get_string("probability_convention", "mean_of_logs");
  if (conv == "mean_of_logs") {
    o.features.convention = ProbabilityConvention::mean_of_logs;
  } else if (conv == "log_of_mean") {
    o.features.convention = ProbabilityConvention::log_of_mean;
  } else {
    bad_value("probability_convention", conv, "'mean_of_logs' or 'log_of_mean'");
  }
  o.features.u_phoneme = to_upper(c.get_string("u_phoneme", "UW"));
  o.min_words = static_cast<std::size_t>(std::max(1, c.get_int("min_words", 100)));
  return o;
}

TrajectoryOptions trajectory_options(const RunConfig& c) {
  TrajectoryOptions o;
  const std::string universe = c.get_string("universe", "answers");
  if (universe == "answers") {
    o.universe = CandidateUniverse::answers;
  } else if (universe == "allowed") {
    o.universe = CandidateUniverse::allowed_guesses;
  } else {
    bad_value("universe", universe, "'answers' or 'allowed'");
  }
  const std::string solved = c.get_string("solved_count", "zero");
  if (solved == "zero") {
    o.solved_count = SolvedCount::zero;
  } else if (solved == "consistent") {
    o.solved_count = SolvedCount::consistent;
  } else {
    bad_value("solved_count", solved, "'zero' or 'consistent'");
  }
  return o;
}

AmusementTrainOptions train_options(const RunConfig& c) {
  AmusementTrainOptions o;
  const auto features = c.get_strings("features", {"default"});
  o.features = features.size() == 1 && features[0] == "default" ? model_feature_names() : features;
  o.subsample_seed = c.get_u64("subsample_seed", o.subsample_seed);
  o.split_seed = c.get_u64("split_seed", o.split_seed);
  o.fit_seed = c.get_u64("fit_seed", o.fit_seed);
  const auto split = c.get_doubles("split", {0.6, 0.2, 0.2});
  if (split.size() != 3) throw InputError("config: split needs three fractions");
  o.fractions = {split[0], split[1], split[2]};
  o.balance = c.get_bool("balance", true);
  const std::string trainer = c.get_string("trainer", "logistic");
  if (trainer == "logistic") {
    o.trainer = Trainer::logistic;
  } else if (trainer == "mlp") {
    o.trainer = Trainer::mlp;
  } else {
    bad_value("trainer", trainer, "'logistic' or 'mlp'");
  }
  o.l2_grid = c.get_doubles("l2_grid", {0.0});
  o.logistic.tol = c.get_double("irls_tol", o.logistic.tol);
  o.logistic.max_iter = c.get_int("irls_max_iter", o.logistic.max_iter);
  o.mlp.architecture = MlpArchitecture::parse(c.get_string("architecture", "NFEAT-10-10-1"));
  o.mlp.epochs = c.get_int("epochs", o.mlp.epochs);
  o.mlp.learning_rate = c.get_double("learning_rate", o.mlp.learning_rate);
  o.mlp.batch_size = c.get_int("batch_size", o.mlp.batch_size);
  o.mlp.patience = c.get_int("patience", o.mlp.patience);
  const std::string init = c.get_string("mlp_init", "he_uniform");
  if (init == "he_uniform") {
    o.mlp.init = MlpInit::he_uniform;
  } else if (init == "zero") {
    o.mlp.init = MlpInit::zero;
  } else {
    bad_value("mlp_init", init, "'he_uniform' or 'zero'");
  }
  return o;
}

// Everything needed to turn a GameRecord into features.
class FeatureEnvironment {
 public:
  explicit FeatureEnvironment(const RunConfig& c)
      : words_(load_word_list(c.resource("answers"), c.optional_resource("guesses"))),
        model_(funniness_model_from_json(read_text_file(c.resource("funniness_model"), "funniness model"))),
        funny_(c),
        trajectory_(trajectory_options(c)) {
    const fs::path glove = c.resource("glove");
    if (fs::equivalent(glove, c.resource("cdv_embeddings"))) {
      glove_ = &funny_.embeddings;
    } else {
      own_glove_ = std::make_unique<EmbeddingTable>(load_embeddings<float>(glove));
      glove_ = own_glove_.get();
    }
    if (static_cast<Eigen::Index>(funny_.embeddings.dimension()) != model_.cdvs.consle.vector.size()) {
      throw InputError("funniness model: CDV dimension does not match the cdv embeddings");
    }
  }

  GameFeatures extract(const GameRecord& game) {
    const FunnyResources res = funny_.view();
    const GameFeatureContext ctx{words_, *glove_,
                                 [&](std::string_view w) -> std::optional<double> {
                                   const std::string key(w);
                                   if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
                                   const auto p = predict_funniness(model_, w, res);
                                   const std::optional<double> v = p ? std::optional<double>(*p) : std::nullopt;
                                   cache_.emplace(key, v);
                                   return v;
                                 },
                                 trajectory_};
    return extract_game_features(game, ctx);
  }

 private:
  WordList words_;
  FunninessModel model_;
  FunnyData funny_;
  TrajectoryOptions trajectory_;
  std::unique_ptr<EmbeddingTable> own_glove_;
  const EmbeddingTable* glove_ = nullptr;
  std::unordered_map<std::string, std::optional<double>> cache_;
};

std::string eval_line(const EvalReport& r) {
  return r.split + ": n=" + std::to_string(r.n) + " accuracy=" + format_double(r.accuracy) +
         " base_rate=" + format_double(r.base_rate);
}

}  // namespace

// ---------------------------------------------------------------------------
// Commands

void cmd_funniness_train(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  const FunninessTrainOptions options = stage("configuration", [&] { return funniness_options(config); });
  const HumorNorms humor = stage("loading humor norms", [&] { return load_humor_norms(config.resource("humor_norms")); });
  const auto seeds = stage("loading seeds", [&] { return load_seeds(config.resource("seeds")); });
  const auto data = stage("loading resources", [&] { return std::make_unique<FunnyData>(config); });
  const FunnyResources res = data->view();
  const FunninessTraining fit =
      stage("fitting funniness model", [&] { return fit_funniness(humor, res, seeds, options); });
  const FunninessModel& m = fit.model;
  const RidgeCvReport& r = m.ridge.report;

  write_file(out_dir / "funniness_model.json", funniness_model_to_json(m));
  {
    std::ostringstream s;
    csv::write_row(s, {"lambda", "cv_rmse", "selected"});
    for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
      csv::write_row(s, {format_double(r.lambdas[i]), format_double(r.lambda_rmse[i]), r.lambdas[i] == r.lambda ? "1" : "0"});
    }
    write_file(out_dir / "funniness_cv.csv", s.str());
  }
  {
    std::ostringstream s;
    csv::write_row(s, {"fold", "rmse"});
    for (std::size_t f = 0; f < r.fold_rmse.size(); ++f) csv::write_row(s, {std::to_string(f), format_double(r.fold_rmse[f])});
    write_file(out_dir / "funniness_folds.csv", s.str());
  }
  {
    std::ostringstream s;
    export_fit_plot_data(m, humor, res, s);
    write_file(out_dir / "funniness_fit.csv", s.str());
  }
  std::ostringstream report;
  report << "humor norms: " << humor.ratings.size() << " words (" << humor.stats.rejected << " rejected)\n";
  report << "retained words: " << m.retained << "\n";
  report << "dropped words: " << m.dropped << "\n";
  for (const auto& [reason, count] : fit.drop_reasons) report << "  missing " << reason << ": " << count << "\n";
  for (const auto& cdv : m.cdvs.semantic) {
    if (!cdv.missing_seeds.empty()) report << "cdv " << cdv.category << ": " << cdv.missing_seeds.size() << " seeds without embeddings\n";
  }
  if (!m.cdvs.consle.missing_seeds.empty()) {
    report << "cdv consle: missing";
    for (const auto& w : m.cdvs.consle.missing_seeds) report << " " << w;
    report << "\n";
  }
  report << "cv seed: " << r.seed << ", folds: " << r.folds << "\n";
  report << "selected lambda: " << format_double(r.lambda) << "\n";
  report << "cv rmse: " << format_double(r.rmse) << "\n";
  report << "cv r2: " << format_double(r.r2) << "\n";
  if (r.holdout_rmse) {
    report << "holdout (" << r.holdout_size << " words) rmse: " << format_double(*r.holdout_rmse)
           << " r2: " << format_double(*r.holdout_r2) << "\n";
  }
  write_file(out_dir / "funniness_report.txt", report.str());
  log << report.str();
}

void cmd_features(const RunConfig& config, const fs::path& games_path, const fs::path& labels_path, const fs::path& out,
                  std::ostream& log) {
  const bool strict = config.get_bool("strict", false);
  const bool per_guess = config.get_bool("per_guess", false);
  const GameLoadResult games = stage("loading games", [&] { return load_games(games_path, strict); });
  const LabelTable labels = stage("loading labels", [&] { return load_labels(labels_path); });
  auto env = stage("loading resources", [&] { return std::make_unique<FeatureEnvironment>(config); });

  for (const auto& s : games.skipped) log << "skipped game " << (s.game_id.empty() ? "?" : s.game_id) << " (line " << s.line << "): " << s.reason << "\n";
  const JoinResult joined = join(games.games, labels);

  std::vector<FeatureRow> rows;
  std::size_t no_guesses = 0;
  std::size_t failed = 0;
  std::map<std::string, std::size_t> excluded;
  for (const auto& lg : joined.games) {
    if (!lg.entry.game.has_guesses()) {
      ++no_guesses;
      continue;
    }
    try {
      GameFeatures f = env->extract(lg.entry.game);
      if (!f.trainable()) {
        ++excluded[f.exclusion->substr(0, f.exclusion->find(" unavailable"))];
        continue;
      }
      rows.push_back(FeatureRow{lg.entry.game_id, lg.label, std::move(f)});
    } catch (const InputError& e) {
      if (strict) throw InputError("game " + lg.entry.game_id + ": " + e.what());
      log << "skipped game " << lg.entry.game_id << ": " << e.what() << "\n";
      ++failed;
    }
  }
  std::ostringstream s;
  write_feature_csv(s, rows, per_guess);
  write_file(out, s.str());
  log << "games loaded: " << games.games.size() << "\n";
  log << "games skipped while parsing: " << games.skipped.size() << "\n";
  log << "labeled games: " << joined.games.size() << " (unlabeled " << joined.unlabeled_games << ", orphan labels "
      << joined.orphan_labels << ")\n";
  log << "excluded, no guess words: " << no_guesses << "\n";
  log << "excluded, feature extraction failed: " << failed << "\n";
  for (const auto& [reason, count] : excluded) log << "excluded, " << reason << " unavailable: " << count << "\n";
  log << "feature rows written: " << rows.size() << "\n";
}

void cmd_train(const RunConfig& config, const fs::path& features, const fs::path& out_dir, std::ostream& log) {
  const AmusementTrainOptions options = stage("configuration", [&] { return train_options(config); });
  const FeatureTable table = stage("loading features", [&] { return read_feature_csv(features); });
  const AmusementTraining t = stage("training", [&] { return train_amusement(table, options); });
  const AmusementModel& m = t.model;

  write_file(out_dir / "model.json", amusement_model_to_json(m));
  std::ostringstream eval;
  write_eval_csv(eval, m, {t.train, t.validation, t.test});
  write_file(out_dir / "eval.csv", eval.str());
  if (t.inference) {
    std::ostringstream inf;
    write_inference_csv(inf, *t.inference);
    write_file(out_dir / "inference.csv", inf.str());
  }
  std::ostringstream eff;
  write_marginal_effects_csv(eff, t.marginal_effects);
  write_file(out_dir / "marginal_effects.csv", eff.str());

  std::ostringstream s;
  s << "trainer: " << (m.trainer == Trainer::logistic ? "logistic" : "mlp " + m.architecture.str()) << "\n";
  s << "features: " << m.feature_names.size() << "\n";
  s << "seeds: subsample " << m.subsample_seed << ", split " << m.split_seed << ", fit " << m.fit_seed << "\n";
  s << "rows: input " << m.n_input << ", balanced " << m.n_sample << ", train " << m.n_train << ", validation "
    << m.n_validation << ", test " << m.n_test << "\n";
  if (m.trainer == Trainer::logistic) {
    s << "selected l2: " << format_double(m.l2) << "\n";
    if (!m.logistic.converged) s << "warning: " << m.logistic.diagnostic << "\n";
  }
  for (const auto* r : {&t.train, &t.validation, &t.test}) s << eval_line(*r) << "\n";
  s << "test accuracy " << format_double(t.test.accuracy) << " vs base rate " << format_double(t.test.base_rate) << "\n";
  if (t.inference) {
    s << "coefficients (unregularized refit, normalized features):\n";
    for (const auto& row : t.inference->rows) {
      s << "  " << row.name << " " << format_double(row.estimate) << " se " << format_double(row.std_error) << " z "
        << format_double(row.z) << " p " << format_double(row.p) << " " << row.stars << "\n";
    }
  }
  if (t.aux) {
    s << "length regression: R2 " << format_double(t.aux->r2) << " on " << t.aux->n << " games";
    if (!t.aux->dropped.empty()) {
      s << " (collinear, dropped:";
      for (const auto& d : t.aux->dropped) s << " " << d;
      s << ")";
    }
    s << "\n";
  }
  write_file(out_dir / "summary.txt", s.str());
  log << s.str();
}

void cmd_compare(const fs::path& full_path, const fs::path& nested_path, const std::optional<fs::path>& out,
                 std::ostream& log) {
  const AmusementModel full =
      stage("loading full model", [&] { return amusement_model_from_json(read_text_file(full_path, "full model")); });
  const AmusementModel nested = stage(
      "loading nested model", [&] { return amusement_model_from_json(read_text_file(nested_path, "nested model")); });
  const LrtResult r = stage("likelihood-ratio test", [&] { return compare_models(full, nested); });
  std::ostringstream s;
  csv::write_row(s, {"statistic", "dof", "p_value"});
  csv::write_row(s, {format_double(r.statistic), std::to_string(r.dof), format_double(r.p)});
  if (out) write_file(*out, s.str());
  log << "statistic: " << format_double(r.statistic) << "\n";
  log << "dof: " << r.dof << "\n";
  log << "p: " << format_double(r.p) << "\n";
}

void cmd_kappa(const RunConfig& config, const fs::path& annotations, const fs::path& out, std::ostream& log) {
  const int threshold = config.get_int("kappa_threshold", 2);
  const AnnotationTable table = stage("loading annotations", [&] { return load_annotations(annotations); });
  const KappaMatrix k = stage("kappa", [&] { return kappa_matrix(table, threshold); });
  std::ostringstream s;
  std::vector<std::string> header{"rater"};
  header.insert(header.end(), k.names.begin(), k.names.end());
  csv::write_row(s, header);
  for (std::size_t i = 0; i < k.names.size(); ++i) {
    std::vector<std::string> row{k.names[i]};
    for (std::size_t j = 0; j < k.names.size(); ++j) {
      row.push_back(format_double(k.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
    csv::write_row(s, row);
  }
  write_file(out, s.str());
  log << s.str();
}

void cmd_score(const RunConfig& config, const fs::path& model_path, const fs::path& game_path, std::ostream& log) {
  const AmusementModel model =
      stage("loading model", [&] { return amusement_model_from_json(read_text_file(model_path, "model")); });
  const GameRecord game = stage("loading game", [&] {
    const std::string text = read_text_file(game_path, "game");
    if (trim(text).starts_with("{")) {
      const GameLoadResult r = parse_games_jsonl(text, game_path.string(), true);
      if (r.games.empty()) throw InputError("no game record");
      return r.games.front().game;
    }
    return parse_share_text(text, "score").to_game();
  });
  auto env = stage("loading resources", [&] { return std::make_unique<FeatureEnvironment>(config); });
  const GameFeatures f = stage("extracting features", [&] { return env->extract(game); });

  const auto header = feature_csv_header(true);
  const auto values = feature_row_values(f, true);
  Eigen::MatrixXd x(1, static_cast<Eigen::Index>(model.feature_names.size()));
  for (std::size_t i = 0; i < model.feature_names.size(); ++i) {
    const auto it = std::find(header.begin() + 2, header.end(), model.feature_names[i]);
    if (it == header.end()) throw InputError("model feature '" + model.feature_names[i] + "' is not a game feature");
    x(0, static_cast<Eigen::Index>(i)) = values[static_cast<std::size_t>(it - header.begin() - 2)];
  }
  const double p = model.predict_proba(x)(0);
  if (!f.trainable()) log << "warning: " << *f.exclusion << "\n";
  log << "probability: " << format_double(p) << "\n";
  if (model.trainer == Trainer::logistic) {
    const Eigen::MatrixXd z = zscore_apply(model.normalizer, x);
    std::ostringstream s;
    csv::write_row(s, {"feature", "value", "normalized", "coefficient", "contribution"});
    csv::write_row(s, {"(Intercept)", "", "", format_double(model.logistic.intercept), format_double(model.logistic.intercept)});
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const double w = model.logistic.coefficients(i);
      csv::write_row(s, {model.feature_names[static_cast<std::size_t>(i)], format_double(x(0, i)), format_double(z(0, i)),
                         format_double(w), format_double(w * z(0, i))});
    }
    log << s.str();
  }
}

void cmd_parse(const fs::path& input, const fs::path& out, std::string_view id_prefix, std::ostream& log) {
  const std::string text = read_text_file(input, "share text");
  const ShareParseResult r = parse_share_document(text, id_prefix);
  std::string lines;
  for (const auto& post : r.posts) {
    lines += game_to_json_line(GameEntry{post.game_id, post.game_id, post.to_game()}) + "\n";
  }
  write_file(out, lines);
  for (const auto& e : r.errors) log << "rejected: " << e << "\n";
  log << "posts parsed: " << r.posts.size() << "\n";
  log << "posts rejected: " << r.errors.size() << "\n";
}

// ---------------------------------------------------------------------------
// Entry point

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wordle amusement and word funniness toolkit", "wordfun"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "key = value configuration file");
  app.add_option("-s,--set", overrides, "override a configuration key (key=value); wins over the file");

  std::string out_dir = ".";
  auto* fun = app.add_subcommand("funniness-train", "fit the word funniness model");
  fun->add_option("-o,--out-dir", out_dir, "output directory");

  std::string games_path;
  std::string labels_path;
  std::string out_path;
  bool per_guess = false;
  bool strict = false;
  auto* feat = app.add_subcommand("features", "extract per-game features");
  feat->add_option("--games", games_path, "games JSONL")->required();
  feat->add_option("--labels", labels_path, "labels CSV (comment_id,label)")->required();
  feat->add_option("-o,--out", out_path, "features CSV")->required();
  feat->add_flag("--per-guess", per_guess, "add the 18 per-guess columns");
  feat->add_flag("--strict", strict, "fail on the first bad game");

  std::string features_path;
  std::string trainer;
  auto* train = app.add_subcommand("train", "train and evaluate the amusement classifier");
  train->add_option("--features", features_path, "features CSV")->required();
  train->add_option("-o,--out-dir", out_dir, "output directory");
  train->add_option("--trainer", trainer, "logistic or mlp");

  std::string full_path;
  std::string nested_path;
  auto* compare = app.add_subcommand("compare", "likelihood-ratio test between nested models");
  compare->add_option("--full", full_path, "full model JSON")->required();
  compare->add_option("--nested", nested_path, "nested model JSON")->required();
  compare->add_option("-o,--out", out_path, "CSV report");

  std::string annotations_path;
  auto* kappa = app.add_subcommand("kappa", "Cohen's kappa between annotators");
  kappa->add_option("--annotations", annotations_path, "annotations CSV")->required();
  kappa->add_option("-o,--out", out_path, "kappa matrix CSV")->required();

  std::string model_path;
  std::string game_path;
  auto* score = app.add_subcommand("score", "amusement probability for one game");
  score->add_option("--model", model_path, "amusement model JSON")->required();
  score->add_option("--game", game_path, "one JSONL game record or share text with words")->required();

  std::string input_path;
  std::string prefix = "post-";
  auto* parse = app.add_subcommand("parse", "share text to games JSONL");
  parse->add_option("--input", input_path, "share text")->required();
  parse->add_option("-o,--out", out_path, "games JSONL")->required();
  parse->add_option("--id-prefix", prefix, "game id prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    for (const auto& o : overrides) config.assign(o);
    if (per_guess) config.set("per_guess", "true");
    if (strict) config.set("strict", "true");
    if (!trainer.empty()) config.set("trainer", trainer);

    if (*fun) {
      cmd_funniness_train(config, out_dir, out);
    } else if (*feat) {
      cmd_features(config, games_path, labels_path, out_path, out);
    } else if (*train) {
      cmd_train(config, features_path, out_dir, out);
    } else if (*compare) {
      cmd_compare(full_path, nested_path, out_path.empty() ? std::nullopt : std::optional<fs::path>(out_path), out);
    } else if (*kappa) {
      cmd_kappa(config, annotations_path, out_path, out);
    } else if (*score) {
      cmd_score(config, model_path, game_path, out);
    } else if (*parse) {
      cmd_parse(input_path, out_path, prefix, out);
    }
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace wordfun::cli
