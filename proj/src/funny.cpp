#include "wordfun/funny.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "wordfun/csv.hpp"

namespace wordfun {

namespace {

Eigen::VectorXd to_double(const EmbeddingTable::ConstMap& v) { return v.cast<double>(); }

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0 || nb == 0) return 0;
  return a.dot(b) / (na * nb);
}

void require_nonzero(const Cdv& cdv) {
  if (!cdv.vector.allFinite() || cdv.vector.norm() == 0) {
    throw NumericError("CDV '" + cdv.category + "' has zero norm or non-finite components");
  }
}

}  // namespace

std::string normalize_category(std::string_view name) {
  std::string out;
  for (const char c : to_lower(trim(name))) {
    if (c >= 'a' && c <= 'z') out.push_back(c);
  }
  return out;
}

std::vector<CategorySeeds> parse_seeds(std::string_view text, std::string_view source) {
  const csv::Table table = csv::parse(text, std::string(source));
  const std::size_t cat_col = table.require_column("category");
  const std::size_t word_col = table.require_column("word");
  std::vector<CategorySeeds> out;
  for (const auto name : kSemanticCategories) out.push_back(CategorySeeds{std::string(name), {}});
  for (const auto& row : table.rows) {
    if (cat_col >= row.fields.size() || word_col >= row.fields.size()) {
      throw ParseError(table.source, row.line, "expected category and word");
    }
    const std::string category = normalize_category(row.fields[cat_col]);
    const std::string word = to_lower(trim(row.fields[word_col]));
    if (word.empty()) continue;
    for (auto& seeds : out) {
      if (seeds.category == category && std::find(seeds.words.begin(), seeds.words.end(), word) == seeds.words.end()) {
        seeds.words.push_back(word);
      }
    }
  }
  for (const auto& seeds : out) {
    if (seeds.words.empty()) throw InputError(table.source + ": no seed words for category '" + seeds.category + "'");
  }
  return out;
}

std::vector<CategorySeeds> load_seeds(const std::filesystem::path& path) {
  return parse_seeds(read_text_file(path, "seeds"), path.string());
}

Cdv build_cdv(const CategorySeeds& seeds, const EmbeddingTable& embeddings, std::span<const std::string> search_vocab,
              std::size_t k) {
  if (seeds.words.empty()) throw InputError("CDV '" + seeds.category + "': no seed words");
  if (k == 0) throw InputError("CDV '" + seeds.category + "': k must be positive");
  Cdv cdv;
  cdv.category = seeds.category;
  Eigen::VectorXd centre = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(embeddings.dimension()));
  std::size_t resolved = 0;
  for (const auto& w : seeds.words) {
    if (const auto v = embeddings.find(w)) {
      centre += to_double(*v);
      ++resolved;
    } else {
      cdv.missing_seeds.push_back(w);
    }
  }
  if (resolved == 0) throw InputError("CDV '" + seeds.category + "': none of the seed words has an embedding");
  if (2 * resolved < seeds.words.size()) {
    throw InputError("CDV '" + seeds.category + "': only " + std::to_string(resolved) + " of " +
                     std::to_string(seeds.words.size()) + " seed words have embeddings");
  }
  centre /= static_cast<double>(resolved);

  struct Scored {
    double similarity;
    const std::string* word;
    Eigen::VectorXd vec;
  };
  std::vector<Scored> scored;
  std::vector<std::string> seen;
  for (const auto& w : search_vocab) {
    if (const auto v = embeddings.find(w)) {
      Eigen::VectorXd vec = to_double(*v);
      scored.push_back(Scored{cosine(vec, centre), &w, std::move(vec)});
    }
  }
  // Duplicate vocabulary entries would be double counted.
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return *a.word < *b.word; });
  scored.erase(std::unique(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return *a.word == *b.word; }),
               scored.end());
  if (scored.size() < k) {
    throw InputError("CDV '" + seeds.category + "': search vocabulary has " + std::to_string(scored.size()) +
                     " embedded words, need " + std::to_string(k));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) { return a.similarity > b.similarity; });
  cdv.vector = Eigen::VectorXd::Zero(centre.size());
  for (std::size_t i = 0; i < k; ++i) cdv.vector += scored[i].vec;
  cdv.vector /= static_cast<double>(k);
  require_nonzero(cdv);
  return cdv;
}

Cdv build_consle_cdv(const EmbeddingTable& embeddings) {
  Cdv cdv;
  cdv.category = "consle";
  cdv.vector = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(embeddings.dimension()));
  std::size_t resolved = 0;
  for (const auto w : kConsLeWords) {
    if (const auto v = embeddings.find(w)) {
      cdv.vector += to_double(*v);
      ++resolved;
    } else {
      cdv.missing_seeds.emplace_back(w);
    }
  }
  if (resolved < 4) {
    throw InputError("Cons+le CDV: only " + std::to_string(resolved) + " of 8 words have embeddings (need 4)");
  }
  cdv.vector /= static_cast<double>(resolved);
  require_nonzero(cdv);
  return cdv;
}

CdvSet build_cdvs(const std::vector<CategorySeeds>& seeds, const EmbeddingTable& embeddings,
                  std::span<const std::string> search_vocab, std::size_t k) {
  CdvSet set;
  for (const auto name : kSemanticCategories) {
    const auto it = std::find_if(seeds.begin(), seeds.end(),
                                 [&](const CategorySeeds& s) { return normalize_category(s.category) == name; });
    if (it == seeds.end()) throw InputError("no seeds for category '" + std::string(name) + "'");
    set.semantic.push_back(build_cdv(*it, embeddings, search_vocab, k));
  }
  set.consle = build_consle_cdv(embeddings);
  return set;
}

const std::array<std::string_view, kWordFeatureCount>& word_feature_names() {
  static constexpr std::array<std::string_view, kWordFeatureCount> names = {
      "cdv_sex",          "cdv_party",           "cdv_insult",
      "cdv_profanity",    "cdv_bodyfunction",    "cdv_animals",
      "has_letter_k",     "log_frequency",       "log_avg_letter_prob",
      "log_avg_phoneme_prob", "letter_phoneme_ratio", "has_phoneme_u",
      "cdv_consle",       "valence_x_arousal",   "valence_x_arousal_x_dominance",
      "arousal_x_dominance", "valence",          "arousal",
      "concreteness"};
  return names;
}

double log_average_probability(std::span<const double> probabilities, ProbabilityConvention convention) {
  if (probabilities.empty()) throw InputError("log average probability of an empty sequence");
  const auto n = static_cast<double>(probabilities.size());
  if (convention == ProbabilityConvention::mean_of_logs) {
    double sum = 0;
    for (const double p : probabilities) sum += std::log(p);
    return sum / n;
  }
  return std::log(std::accumulate(probabilities.begin(), probabilities.end(), 0.0) / n);
}

Outcome<WordFeatureVector> word_features(std::string_view word_in, const FunnyResources& res, const CdvSet& cdvs,
                                         const WordFeatureOptions& options) {
  const std::string word = to_lower(trim(word_in));
  std::vector<std::string> missing;

  const auto emb = res.embeddings.find(word);
  if (!emb) missing.emplace_back("embedding");
  const auto* pron = res.pronunciations.find(word);
  if (!pron) missing.emplace_back("pronunciation");
  const auto freq = res.frequencies.probability(word);
  if (!freq) missing.emplace_back("frequency");
  const auto* affect = res.affect.find(word);
  if (!affect) missing.emplace_back("affect_norms");

  std::vector<double> letter_p;
  bool letters_ok = !word.empty();
  for (const char c : word) {
    const auto p = res.letters.probability(std::string_view(&c, 1));
    if (!p) {
      letters_ok = false;
      break;
    }
    letter_p.push_back(*p);
  }
  if (!letters_ok) missing.emplace_back("letter_probability");

  std::vector<double> phoneme_p;
  if (pron) {
    bool ok = !pron->empty();
    for (const auto& ph : *pron) {
      const auto p = res.phonemes.probability(strip_stress(ph));
      if (!p) {
        ok = false;
        break;
      }
      phoneme_p.push_back(*p);
    }
    if (!ok) missing.emplace_back("phoneme_probability");
  }
  if (!missing.empty()) return Outcome<WordFeatureVector>::unavailable(std::move(missing));

  const Eigen::VectorXd v = to_double(*emb);
  if (v.norm() == 0) return Outcome<WordFeatureVector>::unavailable({"embedding (zero vector)"});
  const double log_letter = log_average_probability(letter_p, options.convention);
  const double log_phoneme = log_average_probability(phoneme_p, options.convention);
  if (log_phoneme == 0) return Outcome<WordFeatureVector>::unavailable({"phoneme_probability (log average is 0)"});

  const bool has_u = std::any_of(pron->begin(), pron->end(),
                                 [&](const std::string& ph) { return strip_stress(ph) == options.u_phoneme; });
  WordFeatureVector f;
  for (std::size_t i = 0; i < cdvs.semantic.size() && i < 6; ++i) {
    f(static_cast<Eigen::Index>(i)) = 1.0 - cosine(v, cdvs.semantic[i].vector);
  }
  f(6) = word.find('k') != std::string::npos ? 1.0 : 0.0;
  f(7) = std::log(*freq);
  f(8) = log_letter;
  f(9) = log_phoneme;
  f(10) = log_letter / log_phoneme;
  f(11) = has_u ? 1.0 : 0.0;
  f(12) = 1.0 - cosine(v, cdvs.consle.vector);
  f(13) = affect->valence * affect->arousal;
  f(14) = affect->valence * affect->arousal * affect->dominance;
  f(15) = affect->arousal * affect->dominance;
  f(16) = affect->valence;
  f(17) = affect->arousal;
  f(18) = affect->concreteness;
  if (!f.allFinite()) return Outcome<WordFeatureVector>::unavailable({"non-finite feature"});
  return Outcome<WordFeatureVector>::ok(f);
}

FunninessTraining fit_funniness(const HumorNorms& humor, const FunnyResources& resources,
                                const std::vector<CategorySeeds>& seeds, const FunninessTrainOptions& options) {
  std::vector<std::string> vocab;
  if (options.search_vocab == SearchVocabulary::humor_words) {
    for (const auto& w : humor.ratings.keys()) {
      if (resources.embeddings.contains(w)) vocab.push_back(w);
    }
  } else {
    vocab = resources.embeddings.words();
  }
  return fit_funniness(humor, resources, build_cdvs(seeds, resources.embeddings, vocab, options.cdv_k), options);
}

FunninessTraining fit_funniness(const HumorNorms& humor, const FunnyResources& resources, CdvSet cdvs,
                                const FunninessTrainOptions& options) {
  if (cdvs.semantic.size() != kSemanticCategories.size()) throw InputError("expected six semantic CDVs");
  FunninessTraining out;
  std::vector<WordFeatureVector> rows;
  std::vector<double> ratings;
  const auto& words = humor.ratings.keys();
  const auto& values = humor.ratings.values();
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto f = word_features(words[i], resources, cdvs, options.features);
    if (!f) {
      for (const auto& reason : f.missing) ++out.drop_reasons[reason];
      continue;
    }
    out.words.push_back(words[i]);
    rows.push_back(*f);
    ratings.push_back(values[i]);
  }
  if (rows.size() < options.min_words) {
    throw InputError("funniness: only " + std::to_string(rows.size()) + " words have complete features (need " +
                     std::to_string(options.min_words) + ")");
  }
  out.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kWordFeatureCount));
  for (std::size_t r = 0; r < rows.size(); ++r) out.features.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  out.ratings = Eigen::Map<const Eigen::VectorXd>(ratings.data(), static_cast<Eigen::Index>(ratings.size()));

  FunninessModel& model = out.model;
  for (const auto name : word_feature_names()) model.feature_names.emplace_back(name);
  model.ridge = fit_ridge_cv<double>(out.features, out.ratings, model.feature_names, options.cv);
  model.cdvs = std::move(cdvs);
  model.options = options.features;
  model.cdv_k = options.cdv_k;
  model.search_vocab = options.search_vocab;
  model.retained = rows.size();
  model.dropped = words.size() - rows.size();
  return out;
}

double predict_funniness(const FunninessModel& model, const WordFeatureVector& features) {
  const Eigen::MatrixXd row = features.transpose();
  return model.ridge.predict(row)(0);
}

Outcome<double> predict_funniness(const FunninessModel& model, std::string_view word, const FunnyResources& resources) {
  const auto f = word_features(word, resources, model.cdvs, model.options);
  if (!f) return Outcome<double>::unavailable(f.missing);
  return Outcome<double>::ok(predict_funniness(model, *f));
}

std::size_t export_fit_plot_data(const FunninessModel& model, const HumorNorms& humor, const FunnyResources& resources,
                                 std::ostream& out) {
  csv::write_row(out, {"word", "actual", "predicted"});
  std::size_t rows = 0;
  const auto& words = humor.ratings.keys();
  const auto& values = humor.ratings.values();
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto pred = predict_funniness(model, words[i], resources);
    if (!pred) continue;
    csv::write_row(out, {words[i], format_double(values[i]), format_double(*pred)});
    ++rows;
  }
  return rows;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using ojson = nlohmann::ordered_json;

std::vector<double> to_std(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd from_std(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ojson cdv_json(const Cdv& cdv) {
  ojson j;
  j["category"] = cdv.category;
  j["missing_seeds"] = cdv.missing_seeds;
  j["vector"] = to_std(cdv.vector);
  return j;
}

Cdv cdv_from(const ojson& j) {
  Cdv cdv;
  cdv.category = j.at("category").get<std::string>();
  cdv.missing_seeds = j.at("missing_seeds").get<std::vector<std::string>>();
  cdv.vector = from_std(j.at("vector").get<std::vector<double>>());
  return cdv;
}

}  // namespace

std::string funniness_model_to_json(const FunninessModel& m) {
  ojson j;
  j["format"] = "wordfun.funniness_model";
  j["version"] = FunninessModel::kVersion;
  j["feature_names"] = m.feature_names;
  j["intercept"] = m.ridge.intercept;
  j["weights"] = to_std(m.ridge.weights);
  j["lambda"] = m.ridge.lambda;
  j["normalizer"] = {{"mean", to_std(m.ridge.normalizer.mean)}, {"sd", to_std(m.ridge.normalizer.sd)}};
  const auto& r = m.ridge.report;
  ojson cv;
  cv["seed"] = r.seed;
  cv["folds"] = r.folds;
  cv["lambdas"] = r.lambdas;
  cv["lambda_rmse"] = r.lambda_rmse;
  cv["selected_lambda"] = r.lambda;
  cv["fold_rmse"] = r.fold_rmse;
  cv["rmse"] = r.rmse;
  cv["r2"] = r.r2;
  cv["holdout_size"] = r.holdout_size;
  cv["holdout_rmse"] = r.holdout_rmse ? ojson(*r.holdout_rmse) : ojson(nullptr);
  cv["holdout_r2"] = r.holdout_r2 ? ojson(*r.holdout_r2) : ojson(nullptr);
  cv["fold_of"] = r.fold_of;
  j["cv_report"] = cv;
  j["retained_words"] = m.retained;
  j["dropped_words"] = m.dropped;
  j["options"] = {
      {"probability_convention",
       m.options.convention == ProbabilityConvention::mean_of_logs ? "mean_of_logs" : "log_of_mean"},
      {"u_phoneme", m.options.u_phoneme},
      {"cdv_k", m.cdv_k},
      {"search_vocab", m.search_vocab == SearchVocabulary::humor_words ? "humor" : "embedding"}};
  ojson cdvs = ojson::array();
  for (const auto& c : m.cdvs.semantic) cdvs.push_back(cdv_json(c));
  cdvs.push_back(cdv_json(m.cdvs.consle));
  j["cdvs"] = cdvs;
  return j.dump(2) + "\n";
}

FunninessModel funniness_model_from_json(std::string_view text) {
  try {
    const ojson j = ojson::parse(text);
    if (j.at("format").get<std::string>() != "wordfun.funniness_model") {
      throw InputError("not a funniness model file");
    }
    if (j.at("version").get<int>() != FunninessModel::kVersion) throw InputError("unsupported funniness model version");
    FunninessModel m;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (m.feature_names.size() != kWordFeatureCount) throw InputError("funniness model must have 19 features");
    m.ridge.intercept = j.at("intercept").get<double>();
    m.ridge.weights = from_std(j.at("weights").get<std::vector<double>>());
    m.ridge.lambda = j.at("lambda").get<double>();
    m.ridge.normalizer.names = m.feature_names;
    m.ridge.normalizer.mean = from_std(j.at("normalizer").at("mean").get<std::vector<double>>());
    m.ridge.normalizer.sd = from_std(j.at("normalizer").at("sd").get<std::vector<double>>());
    const auto n = static_cast<Eigen::Index>(kWordFeatureCount);
    if (m.ridge.weights.size() != n || m.ridge.normalizer.mean.size() != n || m.ridge.normalizer.sd.size() != n) {
      throw InputError("funniness model vectors must have 19 entries");
    }
    const auto& cv = j.at("cv_report");
    auto& r = m.ridge.report;
    r.seed = cv.at("seed").get<std::uint64_t>();
    r.folds = cv.at("folds").get<int>();
    r.lambdas = cv.at("lambdas").get<std::vector<double>>();
    r.lambda_rmse = cv.at("lambda_rmse").get<std::vector<double>>();
    r.lambda = cv.at("selected_lambda").get<double>();
    r.fold_rmse = cv.at("fold_rmse").get<std::vector<double>>();
    r.rmse = cv.at("rmse").get<double>();
    r.r2 = cv.at("r2").get<double>();
    r.holdout_size = cv.at("holdout_size").get<std::size_t>();
    if (!cv.at("holdout_rmse").is_null()) r.holdout_rmse = cv.at("holdout_rmse").get<double>();
    if (!cv.at("holdout_r2").is_null()) r.holdout_r2 = cv.at("holdout_r2").get<double>();
    r.fold_of = cv.at("fold_of").get<std::vector<int>>();
    m.retained = j.at("retained_words").get<std::size_t>();
    m.dropped = j.at("dropped_words").get<std::size_t>();
    const auto& o = j.at("options");
    m.options.convention = o.at("probability_convention").get<std::string>() == "log_of_mean"
                               ? ProbabilityConvention::log_of_mean
                               : ProbabilityConvention::mean_of_logs;
    m.options.u_phoneme = o.at("u_phoneme").get<std::string>();
    m.cdv_k = o.at("cdv_k").get<std::size_t>();
    m.search_vocab =
        o.at("search_vocab").get<std::string>() == "embedding" ? SearchVocabulary::embedding_words : SearchVocabulary::humor_words;
    const auto& cdvs = j.at("cdvs");
    if (!cdvs.is_array() || cdvs.size() != kSemanticCategories.size() + 1) throw InputError("funniness model needs 7 CDVs");
    for (std::size_t i = 0; i < kSemanticCategories.size(); ++i) m.cdvs.semantic.push_back(cdv_from(cdvs[i]));
    m.cdvs.consle = cdv_from(cdvs.back());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("funniness model: ") + e.what());
  }
}

}  // namespace wordfun
