#include "wordfun/pipeline.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <json.hpp>

#include "wordfun/csv.hpp"

namespace wordfun {

std::vector<std::string> model_feature_names() {
  return {game_feature_names().begin(), game_feature_names().end()};
}

std::vector<std::string> feature_csv_header(bool per_guess) {
  std::vector<std::string> h{"game_id", "label"};
  for (const auto name : game_feature_names()) h.emplace_back(name);
  for (const auto& name : availability_column_names()) h.push_back(name);
  if (per_guess) {
    for (const auto& name : per_guess_column_names()) h.push_back(name);
  }
  return h;
}

std::vector<double> feature_row_values(const GameFeatures& f, bool per_guess) {
  std::vector<double> v(f.values.data(), f.values.data() + f.values.size());
  const auto& a = f.availability;
  v.push_back(static_cast<double>(a.pairs));
  v.push_back(static_cast<double>(a.glove_pairs));
  v.push_back(a.glove_last ? 1.0 : 0.0);
  v.push_back(static_cast<double>(a.humor_words));
  v.push_back(a.humor_last ? 1.0 : 0.0);
  if (per_guess) {
    for (Eigen::Index r = 0; r < f.per_guess.rows(); ++r) {
      for (Eigen::Index c = 0; c < f.per_guess.cols(); ++c) v.push_back(f.per_guess(r, c));
    }
  }
  return v;
}

void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows, bool per_guess) {
  csv::write_row(out, feature_csv_header(per_guess));
  for (const auto& row : rows) {
    std::vector<std::string> fields{row.game_id, std::to_string(row.label)};
    for (const double v : feature_row_values(row.features, per_guess)) fields.push_back(format_double(v));
    csv::write_row(out, fields);
  }
}

bool FeatureTable::has_column(std::string_view name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

Eigen::Index FeatureTable::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw InputError("features: unknown column '" + std::string(name) + "'");
  return static_cast<Eigen::Index>(it - columns.begin());
}

Eigen::MatrixXd FeatureTable::select(const std::vector<std::string>& names) const {
  std::vector<std::size_t> rows(size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return select(names, rows);
}

Eigen::MatrixXd FeatureTable::select(const std::vector<std::string>& names, const std::vector<std::size_t>& rows) const {
  std::vector<Eigen::Index> cols;
  for (const auto& n : names) cols.push_back(column(n));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values(static_cast<Eigen::Index>(rows[r]), cols[c]);
    }
  }
  return out;
}

Eigen::VectorXd FeatureTable::label_vector(const std::vector<std::size_t>& rows) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) y(static_cast<Eigen::Index>(r)) = labels[rows[r]];
  return y;
}

FeatureTable parse_feature_csv(std::string_view text, std::string_view source) {
  const csv::Table t = csv::parse(text, std::string(source));
  const auto with = feature_csv_header(true);
  const auto without = feature_csv_header(false);
  if (t.header != with && t.header != without) {
    const auto& expected = t.header.size() > without.size() ? with : without;
    std::vector<std::string> missing;
    std::vector<std::string> unexpected;
    for (const auto& c : expected) {
      if (std::find(t.header.begin(), t.header.end(), c) == t.header.end()) missing.push_back(c);
    }
    for (const auto& c : t.header) {
      if (std::find(expected.begin(), expected.end(), c) == expected.end()) unexpected.push_back(c);
    }
    std::string msg = std::string(source) + ": features header does not match the schema";
    const auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
      return s;
    };
    if (!missing.empty()) msg += "; missing columns: " + join(missing);
    if (!unexpected.empty()) msg += "; unexpected columns: " + join(unexpected);
    if (missing.empty() && unexpected.empty()) msg += "; columns are out of order";
    throw InputError(msg);
  }
  FeatureTable table;
  table.columns.assign(t.header.begin() + 2, t.header.end());
  table.values.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(table.columns.size()));
  std::set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.fields.size() != t.header.size()) {
      throw ParseError(t.source, row.line,
                       "expected " + std::to_string(t.header.size()) + " fields, got " + std::to_string(row.fields.size()));
    }
    if (!seen.insert(row.fields[0]).second) throw ParseError(t.source, row.line, "duplicate game_id '" + row.fields[0] + "'");
    table.ids.push_back(row.fields[0]);
    const std::string label(trim(row.fields[1]));
    if (label != "0" && label != "1") throw ParseError(t.source, row.line, "label must be 0 or 1");
    table.labels.push_back(label == "1" ? 1 : 0);
    for (std::size_t c = 2; c < row.fields.size(); ++c) {
      const auto v = parse_double(trim(row.fields[c]));
      if (!v || !std::isfinite(*v)) {
        throw ParseError(t.source, row.line, "column '" + t.header[c] + "' is not a finite number");
      }
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 2)) = *v;
    }
  }
  return table;
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  return parse_feature_csv(read_text_file(path, "features"), path.string());
}

Eigen::VectorXd AmusementModel::predict_proba(const Eigen::MatrixXd& x_raw) const {
  const Eigen::MatrixXd z = zscore_apply(normalizer, x_raw);
  if (trainer == Trainer::mlp) {
    if (!mlp) throw InputError("amusement model has no network weights");
    return mlp->predict_proba(z);
  }
  return logistic.predict_proba(z);
}

namespace {

std::vector<std::size_t> map_rows(const std::vector<std::size_t>& idx, const std::vector<std::size_t>& sample) {
  std::vector<std::size_t> out;
  out.reserve(idx.size());
  for (const auto i : idx) out.push_back(sample[i]);
  return out;
}

}  // namespace

AmusementTraining train_amusement(const FeatureTable& table, const AmusementTrainOptions& options) {
  if (options.features.empty()) throw InputError("train: no features selected");
  for (const auto& f : options.features) table.column(f);
  if (options.trainer == Trainer::logistic && options.l2_grid.empty()) throw InputError("train: empty l2 grid");

  AmusementTraining out;
  AmusementModel& m = out.model;
  m.trainer = options.trainer;
  m.feature_names = options.features;
  m.subsample_seed = options.subsample_seed;
  m.split_seed = options.split_seed;
  m.fit_seed = options.fit_seed;
  m.fractions = options.fractions;
  m.balanced = options.balance;
  m.n_input = table.size();

  if (options.balance) {
    out.sample = balanced_subsample(table.labels, options.subsample_seed);
  } else {
    out.sample.resize(table.size());
    std::iota(out.sample.begin(), out.sample.end(), std::size_t{0});
  }
  const SplitIndices local = split_dataset(out.sample.size(), options.fractions, options.split_seed);
  out.split.train = map_rows(local.train, out.sample);
  out.split.validation = map_rows(local.validation, out.sample);
  out.split.test = map_rows(local.test, out.sample);
  m.n_sample = out.sample.size();
  m.n_train = out.split.train.size();
  m.n_validation = out.split.validation.size();
  m.n_test = out.split.test.size();
  {
    std::vector<std::string> ids;
    for (const auto r : out.split.train) ids.push_back(table.ids[r]);
    std::sort(ids.begin(), ids.end());
    std::string joined;
    for (const auto& id : ids) joined += id + "\n";
    m.training_digest = hex64(fnv1a(joined));
  }

  const Eigen::MatrixXd x_train = table.select(options.features, out.split.train);
  const Eigen::MatrixXd x_val = table.select(options.features, out.split.validation);
  const Eigen::MatrixXd x_test = table.select(options.features, out.split.test);
  const Eigen::VectorXd y_train = table.label_vector(out.split.train);
  const Eigen::VectorXd y_val = table.label_vector(out.split.validation);
  const Eigen::VectorXd y_test = table.label_vector(out.split.test);

  m.normalizer = zscore_fit(x_train, options.features);
  const Eigen::MatrixXd z_train = zscore_apply(m.normalizer, x_train);
  const Eigen::MatrixXd z_val = zscore_apply(m.normalizer, x_val);

  if (options.trainer == Trainer::logistic) {
    m.l2_grid = options.l2_grid;
    double best = -1;
    for (const double l2 : options.l2_grid) {
      LogisticOptions lo = options.logistic;
      lo.l2 = l2;
      auto fit = fit_logistic(z_train, y_train, lo, options.features);
      const double acc = evaluate(fit, z_val, y_val).accuracy;
      m.l2_validation_accuracy.push_back(acc);
      if (acc > best) {
        best = acc;
        m.logistic = std::move(fit);
        m.l2 = l2;
      }
    }
    if (m.l2 == 0) {
      m.unregularized = m.logistic;
    } else {
      LogisticOptions lo = options.logistic;
      lo.l2 = 0;
      m.unregularized = fit_logistic(z_train, y_train, lo, options.features);
    }
    out.inference = coefficient_inference(m.unregularized, z_train, y_train);
  } else {
    MlpOptions mo = options.mlp;
    mo.seed = options.fit_seed;
    auto fit = fit_mlp<double>(z_train, y_train, z_val, y_val, mo);
    m.architecture = mo.architecture;
    m.mlp_best_epoch = fit.best_epoch;
    m.mlp = std::move(fit.model);
  }

  out.train = evaluate(m.predict_proba(x_train), y_train, "train");
  out.validation = evaluate(m.predict_proba(x_val), y_val, "validation");
  out.test = evaluate(m.predict_proba(x_test), y_test, "test");

  for (std::size_t f = 0; f < options.features.size(); ++f) {
    double effect = 0;
    if (m.trainer == Trainer::logistic) {
      effect = marginal_effect(m.logistic, m.normalizer, x_test, static_cast<Eigen::Index>(f));
    } else {
      effect = marginal_effect(*m.mlp, m.normalizer, x_test, static_cast<Eigen::Index>(f));
    }
    out.marginal_effects.push_back(MarginalEffect{options.features[f], effect});
  }

  const auto cols = model_feature_names();
  if (std::all_of(cols.begin(), cols.end(), [&](const std::string& c) { return table.has_column(c); })) {
    const std::vector<std::string> predictors(cols.begin(), cols.end() - 1);
    try {
      out.aux = fit_aux_length_regression(table.select(predictors), table.select({cols.back()}).col(0), predictors);
    } catch (const NumericError&) {
      out.aux.reset();  // constant game length: R^2 undefined
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model file

namespace {

using ojson = nlohmann::ordered_json;

std::vector<double> to_std(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd from_std(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ojson logistic_json(const LogisticModel<double>& m) {
  ojson j;
  j["intercept"] = m.intercept;
  j["coefficients"] = to_std(m.coefficients);
  j["l2"] = m.l2;
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  j["loglik"] = m.loglik;
  j["gradient_norm"] = m.gradient_norm;
  j["diagnostic"] = m.diagnostic;
  return j;
}

LogisticModel<double> logistic_from(const ojson& j, const std::vector<std::string>& names) {
  LogisticModel<double> m;
  m.feature_names = names;
  m.intercept = j.at("intercept").get<double>();
  m.coefficients = from_std(j.at("coefficients").get<std::vector<double>>());
  m.l2 = j.at("l2").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<int>();
  m.loglik = j.at("loglik").get<double>();
  m.gradient_norm = j.at("gradient_norm").get<double>();
  m.diagnostic = j.at("diagnostic").get<std::string>();
  if (m.coefficients.size() != static_cast<Eigen::Index>(names.size())) {
    throw InputError("amusement model: coefficient count does not match features");
  }
  return m;
}

}  // namespace

std::string amusement_model_to_json(const AmusementModel& m) {
  ojson j;
  j["format"] = "wordfun.amusement_model";
  j["version"] = AmusementModel::kVersion;
  j["trainer"] = m.trainer == Trainer::logistic ? "logistic" : "mlp";
  j["feature_names"] = m.feature_names;
  j["normalizer"] = {{"mean", to_std(m.normalizer.mean)}, {"sd", to_std(m.normalizer.sd)}};
  if (m.trainer == Trainer::logistic) {
    j["logistic"] = logistic_json(m.logistic);
    j["unregularized"] = logistic_json(m.unregularized);
    j["l2_grid"] = m.l2_grid;
    j["l2_validation_accuracy"] = m.l2_validation_accuracy;
    j["l2"] = m.l2;
  } else {
    j["mlp"] = {{"architecture", m.architecture.str()},
                {"best_epoch", m.mlp_best_epoch},
                {"parameters", to_std(m.mlp->parameters())}};
  }
  j["data"] = {{"subsample_seed", m.subsample_seed}, {"split_seed", m.split_seed}, {"fit_seed", m.fit_seed},
               {"fractions", m.fractions},          {"balanced", m.balanced},     {"n_input", m.n_input},
               {"n_sample", m.n_sample},            {"n_train", m.n_train},       {"n_validation", m.n_validation},
               {"n_test", m.n_test},                {"training_digest", m.training_digest}};
  return j.dump(2) + "\n";
}

AmusementModel amusement_model_from_json(std::string_view text) {
  try {
    const ojson j = ojson::parse(text);
    if (j.at("format").get<std::string>() != "wordfun.amusement_model") throw InputError("not an amusement model file");
    if (j.at("version").get<int>() != AmusementModel::kVersion) throw InputError("unsupported amusement model version");
    AmusementModel m;
    const auto trainer = j.at("trainer").get<std::string>();
    if (trainer != "logistic" && trainer != "mlp") throw InputError("amusement model: unknown trainer '" + trainer + "'");
    m.trainer = trainer == "logistic" ? Trainer::logistic : Trainer::mlp;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.normalizer.names = m.feature_names;
    m.normalizer.mean = from_std(j.at("normalizer").at("mean").get<std::vector<double>>());
    m.normalizer.sd = from_std(j.at("normalizer").at("sd").get<std::vector<double>>());
    const auto p = static_cast<Eigen::Index>(m.feature_names.size());
    if (m.normalizer.mean.size() != p || m.normalizer.sd.size() != p) {
      throw InputError("amusement model: normalizer size does not match features");
    }
    if (m.trainer == Trainer::logistic) {
      m.logistic = logistic_from(j.at("logistic"), m.feature_names);
      m.unregularized = logistic_from(j.at("unregularized"), m.feature_names);
      m.l2_grid = j.at("l2_grid").get<std::vector<double>>();
      m.l2_validation_accuracy = j.at("l2_validation_accuracy").get<std::vector<double>>();
      m.l2 = j.at("l2").get<double>();
    } else {
      const auto& mj = j.at("mlp");
      m.architecture = MlpArchitecture::parse(mj.at("architecture").get<std::string>());
      m.mlp_best_epoch = mj.at("best_epoch").get<int>();
      Mlp<double> net(p, m.architecture, MlpInit::zero, 0);
      net.set_parameters(from_std(mj.at("parameters").get<std::vector<double>>()));
      m.mlp = std::move(net);
    }
    const auto& d = j.at("data");
    m.subsample_seed = d.at("subsample_seed").get<std::uint64_t>();
    m.split_seed = d.at("split_seed").get<std::uint64_t>();
    m.fit_seed = d.at("fit_seed").get<std::uint64_t>();
    m.fractions = d.at("fractions").get<std::array<double, 3>>();
    m.balanced = d.at("balanced").get<bool>();
    m.n_input = d.at("n_input").get<std::size_t>();
    m.n_sample = d.at("n_sample").get<std::size_t>();
    m.n_train = d.at("n_train").get<std::size_t>();
    m.n_validation = d.at("n_validation").get<std::size_t>();
    m.n_test = d.at("n_test").get<std::size_t>();
    m.training_digest = d.at("training_digest").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("amusement model: ") + e.what());
  } catch (const NumericError& e) {
    throw InputError(std::string("amusement model: ") + e.what());
  }
}

LrtResult compare_models(const AmusementModel& full, const AmusementModel& nested) {
  if (full.trainer != Trainer::logistic || nested.trainer != Trainer::logistic) {
    throw InputError("compare: both models must be logistic");
  }
  check_nested(full.feature_names, nested.feature_names);
  if (full.training_digest != nested.training_digest || full.n_train != nested.n_train) {
    throw InputError("compare: models were trained on different rows (training digests differ)");
  }
  if (!full.unregularized.converged || !nested.unregularized.converged) {
    throw NumericError("compare: an unregularized fit did not converge");
  }
  return lrt_from_loglik(full.unregularized.loglik, nested.unregularized.loglik,
                         static_cast<int>(full.feature_names.size()) - static_cast<int>(nested.feature_names.size()));
}

void write_eval_csv(std::ostream& out, const AmusementModel& m, const std::vector<EvalReport>& reports) {
  csv::write_row(out, {"split", "n", "accuracy", "base_rate", "tp", "fp", "tn", "fn", "subsample_seed", "split_seed",
                       "fit_seed"});
  for (const auto& r : reports) {
    csv::write_row(out, {r.split, std::to_string(r.n), format_double(r.accuracy), format_double(r.base_rate),
                         std::to_string(r.tp), std::to_string(r.fp), std::to_string(r.tn), std::to_string(r.fn),
                         std::to_string(m.subsample_seed), std::to_string(m.split_seed), std::to_string(m.fit_seed)});
  }
}

void write_inference_csv(std::ostream& out, const InferenceTable& table) {
  csv::write_row(out, {"coefficient", "estimate", "std_error", "z_value", "p_value", "stars", "p_bonferroni"});
  for (const auto& r : table.rows) {
    csv::write_row(out, {r.name, format_double(r.estimate), format_double(r.std_error), format_double(r.z),
                         format_double(r.p), r.stars, format_double(r.p_bonferroni)});
  }
}

void write_marginal_effects_csv(std::ostream& out, const std::vector<MarginalEffect>& effects) {
  csv::write_row(out, {"feature", "marginal_effect"});
  for (const auto& e : effects) csv::write_row(out, {e.feature, format_double(e.effect)});
}

}  // namespace wordfun
