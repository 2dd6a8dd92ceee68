#pragma once

// Features file, amusement model file, and the train/evaluate pipeline.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wordfun/amuse.hpp"
#include "wordfun/logistic.hpp"
#include "wordfun/mlp.hpp"
#include "wordfun/normalizer.hpp"

namespace wordfun {

// game_id, label, the 13 model columns, availability flags, and optionally
// the 18 per-guess columns.
std::vector<std::string> feature_csv_header(bool per_guess);

struct FeatureRow {
  std::string game_id;
  int label = 0;
  GameFeatures features;
};

// The numeric columns of a row in header order (everything after game_id, label).
std::vector<double> feature_row_values(const GameFeatures& features, bool per_guess);

void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows, bool per_guess);

struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<std::string> columns;  // numeric columns
  Eigen::MatrixXd values;

  std::size_t size() const noexcept { return ids.size(); }
  bool has_column(std::string_view name) const;
  Eigen::Index column(std::string_view name) const;  // throws InputError
  Eigen::MatrixXd select(const std::vector<std::string>& names) const;
  Eigen::MatrixXd select(const std::vector<std::string>& names, const std::vector<std::size_t>& rows) const;
  Eigen::VectorXd label_vector(const std::vector<std::size_t>& rows) const;
};

// Header must equal one of the two documented schemas; otherwise the error lists
// the missing and unexpected columns.
FeatureTable parse_feature_csv(std::string_view text, std::string_view source = "<memory>");
FeatureTable read_feature_csv(const std::filesystem::path& path);

std::vector<std::string> model_feature_names();

enum class Trainer { logistic, mlp };

struct AmusementTrainOptions {
  std::vector<std::string> features = model_feature_names();
  std::uint64_t subsample_seed = 1;
  std::uint64_t split_seed = 2;
  std::uint64_t fit_seed = 3;
  std::array<double, 3> fractions = {0.6, 0.2, 0.2};
  bool balance = true;
  Trainer trainer = Trainer::logistic;
  std::vector<double> l2_grid = {0.0};  // chosen by validation accuracy
  LogisticOptions logistic;
  MlpOptions mlp;
};

struct AmusementModel {
  static constexpr int kVersion = 1;

  Trainer trainer = Trainer::logistic;
  std::vector<std::string> feature_names;
  Normalizer<double> normalizer;
  LogisticModel<double> logistic;        // deployed logistic model
  LogisticModel<double> unregularized;   // l2 = 0 refit on the training split
  std::optional<Mlp<double>> mlp;
  MlpArchitecture architecture;
  int mlp_best_epoch = 0;

  std::uint64_t subsample_seed = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t fit_seed = 0;
  std::array<double, 3> fractions = {0.6, 0.2, 0.2};
  bool balanced = true;
  std::size_t n_input = 0;
  std::size_t n_sample = 0;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  std::size_t n_test = 0;
  std::string training_digest;  // FNV-1a of the sorted training game ids
  std::vector<double> l2_grid;
  std::vector<double> l2_validation_accuracy;
  double l2 = 0;

  // Raw feature rows in feature_names order.
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x_raw) const;
};

struct MarginalEffect {
  std::string feature;
  double effect = 0;
};

struct AmusementTraining {
  AmusementModel model;
  EvalReport train;
  EvalReport validation;
  EvalReport test;
  std::optional<InferenceTable> inference;  // logistic trainer only
  std::vector<MarginalEffect> marginal_effects;  // +1 sd, on the test split
  std::optional<AuxRegression> aux;             // when all model columns are present
  std::vector<std::size_t> sample;              // table rows after balancing
  SplitIndices split;                           // table rows
};

AmusementTraining train_amusement(const FeatureTable& table, const AmusementTrainOptions& options = {});

std::string amusement_model_to_json(const AmusementModel& model);
AmusementModel amusement_model_from_json(std::string_view text);

// Likelihood-ratio test from the stored unregularized log-likelihoods. Both
// models must be logistic, nested, and trained on the same rows.
LrtResult compare_models(const AmusementModel& full, const AmusementModel& nested);

// CSV writers with fixed column orders.
void write_eval_csv(std::ostream& out, const AmusementModel& model, const std::vector<EvalReport>& reports);
void write_inference_csv(std::ostream& out, const InferenceTable& table);
void write_marginal_effects_csv(std::ostream& out, const std::vector<MarginalEffect>& effects);

}  // namespace wordfun
