#include "xmv/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>

#include "json.hpp"
#include "xmv/error.hpp"
#include "xmv/text_format.hpp"

namespace xmv::cli {

namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

long long to_int(const std::string& v, std::string_view key) {
  auto x = parse_int(v);
  if (!x) throw ConfigError("setting '" + std::string(key) + "' expects an integer, got '" + v + "'");
  return *x;
}

std::size_t to_count(const std::string& v, std::string_view key) {
  const long long x = to_int(v, key);
  if (x < 0) throw ConfigError("setting '" + std::string(key) + "' must not be negative");
  return static_cast<std::size_t>(x);
}

double to_real(const std::string& v, std::string_view key) {
  auto x = parse_double(v);
  if (!x) throw ConfigError("setting '" + std::string(key) + "' expects a number, got '" + v + "'");
  return *x;
}

bool to_bool(const std::string& v, std::string_view key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("setting '" + std::string(key) + "' expects true or false");
}

// List settings accumulate one element per call.
const std::map<std::string_view, Setter>& setters() {
  static const std::map<std::string_view, Setter> table = {
      {"out", [](auto& c, const auto& v) { c.out_dir = v; }},
      {"data", [](auto& c, const auto& v) { c.datasets.emplace_back(v); }},
      {"checkpoint", [](auto& c, const auto& v) { c.checkpoint = v; }},
      {"scores", [](auto& c, const auto& v) { c.scores = v; }},
      {"history", [](auto& c, const auto& v) { c.histories.emplace_back(v); }},
      {"eval", [](auto& c, const auto& v) { c.evals.emplace_back(v); }},
      {"histograms", [](auto& c, const auto& v) { c.histograms = v; }},
      {"far", [](auto& c, const auto& v) { c.far_targets.push_back(parse_far(v)); }},
      {"group_by", [](auto& c, const auto& v) { c.group_by.push_back(v); }},
      {"seed", [](auto& c, const auto& v) {
         const long long s = to_int(v, "seed");
         if (s < 0) throw ConfigError("seed must not be negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"learning_rate", [](auto& c, const auto& v) { c.train.learning_rate = to_real(v, "learning_rate"); }},
      {"momentum", [](auto& c, const auto& v) { c.train.momentum = to_real(v, "momentum"); }},
      {"batch_size", [](auto& c, const auto& v) { c.train.batch_size = to_count(v, "batch_size"); }},
      {"margin", [](auto& c, const auto& v) { c.train.margin = to_real(v, "margin"); }},
      {"eval_interval", [](auto& c, const auto& v) { c.train.eval_interval = to_count(v, "eval_interval"); }},
      {"max_iterations", [](auto& c, const auto& v) { c.train.max_iterations = to_count(v, "max_iterations"); }},
      {"selection_far", [](auto& c, const auto& v) { c.train.selection_far = parse_far(v); }},
      {"d_out", [](auto& c, const auto& v) { c.train.d_out = to_count(v, "d_out"); }},
      {"anchor_modality", [](auto& c, const auto& v) {
         if (v == "both") {
           c.train.anchors = AnchorModality::both;
         } else if (v == "selfie_only") {
           c.train.anchors = AnchorModality::selfie_only;
         } else {
           throw ConfigError("anchor_modality must be 'both' or 'selfie_only'");
         }
       }},
      {"train_fraction", [](auto& c, const auto& v) { c.train_fraction = to_real(v, "train_fraction"); }},
      {"val_folds", [](auto& c, const auto& v) { c.val_folds = to_count(v, "val_folds"); }},
      {"val_per_fold", [](auto& c, const auto& v) { c.val_per_fold = to_count(v, "val_per_fold"); }},
      {"impostor_direction", [](auto& c, const auto& v) {
         if (v == "selfie_to_document") {
           c.impostor_direction = ImpostorDirection::selfie_to_document;
         } else if (v == "both") {
           c.impostor_direction = ImpostorDirection::both;
         } else {
           throw ConfigError("impostor_direction must be 'selfie_to_document' or 'both'");
         }
       }},
      {"n_train_subjects", [](auto& c, const auto& v) { c.synth.n_train_subjects = to_count(v, "n_train_subjects"); }},
      {"n_test_per_subset", [](auto& c, const auto& v) { c.synth.n_test_per_subset = to_count(v, "n_test_per_subset"); }},
      {"d_in", [](auto& c, const auto& v) { c.synth.d_in = to_count(v, "d_in"); }},
      {"modality_offset_norm", [](auto& c, const auto& v) { c.synth.modality_offset_norm = to_real(v, "modality_offset_norm"); }},
      {"drift_per_year", [](auto& c, const auto& v) { c.synth.drift_per_year = to_real(v, "drift_per_year"); }},
      {"drift_rank", [](auto& c, const auto& v) { c.synth.drift_rank = to_count(v, "drift_rank"); }},
      {"noise_sigma", [](auto& c, const auto& v) { c.synth.noise_sigma = to_real(v, "noise_sigma"); }},
      {"yellow_extra_noise", [](auto& c, const auto& v) { c.synth.yellow_extra_noise = to_real(v, "yellow_extra_noise"); }},
      {"gender_fraction_male", [](auto& c, const auto& v) { c.synth.gender_fraction_male = to_real(v, "gender_fraction_male"); }},
      {"model_name", [](auto& c, const auto& v) { c.model_name = v; }},
      {"mode", [](auto& c, const auto& v) { c.analyze_mode = v; }},
      {"draws", [](auto& c, const auto& v) { c.n_draws = to_count(v, "draws"); }},
      {"histogram_bins", [](auto& c, const auto& v) { c.histogram_bins = to_count(v, "histogram_bins"); }},
      {"write_scores", [](auto& c, const auto& v) { c.write_scores = to_bool(v, "write_scores"); }},
      {"binary", [](auto& c, const auto& v) { c.binary = to_bool(v, "binary"); }},
      {"dump_triplets", [](auto& c, const auto& v) { c.dump_triplets = to_bool(v, "dump_triplets"); }},
      {"threads", [](auto& c, const auto& v) { c.threads = static_cast<unsigned>(to_count(v, "threads")); }},
  };
  return table;
}

std::string scalar_text(const nlohmann::json& v, std::string_view key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return format_double(v.get<double>());
  throw ConfigError("setting '" + std::string(key) + "' has an unsupported JSON type");
}

bool is_list(SettingType t) {
  return t == SettingType::path_list || t == SettingType::far_list || t == SettingType::text_list;
}

const SettingInfo& info_for(std::string_view key) {
  for (const auto& s : settings()) {
    if (s.key == key) return s;
  }
  throw ConfigError("unknown setting '" + std::string(key) + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (far_targets.empty()) throw ConfigError("at least one FAR target is required");
  for (double f : far_targets) {
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("FAR targets must lie in (0, 1)");
  }
  if (!std::is_sorted(far_targets.begin(), far_targets.end()) ||
      std::adjacent_find(far_targets.begin(), far_targets.end()) != far_targets.end()) {
    throw ConfigError("FAR targets must be strictly ascending");
  }
  for (const auto& g : group_by) {
    if (g != "subset" && g != "gender" && g != "card_format") {
      throw ConfigError("group_by entries must be subset, gender or card_format, got '" + g + "'");
    }
  }
}

std::uint64_t ExperimentConfig::require_seed(std::string_view command) const {
  if (!seed) throw ConfigError("'" + std::string(command) + "' requires an explicit --seed");
  return *seed;
}

double parse_far(std::string_view text) {
  std::string_view body = text;
  double scale = 1.0;
  if (!body.empty() && body.back() == '%') {
    body.remove_suffix(1);
    scale = 0.01;
  }
  auto v = parse_double(body);
  if (!v) throw ConfigError("cannot parse FAR '" + std::string(text) + "'");
  const double far = *v * scale;
  if (!(far > 0.0 && far < 1.0)) {
    throw ConfigError("FAR '" + std::string(text) + "' is outside (0, 1)");
  }
  return far;
}

const std::vector<SettingInfo>& settings() {
  using T = SettingType;
  static const std::vector<SettingInfo> table = {
      {"out", "--out", T::path, "Output directory (must exist)"},
      {"data", "--data", T::path_list, "Dataset file (embeddings CSV or .xmv); repeatable"},
      {"checkpoint", "--checkpoint", T::path, "Head checkpoint; absent means the baseline head"},
      {"scores", "--scores", T::path, "Precomputed score CSV to evaluate instead of a dataset"},
      {"history", "--history", T::path_list, "history.csv from train; repeatable"},
      {"eval", "--eval", T::path_list, "eval.csv from eval; repeatable"},
      {"histograms", "--histograms", T::path, "Histogram CSV from analyze"},
      {"far", "--far", T::far_list, "FAR target as fraction or percent (e.g. 0.01%); repeatable"},
      {"group_by", "--group-by", T::text_list, "Grouping for eval: subset, gender, card_format"},
      {"seed", "--seed", T::integer, "Random seed (required by randomized commands)"},
      {"learning_rate", "--learning-rate", T::real, "SGD learning rate"},
      {"momentum", "--momentum", T::real, "SGD momentum"},
      {"batch_size", "--batch-size", T::integer, "Images per mini-batch (even)"},
      {"margin", "--margin", T::real, "Triplet margin"},
      {"eval_interval", "--eval-interval", T::integer, "Iterations between validation runs"},
      {"max_iterations", "--max-iterations", T::integer, "Training iterations"},
      {"selection_far", "--selection-far", T::real, "FAR used for checkpoint selection"},
      {"d_out", "--d-out", T::integer, "Embedding dimension (0 = input dimension)"},
      {"anchor_modality", "--anchor-modality", T::text, "both or selfie_only"},
      {"train_fraction", "--train-fraction", T::real, "Share of subjects used for training"},
      {"val_folds", "--val-folds", T::integer, "Validation folds"},
      {"val_per_fold", "--val-per-fold", T::integer, "Hard pairs kept per fold"},
      {"impostor_direction", "--impostor-direction", T::text, "selfie_to_document or both"},
      {"n_train_subjects", "--n-train-subjects", T::integer, "Synthetic training subjects"},
      {"n_test_per_subset", "--n-test-per-subset", T::integer, "Synthetic subjects per test subset"},
      {"d_in", "--d-in", T::integer, "Synthetic feature dimension"},
      {"modality_offset_norm", "--modality-offset-norm", T::real, "Norm of the document offset"},
      {"drift_per_year", "--drift-per-year", T::real, "Ageing drift per year of gap"},
      {"drift_rank", "--drift-rank", T::integer, "Rank of the ageing subspace (0 = full)"},
      {"noise_sigma", "--noise-sigma", T::real, "Per-image noise norm"},
      {"yellow_extra_noise", "--yellow-extra-noise", T::real, "Extra noise norm on yellow cards"},
      {"gender_fraction_male", "--gender-fraction-male", T::real, "Probability a subject is male"},
      {"model_name", "--model-name", T::text, "Model label in eval output"},
      {"mode", "--mode", T::text, "Analysis mode: gender or card_format"},
      {"draws", "--draws", T::integer, "Resampling draws for card_format mode"},
      {"histogram_bins", "--histogram-bins", T::integer, "Histogram bins over [-1, 1]"},
      {"write_scores", "--write-scores", T::boolean, "Also write per-pair scores"},
      {"binary", "--binary", T::boolean, "Write datasets in the binary envelope"},
      {"dump_triplets", "--dump-triplets", T::boolean, "Write the first batch's triplets"},
      {"threads", "--threads", T::integer, "Worker threads (0 = all cores)"},
  };
  return table;
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, const std::string& value) {
  info_for(key);
  setters().at(key)(cfg, value);
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    const SettingInfo& info = info_for(key);
    if (is_list(info.type)) {
      // A list in the file replaces the defaults.
      if (key == "far") cfg.far_targets.clear();
      if (key == "group_by") cfg.group_by.clear();
      if (key == "data") cfg.datasets.clear();
      if (value.is_array()) {
        for (const auto& v : value) apply_setting(cfg, key, scalar_text(v, key));
      } else {
        apply_setting(cfg, key, scalar_text(value, key));
      }
    } else {
      apply_setting(cfg, key, scalar_text(value, key));
    }
  }
}

}  // namespace xmv::cli
