#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xmv/synth.hpp"
#include "xmv/trainer.hpp"
#include "xmv/valbuilder.hpp"

namespace xmv::cli {

// Everything a subcommand can be told. Filled from defaults, then a
// key-value JSON config file, then explicit command-line flags.
struct ExperimentConfig {
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> datasets;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> scores;
  std::vector<std::filesystem::path> histories;
  std::vector<std::filesystem::path> evals;
  std::optional<std::filesystem::path> histograms;

  std::vector<double> far_targets{0.0001, 0.001};
  std::vector<std::string> group_by{"subset"};

  std::optional<std::uint64_t> seed;
  TrainConfig train;
  SynthConfig synth;
  double train_fraction = 0.9;
  std::size_t val_folds = 10;
  std::size_t val_per_fold = 300;
  ImpostorDirection impostor_direction = ImpostorDirection::selfie_to_document;

  std::string model_name;
  std::string analyze_mode = "gender";
  std::size_t n_draws = 10;
  std::size_t histogram_bins = 64;
  bool write_scores = false;
  bool binary = false;
  bool dump_triplets = false;
  unsigned threads = 0;

  // Throws ConfigError unless FAR targets are ascending and inside (0, 1)
  // and group_by names are known.
  void validate() const;

  // Seed, or ConfigError naming the command that needs one.
  std::uint64_t require_seed(std::string_view command) const;
};

// "0.01%" → 0.0001, "0.0001" → 0.0001. Throws ConfigError on junk or a
// value outside (0, 1).
double parse_far(std::string_view text);

enum class SettingType { integer, real, text, boolean, path, path_list, far_list, text_list };

struct SettingInfo {
  std::string_view key;    // JSON key, e.g. "max_iterations"
  std::string_view flag;   // command-line flag, e.g. "--max-iterations"
  SettingType type;
  std::string_view help;
};

// Every recognised setting, shared by the config file and the flags.
const std::vector<SettingInfo>& settings();

// Applies one setting given as text (flag form). Throws ConfigError for
// unknown keys or unparsable values.
void apply_setting(ExperimentConfig& cfg, std::string_view key, const std::string& value);

// Applies every key of a flat JSON object. Numbers, strings, booleans and
// arrays of those are accepted.
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

}  // namespace xmv::cli
