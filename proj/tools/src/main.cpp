#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xmv/cli/commands.hpp"
#include "xmv/error.hpp"

namespace {

using namespace xmv::cli;

using Command = void (*)(const ExperimentConfig&, std::ostream&);

struct Subcommand {
  const char* name;
  const char* help;
  Command run;
  std::vector<std::string_view> keys;
};

const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> table = {
      {"synth", "Generate a synthetic document/selfie feature corpus", cmd_synth,
       {"n_train_subjects", "n_test_per_subset", "d_in", "modality_offset_norm", "drift_per_year",
        "drift_rank", "noise_sigma", "yellow_extra_noise", "gender_fraction_male", "binary"}},
      {"train", "Fine-tune an embedding head with cross-modal triplets", cmd_train,
       {"data", "learning_rate", "momentum", "batch_size", "margin", "eval_interval",
        "max_iterations", "selection_far", "d_out", "anchor_modality", "train_fraction",
        "val_folds", "val_per_fold", "impostor_direction", "dump_triplets"}},
      {"eval", "TAR at fixed FAR per subset", cmd_eval,
       {"data", "checkpoint", "scores", "far", "group_by", "model_name", "write_scores"}},
      {"analyze", "Gender or card-format score analysis", cmd_analyze,
       {"data", "checkpoint", "far", "mode", "draws", "histogram_bins"}},
      {"report", "Render SVG charts from train/eval/analyze outputs", cmd_report,
       {"history", "eval", "histograms"}},
  };
  return table;
}

const SettingInfo& info(std::string_view key) {
  for (const auto& s : settings()) {
    if (s.key == key) return s;
  }
  throw std::logic_error("no setting " + std::string(key));
}

bool is_list(SettingType t) {
  return t == SettingType::path_list || t == SettingType::far_list ||
         t == SettingType::text_list;
}

struct Captured {
  std::optional<std::string> config;
  std::map<std::string_view, std::vector<std::string>> lists;
  std::map<std::string_view, std::string> scalars;
  std::map<std::string_view, bool> flags;
};

int exit_code_for(const xmv::Error& e) {
  if (dynamic_cast<const xmv::ConfigError*>(&e)) return 1;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-modal document/selfie face verification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "xmv 1.0.0");

  std::map<std::string, Captured> captured;
  for (const auto& sc : subcommands()) {
    CLI::App* sub = app.add_subcommand(sc.name, sc.help);
    Captured& cap = captured[sc.name];
    sub->add_option("--config", cap.config, "Key-value JSON config file");
    std::vector<std::string_view> keys = {"out", "seed", "threads"};
    keys.insert(keys.end(), sc.keys.begin(), sc.keys.end());
    for (auto key : keys) {
      const SettingInfo& s = info(key);
      const std::string flag(s.flag);
      const std::string help(s.help);
      if (s.type == SettingType::boolean) {
        sub->add_flag(flag, cap.flags[key], help);
      } else if (is_list(s.type)) {
        sub->add_option(flag, cap.lists[key], help);
      } else {
        sub->add_option_function<std::string>(
            flag, [&cap, key](const std::string& v) { cap.scalars[key] = v; }, help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    for (const auto& sc : subcommands()) {
      if (!app.got_subcommand(sc.name)) continue;
      const Captured& cap = captured.at(sc.name);
      ExperimentConfig cfg;
      if (cap.config) apply_config_file(cfg, *cap.config);
      for (const auto& [key, values] : cap.lists) {
        if (values.empty()) continue;
        // Flags replace whatever the defaults or the config file listed.
        if (key == "far") cfg.far_targets.clear();
        if (key == "group_by") cfg.group_by.clear();
        if (key == "data") cfg.datasets.clear();
        if (key == "history") cfg.histories.clear();
        if (key == "eval") cfg.evals.clear();
        for (const auto& v : values) apply_setting(cfg, key, v);
      }
      for (const auto& [key, value] : cap.scalars) apply_setting(cfg, key, value);
      for (const auto& [key, on] : cap.flags) {
        if (on) apply_setting(cfg, key, "true");
      }
      sc.run(cfg, std::cout);
    }
  } catch (const xmv::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
