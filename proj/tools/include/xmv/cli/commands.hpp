#pragma once

#include <iosfwd>

#include "xmv/cli/config.hpp"

namespace xmv::cli {

// Each command writes fixed-name artifacts into cfg.out_dir, which must
// already exist, and a short human summary to `log`.

// train.csv (or train.xmv), one file per test subset named by its label,
// truth.csv.
void cmd_synth(const ExperimentConfig& cfg, std::ostream& log);

// checkpoint.json, history.csv, validation.csv, triplets.csv (optional).
void cmd_train(const ExperimentConfig& cfg, std::ostream& log);

// eval.csv, eval.json, scores.csv (optional).
void cmd_eval(const ExperimentConfig& cfg, std::ostream& log);

// gender mode: gender.csv, gender.json, histograms.csv.
// card_format mode: card_format.csv, card_format_summary.csv, card_format.json.
void cmd_analyze(const ExperimentConfig& cfg, std::ostream& log);

// report/*.svg plus the CSV each chart was drawn from.
void cmd_report(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace xmv::cli
