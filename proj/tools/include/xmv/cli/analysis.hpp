#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xmv/eval.hpp"
#include "xmv/head.hpp"
#include "xmv/score_file.hpp"
#include "xmv/types.hpp"

namespace xmv::cli {

struct NamedGroup {
  std::string name;
  PairedDataset data;
};

// Splits subjects by the requested keys ("subset", "gender",
// "card_format"), joined with '/' in that order. Groups are sorted by name.
std::vector<NamedGroup> group_dataset(const PairedDataset& ds,
                                      const std::vector<std::string>& keys);

// Scores every cross-modal pair of a group under `head`: each subject's
// own pair is authentic, each selfie against every other subject's
// document is an impostor, giving n authentic and n·(n−1) impostor scores.
// Throws InsufficientDataError for fewer than two subjects.
ScoreSet score_group(const PairedDataset& group, const EmbeddingHead& head, unsigned threads,
                     std::vector<ScoredPair>* pairs = nullptr);

struct GroupEvalRow {
  std::string model;
  std::string group;
  std::size_t n_subjects = 0;
  std::size_t n_authentic = 0;
  std::size_t n_impostor = 0;
  EvalResult result;
};

std::vector<GroupEvalRow> evaluate_groups(const std::vector<NamedGroup>& groups,
                                          const EmbeddingHead& head,
                                          const std::vector<double>& far_targets,
                                          const std::string& model, unsigned threads,
                                          std::vector<ScoredPair>* pairs = nullptr);

void write_eval_csv(const std::vector<GroupEvalRow>& rows, std::ostream& out);
std::vector<GroupEvalRow> read_eval_csv(std::istream& in);
std::string eval_rows_to_json(const std::vector<GroupEvalRow>& rows);

// Gender analysis: one ScoreSet per gender with impostors restricted to
// same-gender pairs inside the same subset. Rows are produced for all
// subsets combined ("all") and for each subset separately.
struct GenderRow {
  std::string gender;
  std::string subset;
  std::size_t n_subjects = 0;
  ScoreStats authentic;
  ScoreStats impostor;
  double d_prime = 0.0;
  std::vector<EvalResult> results;  // one per FAR target
};

struct GenderAnalysis {
  std::vector<GenderRow> rows;
  std::vector<double> bin_edges;  // histogram_bins + 1 edges over [-1, 1]
  // Histogram counts per gender of the combined scores.
  struct Histogram {
    std::string gender;
    std::vector<std::size_t> authentic;
    std::vector<std::size_t> impostor;
  };
  std::vector<Histogram> histograms;
};

// Throws InsufficientDataError unless both genders have at least two
// subjects in some subset.
GenderAnalysis analyze_gender(const PairedDataset& ds, const EmbeddingHead& head,
                              const std::vector<double>& far_targets, std::size_t bins,
                              unsigned threads);

// Card-format analysis. In every subset holding both formats (at least two
// subjects each), the majority format is resampled `draws` times down to
// the minority count. Mean authentic and impostor scores are reported per
// draw and for the minority group; impostors are the cross pairs inside
// each group.
struct CardFormatRow {
  std::string subset;
  CardFormat format = CardFormat::blue;
  bool minority = false;
  std::size_t draw = 0;  // 0 for the minority row
  std::size_t n_subjects = 0;
  double mean_authentic = 0.0;
  double mean_impostor = 0.0;
};

struct CardFormatSummary {
  std::string subset;
  CardFormat minority = CardFormat::blue;
  std::size_t minority_count = 0;
  std::size_t majority_count = 0;
  // Yellow authentic mean below blue in every draw.
  bool yellow_authentic_below_blue = false;
  bool yellow_impostor_above_blue = false;
};

struct CardFormatAnalysis {
  std::vector<CardFormatRow> rows;
  std::vector<CardFormatSummary> summaries;
};

// Throws InsufficientDataError when no subset holds both formats.
CardFormatAnalysis analyze_card_format(const PairedDataset& ds, const EmbeddingHead& head,
                                       std::size_t draws, std::uint64_t seed, unsigned threads);

}  // namespace xmv::cli
