#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xmv/embedding.hpp"
#include "xmv/eval.hpp"
#include "xmv/rng.hpp"
#include "xmv/types.hpp"

namespace xmv {

using Embedder = std::function<Embedding(std::span<const float>)>;

struct PairRef {
  std::string selfie_subject;
  std::string doc_subject;
  friend bool operator==(const PairRef&, const PairRef&) = default;
};

struct ValidationFold {
  std::vector<std::string> subjects;  // every subject assigned to the fold
  std::vector<PairRef> authentic;
  std::vector<PairRef> impostor;
  friend bool operator==(const ValidationFold&, const ValidationFold&) = default;
};

struct ValidationSet {
  std::vector<ValidationFold> folds;

  std::size_t total_pairs() const;
  friend bool operator==(const ValidationSet&, const ValidationSet&) = default;
};

// Uniform subject-level split; train gets round(fraction·n) subjects. Both
// sides keep the dataset's original order. Throws ConfigError unless
// 0 < fraction < 1 and both sides are non-empty.
std::pair<PairedDataset, PairedDataset> split_subjects(const PairedDataset& ds,
                                                       double train_fraction, Rng& rng);

enum class ImpostorDirection {
  selfie_to_document,  // subject's selfie against other subjects' documents
  both,                // ... and other subjects' selfies against its document
};

struct HardValidationOptions {
  std::size_t folds = 10;
  std::size_t per_fold = 300;
  ImpostorDirection direction = ImpostorDirection::selfie_to_document;
};

// Hard-pair validation set:
//  1. shuffle the subjects into `folds` disjoint groups of near-equal size;
//  2. per group keep the `per_fold` subjects whose own document/selfie pair
//     scores lowest (hard positives);
//  3. for each kept subject emit its highest-scoring impostor among the
//     other kept subjects (hard negative).
// Ties are broken by ascending subject id. Throws InsufficientDataError if
// a group is smaller than per_fold.
ValidationSet build_hard_validation(const PairedDataset& val, const Embedder& embed,
                                    const HardValidationOptions& options, Rng& rng);

// Per-fold authentic/impostor scores of the fixed pair list under `embed`.
// Throws ConfigError if a referenced subject is missing from `ds`.
std::vector<ScoreSet> fold_score_sets(const PairedDataset& ds, const ValidationSet& vs,
                                      const Embedder& embed);

// CSV `fold,pair_type,selfie_subject,doc_subject`. Fold membership of
// subjects that were never selected is not stored.
void write_validation_csv(const ValidationSet& vs, std::ostream& out);
ValidationSet read_validation_csv(std::istream& in);

void save_validation(const ValidationSet& vs, const std::filesystem::path& path);
ValidationSet load_validation(const std::filesystem::path& path);

}  // namespace xmv
