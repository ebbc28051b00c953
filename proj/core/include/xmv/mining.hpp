#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "xmv/embedding.hpp"
#include "xmv/rng.hpp"
#include "xmv/types.hpp"

namespace xmv {

// A mini-batch of whole subjects. With k = size()/2 subjects, batch index
// i < k is the selfie of subject i and index k + i is its document.
class MiningBatch {
 public:
  MiningBatch() = default;
  explicit MiningBatch(std::vector<std::size_t> subject_indices, std::vector<std::string> ids);

  std::size_t size() const noexcept { return 2 * subjects_.size(); }
  std::size_t num_subjects() const noexcept { return subjects_.size(); }

  // Dataset position and id of the subject in slot `k`.
  std::size_t dataset_index(std::size_t k) const { return subjects_[k]; }
  const std::string& subject_id(std::size_t k) const { return ids_[k]; }

  Modality modality(std::size_t i) const {
    return i < subjects_.size() ? Modality::selfie : Modality::document;
  }
  std::size_t subject_slot(std::size_t i) const {
    return i < subjects_.size() ? i : i - subjects_.size();
  }
  // The same subject's image of the other modality.
  std::size_t partner(std::size_t i) const {
    return i < subjects_.size() ? i + subjects_.size() : i - subjects_.size();
  }

  // Base features in batch order.
  std::vector<std::span<const float>> features(const PairedDataset& ds) const;

 private:
  std::vector<std::size_t> subjects_;
  std::vector<std::string> ids_;
};

// Draws batch_size/2 distinct subjects uniformly. Throws ConfigError for an
// odd or non-positive batch size, or more subjects than the dataset holds.
MiningBatch sample_batch(const PairedDataset& ds, std::size_t batch_size, Rng& rng);

enum class AnchorModality { both, selfie_only };

struct Triplet {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  double margin_used = 0.0;
  double d_ap = 0.0;
  double d_an = 0.0;
  bool semi_hard = false;  // false: chosen by the hardest-valid fallback
};

// Cross-modal semi-hard selection. Each anchor is paired with its own
// opposite-modality image; negatives are other subjects' images of the
// positive's modality. Per anchor, one negative is drawn uniformly from
//   { n : d_ap < d_an < d_ap + margin }   (squared Euclidean distances),
// falling back to the closest negative with d_an > d_ap, and skipping the
// anchor if there is none. Output is ordered by anchor index.
std::vector<Triplet> mine_semi_hard(const MiningBatch& batch,
                                    std::span<const Embedding> embeddings, double margin,
                                    Rng& rng, AnchorModality anchors = AnchorModality::both);

// max(0, ‖a−p‖² − ‖a−n‖² + margin).
double triplet_loss(const Embedding& a, const Embedding& p, const Embedding& n, double margin);

// Debug dump: `anchor,positive,negative,d_ap,d_an,loss`.
void write_triplets_csv(const std::vector<Triplet>& triplets, std::ostream& out);

}  // namespace xmv
