#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "xmv/head.hpp"
#include "xmv/mining.hpp"
#include "xmv/types.hpp"
#include "xmv/valbuilder.hpp"

namespace xmv {

struct TrainConfig {
  double learning_rate = 0.005;
  double momentum = 0.9;
  std::size_t batch_size = 240;
  double margin = 0.3;
  std::size_t eval_interval = 200;
  std::size_t max_iterations = 10000;
  std::uint64_t seed = 0;
  double selection_far = 0.001;
  std::size_t d_out = 0;  // 0 means d_out = d_in
  AnchorModality anchors = AnchorModality::both;
  unsigned threads = 1;

  // Throws ConfigError on a non-positive rate/margin/interval, momentum
  // outside [0, 1), an odd batch or selection_far outside (0, 1).
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EvalPoint {
  std::size_t iteration = 0;
  double mean_batch_loss = 0.0;  // NaN at iteration 0 (no batches yet)
  double validation_tar = 0.0;
};

struct TrainHistory {
  std::vector<EvalPoint> points;
  std::size_t best_iteration = 0;

  const EvalPoint& best() const;
};

struct TrainResult {
  EmbeddingHead head;  // weights at best_iteration
  TrainHistory history;
};

// Called after mining on every iteration; lets callers dump triplets.
using BatchObserver =
    std::function<void(std::size_t iteration, const MiningBatch&, const std::vector<Triplet>&)>;

// Mean over folds of TAR at `far` on the fixed validation pairs.
double validation_tar(const EmbeddingHead& head, const PairedDataset& val_pool,
                      const ValidationSet& vs, double far);

// Triplet fine-tuning of an EmbeddingHead:
//   sample_batch → forward → mine_semi_hard → loss_and_gradient → momentum step,
// validating at iteration 0, every eval_interval iterations and after the
// last one. Returns the weights of the best validation point (ties go to
// the earliest). Identical inputs and seed give bit-identical results.
TrainResult train(const PairedDataset& train_set, const PairedDataset& val_pool,
                  const ValidationSet& validation, const TrainConfig& config,
                  const BatchObserver& observer = {});

// Initial head as train() builds it for this config and input dimension.
EmbeddingHead initial_head(const TrainConfig& config, std::size_t d_in);

// CSV `iteration,loss,val_tar`.
void write_history_csv(const TrainHistory& history, std::ostream& out);
TrainHistory read_history_csv(std::istream& in);

}  // namespace xmv
