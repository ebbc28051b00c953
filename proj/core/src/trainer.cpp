#include "xmv/trainer.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "xmv/error.hpp"
#include "xmv/eval.hpp"
#include "xmv/text_format.hpp"

namespace xmv {

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kTrainStream = 2;

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (batch_size == 0 || batch_size % 2 != 0) throw ConfigError("batch_size must be positive and even");
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (eval_interval == 0) throw ConfigError("eval_interval must be positive");
  if (!(selection_far > 0.0 && selection_far < 1.0)) {
    throw ConfigError("selection_far must lie in (0, 1)");
  }
}

const EvalPoint& TrainHistory::best() const {
  for (const auto& p : points) {
    if (p.iteration == best_iteration) return p;
  }
  throw ConfigError("history has no entry for the best iteration");
}

double validation_tar(const EmbeddingHead& head, const PairedDataset& val_pool,
                      const ValidationSet& vs, double far) {
  if (vs.folds.empty()) throw ConfigError("validation set is empty");
  const auto sets = fold_score_sets(val_pool, vs, [&head](std::span<const float> x) {
    return forward(head, x);
  });
  double sum = 0.0;
  for (const auto& s : sets) sum += tar_at_far(s, far).tar;
  return sum / static_cast<double>(sets.size());
}

EmbeddingHead initial_head(const TrainConfig& config, std::size_t d_in) {
  Rng init_rng(Rng::derive(config.seed, kInitStream));
  const std::size_t d_out = config.d_out == 0 ? d_in : config.d_out;
  return EmbeddingHead::initialize(d_out, d_in, init_rng);
}

TrainResult train(const PairedDataset& train_set, const PairedDataset& val_pool,
                  const ValidationSet& validation, const TrainConfig& config,
                  const BatchObserver& observer) {
  config.validate();
  if (validation.folds.empty() || validation.total_pairs() == 0) {
    throw ConfigError("validation set is empty");
  }
  if (train_set.empty()) throw ConfigError("training set is empty");

  EmbeddingHead head = initial_head(config, train_set.dim());
  Rng rng(Rng::derive(config.seed, kTrainStream));
  std::vector<double> velocity(head.num_params(), 0.0);

  TrainResult result;
  result.head = head;
  double best_tar = -1.0;
  auto record = [&](std::size_t iteration, double loss) {
    const double tar = validation_tar(head, val_pool, validation, config.selection_far);
    result.history.points.push_back({iteration, loss, tar});
    if (tar > best_tar) {
      best_tar = tar;
      result.history.best_iteration = iteration;
      result.head = head;
    }
  };

  record(0, std::numeric_limits<double>::quiet_NaN());
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  std::vector<TripletFeatures> features;
  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    const MiningBatch batch = sample_batch(train_set, config.batch_size, rng);
    const auto inputs = batch.features(train_set);
    const auto embedded = forward_all(head, inputs, config.threads);
    const auto triplets = mine_semi_hard(batch, embedded, config.margin, rng, config.anchors);
    if (observer) observer(it, batch, triplets);

    features.clear();
    for (const auto& t : triplets) {
      features.push_back({inputs[t.anchor], inputs[t.positive], inputs[t.negative]});
    }
    if (!features.empty()) {
      const LossGradient lg = loss_and_gradient(head, features, config.margin);
      sgd_momentum_step(head.params(), lg.grad, velocity, config.learning_rate, config.momentum);
      loss_sum += lg.loss;
    } else {
      const std::vector<double> zero(head.num_params(), 0.0);
      sgd_momentum_step(head.params(), zero, velocity, config.learning_rate, config.momentum);
    }
    ++loss_count;

    if (it % config.eval_interval == 0 || it == config.max_iterations) {
      record(it, loss_sum / static_cast<double>(loss_count));
      loss_sum = 0.0;
      loss_count = 0;
    }
  }
  return result;
}

void write_history_csv(const TrainHistory& history, std::ostream& out) {
  out << "iteration,loss,val_tar\n";
  for (const auto& p : history.points) {
    out << p.iteration << ',' << format_double(p.mean_batch_loss) << ','
        << format_double(p.validation_tar) << '\n';
  }
}

TrainHistory read_history_csv(std::istream& in) {
  std::string line;
  std::size_t row = 1;
  if (!std::getline(in, line) || trim_line_end(line) != "iteration,loss,val_tar") {
    throw ParseError("expected header 'iteration,loss,val_tar'", row);
  }
  TrainHistory h;
  double best = -1.0;
  while (std::getline(in, line)) {
    ++row;
    const auto text = trim_line_end(line);
    if (text.empty()) continue;
    const auto f = split_csv_line(text);
    if (f.size() != 3) throw ParseError("expected 3 columns", row);
    auto it = parse_int(f[0]);
    auto loss = f[1] == "nan" ? std::optional<double>(std::numeric_limits<double>::quiet_NaN())
                              : parse_double(f[1]);
    auto tar = parse_double(f[2]);
    if (!it || *it < 0 || !loss || !tar) throw ParseError("bad history row", row);
    h.points.push_back({static_cast<std::size_t>(*it), *loss, *tar});
    if (*tar > best) {
      best = *tar;
      h.best_iteration = static_cast<std::size_t>(*it);
    }
  }
  if (h.points.empty()) throw ParseError("no records");
  return h;
}

}  // namespace xmv
