#include "xmv/mining.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "xmv/error.hpp"
#include "xmv/text_format.hpp"

namespace xmv {

MiningBatch::MiningBatch(std::vector<std::size_t> subject_indices, std::vector<std::string> ids)
    : subjects_(std::move(subject_indices)), ids_(std::move(ids)) {
  if (subjects_.size() != ids_.size()) throw DimensionError("batch ids and indices differ in length");
}

std::vector<std::span<const float>> MiningBatch::features(const PairedDataset& ds) const {
  std::vector<std::span<const float>> out(size());
  for (std::size_t k = 0; k < subjects_.size(); ++k) {
    const Subject& s = ds[subjects_[k]];
    out[k] = s.selfie_feature;
    out[k + subjects_.size()] = s.document_feature;
  }
  return out;
}

MiningBatch sample_batch(const PairedDataset& ds, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0 || batch_size % 2 != 0) {
    throw ConfigError("batch size must be a positive even number, got " +
                      std::to_string(batch_size));
  }
  const std::size_t k = batch_size / 2;
  if (k > ds.size()) {
    throw ConfigError("batch of " + std::to_string(batch_size) + " images needs " +
                      std::to_string(k) + " subjects, dataset has " + std::to_string(ds.size()));
  }
  // Partial Fisher-Yates: the first k slots end up a uniform sample.
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(order.size() - i);
    std::swap(order[i], order[j]);
  }
  order.resize(k);
  std::vector<std::string> ids;
  ids.reserve(k);
  for (std::size_t idx : order) ids.push_back(ds[idx].id);
  return MiningBatch(std::move(order), std::move(ids));
}

std::vector<Triplet> mine_semi_hard(const MiningBatch& batch,
                                    std::span<const Embedding> embeddings, double margin,
                                    Rng& rng, AnchorModality anchors) {
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (embeddings.size() != batch.size()) {
    throw DimensionError("expected " + std::to_string(batch.size()) + " embeddings, got " +
                         std::to_string(embeddings.size()));
  }
  for (const auto& e : embeddings) {
    if (e.dim() == 0) throw NormalizationError("empty embedding in batch");
  }

  const std::size_t k = batch.num_subjects();
  std::vector<Triplet> out;
  out.reserve(batch.size());
  std::vector<std::size_t> window;
  std::vector<double> d_neg(k);

  for (std::size_t a = 0; a < batch.size(); ++a) {
    if (anchors == AnchorModality::selfie_only && batch.modality(a) != Modality::selfie) continue;
    const std::size_t p = batch.partner(a);
    const double d_ap = squared_distance(embeddings[a], embeddings[p]);
    // Candidates share the positive's modality: a contiguous half of the batch.
    const std::size_t base = p < k ? 0 : k;
    const std::size_t own = batch.subject_slot(a);

    window.clear();
    std::size_t hardest = k;
    for (std::size_t s = 0; s < k; ++s) {
      if (s == own) continue;
      const double d_an = squared_distance(embeddings[a], embeddings[base + s]);
      d_neg[s] = d_an;
      if (d_an > d_ap && d_an < d_ap + margin) window.push_back(s);
      if (d_an > d_ap && (hardest == k || d_an < d_neg[hardest])) hardest = s;
    }

    std::size_t chosen;
    bool semi_hard;
    if (!window.empty()) {
      chosen = window[rng.uniform_index(window.size())];
      semi_hard = true;
    } else if (hardest != k) {
      chosen = hardest;
      semi_hard = false;
    } else {
      continue;
    }
    out.push_back(Triplet{a, p, base + chosen, margin, d_ap, d_neg[chosen], semi_hard});
  }
  return out;
}

double triplet_loss(const Embedding& a, const Embedding& p, const Embedding& n, double margin) {
  return std::max(0.0, squared_distance(a, p) - squared_distance(a, n) + margin);
}

void write_triplets_csv(const std::vector<Triplet>& triplets, std::ostream& out) {
  out << "anchor,positive,negative,d_ap,d_an,loss\n";
  for (const auto& t : triplets) {
    out << t.anchor << ',' << t.positive << ',' << t.negative << ',' << format_double(t.d_ap)
        << ',' << format_double(t.d_an) << ','
        << format_double(std::max(0.0, t.d_ap - t.d_an + t.margin_used)) << '\n';
  }
}

}  // namespace xmv
