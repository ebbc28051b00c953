#include "xmv/valbuilder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "xmv/error.hpp"
#include "xmv/text_format.hpp"

namespace xmv {

std::size_t ValidationSet::total_pairs() const {
  std::size_t n = 0;
  for (const auto& f : folds) n += f.authentic.size() + f.impostor.size();
  return n;
}

std::pair<PairedDataset, PairedDataset> split_subjects(const PairedDataset& ds,
                                                       double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = ds.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n) {
    throw ConfigError("split of " + std::to_string(n) + " subjects leaves one side empty");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {ds.subset(train), ds.subset(val)};
}

ValidationSet build_hard_validation(const PairedDataset& val, const Embedder& embed,
                                    const HardValidationOptions& options, Rng& rng) {
  if (options.folds == 0) throw ConfigError("need at least one fold");
  if (options.per_fold < 2) throw ConfigError("need at least two subjects per fold");
  const std::size_t n = val.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));

  ValidationSet vs;
  vs.folds.resize(options.folds);
  for (std::size_t f = 0; f < options.folds; ++f) {
    const std::size_t begin = f * n / options.folds;
    const std::size_t end = (f + 1) * n / options.folds;
    if (end - begin < options.per_fold) {
      throw InsufficientDataError("fold " + std::to_string(f) + " has " +
                                  std::to_string(end - begin) + " subjects, need " +
                                  std::to_string(options.per_fold));
    }
    std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                     order.begin() + static_cast<std::ptrdiff_t>(end));
    ValidationFold& fold = vs.folds[f];
    for (std::size_t m : members) fold.subjects.push_back(val[m].id);

    std::vector<Embedding> docs, selfies;
    docs.reserve(members.size());
    selfies.reserve(members.size());
    for (std::size_t m : members) {
      docs.push_back(embed(val[m].document_feature));
      selfies.push_back(embed(val[m].selfie_feature));
    }

    // Hard positives: lowest own-pair scores.
    std::vector<std::size_t> rank(members.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::vector<double> own(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) own[i] = cosine_similarity(selfies[i], docs[i]);
    std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
      if (own[a] != own[b]) return own[a] < own[b];
      return val[members[a]].id < val[members[b]].id;
    });
    rank.resize(options.per_fold);

    for (std::size_t i : rank) {
      const std::string& id = val[members[i]].id;
      fold.authentic.push_back({id, id});
    }

    // Hard negatives among the selected subjects.
    for (std::size_t i : rank) {
      double best = -std::numeric_limits<double>::infinity();
      PairRef best_pair;
      std::string best_other;
      auto consider = [&](double score, std::size_t selfie_of, std::size_t doc_of,
                          std::size_t other) {
        const std::string& other_id = val[members[other]].id;
        if (score > best || (score == best && other_id < best_other)) {
          best = score;
          best_other = other_id;
          best_pair = {val[members[selfie_of]].id, val[members[doc_of]].id};
        }
      };
      for (std::size_t j : rank) {
        if (j == i) continue;
        consider(cosine_similarity(selfies[i], docs[j]), i, j, j);
        if (options.direction == ImpostorDirection::both) {
          consider(cosine_similarity(selfies[j], docs[i]), j, i, j);
        }
      }
      fold.impostor.push_back(std::move(best_pair));
    }
  }
  return vs;
}

std::vector<ScoreSet> fold_score_sets(const PairedDataset& ds, const ValidationSet& vs,
                                      const Embedder& embed) {
  std::vector<ScoreSet> out;
  out.reserve(vs.folds.size());
  for (const auto& fold : vs.folds) {
    std::unordered_map<std::string, Embedding> doc_cache, selfie_cache;
    auto lookup = [&](const std::string& id) -> const Subject& {
      auto idx = ds.index_of(id);
      if (!idx) throw ConfigError("validation subject '" + id + "' not in dataset");
      return ds[*idx];
    };
    auto doc = [&](const std::string& id) -> const Embedding& {
      auto it = doc_cache.find(id);
      if (it == doc_cache.end()) it = doc_cache.emplace(id, embed(lookup(id).document_feature)).first;
      return it->second;
    };
    auto selfie = [&](const std::string& id) -> const Embedding& {
      auto it = selfie_cache.find(id);
      if (it == selfie_cache.end()) it = selfie_cache.emplace(id, embed(lookup(id).selfie_feature)).first;
      return it->second;
    };
    ScoreSet s;
    for (const auto& p : fold.authentic) {
      s.authentic.push_back(cosine_similarity(selfie(p.selfie_subject), doc(p.doc_subject)));
    }
    for (const auto& p : fold.impostor) {
      s.impostor.push_back(cosine_similarity(selfie(p.selfie_subject), doc(p.doc_subject)));
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_validation_csv(const ValidationSet& vs, std::ostream& out) {
  out << "fold,pair_type,selfie_subject,doc_subject\n";
  for (std::size_t f = 0; f < vs.folds.size(); ++f) {
    for (const auto& p : vs.folds[f].authentic) {
      out << f << ",authentic," << p.selfie_subject << ',' << p.doc_subject << '\n';
    }
    for (const auto& p : vs.folds[f].impostor) {
      out << f << ",impostor," << p.selfie_subject << ',' << p.doc_subject << '\n';
    }
  }
}

ValidationSet read_validation_csv(std::istream& in) {
  std::string line;
  std::size_t row = 1;
  if (!std::getline(in, line) ||
      trim_line_end(line) != "fold,pair_type,selfie_subject,doc_subject") {
    throw ParseError("expected header 'fold,pair_type,selfie_subject,doc_subject'", row);
  }
  ValidationSet vs;
  while (std::getline(in, line)) {
    ++row;
    const auto text = trim_line_end(line);
    if (text.empty()) continue;
    const auto f = split_csv_line(text);
    if (f.size() != 4) throw ParseError("expected 4 columns", row);
    auto fold = parse_int(f[0]);
    if (!fold || *fold < 0) throw ParseError("bad fold index", row);
    const auto k = static_cast<std::size_t>(*fold);
    if (k >= vs.folds.size()) vs.folds.resize(k + 1);
    PairRef p{std::string(f[2]), std::string(f[3])};
    auto& members = vs.folds[k].subjects;
    for (const auto* id : {&p.selfie_subject, &p.doc_subject}) {
      if (std::find(members.begin(), members.end(), *id) == members.end()) members.push_back(*id);
    }
    if (f[1] == "authentic") {
      if (p.selfie_subject != p.doc_subject) throw ParseError("authentic pair of two subjects", row);
      vs.folds[k].authentic.push_back(std::move(p));
    } else if (f[1] == "impostor") {
      if (p.selfie_subject == p.doc_subject) throw ParseError("impostor pair of one subject", row);
      vs.folds[k].impostor.push_back(std::move(p));
    } else {
      throw ParseError("bad pair_type '" + std::string(f[1]) + "'", row);
    }
  }
  if (vs.folds.empty()) throw ParseError("no records");
  return vs;
}

void save_validation(const ValidationSet& vs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write validation set '" + path.string() + "'");
  write_validation_csv(vs, out);
}

ValidationSet load_validation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open validation set '" + path.string() + "'");
  return read_validation_csv(in);
}

}  // namespace xmv
