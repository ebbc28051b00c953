#include "xmv/cli/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "xmv/embedding.hpp"
#include "xmv/error.hpp"
#include "xmv/rng.hpp"
#include "xmv/text_format.hpp"

namespace xmv::cli {

namespace {

std::string key_of(const Subject& s, const std::string& key) {
  if (key == "subset") return subset_label(s.doc_age, s.selfie_age).name;
  if (key == "gender") return std::string(to_string(s.gender));
  if (key == "card_format") return std::string(to_string(s.card_format));
  throw ConfigError("unknown grouping key '" + key + "'");
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<Embedding> embed_docs(const PairedDataset& g, const EmbeddingHead& head, unsigned threads) {
  std::vector<std::span<const float>> in;
  in.reserve(g.size());
  for (const auto& s : g.subjects()) in.emplace_back(s.document_feature);
  return forward_all(head, in, threads);
}

std::vector<Embedding> embed_selfies(const PairedDataset& g, const EmbeddingHead& head, unsigned threads) {
  std::vector<std::span<const float>> in;
  in.reserve(g.size());
  for (const auto& s : g.subjects()) in.emplace_back(s.selfie_feature);
  return forward_all(head, in, threads);
}

}  // namespace

std::vector<NamedGroup> group_dataset(const PairedDataset& ds, const std::vector<std::string>& keys) {
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::string name;
    for (const auto& k : keys) {
      if (!name.empty()) name += '/';
      name += key_of(ds[i], k);
    }
    if (name.empty()) name = "all";
    members[name].push_back(i);
  }
  std::vector<NamedGroup> out;
  for (auto& [name, idx] : members) out.push_back({name, ds.subset(idx)});
  return out;
}

ScoreSet score_group(const PairedDataset& group, const EmbeddingHead& head, unsigned threads,
                     std::vector<ScoredPair>* pairs) {
  if (group.size() < 2) {
    throw InsufficientDataError("a group needs at least two subjects to form impostor pairs");
  }
  const auto docs = embed_docs(group, head, threads);
  const auto selfies = embed_selfies(group, head, threads);
  const ScoreMatrix m = cross_modal_scores(docs, selfies, threads);
  ScoreSet s;
  s.authentic.reserve(group.size());
  s.impostor.reserve(group.size() * (group.size() - 1));
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (std::size_t j = 0; j < group.size(); ++j) {
      if (i == j) {
        s.authentic.push_back(m(i, j));
      } else {
        s.impostor.push_back(m(i, j));
      }
      if (pairs) {
        pairs->push_back({i == j ? PairType::authentic : PairType::impostor, group[i].id,
                          group[j].id, m(i, j)});
      }
    }
  }
  return s;
}

std::vector<GroupEvalRow> evaluate_groups(const std::vector<NamedGroup>& groups,
                                          const EmbeddingHead& head,
                                          const std::vector<double>& far_targets,
                                          const std::string& model, unsigned threads,
                                          std::vector<ScoredPair>* pairs) {
  std::vector<GroupEvalRow> rows;
  for (const auto& g : groups) {
    if (g.data.size() < 2) {
      throw InsufficientDataError("group '" + g.name + "' has fewer than two subjects");
    }
    const ScoreSet s = score_group(g.data, head, threads, pairs);
    for (double far : far_targets) {
      rows.push_back({model, g.name, g.data.size(), s.authentic.size(), s.impostor.size(),
                      tar_at_far(s, far)});
    }
  }
  return rows;
}

void write_eval_csv(const std::vector<GroupEvalRow>& rows, std::ostream& out) {
  out << "model,subset,n_subjects,n_authentic,n_impostor,far_target,threshold,tar,achieved_far\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.group << ',' << r.n_subjects << ',' << r.n_authentic << ','
        << r.n_impostor << ',' << format_double(r.result.far_target) << ','
        << format_double(r.result.threshold) << ',' << format_double(r.result.tar) << ','
        << format_double(r.result.achieved_far) << '\n';
  }
}

std::vector<GroupEvalRow> read_eval_csv(std::istream& in) {
  std::string line;
  std::size_t row = 1;
  if (!std::getline(in, line) ||
      trim_line_end(line) !=
          "model,subset,n_subjects,n_authentic,n_impostor,far_target,threshold,tar,achieved_far") {
    throw ParseError("not an eval.csv file", row);
  }
  std::vector<GroupEvalRow> rows;
  while (std::getline(in, line)) {
    ++row;
    const auto text = trim_line_end(line);
    if (text.empty()) continue;
    const auto f = split_csv_line(text);
    if (f.size() != 9) throw ParseError("expected 9 columns", row);
    GroupEvalRow r;
    r.model = std::string(f[0]);
    r.group = std::string(f[1]);
    auto ns = parse_int(f[2]), na = parse_int(f[3]), ni = parse_int(f[4]);
    auto far = parse_double(f[5]), thr = parse_double(f[6]), tar = parse_double(f[7]),
         afar = parse_double(f[8]);
    if (!ns || !na || !ni || !far || !thr || !tar || !afar) throw ParseError("bad eval row", row);
    r.n_subjects = static_cast<std::size_t>(*ns);
    r.n_authentic = static_cast<std::size_t>(*na);
    r.n_impostor = static_cast<std::size_t>(*ni);
    r.result = {*far, *thr, *tar, *afar};
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("no records");
  return rows;
}

std::string eval_rows_to_json(const std::vector<GroupEvalRow>& rows) {
  using nlohmann::ordered_json;
  auto num = [](double x) -> ordered_json {
    if (std::isinf(x)) return "inf";
    return x;
  };
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back(ordered_json{{"model", r.model},
                               {"subset", r.group},
                               {"n_subjects", r.n_subjects},
                               {"n_authentic", r.n_authentic},
                               {"n_impostor", r.n_impostor},
                               {"far_target", num(r.result.far_target)},
                               {"threshold", num(r.result.threshold)},
                               {"tar", num(r.result.tar)},
                               {"achieved_far", num(r.result.achieved_far)}});
  }
  return ordered_json{{"results", arr}}.dump(1) + "\n";
}

GenderAnalysis analyze_gender(const PairedDataset& ds, const EmbeddingHead& head,
                              const std::vector<double>& far_targets, std::size_t bins,
                              unsigned threads) {
  GenderAnalysis out;
  const auto groups = group_dataset(ds, {"gender", "subset"});
  for (Gender g : {Gender::male, Gender::female}) {
    const std::string gname(to_string(g));
    ScoreSet combined;
    std::size_t combined_subjects = 0;
    std::vector<GenderRow> per_subset;
    for (const auto& grp : groups) {
      if (grp.name.rfind(gname + "/", 0) != 0 || grp.data.size() < 2) continue;
      const ScoreSet s = score_group(grp.data, head, threads);
      combined.authentic.insert(combined.authentic.end(), s.authentic.begin(), s.authentic.end());
      combined.impostor.insert(combined.impostor.end(), s.impostor.begin(), s.impostor.end());
      combined_subjects += grp.data.size();
      GenderRow row{gname, grp.name.substr(gname.size() + 1), grp.data.size(),
                    score_stats(s.authentic), score_stats(s.impostor), 0.0, {}};
      row.d_prime = d_prime(s);
      for (double far : far_targets) row.results.push_back(tar_at_far(s, far));
      per_subset.push_back(std::move(row));
    }
    if (combined.authentic.size() < 2) {
      throw InsufficientDataError("no subset has two or more " + gname + " subjects");
    }
    GenderRow all{gname, "all", combined_subjects, score_stats(combined.authentic),
                  score_stats(combined.impostor), d_prime(combined), {}};
    for (double far : far_targets) all.results.push_back(tar_at_far(combined, far));
    out.rows.push_back(std::move(all));
    out.rows.insert(out.rows.end(), per_subset.begin(), per_subset.end());
    out.histograms.push_back({gname, histogram(combined.authentic, bins, -1.0, 1.0),
                              histogram(combined.impostor, bins, -1.0, 1.0)});
  }
  for (std::size_t k = 0; k <= bins; ++k) {
    out.bin_edges.push_back(-1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(bins));
  }
  return out;
}

CardFormatAnalysis analyze_card_format(const PairedDataset& ds, const EmbeddingHead& head,
                                       std::size_t draws, std::uint64_t seed, unsigned threads) {
  if (draws == 0) throw ConfigError("need at least one draw");
  CardFormatAnalysis out;
  const auto subsets = group_dataset(ds, {"subset"});
  for (std::size_t si = 0; si < subsets.size(); ++si) {
    const auto& sub = subsets[si];
    std::vector<std::size_t> yellow, blue;
    for (std::size_t i = 0; i < sub.data.size(); ++i) {
      (sub.data[i].card_format == CardFormat::yellow ? yellow : blue).push_back(i);
    }
    if (yellow.size() < 2 || blue.size() < 2) continue;

    const bool yellow_minor = yellow.size() <= blue.size();
    const auto& minor = yellow_minor ? yellow : blue;
    const auto& major = yellow_minor ? blue : yellow;
    const CardFormat minor_fmt = yellow_minor ? CardFormat::yellow : CardFormat::blue;
    const CardFormat major_fmt = yellow_minor ? CardFormat::blue : CardFormat::yellow;

    auto means = [&](const std::vector<std::size_t>& idx) {
      const ScoreSet s = score_group(sub.data.subset(idx), head, threads);
      return std::pair{mean_of(s.authentic), mean_of(s.impostor)};
    };
    const auto [minor_auth, minor_imp] = means(minor);
    out.rows.push_back({sub.name, minor_fmt, true, 0, minor.size(), minor_auth, minor_imp});

    CardFormatSummary summary{sub.name, minor_fmt, minor.size(), major.size(), true, true};
    Rng rng(Rng::derive(seed, si));
    for (std::size_t d = 1; d <= draws; ++d) {
      std::vector<std::size_t> pool = major;
      for (std::size_t i = 0; i < minor.size(); ++i) {
        std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
      }
      pool.resize(minor.size());
      std::sort(pool.begin(), pool.end());
      const auto [auth, imp] = means(pool);
      out.rows.push_back({sub.name, major_fmt, false, d, pool.size(), auth, imp});
      const double yellow_auth = yellow_minor ? minor_auth : auth;
      const double blue_auth = yellow_minor ? auth : minor_auth;
      const double yellow_imp = yellow_minor ? minor_imp : imp;
      const double blue_imp = yellow_minor ? imp : minor_imp;
      summary.yellow_authentic_below_blue = summary.yellow_authentic_below_blue && yellow_auth < blue_auth;
      summary.yellow_impostor_above_blue = summary.yellow_impostor_above_blue && yellow_imp > blue_imp;
    }
    out.summaries.push_back(summary);
  }
  if (out.summaries.empty()) {
    throw InsufficientDataError("no subset holds at least two subjects of each card format");
  }
  return out;
}

}  // namespace xmv::cli
