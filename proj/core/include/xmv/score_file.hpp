#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "xmv/eval.hpp"

namespace xmv {

enum class PairType { authentic, impostor };

std::string_view to_string(PairType t);

struct ScoredPair {
  PairType type = PairType::authentic;
  std::string selfie_subject;
  std::string doc_subject;
  double score = 0.0;
};

// CSV `pair_type,selfie_subject,doc_subject,score`, header required.
std::vector<ScoredPair> read_scores_csv(std::istream& in);
void write_scores_csv(const std::vector<ScoredPair>& pairs, std::ostream& out);

std::vector<ScoredPair> load_scores(const std::filesystem::path& path);
void save_scores(const std::vector<ScoredPair>& pairs, const std::filesystem::path& path);

ScoreSet to_score_set(const std::vector<ScoredPair>& pairs);

}  // namespace xmv
