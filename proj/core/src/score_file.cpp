#include "xmv/score_file.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "xmv/error.hpp"
#include "xmv/text_format.hpp"

namespace xmv {

std::string_view to_string(PairType t) {
  return t == PairType::authentic ? "authentic" : "impostor";
}

std::vector<ScoredPair> read_scores_csv(std::istream& in) {
  std::string line;
  std::size_t row = 1;
  if (!std::getline(in, line) ||
      trim_line_end(line) != "pair_type,selfie_subject,doc_subject,score") {
    throw ParseError("expected header 'pair_type,selfie_subject,doc_subject,score'", row);
  }
  std::vector<ScoredPair> pairs;
  while (std::getline(in, line)) {
    ++row;
    const auto text = trim_line_end(line);
    if (text.empty()) continue;
    const auto f = split_csv_line(text);
    if (f.size() != 4) throw ParseError("expected 4 columns", row);
    ScoredPair p;
    if (f[0] == "authentic") {
      p.type = PairType::authentic;
    } else if (f[0] == "impostor") {
      p.type = PairType::impostor;
    } else {
      throw ParseError("bad pair_type '" + std::string(f[0]) + "'", row);
    }
    p.selfie_subject = std::string(f[1]);
    p.doc_subject = std::string(f[2]);
    auto score = parse_double(f[3]);
    if (!score || !std::isfinite(*score)) throw ParseError("bad score", row);
    p.score = *score;
    if ((p.type == PairType::authentic) != (p.selfie_subject == p.doc_subject)) {
      throw ParseError("pair_type disagrees with the subject ids", row);
    }
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) throw ParseError("no records");
  return pairs;
}

void write_scores_csv(const std::vector<ScoredPair>& pairs, std::ostream& out) {
  out << "pair_type,selfie_subject,doc_subject,score\n";
  for (const auto& p : pairs) {
    out << to_string(p.type) << ',' << p.selfie_subject << ',' << p.doc_subject << ','
        << format_double(p.score) << '\n';
  }
}

std::vector<ScoredPair> load_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open score file '" + path.string() + "'");
  return read_scores_csv(in);
}

void save_scores(const std::vector<ScoredPair>& pairs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write score file '" + path.string() + "'");
  write_scores_csv(pairs, out);
}

ScoreSet to_score_set(const std::vector<ScoredPair>& pairs) {
  ScoreSet s;
  for (const auto& p : pairs) {
    (p.type == PairType::authentic ? s.authentic : s.impostor).push_back(p.score);
  }
  return s;
}

}  // namespace xmv
