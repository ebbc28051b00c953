#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace xmv {

enum class Modality { document, selfie };
enum class Gender { male, female, unknown };
enum class CardFormat { yellow, blue, not_applicable };

std::string_view to_string(Modality m);
std::string_view to_string(Gender g);
// Emits "na" for not_applicable, matching the dataset file format.
std::string_view to_string(CardFormat c);

std::optional<Modality> parse_modality(std::string_view s);
std::optional<Gender> parse_gender(std::string_view s);
std::optional<CardFormat> parse_card_format(std::string_view s);

// One image of one subject, reduced to the feature vector produced by a
// frozen upstream network. Features are stored in single precision; all
// arithmetic on them is done in double.
struct ImageRecord {
  std::string subject_id;
  Modality modality = Modality::selfie;
  Gender gender = Gender::unknown;
  int age_at_capture = 0;
  CardFormat card_format = CardFormat::not_applicable;
  std::vector<float> base_feature;
};

// Both images of one subject.
struct Subject {
  std::string id;
  Gender gender = Gender::unknown;
  int doc_age = 0;
  int selfie_age = 0;
  CardFormat card_format = CardFormat::not_applicable;  // of the document
  std::vector<float> document_feature;
  std::vector<float> selfie_feature;

  ImageRecord document_record() const;
  ImageRecord selfie_record() const;
};

// Subjects with exactly one document and one selfie each. Construction
// validates every invariant, so a PairedDataset in hand is always sound.
class PairedDataset {
 public:
  PairedDataset() = default;

  // Throws ConfigError on duplicate ids, inconsistent dimensions,
  // non-finite features or a card format that contradicts the modality.
  PairedDataset(std::vector<Subject> subjects, std::size_t dim);

  // Groups loose records by subject. Throws ParseError (row 0) when a
  // subject does not have exactly one record per modality.
  static PairedDataset from_records(const std::vector<ImageRecord>& records);

  std::size_t size() const noexcept { return subjects_.size(); }
  bool empty() const noexcept { return subjects_.empty(); }
  std::size_t dim() const noexcept { return dim_; }

  const std::vector<Subject>& subjects() const noexcept { return subjects_; }
  const Subject& operator[](std::size_t i) const { return subjects_[i]; }

  std::optional<std::size_t> index_of(std::string_view id) const;

  // Subjects at the given positions, in that order.
  PairedDataset subset(const std::vector<std::size_t>& indices) const;

  // Concatenation; the dimensions must agree.
  static PairedDataset merge(const std::vector<PairedDataset>& parts);

 private:
  std::vector<Subject> subjects_;
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

// Name of an age subgroup, e.g. "i10s1819" for a 10-year-old document
// photo against an 18 or 19-year-old selfie.
struct SubsetLabel {
  std::string name;
  int doc_age = 0;
  std::pair<int, int> selfie_age_range;

  friend bool operator==(const SubsetLabel&, const SubsetLabel&) = default;
};

// Ages must lie in [9, 19]. The selfie age is bucketed into the two-year
// range starting at the even age at or below it.
SubsetLabel subset_label(int doc_age, int selfie_age);

}  // namespace xmv
