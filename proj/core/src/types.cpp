#include "xmv/types.hpp"

#include <cmath>
#include <map>
#include <string>

#include "xmv/error.hpp"

namespace xmv {

std::string_view to_string(Modality m) {
  return m == Modality::document ? "document" : "selfie";
}

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::male: return "male";
    case Gender::female: return "female";
    case Gender::unknown: break;
  }
  return "unknown";
}

std::string_view to_string(CardFormat c) {
  switch (c) {
    case CardFormat::yellow: return "yellow";
    case CardFormat::blue: return "blue";
    case CardFormat::not_applicable: break;
  }
  return "na";
}

std::optional<Modality> parse_modality(std::string_view s) {
  if (s == "document") return Modality::document;
  if (s == "selfie") return Modality::selfie;
  return std::nullopt;
}

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "male") return Gender::male;
  if (s == "female") return Gender::female;
  if (s == "unknown") return Gender::unknown;
  return std::nullopt;
}

std::optional<CardFormat> parse_card_format(std::string_view s) {
  if (s == "yellow") return CardFormat::yellow;
  if (s == "blue") return CardFormat::blue;
  if (s == "na") return CardFormat::not_applicable;
  return std::nullopt;
}

ImageRecord Subject::document_record() const {
  return ImageRecord{id, Modality::document, gender, doc_age, card_format, document_feature};
}

ImageRecord Subject::selfie_record() const {
  return ImageRecord{id, Modality::selfie, gender, selfie_age, CardFormat::not_applicable,
                     selfie_feature};
}

PairedDataset::PairedDataset(std::vector<Subject> subjects, std::size_t dim)
    : subjects_(std::move(subjects)), dim_(dim) {
  index_.reserve(subjects_.size());
  for (std::size_t i = 0; i < subjects_.size(); ++i) {
    const Subject& s = subjects_[i];
    if (s.id.empty()) throw ConfigError("empty subject id");
    if (!index_.emplace(s.id, i).second) throw ConfigError("duplicate subject id '" + s.id + "'");
    if (s.document_feature.size() != dim || s.selfie_feature.size() != dim) {
      throw ConfigError("subject '" + s.id + "' has features of the wrong dimension");
    }
    if (s.card_format == CardFormat::not_applicable) {
      throw ConfigError("subject '" + s.id + "' document has no card format");
    }
    for (const auto* f : {&s.document_feature, &s.selfie_feature}) {
      for (float x : *f) {
        if (!std::isfinite(x)) throw ConfigError("subject '" + s.id + "' has a non-finite feature");
      }
    }
  }
}

PairedDataset PairedDataset::from_records(const std::vector<ImageRecord>& records) {
  if (records.empty()) throw ParseError("no records");
  const std::size_t dim = records.front().base_feature.size();

  struct Pending {
    const ImageRecord* document = nullptr;
    const ImageRecord* selfie = nullptr;
  };
  std::vector<std::string> order;
  std::map<std::string, Pending, std::less<>> by_id;
  for (const auto& r : records) {
    if (r.base_feature.size() != dim) {
      throw ParseError("inconsistent feature dimension for subject '" + r.subject_id + "'");
    }
    auto [it, inserted] = by_id.try_emplace(r.subject_id);
    if (inserted) order.push_back(r.subject_id);
    auto& slot = r.modality == Modality::document ? it->second.document : it->second.selfie;
    if (slot != nullptr) {
      throw ParseError("duplicate " + std::string(to_string(r.modality)) + " for subject '" +
                       r.subject_id + "'");
    }
    slot = &r;
  }

  std::vector<Subject> subjects;
  subjects.reserve(order.size());
  for (const auto& id : order) {
    const Pending& p = by_id.find(id)->second;
    if (p.document == nullptr || p.selfie == nullptr) {
      throw ParseError("subject '" + id + "' does not have exactly one document and one selfie");
    }
    if (p.document->gender != p.selfie->gender) {
      throw ParseError("subject '" + id + "' has conflicting genders");
    }
    Subject s;
    s.id = id;
    s.gender = p.document->gender;
    s.doc_age = p.document->age_at_capture;
    s.selfie_age = p.selfie->age_at_capture;
    s.card_format = p.document->card_format;
    s.document_feature = p.document->base_feature;
    s.selfie_feature = p.selfie->base_feature;
    subjects.push_back(std::move(s));
  }
  try {
    return PairedDataset(std::move(subjects), dim);
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
}

std::optional<std::size_t> PairedDataset::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PairedDataset PairedDataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<Subject> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(subjects_.at(i));
  return PairedDataset(std::move(picked), dim_);
}

PairedDataset PairedDataset::merge(const std::vector<PairedDataset>& parts) {
  std::vector<Subject> all;
  std::size_t dim = 0;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (dim == 0) dim = p.dim();
    if (p.dim() != dim) throw DimensionError("cannot merge datasets of different dimension");
    all.insert(all.end(), p.subjects().begin(), p.subjects().end());
  }
  return PairedDataset(std::move(all), dim);
}

SubsetLabel subset_label(int doc_age, int selfie_age) {
  auto in_range = [](int a) { return a >= 9 && a <= 19; };
  if (!in_range(doc_age) || !in_range(selfie_age)) {
    throw RangeError("subset ages must lie in [9, 19], got " + std::to_string(doc_age) + " and " +
                     std::to_string(selfie_age));
  }
  const int lo = selfie_age - (selfie_age % 2);
  auto two = [](int a) {
    std::string s = std::to_string(a);
    return s.size() < 2 ? "0" + s : s;
  };
  return SubsetLabel{"i" + two(doc_age) + "s" + two(lo) + two(lo + 1), doc_age, {lo, lo + 1}};
}

}  // namespace xmv
