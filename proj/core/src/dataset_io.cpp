#include "xmv/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "xmv/error.hpp"
#include "xmv/text_format.hpp"

namespace xmv {

namespace {

constexpr std::size_t kFixedColumns = 7;
constexpr std::array<char, 4> kMagic = {'X', 'M', 'V', '1'};

struct RowInfo {
  std::size_t document_row = 0;
  std::size_t selfie_row = 0;
};

// Where a record came from, plus both ages as written on its row.
struct RowMeta {
  std::size_t row = 0;
  int age_doc = 0;
  int age_selfie = 0;
};

void check_id(const std::string& id) {
  if (id.find_first_of(",\"\n\r") != std::string::npos) {
    throw ConfigError("subject id '" + id + "' contains a character not allowed in CSV");
  }
}

// Reassembles subjects, reporting the offending row on every error.
PairedDataset assemble(const std::vector<ImageRecord>& records,
                       const std::vector<RowMeta>& meta) {
  if (records.empty()) throw ParseError("no records");
  std::map<std::string, RowInfo, std::less<>> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& info = seen[records[i].subject_id];
    auto& slot = records[i].modality == Modality::document ? info.document_row : info.selfie_row;
    if (slot != 0) {
      throw ParseError("duplicate " + std::string(to_string(records[i].modality)) +
                           " for subject '" + records[i].subject_id + "'",
                       meta[i].row);
    }
    slot = i + 1;
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& info = seen[records[i].subject_id];
    if (info.document_row == 0 || info.selfie_row == 0) {
      throw ParseError("subject '" + records[i].subject_id +
                           "' does not have exactly one document and one selfie",
                       meta[i].row);
    }
    const RowMeta& a = meta[info.document_row - 1];
    const RowMeta& b = meta[info.selfie_row - 1];
    if (a.age_doc != b.age_doc || a.age_selfie != b.age_selfie) {
      throw ParseError("subject '" + records[i].subject_id + "' has conflicting ages",
                       std::max(a.row, b.row));
    }
  }
  try {
    return PairedDataset::from_records(records);
  } catch (const ParseError& e) {
    throw;
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
}

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw ParseError("truncated binary dataset");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

}  // namespace

PairedDataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t row = 1;
  if (!std::getline(in, line)) throw ParseError("no records");
  {
    const auto header = split_csv_line(trim_line_end(line));
    static constexpr std::array<std::string_view, kFixedColumns> kExpected = {
        "subject_id", "modality", "gender", "age_doc", "age_selfie", "card_format", "dim"};
    if (header.size() < kFixedColumns) throw ParseError("missing or short header", row);
    for (std::size_t i = 0; i < kFixedColumns; ++i) {
      if (header[i] != kExpected[i]) {
        throw ParseError("unexpected header column '" + std::string(header[i]) + "'", row);
      }
    }
  }

  std::vector<ImageRecord> records;
  std::vector<RowMeta> meta;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view text = trim_line_end(line);
    if (text.empty()) continue;
    const auto f = split_csv_line(text);
    if (f.size() < kFixedColumns) throw ParseError("too few columns", row);

    ImageRecord r;
    r.subject_id = std::string(f[0]);
    if (r.subject_id.empty()) throw ParseError("empty subject_id", row);
    auto modality = parse_modality(f[1]);
    if (!modality) throw ParseError("bad modality '" + std::string(f[1]) + "'", row);
    auto gender = parse_gender(f[2]);
    if (!gender) throw ParseError("bad gender '" + std::string(f[2]) + "'", row);
    auto age_doc = parse_int(f[3]);
    auto age_selfie = parse_int(f[4]);
    if (!age_doc || !age_selfie) throw ParseError("bad age", row);
    auto card = parse_card_format(f[5]);
    if (!card) throw ParseError("bad card_format '" + std::string(f[5]) + "'", row);
    if ((*card == CardFormat::not_applicable) != (*modality == Modality::selfie)) {
      throw ParseError("card_format must be 'na' exactly for selfies", row);
    }
    auto row_dim = parse_int(f[6]);
    if (!row_dim || *row_dim <= 0) throw ParseError("bad dim", row);
    if (dim == 0) dim = static_cast<std::size_t>(*row_dim);
    if (static_cast<std::size_t>(*row_dim) != dim) {
      throw ParseError("inconsistent dimension " + std::to_string(*row_dim) + " (expected " +
                           std::to_string(dim) + ")",
                       row);
    }
    if (f.size() != kFixedColumns + dim) {
      throw ParseError("expected " + std::to_string(dim) + " feature values, found " +
                           std::to_string(f.size() - kFixedColumns),
                       row);
    }
    r.modality = *modality;
    r.gender = *gender;
    r.age_at_capture = static_cast<int>(*modality == Modality::document ? *age_doc : *age_selfie);
    r.card_format = *card;
    r.base_feature.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      auto v = parse_float(f[kFixedColumns + k]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("bad feature value '" + std::string(f[kFixedColumns + k]) + "'", row);
      }
      r.base_feature[k] = *v;
    }
    records.push_back(std::move(r));
    meta.push_back({row, static_cast<int>(*age_doc), static_cast<int>(*age_selfie)});
  }
  return assemble(records, meta);
}

void write_dataset_csv(const PairedDataset& ds, std::ostream& out) {
  out << "subject_id,modality,gender,age_doc,age_selfie,card_format,dim";
  for (std::size_t k = 0; k < ds.dim(); ++k) out << ",f" << k;
  out << '\n';
  auto write_row = [&](const Subject& s, Modality m) {
    const auto& feat = m == Modality::document ? s.document_feature : s.selfie_feature;
    const CardFormat card = m == Modality::document ? s.card_format : CardFormat::not_applicable;
    out << s.id << ',' << to_string(m) << ',' << to_string(s.gender) << ',' << s.doc_age << ','
        << s.selfie_age << ',' << to_string(card) << ',' << ds.dim();
    for (float x : feat) out << ',' << format_float(x);
    out << '\n';
  };
  for (const auto& s : ds.subjects()) {
    check_id(s.id);
    write_row(s, Modality::document);
    write_row(s, Modality::selfie);
  }
}

PairedDataset read_dataset_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ParseError("missing XMV1 magic");
  const auto count = get_le<std::uint32_t>(in);
  const auto dim = get_le<std::uint32_t>(in);
  if (count == 0) throw ParseError("no records");
  if (dim == 0) throw ParseError("zero dimension");

  std::vector<ImageRecord> records;
  std::vector<RowMeta> meta;
  records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t row = i + 1;
    ImageRecord r;
    const auto id_len = get_le<std::uint16_t>(in);
    r.subject_id.resize(id_len);
    in.read(r.subject_id.data(), id_len);
    if (!in) throw ParseError("truncated binary dataset", row);
    const auto modality = get_le<std::uint8_t>(in);
    const auto gender = get_le<std::uint8_t>(in);
    const auto age_doc = get_le<std::int32_t>(in);
    const auto age_selfie = get_le<std::int32_t>(in);
    const auto card = get_le<std::uint8_t>(in);
    if (modality > 1 || gender > 2 || card > 2) throw ParseError("bad enum value", row);
    r.modality = static_cast<Modality>(modality);
    r.gender = static_cast<Gender>(gender);
    r.card_format = static_cast<CardFormat>(card);
    if ((r.card_format == CardFormat::not_applicable) != (r.modality == Modality::selfie)) {
      throw ParseError("card_format must be 'na' exactly for selfies", row);
    }
    r.age_at_capture = r.modality == Modality::document ? age_doc : age_selfie;
    r.base_feature.resize(dim);
    for (auto& x : r.base_feature) {
      x = get_le<float>(in);
      if (!std::isfinite(x)) throw ParseError("non-finite feature value", row);
    }
    records.push_back(std::move(r));
    meta.push_back({row, age_doc, age_selfie});
  }
  return assemble(records, meta);
}

void write_dataset_binary(const PairedDataset& ds, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.size() * 2));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.dim()));
  for (const auto& s : ds.subjects()) {
    if (s.id.size() > 0xffff) throw ConfigError("subject id too long for binary format");
    for (Modality m : {Modality::document, Modality::selfie}) {
      put_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.id.size()));
      out.write(s.id.data(), static_cast<std::streamsize>(s.id.size()));
      put_le<std::uint8_t>(out, static_cast<std::uint8_t>(m));
      put_le<std::uint8_t>(out, static_cast<std::uint8_t>(s.gender));
      put_le<std::int32_t>(out, s.doc_age);
      put_le<std::int32_t>(out, s.selfie_age);
      const CardFormat card = m == Modality::document ? s.card_format : CardFormat::not_applicable;
      put_le<std::uint8_t>(out, static_cast<std::uint8_t>(card));
      const auto& feat = m == Modality::document ? s.document_feature : s.selfie_feature;
      for (float x : feat) put_le<float>(out, x);
    }
  }
}

PairedDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  const bool binary = in.gcount() == 4 && head == kMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_dataset_binary(in) : read_dataset_csv(in);
}

void write_dataset(const PairedDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset '" + path.string() + "'");
  if (path.extension() == ".xmv") {
    write_dataset_binary(ds, out);
  } else {
    write_dataset_csv(ds, out);
  }
  if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

}  // namespace xmv
