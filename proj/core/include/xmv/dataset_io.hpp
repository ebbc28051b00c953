#pragma once

#include <filesystem>
#include <iosfwd>

#include "xmv/types.hpp"

namespace xmv {

// Embeddings CSV:
//   subject_id,modality,gender,age_doc,age_selfie,card_format,dim,f0,...,f{dim-1}
// One row per image, header required. Both rows of a subject carry both
// ages. Features are written with the shortest text that round-trips the
// stored float exactly.
//
// Binary envelope (.xmv): magic "XMV1", u32 record count, u32 dim, then per
// record a u16-length-prefixed id, u8 modality, u8 gender, i32 age_doc,
// i32 age_selfie, u8 card_format and dim little-endian f32 features.

PairedDataset read_dataset_csv(std::istream& in);
void write_dataset_csv(const PairedDataset& ds, std::ostream& out);

PairedDataset read_dataset_binary(std::istream& in);
void write_dataset_binary(const PairedDataset& ds, std::ostream& out);

// Detects the binary envelope by its magic bytes, CSV otherwise.
// Throws IoError if the file cannot be opened, ParseError on bad content.
PairedDataset load_dataset(const std::filesystem::path& path);

// Binary when the extension is ".xmv", CSV otherwise.
void write_dataset(const PairedDataset& ds, const std::filesystem::path& path);

}  // namespace xmv
