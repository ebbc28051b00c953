#pragma once

#include <filesystem>
#include <string>

#include "xmv/head.hpp"
#include "xmv/trainer.hpp"

namespace xmv {

// A saved head plus the configuration and validation score it was selected
// with. Stored as JSON; "weights" is W row-major followed by b, written
// with round-trip precision so a reloaded head scores bit-identically.
struct Checkpoint {
  EmbeddingHead head;
  TrainConfig config;
  std::size_t iteration = 0;
  double validation_tar = 0.0;
};

std::string checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace xmv
