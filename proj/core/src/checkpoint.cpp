#include "xmv/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "xmv/error.hpp"

namespace xmv {

using nlohmann::json;

namespace {

json config_to_json(const TrainConfig& c) {
  return json{{"learning_rate", c.learning_rate},
              {"momentum", c.momentum},
              {"batch_size", c.batch_size},
              {"margin", c.margin},
              {"eval_interval", c.eval_interval},
              {"max_iterations", c.max_iterations},
              {"seed", c.seed},
              {"selection_far", c.selection_far},
              {"d_out", c.d_out},
              {"anchor_modality", c.anchors == AnchorModality::both ? "both" : "selfie_only"}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.momentum = j.at("momentum").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.margin = j.at("margin").get<double>();
  c.eval_interval = j.at("eval_interval").get<std::size_t>();
  c.max_iterations = j.at("max_iterations").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.selection_far = j.at("selection_far").get<double>();
  c.d_out = j.at("d_out").get<std::size_t>();
  const auto anchors = j.at("anchor_modality").get<std::string>();
  if (anchors == "both") {
    c.anchors = AnchorModality::both;
  } else if (anchors == "selfie_only") {
    c.anchors = AnchorModality::selfie_only;
  } else {
    throw ParseError("bad anchor_modality '" + anchors + "'");
  }
  return c;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ck) {
  json j;
  j["format"] = "xmv-checkpoint-v1";
  j["dims"] = {{"d_in", ck.head.d_in()}, {"d_out", ck.head.d_out()}};
  j["config"] = config_to_json(ck.config);
  j["iteration"] = ck.iteration;
  j["validation_tar"] = ck.validation_tar;
  j["weights"] = std::vector<double>(ck.head.params().begin(), ck.head.params().end());
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "xmv-checkpoint-v1") throw ParseError("not an xmv checkpoint");
    Checkpoint ck;
    const auto d_in = j.at("dims").at("d_in").get<std::size_t>();
    const auto d_out = j.at("dims").at("d_out").get<std::size_t>();
    ck.head = EmbeddingHead(d_out, d_in);
    const auto weights = j.at("weights").get<std::vector<double>>();
    if (weights.size() != ck.head.num_params()) {
      throw ParseError("checkpoint has " + std::to_string(weights.size()) + " weights, expected " +
                       std::to_string(ck.head.num_params()));
    }
    std::copy(weights.begin(), weights.end(), ck.head.params().begin());
    ck.config = config_from_json(j.at("config"));
    ck.iteration = j.at("iteration").get<std::size_t>();
    ck.validation_tar = j.at("validation_tar").get<double>();
    return ck;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  out << checkpoint_to_json(ck);
  if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace xmv
