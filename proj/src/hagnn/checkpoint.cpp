#include <bit>
#include <cstring>

#include "ipag/hagnn.hpp"
#include "ipag/io.hpp"
#include "json.hpp"

namespace ipag {

using json = nlohmann::json;

namespace {

constexpr char kMagic[8] = {'I', 'P', 'A', 'G', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little, "checkpoints are stored little-endian");

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& at, const std::string& what) {
  if (at + sizeof(T) > in.size()) throw ModelError("checkpoint truncated while reading " + what);
  T v;
  std::memcpy(&v, in.data() + at, sizeof(T));
  at += sizeof(T);
  return v;
}

}  // namespace

void save_checkpoint(const HagnnModel& model, const std::filesystem::path& path) {
  const auto& c = model.config();
  json header;
  header["config"] = {{"hidden", c.hidden},
                      {"layers", c.layers},
                      {"passer", std::string(to_string(c.passer))},
                      {"learning_rate", c.learning_rate},
                      {"epochs", c.epochs},
                      {"batch_size", c.batch_size},
                      {"seed", c.seed},
                      {"depth_tiers", c.depth_tiers},
                      {"text_width", c.text_width}};
  header["vocabulary"] = model.vocabulary().names();
  json tensors = json::array();
  for (const auto& p : model.parameters()) tensors.push_back({{"name", p.name}, {"rows", p.value.rows}, {"cols", p.value.cols}});
  header["tensors"] = tensors;
  const std::string text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  for (const auto& p : model.parameters())
    out.append(reinterpret_cast<const char*>(p.value.data.data()), p.value.size() * sizeof(double));
  write_file_atomic(path, out);
}

HagnnModel load_checkpoint(const std::filesystem::path& path) {
  const std::string in = read_file(path);
  if (in.size() < sizeof kMagic || std::memcmp(in.data(), kMagic, sizeof kMagic) != 0)
    throw ModelError(path.string() + " is not a model checkpoint");
  std::size_t at = sizeof kMagic;
  const auto version = take<std::uint32_t>(in, at, "version");
  if (version != kCheckpointVersion)
    throw ModelError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  const auto len = take<std::uint64_t>(in, at, "header length");
  if (at + len > in.size()) throw ModelError("checkpoint truncated while reading header");
  json header;
  try {
    header = json::parse(in.substr(at, len));
  } catch (const json::exception& e) {
    throw ModelError(path.string() + ": bad checkpoint header: " + e.what());
  }
  at += len;

  HagnnConfig c;
  try {
    const auto& j = header.at("config");
    c.hidden = j.at("hidden").get<std::size_t>();
    c.layers = j.at("layers").get<int>();
    c.passer = message_passer_from_string(j.at("passer").get<std::string>());
    c.learning_rate = j.at("learning_rate").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.depth_tiers = j.at("depth_tiers").get<int>();
    c.text_width = j.at("text_width").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ModelError(path.string() + ": bad checkpoint config: " + e.what());
  }
  HagnnModel model(c, PropertyVocabulary(header.at("vocabulary").get<std::vector<std::string>>()));
  auto& params = model.parameters();
  const auto& tensors = header.at("tensors");
  if (tensors.size() != params.size())
    throw ModelError(path.string() + ": checkpoint has " + std::to_string(tensors.size()) + " tensors, model expects " +
                     std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = tensors[i];
    auto& p = params[i];
    if (t.at("name").get<std::string>() != p.name || t.at("rows").get<std::size_t>() != p.value.rows ||
        t.at("cols").get<std::size_t>() != p.value.cols)
      throw ModelError(path.string() + ": tensor " + std::to_string(i) + " does not match " + p.name);
    const std::size_t bytes = p.value.size() * sizeof(double);
    if (at + bytes > in.size()) throw ModelError("checkpoint truncated in tensor " + p.name);
    std::memcpy(p.value.data.data(), in.data() + at, bytes);
    at += bytes;
  }
  if (at != in.size()) throw ModelError(path.string() + ": trailing bytes after the last tensor");
  if (!model.all_finite()) throw ModelError(path.string() + ": checkpoint holds non-finite weights");
  return model;
}

}  // namespace ipag
