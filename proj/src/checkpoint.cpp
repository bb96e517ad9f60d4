#include "bdhpd/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "bdhpd/errors.hpp"

namespace bdhpd {

using nlohmann::json;

namespace {

constexpr char kMagic[6] = {'B', 'D', 'H', 'P', 'D', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

json model_to_json(const ModelConfig& m) {
  return json{{"d_ssl", m.d_ssl},          {"d_wav", m.d_wav},
              {"hidden", m.hidden},        {"ratio", m.ratio},
              {"kernel", m.kernel},        {"embed_dim", m.embed_dim},
              {"n_bottleneck", m.n_bottleneck},
              {"placements", to_string(m.placements)},
              {"norm_eps", m.norm_eps}};
}

ModelConfig model_from_json(const json& j) {
  ModelConfig m;
  m.d_ssl = j.at("d_ssl").get<std::size_t>();
  m.d_wav = j.at("d_wav").get<std::size_t>();
  m.hidden = j.at("hidden").get<std::size_t>();
  m.ratio = j.at("ratio").get<std::size_t>();
  m.kernel = j.at("kernel").get<std::size_t>();
  m.embed_dim = j.at("embed_dim").get<std::size_t>();
  m.n_bottleneck = j.at("n_bottleneck").get<std::size_t>();
  m.placements = placements_from_string(j.at("placements").get<std::string>());
  m.norm_eps = j.at("norm_eps").get<double>();
  return m;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  json header;
  header["format"] = 1;
  header["model"] = model_to_json(ck.model);
  header["wavelet"] = {{"family", to_string(ck.wavelet.family)},
                       {"levels", ck.wavelet.levels},
                       {"eps", ck.wavelet.eps}};
  header["frame"] = {{"window_ms", ck.frame.window_ms}, {"hop_ms", ck.frame.hop_ms}};
  header["ablation"] = ck.ablation.components();
  header["languages"] = ck.languages.names();
  json params = json::array();
  for (std::size_t i = 0; i < ck.params.size(); ++i)
    params.push_back({{"name", ck.params[i].name}, {"shape", ck.params[i].value.shape}});
  header["params"] = std::move(params);

  std::string out(kMagic, sizeof(kMagic));
  const std::string hdr = header.dump();
  put_u32(out, static_cast<std::uint32_t>(hdr.size()));
  out += hdr;
  for (std::size_t i = 0; i < ck.params.size(); ++i)
    for (float f : ck.params[i].value.data) {
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      put_u32(out, u);
    }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("checkpoint: cannot write " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw FormatError("checkpoint: short write to " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("checkpoint: cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kMagic) + 4 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw FormatError("checkpoint: " + path.string() + " has bad magic (want BDHPD1)");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::size_t off = sizeof(kMagic);
  const std::uint32_t hdr_len = p[off] | (std::uint32_t(p[off + 1]) << 8) |
                                (std::uint32_t(p[off + 2]) << 16) |
                                (std::uint32_t(p[off + 3]) << 24);
  off += 4;
  if (off + hdr_len > bytes.size())
    throw FormatError("checkpoint: " + path.string() + " truncated header");
  json header;
  try {
    header = json::parse(bytes.substr(off, hdr_len));
  } catch (const json::parse_error& e) {
    throw FormatError("checkpoint: " + path.string() + " header: " + e.what());
  }
  off += hdr_len;

  Checkpoint ck;
  ck.model = model_from_json(header.at("model"));
  ck.wavelet.family = wavelet_family_from_string(header.at("wavelet").at("family"));
  ck.wavelet.levels = header.at("wavelet").at("levels").get<std::size_t>();
  ck.wavelet.eps = header.at("wavelet").at("eps").get<double>();
  ck.frame.window_ms = header.at("frame").at("window_ms").get<double>();
  ck.frame.hop_ms = header.at("frame").at("hop_ms").get<double>();
  ck.ablation = Ablation::from_components(header.at("ablation").get<std::vector<std::string>>());
  ck.languages = LanguageRegistry::from_names(header.at("languages").get<std::vector<std::string>>());

  for (const json& pj : header.at("params")) {
    const auto shape = pj.at("shape").get<std::vector<std::size_t>>();
    TensorF t = TensorF::zeros(shape);
    if (off + 4 * t.size() > bytes.size())
      throw FormatError("checkpoint: " + path.string() + " truncated payload at parameter '" +
                        pj.at("name").get<std::string>() + "'");
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::uint32_t u = p[off] | (std::uint32_t(p[off + 1]) << 8) |
                              (std::uint32_t(p[off + 2]) << 16) |
                              (std::uint32_t(p[off + 3]) << 24);
      std::memcpy(&t.data[i], &u, 4);
      off += 4;
    }
    ck.params.add(pj.at("name").get<std::string>(), std::move(t));
  }
  if (off != bytes.size())
    throw FormatError("checkpoint: " + path.string() + " has trailing bytes");
  return ck;
}

} // namespace bdhpd
