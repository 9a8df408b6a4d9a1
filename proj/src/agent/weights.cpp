#include "gsgi/agent/weights.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "gsgi/errors.hpp"

namespace gsgi::agent {

namespace {

void put_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xFF));
    bits >>= 8;
  }
}

double get_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) {
    bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  }
  return std::bit_cast<double>(bits);
}

std::string shape_text(const std::vector<int>& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(shape[i]);
  }
  return s;
}

std::vector<int> parse_shape(const std::string& text) {
  std::vector<int> shape;
  std::istringstream is(text);
  std::string part;
  while (std::getline(is, part, 'x')) {
    try {
      shape.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw FormatError("bad shape '" + text + "'");
    }
  }
  return shape;
}

NetworkConfig parse_config_line(const std::string& line) {
  std::istringstream is(line);
  std::string word;
  is >> word;
  if (word != "config") throw FormatError("weights: missing config line");
  std::map<std::string, std::string> kv;
  while (is >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) throw FormatError("weights: bad config entry " + word);
    kv[word.substr(0, eq)] = word.substr(eq + 1);
  }
  NetworkConfig cfg;
  try {
    const auto v = parse_variant(kv.at("input_variant"));
    if (!v) throw FormatError("weights: unknown input_variant");
    cfg.input_variant = *v;
    cfg.use_convlstm = kv.at("use_convlstm") == "1";
    cfg.feature_channels = std::stoi(kv.at("feature_channels"));
    cfg.mlp_hidden = std::stoi(kv.at("mlp_hidden"));
    cfg.grid_side = std::stoi(kv.at("grid_side"));
  } catch (const std::out_of_range&) {
    throw FormatError("weights: incomplete config line");
  } catch (const std::invalid_argument&) {
    throw FormatError("weights: non-numeric config value");
  }
  return cfg;
}

struct ManifestEntry {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
};

}  // namespace

std::string format_network_config(const NetworkConfig& cfg) {
  return "input_variant=" + std::string(variant_name(cfg.input_variant)) +
         " use_convlstm=" + (cfg.use_convlstm ? "1" : "0") +
         " feature_channels=" + std::to_string(cfg.feature_channels) +
         " mlp_hidden=" + std::to_string(cfg.mlp_hidden) +
         " grid_side=" + std::to_string(cfg.grid_side);
}

std::string encode_weights(const Network& net) {
  std::string header = std::string(kWeightsMagic) + "\nconfig " +
                       format_network_config(net.config()) + "\n";
  std::string body;
  for (const Parameter* p : net.parameters()) {
    header += "tensor " + p->name + " f64 " + shape_text(p->value.shape()) + " " +
              std::to_string(body.size()) + "\n";
    for (double v : p->value.data()) put_le(body, v);
  }
  header += "end\n";
  return header + body;
}

Network decode_weights(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const auto nl = bytes.find('\n', pos);
    if (nl == std::string::npos) throw FormatError("weights: truncated manifest");
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  if (next_line() != kWeightsMagic) {
    throw FormatError("weights: missing MAA3C-W1 version tag");
  }
  const NetworkConfig cfg = parse_config_line(next_line());
  std::vector<ManifestEntry> entries;
  for (std::string line = next_line(); line != "end"; line = next_line()) {
    std::istringstream is(line);
    std::string kind, dtype, shape;
    ManifestEntry e;
    if (!(is >> kind >> e.name >> dtype >> shape >> e.offset) || kind != "tensor") {
      throw FormatError("weights: bad manifest line '" + line + "'");
    }
    if (dtype != "f64") {
      throw FormatError("weights: tensor " + e.name + " has unsupported dtype " + dtype);
    }
    e.shape = parse_shape(shape);
    entries.push_back(std::move(e));
  }
  const std::size_t data_start = pos;

  Network net(cfg);
  auto params = net.parameters();
  if (entries.size() != params.size()) {
    throw FormatError("weights: manifest lists " + std::to_string(entries.size()) +
                      " tensors, configuration needs " +
                      std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ManifestEntry& e = entries[i];
    Parameter& p = *params[i];
    if (e.name != p.name || e.shape != p.value.shape()) {
      throw FormatError("weights: tensor " + e.name + " [" + shape_text(e.shape) +
                        "] does not match expected " + p.name + " [" +
                        shape_text(p.value.shape()) + "]");
    }
    const std::size_t need = p.value.size() * 8;
    if (data_start + e.offset + need > bytes.size()) {
      throw FormatError("weights: data for tensor " + e.name + " is truncated");
    }
    const char* src = bytes.data() + data_start + e.offset;
    for (std::size_t k = 0; k < p.value.size(); ++k) p.value[k] = get_le(src + 8 * k);
  }
  return net;
}

void save_weights(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  const std::string bytes = encode_weights(net);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

Network load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_weights(ss.str());
}

Network load_weights(const std::filesystem::path& path,
                     const NetworkConfig& expected) {
  Network net = load_weights(path);
  if (net.config() == expected) return net;
  const Network want(expected);
  std::string diff;
  const auto have_p = net.parameters();
  const auto want_p = want.parameters();
  for (std::size_t i = 0; i < std::max(have_p.size(), want_p.size()); ++i) {
    const std::string have = i < have_p.size()
                                 ? have_p[i]->name + " [" + shape_text(have_p[i]->value.shape()) + "]"
                                 : "(none)";
    const std::string need = i < want_p.size()
                                 ? want_p[i]->name + " [" + shape_text(want_p[i]->value.shape()) + "]"
                                 : "(none)";
    if (have != need) diff += "\n  file: " + have + "  expected: " + need;
  }
  throw FormatError("weights: configuration mismatch (file: " +
                    format_network_config(net.config()) + "; expected: " +
                    format_network_config(expected) + ")" + diff);
}

std::uint64_t weights_checksum(const Network& net) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::string bytes;
  for (const Parameter* p : net.parameters()) {
    bytes.clear();
    for (double v : p->value.data()) put_le(bytes, v);
    for (char c : bytes) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace gsgi::agent
