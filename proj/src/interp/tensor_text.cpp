#include "gsgi/interp/tensor_text.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gsgi/errors.hpp"

namespace gsgi::interp {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok) {
  T x{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw FormatError("tensor text: bad number '" + std::string(tok) + "'");
  }
  return x;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_tensor(const nn::Tensor& t) {
  const auto& shape = t.shape();
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(shape[i]);
  }
  out += '\n';
  const int row = shape.empty() ? 1 : shape.back();
  const auto& data = t.storage();
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += format_double(data[i]);
    out += (static_cast<int>(i % static_cast<std::size_t>(row)) == row - 1) ? '\n' : ' ';
  }
  return out;
}

nn::Tensor parse_tensor(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  if (!std::getline(is, line)) throw FormatError("tensor text: missing shape line");
  std::vector<int> shape;
  for (auto tok : split_ws(line)) {
    const int d = parse_number<int>(tok);
    if (d < 1) throw FormatError("tensor text: non-positive dimension");
    shape.push_back(d);
  }
  if (shape.empty()) throw FormatError("tensor text: empty shape");
  const int row = shape.back();
  nn::Tensor t(shape);
  auto& data = t.storage();
  std::size_t filled = 0;
  while (std::getline(is, line)) {
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (static_cast<int>(toks.size()) != row) {
      throw FormatError("tensor text: row of " + std::to_string(toks.size()) +
                        " values, expected " + std::to_string(row));
    }
    for (auto tok : toks) {
      if (filled == data.size()) throw FormatError("tensor text: too many values");
      data[filled++] = parse_number<double>(tok);
    }
  }
  if (filled != data.size()) throw FormatError("tensor text: too few values");
  return t;
}

void save_tensor(const nn::Tensor& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << format_tensor(t);
}

nn::Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_tensor(ss.str());
}

}  // namespace gsgi::interp
