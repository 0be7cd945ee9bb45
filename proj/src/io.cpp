#include "topksvm/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string_view>
#include <utility>
#include <vector>

namespace topksvm {

ParseError::ParseError(std::size_t line, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ": " + msg),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <class T>
bool parse_whole(std::string_view s, T& out) {
  if (s.empty()) return false;
  // from_chars rejects a leading '+', which LIBSVM files use for labels.
  if (s.front() == '+' && s.size() > 1 && s[1] != '-') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::int64_t parse_label(std::string_view tok, std::size_t line) {
  std::int64_t label = 0;
  if (parse_whole(tok, label)) return label;
  double v = 0.0;
  if (parse_whole(tok, v) && std::isfinite(v) && v == std::trunc(v) &&
      std::abs(v) < 9.0e15) {
    return static_cast<std::int64_t>(v);
  }
  throw ParseError(line, "invalid label '" + std::string(tok) + "'");
}

struct Entry {
  std::size_t index;  // 1-based
  double value;
};

}  // namespace

Dataset parse_libsvm(std::istream& in, std::size_t min_features) {
  std::vector<std::int64_t> raw_labels;
  std::vector<std::vector<Entry>> rows;
  std::size_t max_index = 0;

  std::string buf;
  std::size_t line_no = 0;
  while (std::getline(in, buf)) {
    ++line_no;
    const std::string_view line = trim(buf);
    if (line.empty()) continue;

    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (true) {
      const auto sp = line.find(' ', pos);
      const auto tok = line.substr(pos, sp == std::string_view::npos
                                            ? std::string_view::npos
                                            : sp - pos);
      if (tok.empty()) throw ParseError(line_no, "consecutive separators");
      tokens.push_back(tok);
      if (sp == std::string_view::npos) break;
      pos = sp + 1;
    }

    raw_labels.push_back(parse_label(tokens.front(), line_no));
    std::vector<Entry> row;
    row.reserve(tokens.size() - 1);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const std::string_view tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "expected idx:val, got '" +
                                      std::string(tok) + "'");
      }
      const std::string_view idx_s = tok.substr(0, colon);
      const std::string_view val_s = tok.substr(colon + 1);
      long long idx = 0;
      if (!parse_whole(idx_s, idx)) {
        throw ParseError(line_no, "invalid feature index '" +
                                      std::string(idx_s) + "'");
      }
      if (idx <= 0) {
        throw ParseError(line_no, "feature index must be positive, got " +
                                      std::to_string(idx));
      }
      double val = 0.0;
      if (!parse_whole(val_s, val) || !std::isfinite(val)) {
        throw ParseError(line_no, "invalid feature value '" +
                                      std::string(val_s) + "'");
      }
      row.push_back({static_cast<std::size_t>(idx), val});
    }
    std::sort(row.begin(), row.end(),
              [](const Entry& a, const Entry& b) { return a.index < b.index; });
    for (std::size_t j = 1; j < row.size(); ++j) {
      if (row[j].index == row[j - 1].index) {
        throw ParseError(line_no, "duplicate feature index " +
                                      std::to_string(row[j].index));
      }
    }
    if (!row.empty()) max_index = std::max(max_index, row.back().index);
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read error");
  if (rows.empty()) throw std::invalid_argument("libsvm: no examples in input");

  const std::size_t d = std::max({max_index, min_features, std::size_t{1}});
  Matrix X(d, rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const Entry& e : rows[i]) X(e.index - 1, i) = e.value;
  }
  return make_dataset(std::move(X), raw_labels);
}

Dataset read_libsvm(const std::filesystem::path& path,
                    std::size_t min_features) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_libsvm(in, min_features);
}

void write_libsvm(const Dataset& data, std::ostream& out) {
  std::array<char, 64> buf{};
  auto put_double = [&](double v) {
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.write(buf.data(), ptr - buf.data());
  };
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    out << data.label_values[data.labels[i]];
    const auto x = data.X.col(i);
    for (std::size_t f = 0; f < x.size(); ++f) {
      if (x[f] == 0.0) continue;
      out << ' ' << (f + 1) << ':';
      put_double(x[f]);
    }
    out << '\n';
  }
}

void write_libsvm(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_libsvm(data, out);
  if (!out) throw IoError("write failed: " + path.string());
}

// Model file, all integers and reals little-endian:
//   "TOPKSVM\0"  8 bytes
//   u32 version (1)
//   u8  loss variant (0 = alpha, 1 = beta)
//   u64 m, u64 d, u64 k
//   f64 lambda
//   i64 label value, m times
//   f64 W row-major (feature-major: W[f][j] at f*m + j), d*m times
//   u64 FNV-1a 64 of the W payload bytes
namespace {

constexpr std::array<char, 8> kMagic = {'T', 'O', 'P', 'K', 'S', 'V', 'M', '\0'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void append_le(std::vector<unsigned char>& buf, T v) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  buf.insert(buf.end(), bytes.begin(), bytes.end());
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <class T>
  T get(const char* what) {
    std::array<unsigned char, sizeof(T)> bytes{};
    read(bytes.data(), bytes.size(), what);
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(bytes.begin(), bytes.end());
    }
    return std::bit_cast<T>(bytes);
  }

  void read(unsigned char* dst, std::size_t n, const char* what) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw FormatError(std::string("model file truncated in ") + what);
    }
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
};

}  // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_model(const Model& model, std::ostream& out) {
  const std::size_t m = model.num_classes();
  const std::size_t d = model.num_features();
  if (model.label_values.size() != m) {
    throw std::invalid_argument("model: label table does not match W");
  }
  std::vector<unsigned char> header;
  header.insert(header.end(), kMagic.begin(), kMagic.end());
  append_le(header, kVersion);
  append_le(header, static_cast<std::uint8_t>(model.loss.variant));
  append_le(header, static_cast<std::uint64_t>(m));
  append_le(header, static_cast<std::uint64_t>(d));
  append_le(header, static_cast<std::uint64_t>(model.loss.k));
  append_le(header, model.lambda);
  for (std::int64_t v : model.label_values) append_le(header, v);

  std::vector<unsigned char> payload;
  payload.reserve(m * d * 8);
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t j = 0; j < m; ++j) append_le(payload, model.W(f, j));
  }
  std::vector<unsigned char> trailer;
  append_le(trailer, fnv1a64(payload));

  out.write(reinterpret_cast<const char*>(header.data()),
            static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  out.write(reinterpret_cast<const char*>(trailer.data()),
            static_cast<std::streamsize>(trailer.size()));
  if (!out) throw IoError("model write failed");
}

void write_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_model(model, out);
}

Model read_model(std::istream& in) {
  Reader r(in);
  std::array<unsigned char, 8> magic{};
  r.read(magic.data(), magic.size(), "magic");
  if (std::memcmp(magic.data(), kMagic.data(), kMagic.size()) != 0) {
    throw FormatError("not a model file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVersion) {
    throw FormatError("unsupported model version " + std::to_string(version));
  }
  const auto variant = r.get<std::uint8_t>("loss variant");
  if (variant > 1) {
    throw FormatError("unknown loss variant tag " + std::to_string(variant));
  }
  const auto m = r.get<std::uint64_t>("m");
  const auto d = r.get<std::uint64_t>("d");
  const auto k = r.get<std::uint64_t>("k");
  const auto lambda = r.get<double>("lambda");
  constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 40;
  if (m == 0 || d == 0 || m > kMaxEntries / d) {
    throw FormatError("implausible model shape");
  }
  // The checksum covers only W, so sanity-check the header fields.
  if (k < 1 || k >= m) throw FormatError("implausible k in model header");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw FormatError("implausible lambda in model header");
  }

  Model model;
  model.loss.variant = static_cast<LossVariant>(variant);
  model.loss.k = static_cast<std::size_t>(k);
  model.lambda = lambda;
  model.label_values.resize(m);
  for (auto& v : model.label_values) v = r.get<std::int64_t>("label table");

  std::vector<unsigned char> payload(m * d * 8);
  r.read(payload.data(), payload.size(), "weights");
  const auto checksum = r.get<std::uint64_t>("checksum");
  if (checksum != fnv1a64(payload)) {
    throw FormatError("model checksum mismatch");
  }
  if (!r.at_end()) throw FormatError("trailing bytes after model checksum");

  model.W = Matrix(d, m);
  std::size_t off = 0;
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t j = 0; j < m; ++j, off += 8) {
      std::array<unsigned char, 8> bytes{};
      std::copy_n(payload.begin() + static_cast<std::ptrdiff_t>(off), 8,
                  bytes.begin());
      if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
      }
      model.W(f, j) = std::bit_cast<double>(bytes);
    }
  }
  return model;
}

Model read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_model(in);
}

}  // namespace topksvm
