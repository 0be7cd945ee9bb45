#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "test_util.hpp"
#include "topksvm/io.hpp"

using namespace topksvm;

namespace {

Dataset parse(const std::string& text, std::size_t min_features = 0) {
  std::istringstream in(text);
  return parse_libsvm(in, min_features);
}

std::size_t parse_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).rfind("line " + std::to_string(e.line()) + ":", 0) == 0);
    return e.line();
  }
  return 0;
}

Model sample_model(std::mt19937_64& rng, std::size_t d, std::size_t m) {
  Model model;
  model.W = Matrix(d, m);
  for (double& w : model.W.values()) w = std::normal_distribution<double>()(rng);
  model.W(0, 0) = -0.0;
  model.W(d - 1, m - 1) = 5e-324;  // denormal
  model.loss = {LossVariant::topk_beta, m - 1};
  model.lambda = 1.0 / 3.0;
  for (std::size_t j = 0; j < m; ++j) {
    model.label_values.push_back(static_cast<std::int64_t>(j * 10) - 7);
  }
  return model;
}

std::string model_bytes(const Model& model) {
  std::ostringstream out(std::ios::binary);
  write_model(model, out);
  return out.str();
}

Model from_bytes(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_model(in);
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("topksvm_io_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("libsvm example") {
  const Dataset data = parse("2 1:0.5 3:1.0\n1 2:2.0");
  CHECK(data.num_features() == 3);
  CHECK(data.num_examples() == 2);
  CHECK(data.X(0, 0) == 0.5);
  CHECK(data.X(1, 0) == 0.0);
  CHECK(data.X(2, 0) == 1.0);
  CHECK(data.X(0, 1) == 0.0);
  CHECK(data.X(1, 1) == 2.0);
  CHECK(data.X(2, 1) == 0.0);
  CHECK(data.label_values == std::vector<std::int64_t>{1, 2});
  CHECK(data.labels == std::vector<std::size_t>{1, 0});
}

TEST_CASE("libsvm edge cases that parse") {
  // Unsorted indices, a leading '+', a label written as a double, blank
  // lines, CRLF endings and an example with no features.
  const Dataset data = parse("+1 3:1 1:2\r\n\n-1\n2.0 2:1e-3\n");
  CHECK(data.num_examples() == 3);
  CHECK(data.label_values == std::vector<std::int64_t>{-1, 1, 2});
  CHECK(data.X(0, 0) == 2.0);
  CHECK(data.X(2, 0) == 1.0);
  CHECK(data.X(1, 2) == 1e-3);
  CHECK(parse("1 1:1", 5).num_features() == 5);
  CHECK(parse("1 4:1", 2).num_features() == 4);
}

TEST_CASE("libsvm errors") {
  CHECK_THROWS_AS(parse(""), std::invalid_argument);
  CHECK_THROWS_AS(parse("\n\n"), std::invalid_argument);
  CHECK(parse_error_line("1 1:1 1:2") == 1);
  CHECK(parse_error_line("1 1:1\n2 0:1") == 2);
  CHECK(parse_error_line("1 1:1\n\n2 -3:1") == 3);
  CHECK(parse_error_line("x 1:1") == 1);
  CHECK(parse_error_line("1.5 1:1") == 1);
  CHECK(parse_error_line("1 1:abc") == 1);
  CHECK(parse_error_line("1 1:nan") == 1);
  CHECK(parse_error_line("1 1") == 1);
  CHECK(parse_error_line("1  1:1") == 1);
  CHECK(parse_error_line("1 a:1") == 1);
  CHECK_THROWS_AS(read_libsvm("/nonexistent/topksvm.txt"), IoError);
}

TEST_CASE("libsvm write/read round trip is exact") {
  std::mt19937_64 rng(51);
  Dataset data = testutil::synthetic_dataset(rng, 30, 7, 4);
  data.X(3, 2) = 0.0;
  data.X(6, 5) = 1e-300;
  std::stringstream buf;
  write_libsvm(data, buf);
  const Dataset back = parse_libsvm(buf, data.num_features());
  CHECK(back.X == data.X);
  CHECK(back.labels == data.labels);
  CHECK(back.label_values == data.label_values);

  TempDir dir;
  write_libsvm(data, dir.path / "d.txt");
  CHECK(read_libsvm(dir.path / "d.txt", 7).X == data.X);
}

TEST_CASE("model round trip is bit-exact") {
  std::mt19937_64 rng(52);
  const Model model = sample_model(rng, 6, 4);
  const std::string bytes = model_bytes(model);
  CHECK(bytes.size() == 45 + 8 * 4 + 8 * 6 * 4 + 8);
  CHECK(bytes.compare(0, 8, std::string("TOPKSVM\0", 8)) == 0);
  const Model back = from_bytes(bytes);
  CHECK(back == model);
  CHECK(std::signbit(back.W(0, 0)));
  CHECK(model_bytes(back) == bytes);

  TempDir dir;
  write_model(model, dir.path / "m.bin");
  CHECK(read_model(dir.path / "m.bin") == model);
  CHECK_THROWS_AS(read_model(dir.path / "missing.bin"), IoError);
}

TEST_CASE("corrupted model files are rejected") {
  std::mt19937_64 rng(53);
  const std::string good = model_bytes(sample_model(rng, 3, 3));
  auto patched = [&](std::size_t off, unsigned char v) {
    std::string b = good;
    b[off] = static_cast<char>(v);
    return b;
  };

  CHECK_THROWS_AS(from_bytes(patched(0, 'X')), FormatError);
  CHECK_THROWS_AS(from_bytes(patched(8, 2)), FormatError);         // version
  CHECK_THROWS_AS(from_bytes(patched(12, 7)), FormatError);        // variant
  CHECK_THROWS_AS(from_bytes(patched(13, 0)), FormatError);        // m
  CHECK_THROWS_AS(from_bytes(patched(29, 3)), FormatError);        // k = m
  CHECK_THROWS_AS(from_bytes(patched(44, 0xff)), FormatError);     // lambda
  CHECK_THROWS_AS(from_bytes(patched(45 + 24 + 5, 0x11)), FormatError);  // W
  CHECK_THROWS_AS(from_bytes(patched(good.size() - 1, 0)), FormatError);
  CHECK_THROWS_AS(from_bytes(good + "x"), FormatError);
  for (std::size_t cut : {0UL, 4UL, 20UL, 60UL, good.size() - 1}) {
    CHECK_THROWS_AS(from_bytes(good.substr(0, cut)), FormatError);
  }

  // Same version, recomputed checksum: an honest file still loads.
  std::string b = good;
  b[45 + 24] ^= 1;
  const auto* p = reinterpret_cast<const unsigned char*>(b.data()) + 45 + 24;
  const std::uint64_t h = fnv1a64({p, 3 * 3 * 8});
  std::memcpy(b.data() + b.size() - 8, &h, 8);
  CHECK_NOTHROW(from_bytes(b));
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64({}) == 0xcbf29ce484222325ULL);
  const unsigned char a[] = {'a'};
  CHECK(fnv1a64(a) == 0xaf63dc4c8601ec8cULL);
  const std::string fb = "foobar";
  CHECK(fnv1a64({reinterpret_cast<const unsigned char*>(fb.data()), fb.size()}) ==
        0x85944171f73967e8ULL);
}

TEST_CASE("write_model checks its input") {
  std::mt19937_64 rng(54);
  Model model = sample_model(rng, 2, 3);
  model.label_values.pop_back();
  std::ostringstream out;
  CHECK_THROWS_AS(write_model(model, out), std::invalid_argument);
}
