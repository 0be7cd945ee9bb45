#ifndef TOPKSVM_IO_HPP
#define TOPKSVM_IO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>

#include "topksvm/dataset.hpp"
#include "topksvm/model.hpp"

namespace topksvm {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& msg);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// LIBSVM text: `label idx:val idx:val ...`, one example per line, 1-based
// feature indices, single spaces between tokens. Blank lines are skipped.
// `min_features` pads the feature dimension (0 = infer from the data).
Dataset parse_libsvm(std::istream& in, std::size_t min_features = 0);
Dataset read_libsvm(const std::filesystem::path& path,
                    std::size_t min_features = 0);

/// Writes the nonzero entries of every column with round-trip precision.
void write_libsvm(const Dataset& data, std::ostream& out);
void write_libsvm(const Dataset& data, const std::filesystem::path& path);

void write_model(const Model& model, std::ostream& out);
void write_model(const Model& model, const std::filesystem::path& path);
Model read_model(std::istream& in);
Model read_model(const std::filesystem::path& path);

/// FNV-1a over the raw bytes; the model file checksum.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes) noexcept;

}  // namespace topksvm

#endif  // TOPKSVM_IO_HPP
