#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace navirl {

// Error categories the command-line front end maps onto exit codes.
struct MissingInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 64-bit FNV-1a. Used for dataset fingerprints and metric-file comparisons.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// Derives an independent stream seed from a base seed and a stream index, so
// per-item work is reproducible regardless of scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);
std::string file_hash(const std::string& path);

}  // namespace navirl
