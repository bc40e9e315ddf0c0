#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eeg2shape/tensor.hpp"

namespace e2s {

// Missing or corrupt checkpoint data (bad magic, dims mismatch, manifest
// errors).
class checkpoint_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// On-disk layout: a directory with manifest.txt (key=value lines) plus one
// binary file per tensor. Tensor files carry the magic "EEG2SHP1", a u32
// little-endian rank, rank u32 dims, then row-major little-endian f32 data.
struct Checkpoint {
  int format_version = 1;
  std::string module;
  std::uint64_t created_from_seed = 0;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const;
  const std::string* find_meta(const std::string& key) const;
  void set_meta(const std::string& key, const std::string& value);
};

inline constexpr char kCheckpointMagic[9] = "EEG2SHP1";

std::string encode_tensor(const Tensor& t);
Tensor decode_tensor(const std::string& bytes, const std::string& what);

void save_checkpoint(const std::string& dir, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& dir);

}  // namespace e2s
