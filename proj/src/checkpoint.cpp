#include "eeg2shape/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eeg2shape/pgm.hpp"

namespace e2s {

namespace {

void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_u32(const std::string& bytes, std::size_t& pos, const std::string& what) {
  if (pos + 4 > bytes.size()) throw checkpoint_error(what + ": truncated tensor file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  }
  pos += 4;
  return v;
}

std::vector<int> parse_dims(const std::string& s, const std::string& what) {
  std::vector<int> dims;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      dims.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw checkpoint_error(what + ": malformed dims '" + s + "'");
    }
  }
  if (dims.empty()) throw checkpoint_error(what + ": empty dims");
  return dims;
}

}  // namespace

const Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw checkpoint_error("checkpoint module '" + module + "' has no tensor '" + name + "'");
}

const std::string* Checkpoint::find_meta(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return &v;
  }
  return nullptr;
}

void Checkpoint::set_meta(const std::string& key, const std::string& value) {
  meta.emplace_back(key, value);
}

std::string encode_tensor(const Tensor& t) {
  std::string out(kCheckpointMagic, 8);
  append_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (int d : t.dims) append_u32(out, static_cast<std::uint32_t>(d));
  for (long long i = 0; i < t.size(); ++i) {
    std::uint32_t bits;
    const float v = t[i];
    std::memcpy(&bits, &v, 4);
    append_u32(out, bits);
  }
  return out;
}

Tensor decode_tensor(const std::string& bytes, const std::string& what) {
  if (bytes.size() < 8 || bytes.compare(0, 8, kCheckpointMagic, 8) != 0) {
    throw checkpoint_error(what + ": bad magic (expected EEG2SHP1)");
  }
  std::size_t pos = 8;
  const std::uint32_t rank = read_u32(bytes, pos, what);
  if (rank == 0 || rank > 8) throw checkpoint_error(what + ": implausible rank");
  std::vector<int> dims;
  long long count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const std::uint32_t d = read_u32(bytes, pos, what);
    if (d == 0) throw checkpoint_error(what + ": zero dimension");
    dims.push_back(static_cast<int>(d));
    count *= d;
  }
  if (bytes.size() - pos != static_cast<std::size_t>(count) * 4) {
    throw checkpoint_error(what + ": payload length does not match dims product");
  }
  Tensor t(dims);
  for (long long i = 0; i < count; ++i) {
    const std::uint32_t bits = read_u32(bytes, pos, what);
    float v;
    std::memcpy(&v, &bits, 4);
    t[i] = v;
  }
  return t;
}

void save_checkpoint(const std::string& dir, const Checkpoint& ck) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << "format_version=" << ck.format_version << "\n";
  manifest << "module=" << ck.module << "\n";
  manifest << "created_from_seed=" << ck.created_from_seed << "\n";
  for (const auto& [k, v] : ck.meta) manifest << "meta." << k << "=" << v << "\n";
  manifest << "tensor_count=" << ck.tensors.size() << "\n";
  for (std::size_t i = 0; i < ck.tensors.size(); ++i) {
    const auto& [name, t] = ck.tensors[i];
    manifest << "tensor." << i << ".name=" << name << "\n";
    manifest << "tensor." << i << ".dims=";
    for (int d = 0; d < t.rank(); ++d) manifest << (d ? "," : "") << t.dims[d];
    manifest << "\n";
  }
  write_file_bytes(dir + "/manifest.txt", manifest.str());
  for (const auto& [name, t] : ck.tensors) {
    write_file_bytes(dir + "/" + name + ".bin", encode_tensor(t));
  }
}

Checkpoint load_checkpoint(const std::string& dir) {
  const std::string manifest_path = dir + "/manifest.txt";
  std::ifstream in(manifest_path);
  if (!in) throw checkpoint_error("missing checkpoint manifest '" + manifest_path + "'");

  Checkpoint ck;
  std::vector<std::string> names;
  std::vector<std::vector<int>> dims;
  long long tensor_count = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw checkpoint_error("manifest line " + std::to_string(line_no) + ": missing '='");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "format_version") {
      ck.format_version = std::stoi(value);
      if (ck.format_version != 1) {
        throw checkpoint_error("unsupported checkpoint format_version " + value);
      }
    } else if (key == "module") {
      ck.module = value;
    } else if (key == "created_from_seed") {
      ck.created_from_seed = std::stoull(value);
    } else if (key.rfind("meta.", 0) == 0) {
      ck.meta.emplace_back(key.substr(5), value);
    } else if (key == "tensor_count") {
      tensor_count = std::stoll(value);
      names.resize(static_cast<std::size_t>(tensor_count));
      dims.resize(static_cast<std::size_t>(tensor_count));
    } else if (key.rfind("tensor.", 0) == 0) {
      const auto rest = key.substr(7);
      const auto dot = rest.find('.');
      if (dot == std::string::npos || tensor_count < 0) {
        throw checkpoint_error("manifest line " + std::to_string(line_no) + ": malformed key '" +
                               key + "'");
      }
      const std::size_t idx = std::stoul(rest.substr(0, dot));
      if (idx >= names.size()) {
        throw checkpoint_error("manifest line " + std::to_string(line_no) +
                               ": tensor index out of range");
      }
      const std::string field = rest.substr(dot + 1);
      if (field == "name") {
        names[idx] = value;
      } else if (field == "dims") {
        dims[idx] = parse_dims(value, "manifest tensor " + std::to_string(idx));
      } else {
        throw checkpoint_error("manifest line " + std::to_string(line_no) +
                               ": unknown tensor field '" + field + "'");
      }
    } else {
      throw checkpoint_error("manifest line " + std::to_string(line_no) + ": unknown key '" + key +
                             "'");
    }
  }
  if (tensor_count < 0) throw checkpoint_error("manifest is missing tensor_count");

  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) {
      throw checkpoint_error("manifest tensor " + std::to_string(i) + " has no name");
    }
    const std::string path = dir + "/" + names[i] + ".bin";
    std::string bytes;
    try {
      bytes = read_file_bytes(path);
    } catch (const std::exception&) {
      throw checkpoint_error("missing tensor file '" + path + "'");
    }
    Tensor t = decode_tensor(bytes, names[i]);
    if (t.dims != dims[i]) {
      throw checkpoint_error("tensor '" + names[i] + "' dims " + dims_to_string(t.dims) +
                             " do not match manifest " + dims_to_string(dims[i]));
    }
    ck.tensors.emplace_back(names[i], std::move(t));
  }
  return ck;
}

}  // namespace e2s
