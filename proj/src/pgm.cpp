#include "eeg2shape/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "eeg2shape/errors.hpp"

namespace e2s {

std::string encode_pgm(const Tensor& image01) {
  if (image01.rank() != 2) throw shape_error("encode_pgm expects a [H,W] image");
  const int h = image01.dims[0], w = image01.dims[1];
  std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(h) * w);
  for (long long i = 0; i < image01.size(); ++i) {
    const double v = std::min(1.0, std::max(0.0, static_cast<double>(image01[i])));
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
  }
  return out;
}

void write_pgm(const std::string& path, const Tensor& image01) {
  write_file_bytes(path, encode_pgm(image01));
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace e2s
