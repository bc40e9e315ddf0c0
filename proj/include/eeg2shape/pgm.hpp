#pragma once

#include <string>

#include "eeg2shape/tensor.hpp"

namespace e2s {

// Binary PGM (P5, maxval 255) of a [H,W] image with values in [0,1];
// byte = round(255 * pixel), clamped.
std::string encode_pgm(const Tensor& image01);

void write_pgm(const std::string& path, const Tensor& image01);

// Whole-file read, used for byte-exact comparisons.
std::string read_file_bytes(const std::string& path);

void write_file_bytes(const std::string& path, const std::string& bytes);

}  // namespace e2s
