#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "eeg2shape/tensor.hpp"

namespace e2s {

struct GradCheckBlockReport {
  std::string name;
  double max_rel_error = 0.0;
  int probes = 0;
};

struct GradCheckReport {
  double tolerance = 0.0;
  double max_rel_error = 0.0;
  bool passed = true;
  std::vector<GradCheckBlockReport> blocks;

  std::string summary() const;
};

// Central finite differences against analytic gradients, in double precision.
// `blocks` are the parameter tensors probed in place; `loss` evaluates the
// scalar objective at the current parameter values; `analytic` returns one
// gradient tensor per block, in block order. Large blocks are spot-checked at
// `probes_per_block` evenly spaced elements.
GradCheckReport grad_check(const std::vector<std::pair<std::string, TensorD*>>& blocks,
                           const std::function<double()>& loss,
                           const std::function<std::vector<TensorD>()>& analytic,
                           double tolerance, int probes_per_block = 12, double step = 1e-5);

}  // namespace e2s
