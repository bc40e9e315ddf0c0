#include "eeg2shape/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace e2s {

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << (passed ? "grad_check passed" : "grad_check FAILED") << " (tolerance " << tolerance
     << ", worst " << max_rel_error << ")";
  for (const auto& b : blocks) {
    if (b.max_rel_error > tolerance) {
      os << "\n  block '" << b.name << "' rel error " << b.max_rel_error << " exceeds tolerance";
    }
  }
  return os.str();
}

GradCheckReport grad_check(const std::vector<std::pair<std::string, TensorD*>>& blocks,
                           const std::function<double()>& loss,
                           const std::function<std::vector<TensorD>()>& analytic,
                           double tolerance, int probes_per_block, double step) {
  GradCheckReport report;
  report.tolerance = tolerance;

  const std::vector<TensorD> grads = analytic();
  if (grads.size() != blocks.size()) {
    throw shape_error("grad_check: analytic() returned wrong number of blocks");
  }

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    TensorD& param = *blocks[b].second;
    const TensorD& grad = grads[b];
    if (!param.same_shape(grad)) {
      throw shape_error("grad_check: gradient shape mismatch for block '" + blocks[b].first + "'");
    }
    GradCheckBlockReport block;
    block.name = blocks[b].first;

    const long long n = param.size();
    const int probes = static_cast<int>(std::min<long long>(n, probes_per_block));
    for (int p = 0; p < probes; ++p) {
      const long long idx = static_cast<long long>((p + 0.5) * static_cast<double>(n) / probes);
      const double saved = param[idx];
      param[idx] = saved + step;
      const double up = loss();
      param[idx] = saved - step;
      const double down = loss();
      param[idx] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = grad[idx];
      const double denom = std::max(std::abs(a) + std::abs(numeric), 1e-4);
      const double rel = std::abs(a - numeric) / denom;
      block.max_rel_error = std::max(block.max_rel_error, rel);
      ++block.probes;
    }

    report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
    if (block.max_rel_error > tolerance) report.passed = false;
    report.blocks.push_back(std::move(block));
  }
  return report;
}

}  // namespace e2s
