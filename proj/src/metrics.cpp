#include "tienet/metrics.hpp"

#include <cmath>
#include <numeric>

#include "tienet/error.hpp"

namespace tienet {

namespace {

void require_mask(const ScalarField& f, const DiskMask& mask) {
  if (mask.m != f.size()) throw Error(ErrorCode::ShapeMismatch, "mask size does not match field");
}

}  // namespace

double rms_error(const ScalarField& exact, const ScalarField& candidate, const DiskMask& mask,
                 ErrorNormalization norm) {
  require_same_shape(exact, candidate, "rms_error");
  require_mask(exact, mask);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < exact.count(); ++i) {
    if (!mask[i]) continue;
    const double d = exact[i] - candidate[i];
    num += d * d;
    den += exact[i] * exact[i];
  }
  if (!(den > 0.0)) {
    throw Error(ErrorCode::UndefinedMetric, "exact phase vanishes on the analysis window");
  }
  const double ratio = num / den;
  return norm == ErrorNormalization::Root ? std::sqrt(ratio) : ratio;
}

double mean_rms_error(std::span<const double> per_pair) {
  if (per_pair.empty()) throw Error(ErrorCode::InvalidArgument, "mean of an empty error list");
  return std::accumulate(per_pair.begin(), per_pair.end(), 0.0) /
         static_cast<double>(per_pair.size());
}

ScalarField error_map(const ScalarField& candidate, const ScalarField& exact,
                      const DiskMask& mask) {
  require_same_shape(candidate, exact, "error_map");
  require_mask(exact, mask);
  ScalarField e(exact.size(), exact.width());
  for (std::size_t i = 0; i < e.count(); ++i) e[i] = mask[i] ? candidate[i] - exact[i] : 0.0;
  return e;
}

double mean_over_mask(const ScalarField& f, const DiskMask& mask) {
  require_mask(f, mask);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < f.count(); ++i) {
    if (mask[i]) {
      sum += f[i];
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorCode::UndefinedMetric, "empty analysis window");
  return sum / static_cast<double>(n);
}

ScalarField offset_correct(const ScalarField& retrieved, const ScalarField& exact,
                           const DiskMask& mask) {
  const double offset = mean_over_mask(error_map(retrieved, exact, mask), mask);
  ScalarField out = retrieved;
  for (auto& v : out.values()) v -= offset;
  return out;
}

void ErrorReport::summarize() {
  std::vector<double> r, a;
  for (const auto& p : pairs) {
    r.push_back(p.retrieved);
    a.push_back(p.adjusted);
  }
  mean_retrieved = mean_rms_error(r);
  mean_adjusted = mean_rms_error(a);
}

}  // namespace tienet
