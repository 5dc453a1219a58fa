#pragma once

#include <span>
#include <string>
#include <vector>

#include "tienet/grid.hpp"

namespace tienet {

enum class ErrorNormalization {
  SumOfSquares,  // sum (ex - cand)^2 / sum ex^2, the default
  Root,          // square root of the above
};

/// Normalised squared error over the mask:
///   sum_mask (ex - cand)^2 / sum_mask ex^2
/// Throws UndefinedMetric when the exact phase vanishes on the mask.
double rms_error(const ScalarField& exact, const ScalarField& candidate, const DiskMask& mask,
                 ErrorNormalization norm = ErrorNormalization::SumOfSquares);

double mean_rms_error(std::span<const double> per_pair);

/// cand - ex inside the mask, 0 outside.
ScalarField error_map(const ScalarField& candidate, const ScalarField& exact,
                      const DiskMask& mask);

double mean_over_mask(const ScalarField& f, const DiskMask& mask);

/// retrieved - mean_mask(retrieved - exact).
ScalarField offset_correct(const ScalarField& retrieved, const ScalarField& exact,
                           const DiskMask& mask);

struct PairError {
  std::string id;
  double retrieved = 0.0;
  double adjusted = 0.0;
};

struct ErrorReport {
  std::vector<PairError> pairs;
  double mean_retrieved = 0.0;
  double mean_adjusted = 0.0;

  /// Fills the two means from `pairs`.
  void summarize();
};

}  // namespace tienet
