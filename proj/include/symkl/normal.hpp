#pragma once

namespace symkl {

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

/// Standard normal quantile for prob in (0, 1). Returns -inf/+inf at 0/1
/// and NaN outside [0, 1].
double normal_quantile(double prob) noexcept;

}  // namespace symkl
