#pragma once

namespace ecdl {

// Standard normal helpers computed from the upper tail so that tiny p-values
// keep full relative precision.
double normal_cdf(double z);
double normal_upper_tail(double z);
// z such that P(Z > z) = q, for q in (0, 1).
double normal_upper_quantile(double q);

// 2 * P(Z > |z|), floored at kPValueFloor.
double two_sided_pvalue(double z);

inline constexpr double kPValueFloor = 1e-300;

}  // namespace ecdl
