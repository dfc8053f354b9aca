#pragma once

#include <numbers>

namespace jumphedge {

inline constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2*pi)

/// Standard normal density.
double norm_pdf(double x) noexcept;

/// Standard normal CDF, 0.5*erfc(-x/sqrt(2)). Relative error is at the level
/// of the libm erfc (a few ulp), including the far left tail.
double norm_cdf(double x) noexcept;

}  // namespace jumphedge
