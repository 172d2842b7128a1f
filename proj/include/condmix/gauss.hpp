#pragma once

namespace condmix {

double normal_cdf(double z) noexcept;
double normal_pdf(double z) noexcept;

// Inverse of normal_cdf on (0,1). Acklam's rational approximation plus one
// Halley refinement; accurate to a few ulps over the open interval.
double normal_quantile(double p);

}  // namespace condmix
