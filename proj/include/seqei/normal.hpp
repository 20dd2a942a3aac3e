#pragma once

namespace seqei {

// Standard normal density and distribution function.
double norm_pdf(double z);
double norm_cdf(double z);

}  // namespace seqei
