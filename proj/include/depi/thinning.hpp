#ifndef DEPI_THINNING_HPP
#define DEPI_THINNING_HPP

#include "depi/pmf.hpp"

namespace depi {

// Binomial thinning: each unit of X survives independently with probability
// eta, so p_Y[n] = sum_{k>=n} p_X[k] C(k,n) eta^n (1-eta)^{k-n}. Scales the
// mean by eta and never extends the support. eta within 1e-15 of an endpoint
// is snapped to the exact endpoint.
Pmf thin(const Pmf& x, double eta, const TailPolicy& policy = {});

}  // namespace depi

#endif  // DEPI_THINNING_HPP
