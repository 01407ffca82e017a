#ifndef DEPI_ENTROPY_POWER_HPP
#define DEPI_ENTROPY_POWER_HPP

#include "depi/pmf.hpp"

namespace depi {

// Entropy of the geometric distribution with mean lambda:
// (1+lambda) ln(1+lambda) - lambda ln(lambda), nats.
double eg(double lambda);

// d/dlambda eg = ln(1+lambda) - ln(lambda).
double eg_prime(double lambda);

// Entropy of Poisson(lambda), by direct summation (no closed form).
double ep(double lambda);

// Monotone inverses on lambda >= 0.
double invert_eg(double s);
double invert_ep(double s);

// Entropy powers: the mean of the reference-family member whose entropy
// matches H(x). V_e uses exp(H) directly.
double vg(const Pmf& x);
double vp(const Pmf& x);
double ve(const Pmf& x);

enum class EntropyKind { geometric, poisson, exponential };

// Bundles forward evaluation and monotone inversion for one reference family.
struct EntropyFunctional {
    EntropyKind kind;
    double tolerance = 1e-12;

    double eval(double lambda) const;
    double invert(double s) const;
    double entropy_power(const Pmf& x) const;
};

EntropyFunctional entropy_functional(EntropyKind kind);

}  // namespace depi

#endif  // DEPI_ENTROPY_POWER_HPP
