#ifndef DEPI_HUSIMI_HPP
#define DEPI_HUSIMI_HPP

#include "depi/pmf.hpp"

namespace depi {

// Radial profile of a circularly-symmetric phase-space density: the 2-D
// density is p(r) = f(|r|^2) / pi, and f integrates to 1 over u = |r|^2.
struct RadialDensity {
    double u_max = 0.0;
    double step = 0.0;
    std::vector<double> values;  // f(i * step), i = 0..floor(u_max/step)

    double integral() const;  // trapezoid over the grid
};

class OracleResolutionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Smooth phase-space profile of a pmf: f(u) = sum_n p[n] e^{-u} u^n / n!,
// evaluated in log domain. u_max must capture the Poisson tails of every
// occupied level to 1e-8.
RadialDensity husimi_forward(const Pmf& x, double u_max, double step);

struct ScaledConvolutionCheck {
    double max_abs_discrepancy = 0.0;
    std::size_t grid_samples = 0;  // per axis, before padding
};

// Cross-validates the beamsplitter scaled addition in phase space: the
// profile of x [+]_eta y must match the 2-D convolution of the inputs'
// profiles rescaled by sqrt(eta) and sqrt(1-eta). Returns the max abs
// difference over the radial grid. Tolerances are intentionally coarse; the
// Fock-basis path is the exact one.
ScaledConvolutionCheck check_scaled_convolution(const Pmf& x, const Pmf& y,
                                                double eta, double u_max,
                                                double step);

}  // namespace depi

#endif  // DEPI_HUSIMI_HPP
