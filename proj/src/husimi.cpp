#include "depi/husimi.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <fftw3.h>

#include "depi/beamsplitter.hpp"

namespace depi {

namespace {

// f(u) = e^{-u} sum_n (p[n]/n!) u^n. Horner on the polynomial keeps the
// intermediate magnitudes near e^u, which fits a double for the u reached
// after the log-domain cutoff below.
class HusimiProfile {
  public:
    explicit HusimiProfile(const Pmf& x) {
        const auto& p = x.probs();
        coeff_.resize(p.size());
        for (std::size_t n = 0; n < p.size(); ++n)
            coeff_[n] = p[n] * std::exp(-std::lgamma(double(n) + 1.0));
        top_ = p.size() - 1;
        log_top_factorial_ = std::lgamma(double(top_) + 1.0);
    }

    double operator()(double u) const {
        if (u <= 0.0) return coeff_[0] * std::exp(-u);
        // Everything beyond this point underflows to zero anyway.
        if (-u + double(top_) * std::log(u) - log_top_factorial_ < -700.0 &&
            u > double(top_))
            return 0.0;
        double poly = 0.0;
        for (std::size_t n = coeff_.size(); n-- > 0;) poly = poly * u + coeff_[n];
        return poly * std::exp(-u);
    }

  private:
    std::vector<double> coeff_;
    std::size_t top_;
    double log_top_factorial_;
};

void check_grid(double u_max, double step) {
    if (!(u_max > 0.0) || !(step > 0.0) || step > u_max)
        throw OracleResolutionError("husimi: need 0 < step <= u_max");
    if (u_max / step < 16.0)
        throw OracleResolutionError("husimi: radial grid too coarse (< 16 samples)");
}

void check_tail_coverage(const Pmf& x, double u_max) {
    // Weighted Gamma upper tails: sum_n p[n] Q(n+1, u_max) must be <= 1e-8.
    double term = std::exp(-u_max);  // e^{-u} u^j / j! at j = 0
    double cdf = term;
    detail::CompensatedSum tail;
    const auto& p = x.probs();
    for (std::size_t n = 0; n < p.size(); ++n) {
        if (n > 0) {
            term *= u_max / double(n);
            cdf += term;
        }
        tail.add(p[n] * std::min(1.0, cdf));
    }
    if (tail.value() > 1e-8)
        throw OracleResolutionError(
            "husimi: u_max " + std::to_string(u_max) +
            " leaves tail mass " + std::to_string(tail.value()) + " > 1e-8");
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

double RadialDensity::integral() const {
    if (values.size() < 2) return 0.0;
    detail::CompensatedSum acc;
    for (std::size_t i = 1; i < values.size(); ++i)
        acc.add(0.5 * step * (values[i - 1] + values[i]));
    return acc.value();
}

RadialDensity husimi_forward(const Pmf& x, double u_max, double step) {
    check_grid(u_max, step);
    check_tail_coverage(x, u_max);
    HusimiProfile f(x);
    RadialDensity out;
    out.u_max = u_max;
    out.step = step;
    std::size_t count = std::size_t(std::floor(u_max / step)) + 1;
    out.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) out.values[i] = f(double(i) * step);
    return out;
}

ScaledConvolutionCheck check_scaled_convolution(const Pmf& x, const Pmf& y,
                                                double eta, double u_max,
                                                double step) {
    check_grid(u_max, step);
    if (!(eta > 0.0 && eta < 1.0))
        throw ParameterError("husimi check: eta must lie in (0, 1)");
    check_tail_coverage(x, u_max);
    check_tail_coverage(y, u_max);

    // Exact side: profile of the beamsplitter output.
    Pmf z = boxplus(x, y, eta);
    check_tail_coverage(z, u_max);
    HusimiProfile fz(z);

    // Numerical side: 2-D FFT convolution of the scaled input profiles on a
    // square grid of side 2 sqrt(u_max), zero-padded to twice that.
    double half_side = std::sqrt(u_max);
    std::size_t samples = next_pow2(std::size_t(std::llround(u_max / step)));
    samples = std::max<std::size_t>(samples, 512);
    if (samples > 2048)
        throw OracleResolutionError("husimi check: grid of " +
                                    std::to_string(samples) +
                                    " samples/axis exceeds the resource cap");
    std::size_t padded = 2 * samples;
    double delta = 2.0 * half_side / double(samples);

    HusimiProfile fx(x), fy(y);
    auto coord = [&](std::size_t k) {
        // Wrap-around layout: origin at index 0, negative axis in the top half.
        return (k <= padded / 2 ? double(k) : double(k) - double(padded)) * delta;
    };

    std::vector<std::complex<double>> gx(padded * padded), gy(padded * padded);
    double inv_eta = 1.0 / eta, inv_bar = 1.0 / (1.0 - eta);
    for (std::size_t iy = 0; iy < padded; ++iy) {
        double cy = coord(iy);
        for (std::size_t ix = 0; ix < padded; ++ix) {
            double cx = coord(ix);
            double u = cx * cx + cy * cy;
            std::size_t idx = iy * padded + ix;
            gx[idx] = fx(u * inv_eta) * inv_eta / M_PI;
            gy[idx] = fy(u * inv_bar) * inv_bar / M_PI;
        }
    }

    int n = int(padded);
    fftw_plan px = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(gx.data()),
                                    reinterpret_cast<fftw_complex*>(gx.data()),
                                    FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_plan py = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(gy.data()),
                                    reinterpret_cast<fftw_complex*>(gy.data()),
                                    FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(px);
    fftw_execute(py);
    double scale = delta * delta / (double(padded) * double(padded));
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= gy[i] * scale;
    fftw_plan pz = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(gx.data()),
                                    reinterpret_cast<fftw_complex*>(gx.data()),
                                    FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(pz);
    fftw_destroy_plan(px);
    fftw_destroy_plan(py);
    fftw_destroy_plan(pz);

    // Convolution values along the positive x-axis (row iy = 0).
    auto axis_value = [&](long k) {
        // The profile is even in r; mirror negative lookups.
        if (k < 0) k = -k;
        return gx[std::size_t(k)].real();
    };

    // Catmull-Rom in r at the requested radial grid points.
    auto rhs_at = [&](double r) {
        double t = r / delta;
        long k1 = long(std::floor(t));
        double s = t - double(k1);
        double v0 = axis_value(k1 - 1), v1 = axis_value(k1), v2 = axis_value(k1 + 1),
               v3 = axis_value(k1 + 2);
        double a = -0.5 * v0 + 1.5 * v1 - 1.5 * v2 + 0.5 * v3;
        double b = v0 - 2.5 * v1 + 2.0 * v2 - 0.5 * v3;
        double c = -0.5 * v0 + 0.5 * v2;
        return ((a * s + b) * s + c) * s + v1;
    };

    ScaledConvolutionCheck result;
    result.grid_samples = samples;
    std::size_t count = std::size_t(std::floor(u_max / step)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
        double u = double(i) * step;
        double lhs = fz(u);
        double rhs = M_PI * rhs_at(std::sqrt(u));
        result.max_abs_discrepancy =
            std::max(result.max_abs_discrepancy, std::abs(lhs - rhs));
    }
    return result;
}

}  // namespace depi
