#include "depi/entropy_power.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace depi {

namespace {

// Bracketed bisection for a monotone increasing f, optionally refined by
// Newton steps when a derivative is supplied.
double invert_increasing(const std::function<double(double)>& f, double target,
                         const std::function<double(double)>& deriv,
                         const char* what) {
    if (target <= 1e-12) return 0.0;
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (f(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 2048 || !std::isfinite(hi))
            throw InversionError(std::string(what) + ": failed to bracket target " +
                                 std::to_string(target));
    }
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    double x = 0.5 * (lo + hi);
    if (deriv) {
        for (int i = 0; i < 8; ++i) {
            double d = deriv(x);
            if (!(d > 0.0) || !std::isfinite(d)) break;
            double step = (f(x) - target) / d;
            double next = x - step;
            if (!(next >= lo && next <= hi)) break;
            x = next;
            if (std::abs(step) <= 1e-15 * (1.0 + x)) break;
        }
    }
    return x;
}

}  // namespace

double eg(double lambda) {
    if (!(lambda >= 0.0)) throw ParameterError("eg: lambda must be >= 0");
    if (lambda == 0.0) return 0.0;
    return (1.0 + lambda) * std::log1p(lambda) - lambda * std::log(lambda);
}

double eg_prime(double lambda) { return std::log1p(lambda) - std::log(lambda); }

double ep(double lambda) {
    if (!(lambda >= 0.0)) throw ParameterError("ep: lambda must be >= 0");
    if (lambda == 0.0) return 0.0;
    std::size_t hi = std::size_t(lambda + 40.0 * std::sqrt(lambda) + 40.0);
    double log_lambda = std::log(lambda);
    detail::CompensatedSum acc;
    for (std::size_t k = 0; k <= hi; ++k) {
        double lp = -lambda + double(k) * log_lambda - std::lgamma(double(k) + 1.0);
        double p = std::exp(lp);
        if (p > 0.0) acc.add(-p * lp);
    }
    return acc.value();
}

double invert_eg(double s) {
    if (!(s >= 0.0)) throw ParameterError("invert_eg: entropy must be >= 0");
    return invert_increasing([](double l) { return eg(l); }, s,
                             [](double l) { return l > 0 ? eg_prime(l) : 0.0; },
                             "invert_eg");
}

double invert_ep(double s) {
    if (!(s >= 0.0)) throw ParameterError("invert_ep: entropy must be >= 0");
    return invert_increasing([](double l) { return ep(l); }, s, nullptr,
                             "invert_ep");
}

double vg(const Pmf& x) { return invert_eg(entropy(x)); }

double vp(const Pmf& x) { return invert_ep(entropy(x)); }

double ve(const Pmf& x) { return std::exp(entropy(x)); }

double EntropyFunctional::eval(double lambda) const {
    switch (kind) {
        case EntropyKind::geometric: return eg(lambda);
        case EntropyKind::poisson: return ep(lambda);
        case EntropyKind::exponential:
            if (!(lambda > 0.0))
                throw ParameterError("E_e: lambda must be > 0");
            return std::log(lambda);
    }
    throw ParameterError("unknown entropy kind");
}

double EntropyFunctional::invert(double s) const {
    switch (kind) {
        case EntropyKind::geometric: return invert_eg(s);
        case EntropyKind::poisson: return invert_ep(s);
        case EntropyKind::exponential: return std::exp(s);
    }
    throw ParameterError("unknown entropy kind");
}

double EntropyFunctional::entropy_power(const Pmf& x) const {
    switch (kind) {
        case EntropyKind::geometric: return vg(x);
        case EntropyKind::poisson: return vp(x);
        case EntropyKind::exponential: return ve(x);
    }
    throw ParameterError("unknown entropy kind");
}

EntropyFunctional entropy_functional(EntropyKind kind) { return {kind}; }

}  // namespace depi
