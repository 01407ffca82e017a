#include "depi/beamsplitter.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <mutex>

#include "depi/thinning.hpp"

namespace depi {

namespace {

constexpr std::size_t kKernelHardCap = 8192;

std::uint64_t row_key(std::size_t n, std::size_t m) {
    return (std::uint64_t(n) << 32) | std::uint64_t(m);
}

long double log_choose_l(std::size_t n, std::size_t k) {
    return lgammal((long double)n + 1.0L) - lgammal((long double)k + 1.0L) -
           lgammal((long double)(n - k) + 1.0L);
}

}  // namespace

WeightVector::WeightVector(std::vector<double> w) : weights(std::move(w)) {
    if (weights.empty()) throw ParameterError("weights must be non-empty");
    detail::CompensatedSum acc;
    for (double wi : weights) {
        if (!(wi >= 0.0)) throw ParameterError("weights must be non-negative");
        acc.add(wi);
    }
    if (std::abs(acc.value() - 1.0) > 1e-12)
        throw ParameterError("weights must sum to 1");
}

FockKernel::FockKernel(double eta, std::size_t max_total)
    : eta_(eta), max_total_(max_total) {
    if (!(eta > 0.0 && eta < 1.0))
        throw ParameterError("FockKernel: eta must lie in (0, 1)");
    if (max_total > kKernelHardCap)
        throw CapacityError("FockKernel: max_total " + std::to_string(max_total) +
                            " exceeds hard cap " + std::to_string(kKernelHardCap));
}

double FockKernel::amplitude(std::size_t p, std::size_t n, std::size_t m,
                             double eta) {
    // Coefficient of the transmitted-port monomial in the binomial expansion
    // of (sqrt(eta) a - sqrt(1-eta) b)^n (sqrt(1-eta) a + sqrt(eta) b)^m,
    // with the Fock normalization sqrt(p! q! / n! m!), q = n + m - p.
    if (p > n + m) return 0.0;
    std::size_t q = n + m - p;
    std::size_t j_lo = (p > m) ? p - m : 0;
    std::size_t j_hi = std::min(n, p);

    // The alternating sum cancels heavily near interference dips, so run the
    // term recurrence in quad precision, anchored at the largest term.
    __float128 ratio_scale =
        (__float128)eta / ((__float128)1.0 - (__float128)eta);
    auto ratio = [&](std::size_t j) -> __float128 {
        // t_{j+1} / t_j; the sign alternates with j.
        long long num = (long long)(n - j) * (long long)(p - j);
        long long den = (long long)(j + 1) *
                        ((long long)m - (long long)p + (long long)j + 1);
        return -ratio_scale * (__float128)num / (__float128)den;
    };

    // |t_j| is unimodal in j because |ratio| decreases.
    std::size_t j_peak = j_lo;
    while (j_peak < j_hi && fabsq(ratio(j_peak)) >= 1.0) ++j_peak;

    __float128 sum = 1.0;
    __float128 t = 1.0;
    for (std::size_t j = j_peak; j < j_hi; ++j) {
        t *= ratio(j);
        sum += t;
    }
    t = 1.0;
    for (std::size_t j = j_peak; j > j_lo; --j) {
        t /= ratio(j - 1);
        sum += t;
    }

    // Scale factor of the peak term; no cancellation here, so extended
    // precision logs suffice. sqrt(eta)^(2j + m - p) * sqrt(1-eta)^(n + p - 2j)
    // with the Fock normalization sqrt(p! q! / n! m!).
    long double log_peak =
        0.5L * (lgammal((long double)p + 1.0L) + lgammal((long double)q + 1.0L) -
                lgammal((long double)n + 1.0L) - lgammal((long double)m + 1.0L)) +
        log_choose_l(n, j_peak) + log_choose_l(m, p - j_peak) +
        0.5L * ((long double)(2 * j_peak + m - p) * logl((long double)eta) +
                (long double)(n + p - 2 * j_peak) * log1pl(-(long double)eta));
    int sign = ((n - j_peak) % 2 == 0) ? 1 : -1;
    return (double)(sign * (long double)(expq((__float128)log_peak) * sum));
}

const std::vector<double>& FockKernel::row(std::size_t n, std::size_t m) const {
    if (n + m > max_total_)
        throw CapacityError("FockKernel: n+m = " + std::to_string(n + m) +
                            " exceeds max_total " + std::to_string(max_total_));
    std::uint64_t key = row_key(n, m);
    {
        std::shared_lock lock(mutex_);
        auto it = rows_.find(key);
        if (it != rows_.end()) return it->second;
    }
    std::vector<double> probs(n + m + 1);
    for (std::size_t p = 0; p <= n + m; ++p) {
        double a = amplitude(p, n, m, eta_);
        probs[p] = a * a;
    }
    std::unique_lock lock(mutex_);
    auto [it, inserted] = rows_.emplace(key, std::move(probs));
    return it->second;
}

std::shared_ptr<const FockKernel> get_kernel(double eta, std::size_t max_total) {
    static std::mutex registry_mutex;
    static std::map<std::uint64_t, std::shared_ptr<FockKernel>> registry;

    std::uint64_t bits;
    static_assert(sizeof bits == sizeof eta);
    std::memcpy(&bits, &eta, sizeof bits);

    std::lock_guard lock(registry_mutex);
    auto it = registry.find(bits);
    if (it != registry.end() && it->second->max_total() >= max_total)
        return it->second;
    // Over-allocate capacity so repeated slightly-larger requests reuse rows.
    std::size_t cap = std::min<std::size_t>(kKernelHardCap,
                                            std::max<std::size_t>(max_total, 128) * 2);
    auto kernel = std::make_shared<FockKernel>(eta, cap);
    registry[bits] = kernel;
    return kernel;
}

Pmf boxplus(const Pmf& x, const Pmf& y, double eta, const TailPolicy& policy) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw ParameterError("boxplus: eta must lie in [0, 1]");
    if (eta >= 1.0 - 1e-15) return x;
    if (eta <= 1e-15) return y;

    std::size_t total = x.cutoff() + y.cutoff();
    auto kernel = get_kernel(eta, total);
    const auto& px = x.probs();
    const auto& py = y.probs();
    std::vector<detail::CompensatedSum> out(total + 1);
    for (std::size_t n = 0; n < px.size(); ++n) {
        if (px[n] == 0.0) continue;
        for (std::size_t m = 0; m < py.size(); ++m) {
            double w = px[n] * py[m];
            if (w == 0.0) continue;
            const auto& row = kernel->row(n, m);
            for (std::size_t p = 0; p <= n + m; ++p) out[p].add(w * row[p]);
        }
    }
    std::vector<double> probs(total + 1);
    for (std::size_t p = 0; p <= total; ++p) probs[p] = out[p].value();
    return detail::truncate_to_policy(std::move(probs), policy, "boxplus");
}

Pmf boxplus_multi(const std::vector<Pmf>& xs, const WeightVector& w,
                  const TailPolicy& policy) {
    if (xs.size() != w.size())
        throw ParameterError("boxplus_multi: |xs| = " + std::to_string(xs.size()) +
                             " but |weights| = " + std::to_string(w.size()));
    if (xs.empty()) throw ParameterError("boxplus_multi: need at least one input");

    bool have = false;
    Pmf acc;
    double weight_so_far = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double wi = w.weights[i];
        if (wi == 0.0) continue;
        if (!have) {
            acc = xs[i];
            weight_so_far = wi;
            have = true;
            continue;
        }
        double tau = weight_so_far / (weight_so_far + wi);
        acc = boxplus(acc, xs[i], tau, policy);
        weight_so_far += wi;
    }
    if (!have) throw ParameterError("boxplus_multi: all weights are zero");
    return acc;
}

Pmf boxplus_yj(const Pmf& x, const Pmf& y, double eta, const TailPolicy& policy) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw ParameterError("boxplus_yj: eta must lie in [0, 1]");
    return convolve(thin(x, eta, policy), thin(y, 1.0 - eta, policy), policy);
}

}  // namespace depi
