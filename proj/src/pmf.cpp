#include "depi/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace depi {

namespace {

constexpr double kNormTol = 1e-12;

void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw ParameterError(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

Pmf::Pmf(std::vector<double> probs, double tail_deficit, std::string meta)
    : probs_(std::move(probs)), tail_deficit_(tail_deficit), meta_(std::move(meta)) {
    if (probs_.empty()) throw ParameterError("pmf must have at least one entry");
    for (double p : probs_) {
        if (!(p >= 0.0)) throw ParameterError("pmf entries must be non-negative");
    }
    if (!(tail_deficit_ >= 0.0))
        throw ParameterError("tail_deficit must be non-negative");
    double total = detail::compensated_sum(probs_) + tail_deficit_;
    if (std::abs(total - 1.0) > kNormTol)
        throw ParameterError("pmf mass " + std::to_string(total) +
                             " deviates from 1 beyond tolerance");
}

namespace detail {

double compensated_sum(const std::vector<double>& xs) {
    CompensatedSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

double log_choose(std::size_t n, std::size_t k) {
    if (k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

Pmf truncate_to_policy(std::vector<double> weights, const TailPolicy& policy,
                       const std::string& what) {
    if (weights.empty()) weights.push_back(0.0);
    // Suffix mass from the back; smallest cutoff whose deficit fits the policy.
    std::size_t len = weights.size();
    double total = compensated_sum(weights);
    if (!(total > 0.0)) throw ParameterError(what + ": total mass is zero");

    std::vector<double> suffix(len + 1, 0.0);
    for (std::size_t i = len; i-- > 0;) suffix[i] = suffix[i + 1] + weights[i];

    double budget = policy.epsilon_tail * total;
    std::size_t keep = len;
    while (keep > 1 && suffix[keep - 1] <= budget) --keep;

    if (keep > policy.max_cutoff + 1) {
        // Report the cutoff that would have been needed.
        throw TruncationOverflowError(
            what + ": required cutoff " + std::to_string(keep - 1) +
                " exceeds max_cutoff " + std::to_string(policy.max_cutoff),
            keep - 1);
    }
    weights.resize(keep);
    double kept = compensated_sum(weights);
    if (policy.renormalize) {
        for (double& w : weights) w /= kept;
        return Pmf(std::move(weights), 0.0);
    }
    // Mass is interpreted as already normalized to `total`; the deficit is the
    // trimmed suffix plus whatever the caller had lost upstream (total < 1).
    double deficit = std::max(0.0, 1.0 - kept);
    return Pmf(std::move(weights), deficit);
}

}  // namespace detail

Pmf make_geometric(double lambda, const TailPolicy& policy) {
    if (!(lambda >= 0.0)) throw ParameterError("geometric: lambda must be >= 0");
    if (lambda == 0.0) return make_delta(0);
    double q = lambda / (1.0 + lambda);  // success ratio, tail(K) = q^{K+1}
    double log_q = std::log(q);
    std::size_t needed =
        std::size_t(std::ceil(std::log(policy.epsilon_tail) / log_q));
    if (needed > policy.max_cutoff)
        throw TruncationOverflowError(
            "geometric: required cutoff " + std::to_string(needed) +
                " exceeds max_cutoff " + std::to_string(policy.max_cutoff),
            needed);
    std::vector<double> w(needed + 1);
    double head = 1.0 / (1.0 + lambda);
    for (std::size_t k = 0; k <= needed; ++k) w[k] = head * std::exp(double(k) * log_q);
    Pmf out = detail::truncate_to_policy(std::move(w), policy, "geometric");
    out.set_meta("geometric(" + std::to_string(lambda) + ")");
    return out;
}

Pmf make_poisson(double lambda, const TailPolicy& policy) {
    if (!(lambda >= 0.0)) throw ParameterError("poisson: lambda must be >= 0");
    if (lambda == 0.0) return make_delta(0);
    std::size_t hi = std::size_t(lambda + 40.0 * std::sqrt(lambda) + 40.0);
    hi = std::min(hi, policy.max_cutoff + 64);
    std::vector<double> w(hi + 1);
    double log_lambda = std::log(lambda);
    for (std::size_t k = 0; k <= hi; ++k)
        w[k] = std::exp(-lambda + double(k) * log_lambda - std::lgamma(double(k) + 1.0));
    Pmf out = detail::truncate_to_policy(std::move(w), policy, "poisson");
    out.set_meta("poisson(" + std::to_string(lambda) + ")");
    return out;
}

Pmf make_binomial(std::size_t n, double p, const TailPolicy& policy) {
    check_probability(p, "binomial: p");
    if (n > policy.max_cutoff)
        throw TruncationOverflowError(
            "binomial: n exceeds max_cutoff " + std::to_string(policy.max_cutoff), n);
    if (p == 0.0) return make_delta(0);
    if (p == 1.0) return make_delta(n);
    std::vector<double> w(n + 1);
    double lp = std::log(p), lq = std::log1p(-p);
    for (std::size_t k = 0; k <= n; ++k)
        w[k] = std::exp(detail::log_choose(n, k) + double(k) * lp + double(n - k) * lq);
    Pmf out = detail::truncate_to_policy(std::move(w), policy, "binomial");
    out.set_meta("binomial(" + std::to_string(n) + "," + std::to_string(p) + ")");
    return out;
}

Pmf make_bernoulli(double p) {
    check_probability(p, "bernoulli: p");
    if (p == 0.0) return make_delta(0);
    return Pmf({1.0 - p, p}, 0.0, "bernoulli(" + std::to_string(p) + ")");
}

Pmf make_delta(std::size_t k) {
    std::vector<double> w(k + 1, 0.0);
    w[k] = 1.0;
    return Pmf(std::move(w), 0.0, "delta(" + std::to_string(k) + ")");
}

Pmf make_uniform(std::size_t a, std::size_t b) {
    if (a > b) throw ParameterError("uniform: a must be <= b");
    std::vector<double> w(b + 1, 0.0);
    double p = 1.0 / double(b - a + 1);
    for (std::size_t k = a; k <= b; ++k) w[k] = p;
    return Pmf(std::move(w), 0.0,
               "uniform(" + std::to_string(a) + "," + std::to_string(b) + ")");
}

Pmf make_custom(const std::vector<double>& weights, const TailPolicy& policy) {
    for (double w : weights)
        if (!(w >= 0.0)) throw ParameterError("custom: weights must be non-negative");
    TailPolicy p = policy;
    p.renormalize = true;  // raw weights are not normalized
    return detail::truncate_to_policy(weights, p, "custom");
}

double entropy(const Pmf& x) {
    detail::CompensatedSum acc;
    for (double p : x.probs()) {
        if (p > 0.0) acc.add(-p * std::log(p));
    }
    return std::max(0.0, acc.value());
}

double mean(const Pmf& x) {
    detail::CompensatedSum acc;
    const auto& p = x.probs();
    for (std::size_t k = 1; k < p.size(); ++k) acc.add(double(k) * p[k]);
    return acc.value();
}

double total_variation(const Pmf& x, const Pmf& y) {
    std::size_t len = std::max(x.size(), y.size());
    detail::CompensatedSum acc;
    for (std::size_t k = 0; k < len; ++k) acc.add(std::abs(x[k] - y[k]));
    // Deficit mass sits somewhere beyond both cutoffs in the worst case.
    double tv = 0.5 * (acc.value() + x.tail_deficit() + y.tail_deficit());
    return std::min(1.0, tv);
}

Pmf convolve(const Pmf& x, const Pmf& y, const TailPolicy& policy) {
    std::vector<double> out(x.size() + y.size() - 1, 0.0);
    const auto& px = x.probs();
    const auto& py = y.probs();
    for (std::size_t n = 0; n < px.size(); ++n) {
        if (px[n] == 0.0) continue;
        for (std::size_t m = 0; m < py.size(); ++m) out[n + m] += px[n] * py[m];
    }
    // Input deficits already show up as a mass shortfall of the product and
    // are therefore folded into the reported deficit.
    return detail::truncate_to_policy(std::move(out), policy, "convolve");
}

bool is_ulc(const Pmf& x, double tol) {
    const auto& p = x.probs();
    std::size_t lo = 0, hi = p.size();
    while (lo < p.size() && p[lo] == 0.0) ++lo;
    while (hi > lo && p[hi - 1] == 0.0) --hi;
    if (lo >= hi) return true;  // no support (cannot happen for a valid pmf)
    double prev_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t n = lo + 1; n < hi; ++n) {
        if (p[n - 1] == 0.0 || p[n] == 0.0) return false;  // internal gap
        double ratio = double(n) * p[n] / p[n - 1];
        if (ratio > prev_ratio * (1.0 + tol)) return false;
        prev_ratio = ratio;
    }
    return true;
}

std::string pmf_to_json(const Pmf& x) {
    // Hand-rolled emission so every value carries 17 significant digits and
    // reports replay bit-exactly.
    char buf[40];
    std::string out = "{\"probs\":[";
    for (std::size_t k = 0; k < x.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", x[k]);
        if (k) out += ",";
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", x.tail_deficit());
    out += "],\"tail_deficit\":";
    out += buf;
    out += ",\"meta\":";
    out += nlohmann::json(x.meta()).dump();
    out += "}";
    return out;
}

Pmf pmf_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParameterError(std::string("pmf json: ") + e.what());
    }
    if (!j.contains("probs") || !j["probs"].is_array())
        throw ParameterError("pmf json: missing or non-array field 'probs'");
    std::vector<double> probs;
    for (const auto& v : j["probs"]) {
        if (!v.is_number()) throw ParameterError("pmf json: non-numeric entry in 'probs'");
        probs.push_back(v.get<double>());
    }
    double deficit = j.value("tail_deficit", 0.0);
    std::string meta = j.value("meta", std::string{});
    try {
        return Pmf(std::move(probs), deficit, std::move(meta));
    } catch (const ParameterError& e) {
        throw ParameterError(std::string("pmf json: ") + e.what());
    }
}

void pmf_to_csv(const Pmf& x, std::ostream& out) {
    out << "k,p\n";
    char buf[40];
    for (std::size_t k = 0; k < x.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", x[k]);
        out << k << "," << buf << "\n";
    }
}

}  // namespace depi
