#ifndef DEPI_PMF_HPP
#define DEPI_PMF_HPP

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace depi {

// Error taxonomy shared across the library.
class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class TruncationOverflowError : public std::runtime_error {
  public:
    TruncationOverflowError(const std::string& what, std::size_t required_cutoff)
        : std::runtime_error(what), required_cutoff_(required_cutoff) {}
    std::size_t required_cutoff() const { return required_cutoff_; }

  private:
    std::size_t required_cutoff_;
};

class CapacityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InversionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Controls adaptive truncation of infinite-support distributions.
struct TailPolicy {
    double epsilon_tail = 1e-12;  // max allowed truncated mass
    std::size_t max_cutoff = 4096;
    bool renormalize = true;
};

// Truncated probability mass function on {0, 1, ..., cutoff}.
// Mass lost to truncation is carried explicitly in tail_deficit, never
// silently dropped; sum(probs) + tail_deficit == 1 within 1e-12.
class Pmf {
  public:
    Pmf() : probs_{1.0} {}
    explicit Pmf(std::vector<double> probs, double tail_deficit = 0.0,
                 std::string meta = {});

    const std::vector<double>& probs() const { return probs_; }
    double tail_deficit() const { return tail_deficit_; }
    const std::string& meta() const { return meta_; }
    void set_meta(std::string m) { meta_ = std::move(m); }

    std::size_t cutoff() const { return probs_.size() - 1; }
    std::size_t size() const { return probs_.size(); }

    // Mass at k; zero beyond the cutoff.
    double operator[](std::size_t k) const {
        return k < probs_.size() ? probs_[k] : 0.0;
    }

  private:
    std::vector<double> probs_;
    double tail_deficit_ = 0.0;
    std::string meta_;
};

namespace detail {

// Neumaier compensated summation.
class CompensatedSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double compensated_sum(const std::vector<double>& xs);

// log C(n, k) via log-gamma; valid for n up to the policy cap and beyond.
double log_choose(std::size_t n, std::size_t k);

// Trims a raw non-negative weight vector to the policy: finds the smallest
// cutoff keeping the deficit (1 - kept mass) within epsilon_tail, then
// renormalizes if the policy asks for it. Throws TruncationOverflowError when
// no admissible cutoff exists below max_cutoff.
Pmf truncate_to_policy(std::vector<double> weights, const TailPolicy& policy,
                       const std::string& what);

}  // namespace detail

// Standard families.
Pmf make_geometric(double lambda, const TailPolicy& policy = {});
Pmf make_poisson(double lambda, const TailPolicy& policy = {});
Pmf make_binomial(std::size_t n, double p, const TailPolicy& policy = {});
Pmf make_bernoulli(double p);
Pmf make_delta(std::size_t k);
Pmf make_uniform(std::size_t a, std::size_t b);
Pmf make_custom(const std::vector<double>& weights, const TailPolicy& policy = {});

// Shannon entropy in nats, with 0 ln 0 := 0. Tail deficit is ignored; the
// induced error is bounded by -d ln d + d ln(cutoff+1).
double entropy(const Pmf& x);

double mean(const Pmf& x);

// Total variation distance, in [0, 1]. Deficits contribute their worst case.
double total_variation(const Pmf& x, const Pmf& y);

// Distribution of X + Y for independent X, Y.
Pmf convolve(const Pmf& x, const Pmf& y, const TailPolicy& policy = {});

// Ultra-log-concavity: n p[n] / p[n-1] non-increasing over the support.
// Internal support gaps disqualify; ratio comparisons use a multiplicative
// tolerance to avoid false negatives on exactly-ULC families.
bool is_ulc(const Pmf& x, double tol = 1e-12);

// JSON object {"probs": [...], "tail_deficit": r, "meta": s}.
std::string pmf_to_json(const Pmf& x);
Pmf pmf_from_json(const std::string& text);

// CSV rows (k, p[k]) with header.
void pmf_to_csv(const Pmf& x, std::ostream& out);

}  // namespace depi

#endif  // DEPI_PMF_HPP
