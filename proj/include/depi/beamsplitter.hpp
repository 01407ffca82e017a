#ifndef DEPI_BEAMSPLITTER_HPP
#define DEPI_BEAMSPLITTER_HPP

#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "depi/pmf.hpp"

namespace depi {

// Convex weights for the multi-input scaled addition.
struct WeightVector {
    std::vector<double> weights;

    explicit WeightVector(std::vector<double> w);
    std::size_t size() const { return weights.size(); }
};

// Photon-number transition probabilities of a two-mode beamsplitter of
// transmissivity eta: row(n, m)[p] = A(p | n, m) is the probability of
// counting p photons at the transmitted port given Fock inputs |n>, |m>.
//
// Mode convention: (x, y) -> (sqrt(eta) x + sqrt(1-eta) y,
//                             -sqrt(1-eta) x + sqrt(eta) y).
// The phases cancel in |amplitude|^2 for number-diagonal inputs, so the
// convention is unobservable in outputs; it is fixed here so the amplitude
// oracle is reproducible.
//
// Rows are computed lazily and cached. Queries are safe to issue from
// concurrent threads (single-writer, many-reader around the cache).
class FockKernel {
  public:
    FockKernel(double eta, std::size_t max_total);

    double eta() const { return eta_; }
    std::size_t max_total() const { return max_total_; }

    // Probabilities over p = 0..n+m. Throws CapacityError when n+m exceeds
    // max_total.
    const std::vector<double>& row(std::size_t n, std::size_t m) const;

    // Transmitted-port amplitude <p, n+m-p| B |n, m>; exposed for the
    // brute-force oracle in tests.
    static double amplitude(std::size_t p, std::size_t n, std::size_t m, double eta);

  private:
    double eta_;
    std::size_t max_total_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<std::uint64_t, std::vector<double>> rows_;
};

// Shared kernel for the given transmissivity; grows its capacity as needed.
std::shared_ptr<const FockKernel> get_kernel(double eta, std::size_t max_total);

// Scaled addition X [+]_eta Y: the photon-number distribution at the
// transmitted port of a transmissivity-eta beamsplitter fed with the two
// number-diagonal inputs. eta = 1 returns x, eta = 0 returns y.
Pmf boxplus(const Pmf& x, const Pmf& y, double eta, const TailPolicy& policy = {});

// n-ary extension via a cascade: Z_1 = X_1, Z_k = Z_{k-1} [+]_{tau_k} X_k with
// tau_k = (sum_{i<k} w_i) / (sum_{i<=k} w_i). Reduces to boxplus for n = 2;
// zero-weight inputs are skipped. Permutation invariance is checked by test.
Pmf boxplus_multi(const std::vector<Pmf>& xs, const WeightVector& w,
                  const TailPolicy& policy = {});

// Yu-Johnson scaled addition T_eta X + T_{1-eta} Y, for comparison.
Pmf boxplus_yj(const Pmf& x, const Pmf& y, double eta, const TailPolicy& policy = {});

}  // namespace depi

#endif  // DEPI_BEAMSPLITTER_HPP
