#ifndef DEPI_HARNESS_HPP
#define DEPI_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "depi/pmf.hpp"

namespace depi {

enum class InequalityKind {
    linear_epi,     // H(x [+]_eta y) >= eta H(x) + (1-eta) H(y)        (proven)
    vg_epi,         // V_g(x [+]_eta y) >= eta V_g(x) + (1-eta) V_g(y)  (conjectured)
    ve_epi,         // V_e(x [+]_eta y) >= eta V_e(x) + (1-eta) V_e(y)  (proven)
    thin_vg,        // V_g(T_eta x) >= eta V_g(x)                       (proven)
    thin_vp_ulc,    // V_p(T_eta x) >= eta V_p(x), ULC regime           (proven on ULC)
    yj_linear_ulc,  // H(T_eta x + T_{1-eta} y) >= eta H(x) + (1-eta) H(y), ULC regime
    yj_vp_scaled,   // V_p form over the Yu-Johnson addition            (known false)
};

const char* to_string(InequalityKind kind);
InequalityKind inequality_kind_from_string(const std::string& name);

// A proven inequality failing beyond tolerance is an error (exit 2); a
// conjectured one failing is a first-class finding (exit 3).
bool is_proven(InequalityKind kind);

// One inequality evaluation. slack = lhs - rhs; negative slack beyond the
// deficit-aware tolerance indicates a violation.
struct SlackRecord {
    InequalityKind kind;
    std::string digest;  // input families/parameters or pmf hash
    double eta = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool is_ulc_x = false;
    bool is_ulc_y = false;
    double deficit_bound = 0.0;
    std::uint64_t seed = 0;

    std::string to_json() const;
    std::string to_csv_row() const;
    static const char* csv_header();
};

// Entropy perturbation bound from truncating mass d at the given cutoff:
// |dH| <= -d ln d + d ln(cutoff + 1).
double entropy_deficit_bound(double deficit, std::size_t cutoff);

SlackRecord check_linear_epi(const Pmf& x, const Pmf& y, double eta,
                             const TailPolicy& policy = {});
SlackRecord check_vg_epi(const Pmf& x, const Pmf& y, double eta,
                         const TailPolicy& policy = {});
SlackRecord check_ve_epi(const Pmf& x, const Pmf& y, double eta,
                         const TailPolicy& policy = {});

enum class ThinningEpiKind { vg, vp };
SlackRecord check_thinning_epi(const Pmf& x, double eta, ThinningEpiKind kind,
                               const TailPolicy& policy = {});

SlackRecord check_yj_linear_ulc(const Pmf& x, const Pmf& y, double eta,
                                const TailPolicy& policy = {});
SlackRecord check_yj_vp_scaled(const Pmf& x, const Pmf& y, double eta,
                               const TailPolicy& policy = {});

// Dispatch by kind; unary kinds ignore y.
SlackRecord check_inequality(InequalityKind kind, const Pmf& x, const Pmf& y,
                             double eta, const TailPolicy& policy = {});

struct CltRow {
    std::size_t n = 0;
    double entropy = 0.0;
    double tv_to_geometric = 0.0;
    double mean = 0.0;
};

// Y_n = n-fold scaled addition of i.i.d. copies of base with equal weights.
// Reports entropy, distance to the mean-matched geometric, and mean drift.
std::vector<CltRow> run_clt(const Pmf& base, const std::vector<std::size_t>& n_list,
                            const TailPolicy& policy = {});

struct SmallNumbersRow {
    std::size_t n = 0;
    double tv_to_poisson = 0.0;
};

// Law of small numbers: T_{1/n} of the n-fold self-convolution of
// Bernoulli(p) approaches Poisson(p).
std::vector<SmallNumbersRow> run_small_numbers_demo(
    double p, const std::vector<std::size_t>& n_list, const TailPolicy& policy = {});

enum class SearchMode { random, perturbation_descent };

struct ExperimentConfig {
    InequalityKind kind = InequalityKind::vg_epi;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::size_t support_max = 12;
    std::vector<double> eta_grid;  // empty -> default grid
    TailPolicy policy;
    SearchMode mode = SearchMode::random;
    std::size_t report_top = 100;  // worst records kept in the report
    std::optional<Pmf> fixed_x;    // evaluate a fixed pair instead of sampling
    std::optional<Pmf> fixed_y;

    static ExperimentConfig from_json(const std::string& text);
};

std::vector<double> default_eta_grid();

struct SearchReport {
    std::vector<SlackRecord> records;  // sorted by slack, then digest
    double min_slack = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    // Candidates that survived re-verification at a tightened tail policy.
    std::vector<SlackRecord> confirmed_violations;
    int exit_code = 0;  // 0 clean, 2 proven violation, 3 conjecture candidate

    std::string to_jsonl() const;
    std::string to_csv() const;
};

// Deterministic randomized search: samples pmfs (rough Dirichlet-style
// weights, parametric-family mixtures, ULC projections for ULC-only kinds),
// scans the eta grid, optionally descends on the worst candidate, and
// re-verifies flagged violations at a tightened policy.
SearchReport search_counterexamples(const ExperimentConfig& config);

// Splittable per-trial seeding (splitmix64); exposed so replays can be
// reproduced outside the harness.
std::uint64_t splitmix64(std::uint64_t state);

// Random pmf sampler used by the harness; exposed for tests.
Pmf sample_random_pmf(std::uint64_t seed, std::size_t support_max, bool force_ulc,
                      const TailPolicy& policy = {});

// Projects onto the ULC cone by iterative ratio clipping; result re-checked
// with is_ulc by callers that require membership.
Pmf ulc_project(const Pmf& x);

// Short stable content hash of a pmf, for record digests.
std::string pmf_digest(const Pmf& x);

}  // namespace depi

#endif  // DEPI_HARNESS_HPP
