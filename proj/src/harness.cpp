#include "depi/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "depi/beamsplitter.hpp"
#include "depi/entropy_power.hpp"
#include "depi/thinning.hpp"

namespace depi {

namespace {

constexpr double kSlackTol = 1e-9;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double entropy_bound(const Pmf& x) {
    return entropy_deficit_bound(x.tail_deficit(), x.cutoff());
}

SlackRecord make_record(InequalityKind kind, const std::string& digest, double eta,
                        double lhs, double rhs, double deficit_bound,
                        bool ulc_x, bool ulc_y) {
    SlackRecord r;
    r.kind = kind;
    r.digest = digest;
    r.eta = eta;
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = lhs - rhs;
    r.deficit_bound = deficit_bound;
    r.is_ulc_x = ulc_x;
    r.is_ulc_y = ulc_y;
    return r;
}

std::string pair_digest(const Pmf& x, const Pmf& y) {
    return pmf_digest(x) + "+" + pmf_digest(y);
}

// 53-bit uniform in [0, 1) from raw 64-bit words; avoids the
// implementation-defined std::uniform_real_distribution so reports are
// byte-identical across standard libraries.
class SplitRng {
  public:
    explicit SplitRng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }
    std::size_t next_index(std::size_t n) { return std::size_t(next_u64() % n); }

  private:
    std::uint64_t state_;
};

}  // namespace

std::uint64_t splitmix64(std::uint64_t state) {
    std::uint64_t z = state + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

const char* to_string(InequalityKind kind) {
    switch (kind) {
        case InequalityKind::linear_epi: return "linear_epi";
        case InequalityKind::vg_epi: return "vg_epi";
        case InequalityKind::ve_epi: return "ve_epi";
        case InequalityKind::thin_vg: return "thin_vg";
        case InequalityKind::thin_vp_ulc: return "thin_vp_ulc";
        case InequalityKind::yj_linear_ulc: return "yj_linear_ulc";
        case InequalityKind::yj_vp_scaled: return "yj_vp_scaled";
    }
    return "unknown";
}

InequalityKind inequality_kind_from_string(const std::string& name) {
    for (InequalityKind k :
         {InequalityKind::linear_epi, InequalityKind::vg_epi, InequalityKind::ve_epi,
          InequalityKind::thin_vg, InequalityKind::thin_vp_ulc,
          InequalityKind::yj_linear_ulc, InequalityKind::yj_vp_scaled}) {
        if (name == to_string(k)) return k;
    }
    throw ParameterError("unknown inequality kind '" + name + "'");
}

bool is_proven(InequalityKind kind) {
    switch (kind) {
        case InequalityKind::linear_epi:
        case InequalityKind::ve_epi:
        case InequalityKind::thin_vg:
        case InequalityKind::thin_vp_ulc:   // on ULC inputs
        case InequalityKind::yj_linear_ulc: // on ULC inputs
            return true;
        case InequalityKind::vg_epi:
        case InequalityKind::yj_vp_scaled:
            return false;
    }
    return false;
}

double entropy_deficit_bound(double deficit, std::size_t cutoff) {
    if (!(deficit > 0.0)) return 0.0;
    return -deficit * std::log(deficit) + deficit * std::log(double(cutoff) + 1.0);
}

std::string pmf_digest(const Pmf& x) {
    // FNV-1a over the probability bytes and the deficit.
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&h](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xFF;
            h *= 0x100000001B3ULL;
        }
    };
    for (double p : x.probs()) mix(p);
    mix(x.tail_deficit());
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

SlackRecord check_linear_epi(const Pmf& x, const Pmf& y, double eta,
                             const TailPolicy& policy) {
    Pmf z = boxplus(x, y, eta, policy);
    double bound = entropy_bound(z) + eta * entropy_bound(x) +
                   (1.0 - eta) * entropy_bound(y);
    return make_record(InequalityKind::linear_epi, pair_digest(x, y), eta,
                       entropy(z), eta * entropy(x) + (1.0 - eta) * entropy(y),
                       bound, is_ulc(x), is_ulc(y));
}

SlackRecord check_vg_epi(const Pmf& x, const Pmf& y, double eta,
                         const TailPolicy& policy) {
    Pmf z = boxplus(x, y, eta, policy);
    double bound = entropy_bound(z) + eta * entropy_bound(x) +
                   (1.0 - eta) * entropy_bound(y);
    return make_record(InequalityKind::vg_epi, pair_digest(x, y), eta, vg(z),
                       eta * vg(x) + (1.0 - eta) * vg(y), bound, is_ulc(x),
                       is_ulc(y));
}

SlackRecord check_ve_epi(const Pmf& x, const Pmf& y, double eta,
                         const TailPolicy& policy) {
    Pmf z = boxplus(x, y, eta, policy);
    double bound = entropy_bound(z) + eta * entropy_bound(x) +
                   (1.0 - eta) * entropy_bound(y);
    return make_record(InequalityKind::ve_epi, pair_digest(x, y), eta, ve(z),
                       eta * ve(x) + (1.0 - eta) * ve(y), bound, is_ulc(x),
                       is_ulc(y));
}

SlackRecord check_thinning_epi(const Pmf& x, double eta, ThinningEpiKind kind,
                               const TailPolicy& policy) {
    Pmf t = thin(x, eta, policy);
    double bound = entropy_bound(t) + eta * entropy_bound(x);
    if (kind == ThinningEpiKind::vg) {
        return make_record(InequalityKind::thin_vg, pmf_digest(x), eta, vg(t),
                           eta * vg(x), bound, is_ulc(x), false);
    }
    return make_record(InequalityKind::thin_vp_ulc, pmf_digest(x), eta, vp(t),
                       eta * vp(x), bound, is_ulc(x), false);
}

SlackRecord check_yj_linear_ulc(const Pmf& x, const Pmf& y, double eta,
                                const TailPolicy& policy) {
    Pmf z = boxplus_yj(x, y, eta, policy);
    double bound = entropy_bound(z) + eta * entropy_bound(x) +
                   (1.0 - eta) * entropy_bound(y);
    return make_record(InequalityKind::yj_linear_ulc, pair_digest(x, y), eta,
                       entropy(z), eta * entropy(x) + (1.0 - eta) * entropy(y),
                       bound, is_ulc(x), is_ulc(y));
}

SlackRecord check_yj_vp_scaled(const Pmf& x, const Pmf& y, double eta,
                               const TailPolicy& policy) {
    Pmf z = boxplus_yj(x, y, eta, policy);
    double bound = entropy_bound(z) + eta * entropy_bound(x) +
                   (1.0 - eta) * entropy_bound(y);
    return make_record(InequalityKind::yj_vp_scaled, pair_digest(x, y), eta, vp(z),
                       eta * vp(x) + (1.0 - eta) * vp(y), bound, is_ulc(x),
                       is_ulc(y));
}

SlackRecord check_inequality(InequalityKind kind, const Pmf& x, const Pmf& y,
                             double eta, const TailPolicy& policy) {
    switch (kind) {
        case InequalityKind::linear_epi: return check_linear_epi(x, y, eta, policy);
        case InequalityKind::vg_epi: return check_vg_epi(x, y, eta, policy);
        case InequalityKind::ve_epi: return check_ve_epi(x, y, eta, policy);
        case InequalityKind::thin_vg:
            return check_thinning_epi(x, eta, ThinningEpiKind::vg, policy);
        case InequalityKind::thin_vp_ulc:
            return check_thinning_epi(x, eta, ThinningEpiKind::vp, policy);
        case InequalityKind::yj_linear_ulc:
            return check_yj_linear_ulc(x, y, eta, policy);
        case InequalityKind::yj_vp_scaled:
            return check_yj_vp_scaled(x, y, eta, policy);
    }
    throw ParameterError("unknown inequality kind");
}

std::vector<CltRow> run_clt(const Pmf& base, const std::vector<std::size_t>& n_list,
                            const TailPolicy& policy) {
    double lambda = mean(base);
    Pmf target = lambda > 0.0 ? make_geometric(lambda, policy) : make_delta(0);
    std::vector<CltRow> rows;
    rows.reserve(n_list.size());
    for (std::size_t n : n_list) {
        if (n == 0) throw ParameterError("run_clt: n must be >= 1");
        std::vector<Pmf> copies(n, base);
        WeightVector w(std::vector<double>(n, 1.0 / double(n)));
        Pmf y = boxplus_multi(copies, w, policy);
        rows.push_back({n, entropy(y), total_variation(y, target), mean(y)});
    }
    return rows;
}

std::vector<SmallNumbersRow> run_small_numbers_demo(
    double p, const std::vector<std::size_t>& n_list, const TailPolicy& policy) {
    if (!(p >= 0.0 && p <= 1.0))
        throw ParameterError("small numbers demo: p must lie in [0, 1]");
    Pmf target = p > 0.0 ? make_poisson(p, policy) : make_delta(0);
    std::vector<SmallNumbersRow> rows;
    for (std::size_t n : n_list) {
        if (n == 0) throw ParameterError("small numbers demo: n must be >= 1");
        Pmf sum = make_binomial(n, p, policy);  // n-fold Bernoulli convolution
        Pmf thinned = thin(sum, 1.0 / double(n), policy);
        rows.push_back({n, total_variation(thinned, target)});
    }
    return rows;
}

Pmf ulc_project(const Pmf& x) {
    std::vector<double> p = x.probs();
    // One ascending clip pass: cap each ratio n p[n]/p[n-1] at its predecessor.
    double prev_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n < p.size(); ++n) {
        if (p[n - 1] <= 0.0) {
            std::fill(p.begin() + long(n), p.end(), 0.0);
            break;
        }
        double cap = prev_ratio * p[n - 1] / double(n);
        if (p[n] > cap) p[n] = cap;
        prev_ratio = double(n) * p[n] / p[n - 1];
        if (prev_ratio == 0.0) {
            std::fill(p.begin() + long(n) + 1, p.end(), 0.0);
            break;
        }
    }
    while (p.size() > 1 && p.back() == 0.0) p.pop_back();
    double total = detail::compensated_sum(p);
    for (double& v : p) v /= total;
    return Pmf(std::move(p));
}

Pmf sample_random_pmf(std::uint64_t seed, std::size_t support_max, bool force_ulc,
                      const TailPolicy& policy) {
    SplitRng rng(seed);
    std::size_t support = 2 + rng.next_index(std::max<std::size_t>(support_max, 2) - 1);
    std::vector<double> w(support + 1);

    switch (rng.next_index(3)) {
        case 0: {
            // Rough: normalized exponential weights (flat Dirichlet).
            for (double& v : w) v = -std::log(1.0 - rng.next_double());
            break;
        }
        case 1: {
            // Structured: mixture of two parametric family members.
            auto family = [&](std::size_t which, double lam) -> Pmf {
                switch (which) {
                    case 0: return make_geometric(lam, policy);
                    case 1: return make_poisson(lam, policy);
                    default:
                        return make_binomial(support, std::min(0.95, lam / double(support)),
                                             policy);
                }
            };
            double span = 0.25 + 0.5 * double(support);
            Pmf a = family(rng.next_index(3), 0.1 + span * rng.next_double());
            Pmf b = family(rng.next_index(3), 0.1 + span * rng.next_double());
            double mix = rng.next_double();
            for (std::size_t k = 0; k <= support; ++k)
                w[k] = mix * a[k] + (1.0 - mix) * b[k];
            break;
        }
        default: {
            // Spiky: squared uniforms, occasionally zeroed entries.
            for (double& v : w) {
                double u = rng.next_double();
                v = u * u;
            }
            w[rng.next_index(w.size())] = 0.0;
            w[0] += 1e-3;  // keep the support anchored at zero
            break;
        }
    }

    Pmf out = make_custom(w, policy);
    if (force_ulc) out = ulc_project(out);
    return out;
}

std::vector<double> default_eta_grid() {
    return {0.1, 0.2, 0.3, 0.4, 0.49, 0.5, 0.51, 0.6, 0.7, 0.8, 0.9};
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParameterError(std::string("config json: ") + e.what());
    }
    int version = j.value("version", 0);
    if (version != 1)
        throw ParameterError("config json: unsupported version " +
                             std::to_string(version) + " (expected 1)");
    ExperimentConfig c;
    c.kind = inequality_kind_from_string(j.value("kind", std::string("vg_epi")));
    c.trials = j.value("trials", std::size_t(1000));
    if (c.trials < 1) throw ParameterError("config json: trials must be >= 1");
    c.seed = j.value("seed", std::uint64_t(1));
    c.support_max = j.value("support_max", std::size_t(12));
    if (j.contains("eta_grid")) {
        for (const auto& v : j["eta_grid"]) {
            double eta = v.get<double>();
            if (!(eta > 0.0 && eta < 1.0))
                throw ParameterError("config json: eta grid values must lie in (0, 1)");
            c.eta_grid.push_back(eta);
        }
    }
    c.policy.epsilon_tail = j.value("tail_eps", 1e-12);
    c.policy.max_cutoff = j.value("max_cutoff", std::size_t(4096));
    std::string mode = j.value("search_mode", std::string("random"));
    if (mode == "random")
        c.mode = SearchMode::random;
    else if (mode == "perturbation-descent")
        c.mode = SearchMode::perturbation_descent;
    else
        throw ParameterError("config json: unknown search_mode '" + mode + "'");
    c.report_top = j.value("report_top", std::size_t(100));
    if (j.contains("x")) c.fixed_x = pmf_from_json(j["x"].dump());
    if (j.contains("y")) c.fixed_y = pmf_from_json(j["y"].dump());
    return c;
}

std::string SlackRecord::to_json() const {
    std::ostringstream out;
    out << "{\"kind\":\"" << to_string(kind) << "\",\"digest\":\"" << digest
        << "\",\"eta\":" << fmt17(eta) << ",\"lhs\":" << fmt17(lhs)
        << ",\"rhs\":" << fmt17(rhs) << ",\"slack\":" << fmt17(slack)
        << ",\"is_ulc_x\":" << (is_ulc_x ? "true" : "false")
        << ",\"is_ulc_y\":" << (is_ulc_y ? "true" : "false")
        << ",\"deficit_bound\":" << fmt17(deficit_bound) << ",\"seed\":" << seed
        << "}";
    return out.str();
}

const char* SlackRecord::csv_header() {
    return "kind,eta,lhs,rhs,slack,is_ulc_x,is_ulc_y,deficit_bound,seed";
}

std::string SlackRecord::to_csv_row() const {
    std::ostringstream out;
    out << to_string(kind) << "," << fmt17(eta) << "," << fmt17(lhs) << ","
        << fmt17(rhs) << "," << fmt17(slack) << "," << (is_ulc_x ? 1 : 0) << ","
        << (is_ulc_y ? 1 : 0) << "," << fmt17(deficit_bound) << "," << seed;
    return out.str();
}

std::string SearchReport::to_jsonl() const {
    std::string out;
    for (const auto& r : records) {
        out += r.to_json();
        out += "\n";
    }
    return out;
}

std::string SearchReport::to_csv() const {
    std::string out = SlackRecord::csv_header();
    out += "\n";
    for (const auto& r : records) {
        out += r.to_csv_row();
        out += "\n";
    }
    return out;
}

namespace {

bool needs_second_input(InequalityKind kind) {
    return kind != InequalityKind::thin_vg && kind != InequalityKind::thin_vp_ulc;
}

bool wants_ulc_inputs(InequalityKind kind) {
    return kind == InequalityKind::thin_vp_ulc ||
           kind == InequalityKind::yj_linear_ulc ||
           kind == InequalityKind::yj_vp_scaled;
}

// Violations only count against the guarantee's regime: the ULC-restricted
// statements say nothing about non-ULC inputs.
bool in_guarantee_regime(const SlackRecord& r) {
    switch (r.kind) {
        case InequalityKind::thin_vp_ulc: return r.is_ulc_x;
        case InequalityKind::yj_linear_ulc: return r.is_ulc_x && r.is_ulc_y;
        default: return true;
    }
}

struct Candidate {
    SlackRecord record;
    Pmf x;
    Pmf y;
};

class Search {
  public:
    explicit Search(const ExperimentConfig& config) : cfg_(config) {
        grid_ = cfg_.eta_grid.empty() ? default_eta_grid() : cfg_.eta_grid;
    }

    SearchReport run() {
        if (cfg_.fixed_x) {
            Pmf y = cfg_.fixed_y ? *cfg_.fixed_y : make_delta(0);
            evaluate(*cfg_.fixed_x, y, cfg_.seed);
        } else {
            for (std::size_t t = 0; t < cfg_.trials; ++t) run_trial(t);
            if (cfg_.mode == SearchMode::perturbation_descent && best_)
                descend(*best_);
        }
        return finish();
    }

  private:
    void run_trial(std::size_t t) {
        // Documented splittable scheme: sub_seed(t) = splitmix64(seed ^ (t+1)*phi64).
        std::uint64_t sub = splitmix64(cfg_.seed ^ ((t + 1) * 0x9E3779B97F4A7C15ULL));
        bool ulc = wants_ulc_inputs(cfg_.kind);
        Pmf x = sample_random_pmf(splitmix64(sub), cfg_.support_max, ulc, cfg_.policy);
        Pmf y = needs_second_input(cfg_.kind)
                    ? sample_random_pmf(splitmix64(sub ^ 1), cfg_.support_max, ulc,
                                        cfg_.policy)
                    : make_delta(0);
        evaluate(x, y, sub);
    }

    void evaluate(const Pmf& x, const Pmf& y, std::uint64_t sub_seed) {
        for (double eta : grid_) {
            SlackRecord r = check_inequality(cfg_.kind, x, y, eta, cfg_.policy);
            r.seed = sub_seed;
            min_slack_ = std::min(min_slack_, r.slack);
            if (!best_ || r.slack < best_->record.slack) best_ = Candidate{r, x, y};
            if (r.slack < -(kSlackTol + r.deficit_bound) && in_guarantee_regime(r))
                flagged_.push_back({r, x, y});
            records_.push_back(std::move(r));
        }
    }

    // Coordinate-perturbation descent on the worst candidate: multiplicative
    // bumps on single coordinates, renormalized (and re-projected for ULC
    // kinds), accepted when the eta-grid minimum slack decreases.
    void descend(Candidate start) {
        Candidate best = start;
        double delta = 0.5;
        bool ulc = wants_ulc_inputs(cfg_.kind);
        while (delta > 1e-4) {
            bool improved = false;
            for (int side = 0; side < (needs_second_input(cfg_.kind) ? 2 : 1); ++side) {
                const Pmf& target = side == 0 ? best.x : best.y;
                for (std::size_t k = 0; k < target.size(); ++k) {
                    for (double factor : {1.0 + delta, 1.0 / (1.0 + delta)}) {
                        std::vector<double> w = target.probs();
                        w[k] *= factor;
                        Pmf cand;
                        try {
                            cand = make_custom(w, cfg_.policy);
                        } catch (const ParameterError&) {
                            continue;
                        }
                        if (ulc) cand = ulc_project(cand);
                        const Pmf& nx = side == 0 ? cand : best.x;
                        const Pmf& ny = side == 0 ? best.y : cand;
                        auto worst = worst_over_grid(nx, ny);
                        if (worst.record.slack < best.record.slack) {
                            best = worst;
                            improved = true;
                        }
                    }
                }
            }
            if (!improved) delta *= 0.5;
        }
        // Record the descent endpoint alongside the random-phase records.
        best.record.seed = cfg_.seed;
        min_slack_ = std::min(min_slack_, best.record.slack);
        if (best.record.slack < -(kSlackTol + best.record.deficit_bound) &&
            in_guarantee_regime(best.record))
            flagged_.push_back(best);
        records_.push_back(best.record);
    }

    Candidate worst_over_grid(const Pmf& x, const Pmf& y) {
        Candidate worst;
        bool first = true;
        for (double eta : grid_) {
            SlackRecord r = check_inequality(cfg_.kind, x, y, eta, cfg_.policy);
            if (first || r.slack < worst.record.slack) {
                worst = Candidate{r, x, y};
                first = false;
            }
        }
        return worst;
    }

    SearchReport finish() {
        SearchReport report;
        report.trials = cfg_.trials;
        report.seed = cfg_.seed;
        report.min_slack = records_.empty() ? 0.0 : min_slack_;

        // Re-verify flagged candidates at a tightened tail policy to separate
        // truncation artifacts from genuine violations.
        TailPolicy tight = cfg_.policy;
        tight.epsilon_tail /= 100.0;
        tight.max_cutoff *= 2;
        for (const auto& c : flagged_) {
            SlackRecord r =
                check_inequality(cfg_.kind, c.x, c.y, c.record.eta, tight);
            r.seed = c.record.seed;
            if (r.slack < -(kSlackTol + r.deficit_bound) && in_guarantee_regime(r))
                report.confirmed_violations.push_back(r);
        }

        std::sort(records_.begin(), records_.end(),
                  [](const SlackRecord& a, const SlackRecord& b) {
                      if (a.slack != b.slack) return a.slack < b.slack;
                      if (a.digest != b.digest) return a.digest < b.digest;
                      return a.eta < b.eta;
                  });
        if (records_.size() > cfg_.report_top) records_.resize(cfg_.report_top);
        report.records = std::move(records_);

        if (!report.confirmed_violations.empty())
            report.exit_code = is_proven(cfg_.kind) ? 2 : 3;
        return report;
    }

    ExperimentConfig cfg_;
    std::vector<double> grid_;
    std::vector<SlackRecord> records_;
    std::vector<Candidate> flagged_;
    std::optional<Candidate> best_;
    double min_slack_ = std::numeric_limits<double>::infinity();
};

}  // namespace

SearchReport search_counterexamples(const ExperimentConfig& config) {
    return Search(config).run();
}

}  // namespace depi
