#include "depi/thinning.hpp"

#include <cmath>
#include <vector>

namespace depi {

Pmf thin(const Pmf& x, double eta, const TailPolicy& policy) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw ParameterError("thin: eta must lie in [0, 1]");
    if (eta >= 1.0 - 1e-15) return x;
    if (eta <= 1e-15) return make_delta(0);  // T_0 X = 0 almost surely

    const auto& px = x.probs();
    double log_eta = std::log(eta);
    double log_bar = std::log1p(-eta);
    std::vector<double> out(px.size(), 0.0);
    for (std::size_t n = 0; n < px.size(); ++n) {
        detail::CompensatedSum acc;
        for (std::size_t k = n; k < px.size(); ++k) {
            if (px[k] == 0.0) continue;
            double lw = detail::log_choose(k, n) + double(n) * log_eta +
                        double(k - n) * log_bar;
            acc.add(px[k] * std::exp(lw));
        }
        out[n] = acc.value();
    }
    return detail::truncate_to_policy(std::move(out), policy, "thin");
}

}  // namespace depi
