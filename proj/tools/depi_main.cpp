// depi: discrete entropy-power toolkit.
//
// Subcommands operate on pmf JSON files ({"probs": [...], "tail_deficit": r,
// "meta": s}) and emit JSON/CSV reports. Exit codes: 0 clean, 1 usage or IO
// error, 2 violation of a proven inequality, 3 counterexample candidate for a
// conjectured inequality.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "depi/beamsplitter.hpp"
#include "depi/entropy_power.hpp"
#include "depi/harness.hpp"
#include "depi/husimi.hpp"
#include "depi/pmf.hpp"
#include "depi/thinning.hpp"

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Temp file + rename, so a crash never leaves a half-written report.
void write_atomic(const std::string& path, const std::string& content) {
    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

void emit(const std::string& content, const std::string& out_path,
          const std::string& summary) {
    if (out_path.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << "\n";
    } else {
        write_atomic(out_path, content);
        std::cout << summary << " -> " << out_path << "\n";
    }
}

std::string pmf_output(const depi::Pmf& x, const std::string& format) {
    if (format == "csv") {
        std::ostringstream out;
        depi::pmf_to_csv(x, out);
        return out.str();
    }
    return depi::pmf_to_json(x);
}

struct GlobalOpts {
    double tail_eps = 1e-12;
    std::size_t max_cutoff = 4096;
    std::uint64_t seed = 1;
    std::string format = "json";
    std::string out;

    depi::TailPolicy policy() const { return {tail_eps, max_cutoff, true}; }
};

std::vector<std::size_t> parse_n_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoull(item));
    }
    if (out.empty()) throw depi::ParameterError("empty n list");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"depi: scaled addition, thinning, and entropy-power checks for "
                 "discrete distributions"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--tail-eps", g.tail_eps, "max truncated tail mass");
    app.add_option("--max-cutoff", g.max_cutoff, "hard support cap");
    app.add_option("--seed", g.seed, "seed for randomized subcommands");
    app.add_option("--format", g.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--out", g.out, "output path (atomic write; default stdout)");

    // thin
    auto* thin_cmd = app.add_subcommand(
        "thin", "binomial thinning: each count survives with probability eta");
    double thin_eta = 0.5;
    std::string thin_in;
    thin_cmd->add_option("--eta", thin_eta, "survival probability")->required();
    thin_cmd->add_option("--in", thin_in, "input pmf json")->required();

    // boxplus
    auto* box_cmd = app.add_subcommand(
        "boxplus",
        "beamsplitter scaled addition of two pmfs (--yj for the "
        "thin-and-convolve variant)");
    double box_eta = 0.5;
    std::string box_x, box_y;
    bool box_yj = false;
    box_cmd->add_option("--eta", box_eta, "transmissivity")->required();
    box_cmd->add_option("--x", box_x, "first input pmf json")->required();
    box_cmd->add_option("--y", box_y, "second input pmf json")->required();
    box_cmd->add_flag("--yj", box_yj, "use the thin-and-convolve scaled addition");

    // kernel
    auto* kernel_cmd = app.add_subcommand(
        "kernel", "dump beamsplitter transition probabilities as csv (n,m,p,prob)");
    double kernel_eta = 0.5;
    std::size_t kernel_max = 10;
    kernel_cmd->add_option("--eta", kernel_eta, "transmissivity")->required();
    kernel_cmd->add_option("--max-total", kernel_max, "max n+m")->required();

    // entropy-power
    auto* ep_cmd = app.add_subcommand(
        "entropy-power", "entropy and entropy power of a pmf");
    std::string ep_kind = "g";
    std::string ep_in;
    ep_cmd->add_option("--kind", ep_kind, "reference family: g, p or e")
        ->check(CLI::IsMember({"g", "p", "e"}));
    ep_cmd->add_option("--in", ep_in, "input pmf json")->required();

    // clt
    auto* clt_cmd = app.add_subcommand(
        "clt", "n-fold equal-weight scaled addition of i.i.d. copies; tracks "
               "entropy and distance to the mean-matched geometric");
    std::string clt_in;
    std::string clt_n = "1,2,4,8,16,32,64";
    clt_cmd->add_option("--in", clt_in, "base pmf json")->required();
    clt_cmd->add_option("--n", clt_n, "comma-separated n values");

    // epi-check
    auto* epi_cmd = app.add_subcommand(
        "epi-check", "randomized slack evaluation of one inequality kind");
    std::string epi_ineq, epi_config;
    epi_cmd->add_option("--ineq", epi_ineq,
                        "inequality kind (overrides the config's kind)");
    epi_cmd->add_option("--config", epi_config, "experiment config json")->required();

    // search
    auto* search_cmd = app.add_subcommand(
        "search", "randomized counterexample search per config");
    std::string search_config;
    search_cmd->add_option("--config", search_config, "experiment config json")
        ->required();

    // husimi-check
    auto* hus_cmd = app.add_subcommand(
        "husimi-check", "cross-validate the scaled addition against a "
                        "phase-space convolution oracle");
    double hus_eta = 0.5, hus_step = 0.0, hus_umax = 40.0;
    std::string hus_x, hus_y;
    hus_cmd->add_option("--eta", hus_eta, "transmissivity")->required();
    hus_cmd->add_option("--x", hus_x, "first input pmf json")->required();
    hus_cmd->add_option("--y", hus_y, "second input pmf json")->required();
    hus_cmd->add_option("--step", hus_step, "radial grid step (default u_max/512)");
    hus_cmd->add_option("--umax", hus_umax, "radial grid extent");

    // demo-small-numbers
    auto* losn_cmd = app.add_subcommand(
        "demo-small-numbers",
        "Bernoulli sums thinned by 1/n converging to Poisson");
    double losn_p = 0.3;
    std::string losn_n = "1,2,4,8,16,32";
    losn_cmd->add_option("--p", losn_p, "Bernoulli success probability")->required();
    losn_cmd->add_option("--n", losn_n, "comma-separated n values");

    // Let global flags appear after the subcommand as well.
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        depi::TailPolicy policy = g.policy();

        if (*thin_cmd) {
            depi::Pmf x = depi::pmf_from_json(read_file(thin_in));
            depi::Pmf y = depi::thin(x, thin_eta, policy);
            emit(pmf_output(y, g.format), g.out,
                 "thinned pmf (mean " + fmt17(depi::mean(y)) + ")");
            return 0;
        }

        if (*box_cmd) {
            depi::Pmf x = depi::pmf_from_json(read_file(box_x));
            depi::Pmf y = depi::pmf_from_json(read_file(box_y));
            depi::Pmf z = box_yj ? depi::boxplus_yj(x, y, box_eta, policy)
                                 : depi::boxplus(x, y, box_eta, policy);
            emit(pmf_output(z, g.format), g.out,
                 "scaled sum (mean " + fmt17(depi::mean(z)) + ")");
            return 0;
        }

        if (*kernel_cmd) {
            auto kernel = depi::get_kernel(kernel_eta, kernel_max);
            std::string csv = "n,m,p,prob\n";
            for (std::size_t n = 0; n <= kernel_max; ++n) {
                for (std::size_t m = 0; n + m <= kernel_max; ++m) {
                    const auto& row = kernel->row(n, m);
                    for (std::size_t p = 0; p < row.size(); ++p) {
                        csv += std::to_string(n) + "," + std::to_string(m) + "," +
                               std::to_string(p) + "," + fmt17(row[p]) + "\n";
                    }
                }
            }
            emit(csv, g.out, "kernel rows for eta " + fmt17(kernel_eta));
            return 0;
        }

        if (*ep_cmd) {
            depi::Pmf x = depi::pmf_from_json(read_file(ep_in));
            double h = depi::entropy(x);
            double v = ep_kind == "g"   ? depi::vg(x)
                       : ep_kind == "p" ? depi::vp(x)
                                        : depi::ve(x);
            std::string json =
                "{\"H\":" + fmt17(h) + ",\"V\":" + fmt17(v) + "}";
            emit(json, g.out, "entropy power");
            return 0;
        }

        if (*clt_cmd) {
            depi::Pmf base = depi::pmf_from_json(read_file(clt_in));
            auto rows = depi::run_clt(base, parse_n_list(clt_n), policy);
            std::string csv = "n,entropy,tv_to_geometric,mean\n";
            for (const auto& r : rows)
                csv += std::to_string(r.n) + "," + fmt17(r.entropy) + "," +
                       fmt17(r.tv_to_geometric) + "," + fmt17(r.mean) + "\n";
            emit(csv, g.out, "clt rows");
            return 0;
        }

        if (*epi_cmd || *search_cmd) {
            const std::string& path = *epi_cmd ? epi_config : search_config;
            depi::ExperimentConfig cfg =
                depi::ExperimentConfig::from_json(read_file(path));
            if (*epi_cmd && !epi_ineq.empty())
                cfg.kind = depi::inequality_kind_from_string(epi_ineq);
            if (!app.get_option("--seed")->empty()) cfg.seed = g.seed;
            depi::SearchReport report = depi::search_counterexamples(cfg);
            std::string content =
                g.format == "csv" ? report.to_csv() : report.to_jsonl();
            emit(content, g.out,
                 std::string(depi::to_string(cfg.kind)) + " min slack " +
                     fmt17(report.min_slack));
            if (g.out.empty())
                std::cout << "min slack " << fmt17(report.min_slack) << ", "
                          << report.confirmed_violations.size()
                          << " confirmed violation(s)\n";
            return report.exit_code;
        }

        if (*hus_cmd) {
            depi::Pmf x = depi::pmf_from_json(read_file(hus_x));
            depi::Pmf y = depi::pmf_from_json(read_file(hus_y));
            double step = hus_step > 0.0 ? hus_step : hus_umax / 512.0;
            auto check = depi::check_scaled_convolution(x, y, hus_eta, hus_umax, step);
            std::string json = "{\"max_abs_discrepancy\":" +
                               fmt17(check.max_abs_discrepancy) +
                               ",\"grid_samples\":" +
                               std::to_string(check.grid_samples) + "}";
            emit(json, g.out,
                 "husimi discrepancy " + fmt17(check.max_abs_discrepancy));
            return 0;
        }

        if (*losn_cmd) {
            auto rows = depi::run_small_numbers_demo(losn_p, parse_n_list(losn_n),
                                                     policy);
            std::string csv = "n,tv_to_poisson\n";
            for (const auto& r : rows)
                csv += std::to_string(r.n) + "," + fmt17(r.tv_to_poisson) + "\n";
            emit(csv, g.out, "law-of-small-numbers rows");
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
