// urnsim: batch front door for the interacting-urn toolkit. Every subcommand
// prints one CSV table (header first, '.' decimal point) and is byte-stable
// for a fixed configuration and seed.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "urns/analytic.hpp"
#include "urns/estimate.hpp"
#include "urns/oracle.hpp"
#include "urns/rubin.hpp"
#include "urns/simulate.hpp"
#include "urns/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidConfig = 2;
constexpr int kExitBudget = 3;

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw std::runtime_error("cannot open output file: " + path);
        }
    }

    void row(const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ',';
            line += cells[i];
        }
        line += '\n';
        if (file_.is_open())
            file_ << line;
        else
            std::cout << line;
    }

  private:
    std::ofstream file_;
};

urns::WeightSequence parse_weights(const std::string& token) {
    if (token == "inf") return urns::WeightSequence::generalized_power();
    if (token.rfind("table:", 0) == 0) {
        // table:u@v,u@v,...
        std::vector<urns::WeightTerm> terms;
        std::stringstream ss(token.substr(6));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto at = item.find('@');
            if (at == std::string::npos)
                throw CLI::ValidationError("--weights", "table entries must look like u@v");
            const double u = std::stod(item.substr(0, at));
            const double v = std::stod(item.substr(at + 1));
            if (!(u > 0.0)) throw CLI::ValidationError("--weights", "magnitudes must be positive");
            terms.push_back({std::log(u), v});
        }
        return urns::WeightSequence::table(std::move(terms));
    }
    const double rho = std::stod(token);
    if (!(rho > 1.0)) throw CLI::ValidationError("--rho/--weights", "rho must exceed 1 or be 'inf'");
    return urns::WeightSequence::classical(rho);
}

std::vector<std::pair<std::string, double>> parse_rho_list(const std::string& csv) {
    std::vector<std::pair<std::string, double>> out;
    std::stringstream ss(csv);
    std::string item;
    double prev = 1.0;
    while (std::getline(ss, item, ',')) {
        const double rho = std::stod(item);
        if (!(rho > 1.0)) throw CLI::ValidationError("--rhos", "every rho must exceed 1");
        if (!(rho > prev)) throw CLI::ValidationError("--rhos", "rho values must be ascending");
        prev = rho;
        out.emplace_back(item, rho);
    }
    if (out.empty()) throw CLI::ValidationError("--rhos", "empty rho list");
    return out;
}

std::int64_t parse_horizon(const std::string& token) {
    if (token == "auto") return -1;
    const long long h = std::stoll(token);
    if (h < 1) throw CLI::ValidationError("--horizon", "horizon must be positive or 'auto'");
    return h;
}

struct CommonOpts {
    std::uint64_t seed = 1;
    std::int64_t replicas = 100000;
    std::string out_path;
    int threads = static_cast<int>(std::thread::hardware_concurrency());
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "base RNG seed");
    cmd->add_option("--replicas", opts.replicas, "Monte Carlo replicas")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", opts.out_path, "output CSV path (default: stdout)");
    cmd->add_option("--threads", opts.threads, "worker threads (tallies are order-independent)")
        ->check(CLI::PositiveNumber);
    cmd->fallthrough();  // lets --config reach the top-level reader
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"interacting urns with generalized reinforcement: closed forms, a truncated-"
                 "chain oracle, and seeded Monte Carlo"};
    app.require_subcommand(1);
    app.fallthrough();
    // key=value file mirroring the long flags, one [subcommand] section each;
    // explicit flags win over file values.
    app.set_config("--config");

    // analytic ---------------------------------------------------------------
    auto* analytic_cmd = app.add_subcommand("analytic", "closed-form table for one p");
    double an_p = 0.0;
    int an_ell_max = 0;
    std::string an_out;
    analytic_cmd->add_option("--p", an_p, "interaction parameter in [0, 1/2]")->required();
    analytic_cmd->add_option("--ell-max", an_ell_max, "largest configuration level to print")
        ->check(CLI::NonNegativeNumber);
    analytic_cmd->add_option("--out", an_out, "output CSV path (default: stdout)");
    analytic_cmd->fallthrough();
    analytic_cmd->callback([&] {
        const urns::analytic::ClosedForm cf = urns::analytic::ClosedForm::at(an_p);
        CsvWriter csv(an_out);
        csv.row({"p", "ell", "lambda_minus", "lambda_plus", "C", "A", "q0", "q_ell", "r_ell"});
        for (int ell = 0; ell <= an_ell_max; ++ell) {
            const double r = an_p < 0.5 ? urns::analytic::r_ell(an_p, ell) : 1.0;
            csv.row({fmt(an_p), std::to_string(ell), fmt(cf.lambda_minus), fmt(cf.lambda_plus),
                     fmt(cf.C_p), fmt(cf.A_p), fmt(cf.q0), fmt(urns::analytic::q_ell(an_p, ell)),
                     fmt(r)});
        }
    });

    // oracle -----------------------------------------------------------------
    auto* oracle_cmd = app.add_subcommand("oracle", "truncated-chain bracket for one p");
    double or_p = 0.0;
    int or_level = 400;
    int or_ell_max = 20;
    std::string or_out;
    oracle_cmd->add_option("--p", or_p, "interaction parameter in [0, 1/2)")->required();
    oracle_cmd->add_option("--L", or_level, "truncation level")->check(CLI::Range(2, 2000000));
    oracle_cmd->add_option("--ell-max", or_ell_max, "largest level to print")
        ->check(CLI::NonNegativeNumber);
    oracle_cmd->add_option("--out", or_out, "output CSV path (default: stdout)");
    oracle_cmd->fallthrough();
    oracle_cmd->callback([&] {
        const urns::oracle::FixationTable t = urns::oracle::solve_bracket(or_p, or_level);
        CsvWriter csv(or_out);
        csv.row({"p", "L", "ell", "q_lower", "q_upper", "r_lower", "r_upper", "q_width"});
        const int ell_hi = std::min(or_ell_max, or_level);
        for (int ell = 0; ell <= ell_hi; ++ell) {
            csv.row({fmt(or_p), std::to_string(or_level), std::to_string(ell),
                     fmt(t.q_lower[ell]), fmt(t.q_upper[ell]), fmt(t.r_lower[ell]),
                     fmt(t.r_upper[ell]), fmt(t.q_upper[ell] - t.q_lower[ell])});
        }
    });

    // simulate ---------------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "seeded fixation campaign for one parameter set");
    CommonOpts sim_common;
    double sim_p = 0.0;
    std::string sim_rho = "inf";
    int sim_urns = 2, sim_colors = 2;
    std::string sim_horizon = "auto";
    std::string sim_mode = "bracket";
    add_common(sim_cmd, sim_common);
    sim_cmd->add_option("--p", sim_p, "interaction parameter")->required();
    sim_cmd->add_option("--rho", sim_rho, "reinforcement base > 1, or 'inf'");
    sim_cmd->add_option("--urns", sim_urns, "number of urns")->check(CLI::Range(1, 64));
    sim_cmd->add_option("--colors", sim_colors, "number of colors")->check(CLI::Range(2, 16));
    sim_cmd->add_option("--horizon", sim_horizon, "step cap per replica, or 'auto'");
    sim_cmd->add_option("--mode", sim_mode, "bracket | ruin")
        ->check(CLI::IsMember({"bracket", "ruin"}));
    sim_cmd->callback([&] {
        urns::ModelParams params{sim_urns, sim_colors, sim_p, parse_weights(sim_rho)};
        urns::EstimateOptions opts;
        opts.mode = sim_mode == "ruin" ? urns::EstimateOptions::Mode::ruin_shortcut
                                       : urns::EstimateOptions::Mode::bracket;
        opts.horizon = parse_horizon(sim_horizon);
        opts.threads = sim_common.threads;
        const urns::FixationEstimate est =
            urns::estimate_fixation(params, sim_common.replicas, sim_common.seed, opts);
        CsvWriter csv(sim_common.out_path);
        csv.row({"p", "rho", "urns", "colors", "replicas", "seed", "mode", "lower", "upper",
                 "point", "stderr", "unresolved_fraction", "ai_draw_rate"});
        csv.row({fmt(sim_p), sim_rho, std::to_string(sim_urns), std::to_string(sim_colors),
                 std::to_string(sim_common.replicas), std::to_string(sim_common.seed), sim_mode,
                 fmt(est.lower), fmt(est.upper), fmt(est.point), fmt(est.stderr_),
                 fmt(est.unresolved_fraction), fmt(est.ai_rate)});
    });

    // sweep-p ----------------------------------------------------------------
    auto* sp_cmd = app.add_subcommand("sweep-p", "fixation curve across a p grid (INF^i rule)");
    CommonOpts sp_common;
    double sp_lo = 0.0, sp_hi = 0.5;
    int sp_points = 51;
    add_common(sp_cmd, sp_common);
    sp_cmd->add_option("--p-min", sp_lo, "grid start");
    sp_cmd->add_option("--p-max", sp_hi, "grid end");
    sp_cmd->add_option("--points", sp_points, "grid size")->check(CLI::Range(2, 100000));
    sp_cmd->callback([&] {
        urns::EstimateOptions opts;
        opts.threads = sp_common.threads;
        const auto rows = urns::sweep_p(urns::uniform_grid(sp_lo, sp_hi, sp_points),
                                        sp_common.replicas, sp_common.seed, opts);
        CsvWriter csv(sp_common.out_path);
        csv.row({"p", "q0_analytic", "mc_lower", "mc_upper", "stderr"});
        for (const auto& r : rows)
            csv.row({fmt(r.p), fmt(r.q0_analytic), fmt(r.mc_lower), fmt(r.mc_upper),
                     fmt(r.stderr_)});
    });

    // sweep-rho ----------------------------------------------------------------
    auto* sr_cmd = app.add_subcommand("sweep-rho", "finite-rho convergence sweep at fixed p");
    CommonOpts sr_common;
    double sr_p = 0.3;
    std::string sr_rhos = "2,8,32,128,1024";
    std::string sr_horizon = "auto";
    add_common(sr_cmd, sr_common);
    sr_cmd->add_option("--p", sr_p, "interaction parameter in [0, 1/2]")->required();
    sr_cmd->add_option("--rhos", sr_rhos, "ascending comma-separated rho values");
    sr_cmd->add_option("--horizon", sr_horizon, "step cap per replica, or 'auto'");
    sr_cmd->callback([&] {
        urns::EstimateOptions opts;
        opts.threads = sr_common.threads;
        std::int64_t horizon = parse_horizon(sr_horizon);
        if (horizon < 0) horizon = 400;
        const auto rows = urns::sweep_rho(sr_p, parse_rho_list(sr_rhos), sr_common.replicas,
                                          horizon, sr_common.seed, opts);
        CsvWriter csv(sr_common.out_path);
        csv.row({"rho", "estimate_lower", "estimate_upper", "stderr", "deviation",
                 "ai_draw_rate", "ai_stderr"});
        for (const auto& r : rows)
            csv.row({r.rho_token, fmt(r.estimate_lower), fmt(r.estimate_upper), fmt(r.stderr_),
                     fmt(r.deviation), fmt(r.ai_draw_rate), fmt(r.ai_stderr)});
    });

    // nonconformist ------------------------------------------------------------
    auto* nc_cmd = app.add_subcommand("nonconformist",
                                      "law of the non-conformist urn count (odd U, INF^i rule)");
    CommonOpts nc_common;
    int nc_urns = 3;
    double nc_p = 0.0;
    std::string nc_mode = "exact";
    add_common(nc_cmd, nc_common);
    nc_cmd->add_option("--urns", nc_urns, "odd urn count >= 3")->required();
    nc_cmd->add_option("--p", nc_p, "interaction parameter in [0, 1/2)")->required();
    nc_cmd->add_option("--mode", nc_mode, "exact | mc")->check(CLI::IsMember({"exact", "mc"}));
    nc_cmd->callback([&] {
        CsvWriter csv(nc_common.out_path);
        csv.row({"n", "probability"});
        if (nc_mode == "exact") {
            const auto pmf = urns::analytic::nonconformist_pmf(nc_urns, nc_p);
            for (std::size_t n = 0; n < pmf.size(); ++n)
                csv.row({std::to_string(n), fmt(pmf[n])});
        } else {
            urns::EstimateOptions opts;
            opts.threads = nc_common.threads;
            const auto res = urns::nonconformist_mc(nc_urns, nc_p, nc_common.replicas,
                                                    nc_common.seed, opts);
            for (std::size_t n = 0; n < res.pmf.size(); ++n)
                csv.row({std::to_string(n), fmt(res.pmf[n])});
        }
    });

    // single-urn -----------------------------------------------------------------
    auto* su_cmd = app.add_subcommand("single-urn", "draw sequences for one urn");
    CommonOpts su_common;
    su_common.replicas = 1;
    std::string su_weights = "inf";
    std::string su_sampler = "direct";
    std::int64_t su_horizon = 20;
    add_common(su_cmd, su_common);
    su_cmd->add_option("--weights", su_weights, "'inf', rho > 1, or table:u@v,u@v,...");
    su_cmd->add_option("--sampler", su_sampler, "direct | rubin")
        ->check(CLI::IsMember({"direct", "rubin"}));
    su_cmd->add_option("--horizon", su_horizon, "draws per replica")->check(CLI::PositiveNumber);
    su_cmd->callback([&] {
        const urns::WeightSequence w = parse_weights(su_weights);
        CsvWriter csv(su_common.out_path);
        csv.row({"replica", "t", "color"});
        for (std::int64_t rep = 0; rep < su_common.replicas; ++rep) {
            urns::RngStream rng(su_common.seed, static_cast<std::uint64_t>(rep));
            const auto draws = su_sampler == "rubin"
                                   ? urns::rubin_single_urn(w, su_horizon, rng)
                                   : urns::single_urn_direct(w, su_horizon, rng);
            for (std::size_t t = 0; t < draws.size(); ++t)
                csv.row({std::to_string(rep), std::to_string(t + 1),
                         std::to_string(draws[t])});
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalidConfig;
    } catch (const urns::oracle::BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
