// Command-line front end: point solves, error decompositions, rate fits,
// sharpness and blow-up sweeps, exit-time moment reports and q-table builds.
// Reports go to stdout or --out as CSV (one row per grid cell) or JSON
// (schema "heatlab-report/1"). Worker count comes only from HEATLAB_WORKERS
// and never changes results.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heatlab/error_lab.hpp"
#include "heatlab/kernels.hpp"
#include "heatlab/parallel.hpp"

using json = nlohmann::ordered_json;
using namespace heatlab;

namespace {

struct CommonOpts {
    std::int64_t n = 64;
    double T = 1.0;
    double sigma = 1.0;
    double t = 0.0;
    double x = 0.0;
    std::string g_spec = "indicator";
    std::int64_t paths = 100000;
    std::uint64_t seed = 12345;
    std::string out;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_g = true) {
    cmd->add_option("--n", o.n, "lattice size (even)");
    cmd->add_option("--T", o.T, "time horizon");
    cmd->add_option("--sigma", o.sigma, "volatility");
    cmd->add_option("--t", o.t, "query time");
    cmd->add_option("--x", o.x, "query point");
    if (with_g) cmd->add_option("--g", o.g_spec, "terminal condition (catalog name or JSON file)");
    cmd->add_option("--paths", o.paths, "Monte Carlo paths");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--out", o.out, "output path (default stdout)");
    cmd->add_option("--format", o.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
}

void emit(const CommonOpts& o, const std::string& csv, const json& doc) {
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!o.out.empty()) {
        file.open(o.out);
        if (!file) throw std::runtime_error("cannot open output file " + o.out);
        os = &file;
    }
    if (o.format == "json") {
        *os << doc.dump(2) << "\n";
    } else {
        *os << csv;
    }
}

json report_header(const std::string& command, const CommonOpts& o) {
    json doc;
    doc["schema"] = "heatlab-report/1";
    doc["command"] = command;
    doc["params"] = {{"n", o.n},       {"T", o.T},       {"sigma", o.sigma}, {"t", o.t},
                     {"x", o.x},       {"g", o.g_spec},  {"paths", o.paths}, {"seed", o.seed}};
    return doc;
}

std::vector<std::int64_t> parse_n_list(const std::string& text) {
    std::vector<std::int64_t> ns;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) ns.push_back(std::stoll(item));
    return ns;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-walk heat-equation error laboratory"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string n_list_text = "64,128,256,512,1024,2048,4096";
    std::string t_list_text;
    double bridge_h = 0.125, bridge_theta = 1.0, bridge_beta = 0.0;
    double delta = 0.25;
    std::string qtable_out, qtable_in;

    auto* solve = app.add_subcommand("solve", "print u and u^n at one point");
    add_common(solve, o);

    auto* dec = app.add_subcommand("decompose", "error split at one point");
    add_common(dec, o);
    std::int64_t q_paths = 2500;
    dec->add_option("--qpaths", q_paths, "bridge paths per q-table point");

    auto* rates = app.add_subcommand("rates", "log-log convergence fit");
    add_common(rates, o);
    rates->add_option("--n-list", n_list_text, "comma-separated lattice sizes");

    auto* sharp = app.add_subcommand("sharpness", "sqrt(n) eps_n(0,0) for the step function");
    add_common(sharp, o, false);
    sharp->add_option("--n-list", n_list_text, "comma-separated lattice sizes");

    auto* blow = app.add_subcommand("blowup", "error profile as t approaches T");
    add_common(blow, o);
    blow->add_option("--t-list", t_list_text, "comma-separated query times");

    auto* mom = app.add_subcommand("moments", "exit-time index moment report");
    add_common(mom, o, false);
    mom->add_option("--delta", delta, "tail threshold J > n_theta (1+delta)");
    std::string export_paths;
    std::int64_t export_count = 200;
    mom->add_option("--export-paths", export_paths, "write raw increments of the first paths here");
    mom->add_option("--export-count", export_count, "number of paths to export");

    auto* bridge = app.add_subcommand("bridge", "q-table build and rho integral checks");
    add_common(bridge, o, false);
    bridge->add_option("--hstep", bridge_h, "spatial step");
    bridge->add_option("--theta", bridge_theta, "bridge length");
    bridge->add_option("--beta", bridge_beta, "weight exponent for the window check");
    bridge->add_option("--qtable-out", qtable_out, "write the q-table to this CSV");
    bridge->add_option("--qtable-in", qtable_in, "reuse an existing q-table CSV");

    CLI11_PARSE(app, argc, argv);

    const int workers = resolve_workers(0);

    try {
        if (solve->parsed()) {
            const TerminalCondition g = terminal_from_spec(o.g_spec);
            const LatticeParams lp(o.n, o.T, o.sigma);
            const HeatParams hp{o.T, o.sigma};
            const EvalResult u = u_exact(g, o.t, o.x, hp);
            const double un = un_binomial(g, o.t, o.x, lp);
            json doc = report_header("solve", o);
            doc["rows"] = json::array({{{"u_exact", u.value},
                                        {"u_n", un},
                                        {"error", un - u.value},
                                        {"quad_error", u.abs_error},
                                        {"converged", u.converged}}});
            std::ostringstream csv;
            csv << "u_exact,u_n,error,quad_error,converged\n"
                << std::setprecision(17) << u.value << "," << un << "," << (un - u.value) << ","
                << u.abs_error << "," << u.converged << "\n";
            emit(o, csv.str(), doc);
        } else if (dec->parsed()) {
            const TerminalCondition g = terminal_from_spec(o.g_spec);
            const LatticeParams lp(o.n, o.T, o.sigma);
            McBudget budget;
            budget.glob_paths = o.paths;
            budget.q_paths = q_paths;
            budget.seed = o.seed;
            budget.workers = workers;
            const ErrorReport rep = decompose(g, o.t, o.x, lp, budget);
            json doc = report_header("decompose", o);
            doc["rows"] = json::array({{{"t", rep.t},
                                        {"x", rep.x},
                                        {"n", rep.n},
                                        {"n_theta", rep.n_theta},
                                        {"on_lattice", rep.on_lattice},
                                        {"total", rep.total},
                                        {"adj", rep.adj},
                                        {"loc", rep.loc},
                                        {"loc_unc", rep.loc_unc},
                                        {"glob", rep.glob},
                                        {"glob_unc", rep.glob_unc},
                                        {"residual", rep.residual},
                                        {"combined_unc", rep.combined_unc()}}});
            std::ostringstream csv;
            csv << "t,x,n,n_theta,on_lattice,total,adj,loc,loc_unc,glob,glob_unc,residual,"
                   "combined_unc\n"
                << std::setprecision(17) << rep.t << "," << rep.x << "," << rep.n << ","
                << rep.n_theta << "," << rep.on_lattice << "," << rep.total << "," << rep.adj
                << "," << rep.loc << "," << rep.loc_unc << "," << rep.glob << "," << rep.glob_unc
                << "," << rep.residual << "," << rep.combined_unc() << "\n";
            emit(o, csv.str(), doc);
        } else if (rates->parsed()) {
            const TerminalCondition g = terminal_from_spec(o.g_spec);
            const auto ns = parse_n_list(n_list_text);
            const RateFit fit = rate_study(g, o.t, o.x, o.T, o.sigma, ns);
            json doc = report_header("rates", o);
            doc["slope"] = fit.slope;
            doc["intercept"] = fit.intercept;
            doc["r_squared"] = fit.r_squared;
            doc["degenerate"] = fit.degenerate;
            doc["rows"] = json::array();
            std::ostringstream csv;
            csv << "n,abs_err,used\n" << std::setprecision(17);
            for (std::size_t i = 0; i < fit.n.size(); ++i) {
                doc["rows"].push_back(
                    {{"n", fit.n[i]}, {"abs_err", fit.abs_err[i]}, {"used", bool(fit.used[i])}});
                csv << fit.n[i] << "," << fit.abs_err[i] << "," << bool(fit.used[i]) << "\n";
            }
            csv << "# slope=" << fit.slope << " r2=" << fit.r_squared
                << " degenerate=" << fit.degenerate << "\n";
            emit(o, csv.str(), doc);
        } else if (sharp->parsed()) {
            const auto ns = parse_n_list(n_list_text);
            const auto rows = sharpness_run(ns);
            json doc = report_header("sharpness", o);
            doc["limit"] = 0.3989422804014327;
            doc["rows"] = json::array();
            std::ostringstream csv;
            csv << "n,eps,sqrt_n_eps\n" << std::setprecision(17);
            for (const auto& r : rows) {
                doc["rows"].push_back({{"n", r.n}, {"eps", r.eps}, {"sqrt_n_eps", r.sqrt_n_eps}});
                csv << r.n << "," << r.eps << "," << r.sqrt_n_eps << "\n";
            }
            emit(o, csv.str(), doc);
        } else if (blow->parsed()) {
            const TerminalCondition g = terminal_from_spec(o.g_spec);
            const LatticeParams lp(o.n, o.T, o.sigma);
            std::vector<double> ts;
            if (t_list_text.empty()) {
                for (std::int64_t k = 0; k < lp.n / 2; k += std::max<std::int64_t>(lp.n / 16, 1)) {
                    ts.push_back(lp.t_k(k));
                    ts.push_back(lp.t_k(k) + 0.43 * 2.0 * o.T / static_cast<double>(o.n));
                }
                ts.push_back(lp.t_k(lp.n / 2 - 1));
            } else {
                std::stringstream ss(t_list_text);
                std::string item;
                while (std::getline(ss, item, ',')) ts.push_back(std::stod(item));
            }
            const auto rows = blowup_profile(g, lp, ts, o.x);
            json doc = report_header("blowup", o);
            doc["rows"] = json::array();
            std::ostringstream csv;
            csv << "t,n_theta,on_lattice,eps,envelope,scaled_ratio,adj,adj_bound\n"
                << std::setprecision(17);
            for (const auto& r : rows) {
                doc["rows"].push_back({{"t", r.t},
                                       {"n_theta", r.n_theta},
                                       {"on_lattice", r.on_lattice},
                                       {"eps", r.eps},
                                       {"envelope", r.envelope},
                                       {"scaled_ratio", r.scaled_ratio},
                                       {"adj", r.adj},
                                       {"adj_bound", r.adj_bound}});
                csv << r.t << "," << r.n_theta << "," << r.on_lattice << "," << r.eps << ","
                    << r.envelope << "," << r.scaled_ratio << "," << r.adj << "," << r.adj_bound
                    << "\n";
            }
            emit(o, csv.str(), doc);
        } else if (mom->parsed()) {
            const LatticeParams lp(o.n, o.T, o.sigma);
            if (!export_paths.empty()) {
                std::ofstream pf(export_paths);
                if (!pf) throw std::runtime_error("cannot open " + export_paths);
                pf.precision(17);
                pf << "path,k,dtau,dx\n";
                ExitWalkPath path;
                for (std::int64_t p = 0; p < export_count; ++p) {
                    RngStream rng(o.seed, static_cast<std::uint64_t>(p));
                    simulate_walk(o.t, lp, rng, path, true);
                    for (std::size_t k = 0; k < path.dtau.size(); ++k)
                        pf << p << "," << (k + 1) << "," << path.dtau[k] << "," << path.dx[k]
                           << "\n";
                }
            }
            const JnMomentReport rep = jn_moment_report(o.t, lp, o.paths, o.seed, workers);
            const McEstimate tail = tail_frequency(o.t, lp, delta, o.paths, o.seed, workers);
            json doc = report_header("moments", o);
            doc["n_theta"] = rep.n_theta;
            doc["mean_j_gap"] = rep.mean_j_gap;
            doc["mean_j_gap_se"] = rep.mean_j_gap_se;
            doc["second_moment_scaled"] = rep.second_moment_scaled;
            doc["second_moment_se"] = rep.second_moment_se;
            doc["mean_tau_gap"] = rep.mean_tau_gap;
            doc["mean_tau_gap_se"] = rep.mean_tau_gap_se;
            doc["abs_moment_scaled"] = {rep.abs_moment_scaled[0], rep.abs_moment_scaled[1],
                                        rep.abs_moment_scaled[2]};
            doc["factorization_gap"] = rep.factorization_gap;
            doc["factorization_gap_se"] = rep.factorization_gap_se;
            doc["tail35_frequency"] = rep.tail35_frequency;
            doc["tail35_scaled"] = rep.tail35_scaled;
            doc["tail_delta"] = delta;
            doc["tail_frequency"] = tail.mean;
            doc["tail_frequency_se"] = tail.std_error;
            std::ostringstream csv;
            csv << "n_theta,mean_j_gap,mean_j_gap_se,second_moment_scaled,second_moment_se,"
                   "mean_tau_gap,mean_tau_gap_se,abs1,abs2,abs4,fact_gap,fact_gap_se,"
                   "tail35_freq,tail35_scaled,tail_delta,tail_freq,tail_freq_se\n"
                << std::setprecision(17) << rep.n_theta << "," << rep.mean_j_gap << ","
                << rep.mean_j_gap_se << "," << rep.second_moment_scaled << ","
                << rep.second_moment_se << "," << rep.mean_tau_gap << "," << rep.mean_tau_gap_se
                << "," << rep.abs_moment_scaled[0] << "," << rep.abs_moment_scaled[1] << ","
                << rep.abs_moment_scaled[2] << "," << rep.factorization_gap << ","
                << rep.factorization_gap_se << "," << rep.tail35_frequency << ","
                << rep.tail35_scaled << "," << delta << "," << tail.mean << ","
                << tail.std_error << "\n";
            emit(o, csv.str(), doc);
        } else if (bridge->parsed()) {
            QTable qt;
            if (!qtable_in.empty()) {
                qt = QTable::load(qtable_in);
            } else {
                const double ymax = std::max(bridge_h, 8.0 * o.sigma * std::sqrt(bridge_theta));
                qt = build_qtable(bridge_h, bridge_theta, o.sigma, ymax, bridge_h / 8.0, o.paths,
                                  o.seed, workers);
            }
            if (!qtable_out.empty()) qt.save(qtable_out);
            const RhoCheckReport rep =
                rho_integral_checks(qt.h, qt.theta, qt.sigma, bridge_beta, qt);
            json doc = report_header("bridge", o);
            doc["h"] = qt.h;
            doc["theta"] = qt.theta;
            doc["beta"] = bridge_beta;
            auto add = [&](const char* name, const RhoBoundCheck& c) {
                doc[name] = {{"value", c.value},
                             {"uncertainty", c.uncertainty},
                             {"bound", c.bound},
                             {"pass", c.pass}};
            };
            add("inner", rep.inner);
            add("outer", rep.outer);
            add("weighted", rep.weighted);
            doc["sup_window_m"] = rep.sup_window_m;
            std::ostringstream csv;
            csv << "check,value,uncertainty,bound,pass\n" << std::setprecision(17);
            csv << "inner," << rep.inner.value << "," << rep.inner.uncertainty << ","
                << rep.inner.bound << "," << rep.inner.pass << "\n";
            csv << "outer," << rep.outer.value << "," << rep.outer.uncertainty << ","
                << rep.outer.bound << "," << rep.outer.pass << "\n";
            csv << "weighted," << rep.weighted.value << "," << rep.weighted.uncertainty << ","
                << rep.weighted.bound << "," << rep.weighted.pass << "\n";
            emit(o, csv.str(), doc);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
