#pragma once

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ib/gaussian.hpp"
#include "ib/grid_source.hpp"
#include "ib/io.hpp"
#include "ib/joint.hpp"
#include "ib/measures.hpp"
#include "ib/oracle.hpp"
#include "ib/quantizer.hpp"
#include "ib/rectangles.hpp"
#include "ib/rng.hpp"
#include "ib/solver.hpp"
#include "ib/version.hpp"

namespace ib::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitBoundViolation = 3;

struct Options {
    // Source spec: exactly one of source_path / rho must be given.
    std::string source_path;
    double rho = std::numeric_limits<double>::quiet_NaN();
    std::string cells = "200";

    // Solver parameters shared by curve/region/quantize.
    double beta_min = 0.05, beta_max = 200.0;
    std::size_t beta_count = 60;
    std::size_t u_size = 0;  // 0 = |X| + 1
    std::size_t restarts = 4;
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    std::uint64_t seed = kDefaultSeed;
    std::size_t threads = 0;
    std::string unit = "nats";

    // Region parameters.
    std::size_t n_max = 2, m_size = 2;
    double slack = 5e-3;

    // Quantize / rectangles parameters.
    double eps = 0.1;
    double presolve_beta = 5.0;
    std::size_t presolve_u = 2;
    std::string code_path;
    bool emit_grid = false;

    // Outputs.
    std::string out;
    std::string kernels_out;
    std::string report_out;
    std::string covers_out;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> parse_cells(const std::string& spec) {
    const auto x = spec.find('x');
    if (x == std::string::npos) {
        const std::size_t n = std::stoul(spec);
        return {n, n};
    }
    return {std::stoul(spec.substr(0, x)), std::stoul(spec.substr(x + 1))};
}

inline std::string canonical_config(const std::string& cmd, const Options& o) {
    std::ostringstream s;
    s << cmd << ";source=" << o.source_path << ";rho=" << format_double(o.rho)
      << ";cells=" << o.cells << ";beta=" << format_double(o.beta_min) << ","
      << format_double(o.beta_max) << "," << o.beta_count << ";u=" << o.u_size
      << ";restarts=" << o.restarts << ";tol=" << format_double(o.tol)
      << ";max_iter=" << o.max_iter << ";seed=" << o.seed << ";unit=" << o.unit
      << ";n=" << o.n_max << ";m=" << o.m_size << ";slack=" << format_double(o.slack)
      << ";eps=" << format_double(o.eps) << ";presolve=" << format_double(o.presolve_beta) << ","
      << o.presolve_u << ";code=" << o.code_path;
    return s.str();
}

inline bool has_gaussian(const Options& o) { return !std::isnan(o.rho); }

inline JointPMF load_joint_source(const Options& o) {
    if (has_gaussian(o)) {
        auto [xc, yc] = parse_cells(o.cells);
        return discretize(GaussianPair(o.rho), xc, yc);
    }
    return joint_from_json(read_json_file(o.source_path));
}

inline GridSource load_grid_source(const Options& o) {
    if (has_gaussian(o)) {
        auto [xc, yc] = parse_cells(o.cells);
        GridSource base = discretize_binary_y(GaussianPair(o.rho), xc);
        Kernel init(base.cell_count(), 2, base.y_channel.flat());
        IBCurvePoint pre = ib_iterate(base.to_joint_yx(), o.presolve_beta, o.presolve_u, init,
                                      o.tol, o.max_iter);
        if (!pre.converged) throw Error("pre-solve for the bottleneck channel did not converge");
        return base.with_u_channel(pre.encoder);
    }
    return grid_source_from_json(read_json_file(o.source_path));
}

inline CurveOptions curve_options(const Options& o) {
    CurveOptions c;
    c.beta_schedule = default_beta_schedule(o.beta_count, o.beta_min, o.beta_max);
    c.u_size = o.u_size;
    c.restarts = o.restarts;
    c.tol = o.tol;
    c.max_iter = o.max_iter;
    c.seed = o.seed;
    c.threads = o.threads;
    return c;
}

inline double unit_scale(const Options& o) { return o.unit == "bits" ? 1.0 / kNatsPerBit : 1.0; }

inline std::string unit_suffix(const Options& o) { return o.unit == "bits" ? "bits" : "nats"; }

}  // namespace detail

inline int cmd_curve(const Options& o) {
    const JointPMF j = detail::load_joint_source(o);
    const std::uint64_t hash = fnv1a64(detail::canonical_config("curve", o));
    IBCurve curve = ib_curve(j, detail::curve_options(o));

    const double scale = detail::unit_scale(o);
    const std::string u = detail::unit_suffix(o);
    CsvWriter csv(hash, "beta,rate_" + u + ",score_" + u + ",converged,iters");
    std::size_t failed = 0;
    for (const auto& pt : curve.sweep) {
        csv.cell(pt.beta);
        csv.cell(pt.rate * scale);
        csv.cell(pt.score * scale);
        csv.cell(std::uint64_t{pt.converged ? 1u : 0u});
        csv.cell(std::uint64_t{pt.iters});
        csv.end_row();
        if (!pt.converged) ++failed;
    }
    csv.save(o.out);

    if (!o.kernels_out.empty()) {
        nlohmann::json points = nlohmann::json::array();
        for (const auto& pt : curve.sweep)
            points.push_back({{"beta", pt.beta},
                              {"rate_nats", pt.rate},
                              {"score_nats", pt.score},
                              {"encoder", kernel_to_json(pt.encoder)}});
        write_text_file(o.kernels_out, nlohmann::json{{"points", points}}.dump(2) + "\n");
    }
    return 10 * failed > curve.sweep.size() ? kExitNumerical : kExitOk;
}

inline int cmd_region(const Options& o) {
    const JointPMF j = detail::load_joint_source(o);
    const std::uint64_t hash = fnv1a64(detail::canonical_config("region", o));
    IBCurve curve = ib_curve(j, detail::curve_options(o));

    const double scale = detail::unit_scale(o);
    const std::string u = detail::unit_suffix(o);
    CsvWriter csv(hash, "n,m_size,partition_rgs,rate_" + u + ",score_" + u);
    nlohmann::json rows = nlohmann::json::array();
    nlohmann::json witnesses = nlohmann::json::array();
    bool all_pass = true;
    for (std::size_t n = 1; n <= o.n_max; ++n) {
        FrontierResult fr = enumerate_frontier(j, n, o.m_size, true);
        for (const auto& pt : fr.all) {
            csv.cell(std::uint64_t{pt.n});
            csv.cell(std::uint64_t{pt.m_size});
            csv.cell(rgs_string(pt.partition));
            csv.cell(pt.rate * scale);
            csv.cell(pt.score * scale);
            csv.end_row();
            const bool pass = converse_check(pt, curve, o.slack);
            all_pass = all_pass && pass;
            rows.push_back({{"n", pt.n},
                            {"partition_rgs", rgs_string(pt.partition)},
                            {"rate_nats", pt.rate},
                            {"score_nats", pt.score},
                            {"curve_nats", ib_value_at_rate(curve, pt.rate)},
                            {"pass", pass}});
        }
        if (!o.kernels_out.empty()) {
            WitnessVariable w = witness_from_code(j, fr.best);
            witnesses.push_back({{"n", fr.best.n},
                                 {"partition_rgs", rgs_string(fr.best.partition)},
                                 {"joint", joint_to_json(w.joint)}});
        }
    }
    csv.save(o.out);
    if (!o.kernels_out.empty())
        write_text_file(o.kernels_out, nlohmann::json{{"witnesses", witnesses}}.dump(2) + "\n");
    if (!o.report_out.empty())
        write_text_file(o.report_out, nlohmann::json{{"slack_nats", o.slack},
                                                     {"all_pass", all_pass},
                                                     {"rows", rows}}
                                              .dump(2) +
                                          "\n");
    return all_pass ? kExitOk : kExitBoundViolation;
}

inline int cmd_quantize(const Options& o) {
    const GridSource src = detail::load_grid_source(o);
    const double delta = delta_for_epsilon(o.eps, src.y_channel.output_size(),
                                           src.u_channel.output_size());
    QuantizedSource q = quantize_source(src, partition_simplex(src.u_channel.output_size(), delta));
    QuantizationReport r = verify_quantization_bounds(src, q, delta);

    nlohmann::json report = quantization_report_to_json(r);
    report["eps"] = o.eps;
    write_text_file(o.out, report.dump(2) + "\n");
    return r.ok() ? kExitOk : kExitBoundViolation;
}

inline int cmd_rectangles(const Options& o) {
    const JointPMF j = detail::load_joint_source(o);
    const GriddedCode code = gridded_code_from_json(read_json_file(o.code_path));
    const double delta = delta_for_epsilon_converse(o.eps, code.n,
                                                    j.marginal_pmf("y").size(), code.m_size);

    PMF px = j.marginal_pmf("x");
    std::size_t grid = code.grid_size();
    std::vector<double> mu(grid, 1.0);
    for (std::size_t p = 0; p < grid; ++p) {
        std::size_t rem = p;
        for (std::size_t t = 0; t < code.n; ++t) {
            mu[p] *= px[rem % px.size()];
            rem /= px.size();
        }
    }
    const PMF grid_mu = PMF::normalized(std::move(mu));
    std::vector<RectCover> covers;
    for (const auto& cell : code_cells(code)) covers.push_back(rect_cover(cell, grid_mu, delta));
    LetterPartition lp = letter_partition(covers, code.n, code.letters, code.m_size);
    GapReport gap = verify_distribution_gap(j, code, lp, delta);

    nlohmann::json report = gap_report_to_json(gap);
    report["eps"] = o.eps;
    report["letter_blocks"] = lp.block_count;
    write_text_file(o.out, report.dump(2) + "\n");
    if (!o.covers_out.empty())
        write_text_file(o.covers_out, covers_to_json(covers).dump(2) + "\n");
    return gap.ok() ? kExitOk : kExitBoundViolation;
}

inline int cmd_source(const Options& o) {
    if (!detail::has_gaussian(o)) throw Error("source emission needs --rho");
    if (o.emit_grid)
        write_text_file(o.out, grid_source_to_json(detail::load_grid_source(o)).dump(2) + "\n");
    else
        write_text_file(o.out, joint_to_json(detail::load_joint_source(o)).dump(2) + "\n");
    return kExitOk;
}

inline void apply_json_config(const std::string& path, Options& o) {
    nlohmann::json cfg = read_json_file(path);
    auto get = [&](const char* key, auto& field) {
        if (cfg.contains(key)) field = cfg.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("source", o.source_path);
    get("rho", o.rho);
    get("cells", o.cells);
    get("beta-min", o.beta_min);
    get("beta-max", o.beta_max);
    get("beta-count", o.beta_count);
    get("u-size", o.u_size);
    get("restarts", o.restarts);
    get("tol", o.tol);
    get("max-iter", o.max_iter);
    get("seed", o.seed);
    get("threads", o.threads);
    get("unit", o.unit);
    get("n", o.n_max);
    get("m-size", o.m_size);
    get("slack", o.slack);
    get("eps", o.eps);
    get("presolve-beta", o.presolve_beta);
    get("presolve-u", o.presolve_u);
    get("code", o.code_path);
    get("out", o.out);
    get("kernels-out", o.kernels_out);
    get("report-out", o.report_out);
    get("covers-out", o.covers_out);
}

// Entry point shared by the binary and the tests. Exit codes: 0 ok, 1 usage,
// 2 numerical failure, 3 bound violation.
inline int run(int argc, const char* const* argv) {
    Options o;
    if (const char* env = std::getenv("IBX_SEED")) o.seed = std::strtoull(env, nullptr, 0);

    // A JSON config file supplies defaults; explicit flags win.
    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") {
            try {
                apply_json_config(args[i + 1], o);
            } catch (const std::exception& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return kExitUsage;
            }
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                       args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }

    CLI::App app{"information bottleneck trade-off curves and region checks"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    auto add_source = [&](CLI::App* cmd) {
        cmd->add_option("--source", o.source_path, "path to a source JSON file");
        cmd->add_option("--rho", o.rho, "gaussian pair correlation");
        cmd->add_option("--cells", o.cells, "gaussian grid cells, N or XxY");
    };
    auto add_solver = [&](CLI::App* cmd) {
        cmd->add_option("--beta-min", o.beta_min);
        cmd->add_option("--beta-max", o.beta_max);
        cmd->add_option("--beta-count", o.beta_count);
        cmd->add_option("--u-size", o.u_size, "bottleneck size, 0 = |X|+1");
        cmd->add_option("--restarts", o.restarts);
        cmd->add_option("--tol", o.tol);
        cmd->add_option("--max-iter", o.max_iter);
        cmd->add_option("--seed", o.seed);
        cmd->add_option("--threads", o.threads);
        cmd->add_option("--unit", o.unit)->check(CLI::IsMember({"nats", "bits"}));
    };

    CLI::App* curve = app.add_subcommand("curve", "solve the trade-off curve");
    add_source(curve);
    add_solver(curve);
    curve->add_option("--out", o.out)->required();
    curve->add_option("--kernels-out", o.kernels_out, "encoder sidecar JSON");

    CLI::App* region = app.add_subcommand("region", "exhaustive code region vs the curve");
    add_source(region);
    add_solver(region);
    region->add_option("--n", o.n_max, "max blocklength");
    region->add_option("--m-size", o.m_size);
    region->add_option("--slack", o.slack, "converse slack in nats");
    region->add_option("--out", o.out)->required();
    region->add_option("--report-out", o.report_out, "dominance report JSON");
    region->add_option("--witness-out", o.kernels_out, "per-n best-code witness joints JSON");

    CLI::App* quant = app.add_subcommand("quantize", "simplex-quantize a grid source");
    add_source(quant);
    add_solver(quant);
    quant->add_option("--eps", o.eps)->required();
    quant->add_option("--presolve-beta", o.presolve_beta);
    quant->add_option("--presolve-u", o.presolve_u);
    quant->add_option("--out", o.out)->required();

    CLI::App* rects = app.add_subcommand("rectangles", "rectangle-cover converse check");
    add_source(rects);
    rects->add_option("--code", o.code_path)->required();
    rects->add_option("--eps", o.eps)->required();
    rects->add_option("--out", o.out)->required();
    rects->add_option("--covers-out", o.covers_out, "cover export JSON");

    CLI::App* src = app.add_subcommand("source", "emit a gaussian source file");
    add_source(src);
    add_solver(src);
    src->add_flag("--grid", o.emit_grid, "emit a GridSource instead of a JointPMF");
    src->add_option("--presolve-beta", o.presolve_beta);
    src->add_option("--presolve-u", o.presolve_u);
    src->add_option("--out", o.out)->required();

    try {
        std::vector<const char*> cargs;
        cargs.push_back("ibx");
        for (const auto& a : args) cargs.push_back(a.c_str());
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const bool have_file = !o.source_path.empty(), have_gauss = detail::has_gaussian(o);
    try {
        if (app.got_subcommand(curve) || app.got_subcommand(region) ||
            app.got_subcommand(quant) || app.got_subcommand(src)) {
            if (have_file == have_gauss) {
                std::cerr << "exactly one of --source or --rho is required\n";
                return kExitUsage;
            }
        }
        if (app.got_subcommand(curve)) return cmd_curve(o);
        if (app.got_subcommand(region)) return cmd_region(o);
        if (app.got_subcommand(quant)) return cmd_quantize(o);
        if (app.got_subcommand(rects)) {
            if (!have_file && !have_gauss) {
                std::cerr << "rectangles needs a letter source\n";
                return kExitUsage;
            }
            return cmd_rectangles(o);
        }
        if (app.got_subcommand(src)) return cmd_source(o);
    } catch (const EmptyCurve& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace ib::cli
