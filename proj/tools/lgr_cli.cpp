// lgr: phantoms, forward simulation, reconstruction and comparison.
//
//   lgr <command> [--config file] [--flag value ...]
//
// A config file holds one `key=value` per line (`#` starts a comment); each
// key is the long flag name without dashes. Flags given on the command line
// override the file.

#include <lgr/lgr.hpp>

#include "../vendor/CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace lgr;

namespace {

enum ExitCode { ok = 0, usage = 1, io = 2, numeric = 3 };

int exit_code(Error::Kind kind) {
    switch (kind) {
    case Error::Kind::io:
    case Error::Kind::format: return io;
    case Error::Kind::invalid_grid:
    case Error::Kind::dimension:
    case Error::Kind::invalid_argument: return usage;
    default: return numeric;
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> config_arguments(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Error::Kind::io, "cannot open config " + path);
    std::vector<std::string> out;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string key = trim(line.substr(0, eq));
        if (eq == std::string::npos || key.empty()) {
            throw Error(Error::Kind::invalid_argument,
                        path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        out.push_back("--" + key);
        out.push_back(trim(line.substr(eq + 1)));
    }
    return out;
}

// Splices the config file contents in front of the command-line flags.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::optional<std::string> path;
    std::vector<std::string> rest;
    for (std::size_t k = 1; k < args.size(); ++k) {
        if (args[k] == "--config") {
            if (k + 1 == args.size()) throw Error(Error::Kind::invalid_argument, "--config needs a file");
            path = args[++k];
        } else if (args[k].rfind("--config=", 0) == 0) {
            path = args[k].substr(9);
        } else {
            rest.push_back(args[k]);
        }
    }
    std::vector<std::string> out{args[0]};
    if (!rest.empty()) out.push_back(rest[0]);
    if (path) {
        for (std::string& s : config_arguments(*path)) out.push_back(std::move(s));
    }
    out.insert(out.end(), rest.begin() + (rest.empty() ? 0 : 1), rest.end());
    return out;
}

std::string csv(const ReconReport& r) {
    std::ostringstream os;
    write_report_csv(os, r);
    return os.str();
}

struct ElectrodeFlags {
    ElectrodeSet e;
    void add(CLI::App* c) {
        c->add_option("--aperture", e.aperture, "Electrode fraction of each side")->capture_default_str();
        c->add_option("--z", e.z, "Contact impedance")->capture_default_str();
        c->add_option("--current", e.current, "Injected current")->capture_default_str();
    }
};

struct SolverFlags {
    double tol = 1e-10;
    std::optional<std::size_t> max_iter;
    std::string preconditioner = "jacobi";
    void add(CLI::App* c) {
        c->add_option("--tol", tol, "PCG relative residual tolerance")->capture_default_str();
        c->add_option("--max-inner", max_iter, "PCG iteration cap (default 20 n)");
        c->add_option("--preconditioner", preconditioner, "jacobi or ic0")->capture_default_str();
    }
    SolveOptions options(const Grid& g) const {
        SolveOptions o = default_solve_options(g);
        o.tol = tol;
        if (max_iter) o.max_iter = *max_iter;
        o.preconditioner = parse_preconditioner(preconditioner);
        return o;
    }
};

struct ReconFlags {
    ReconConfig cfg;
    std::string rhs_mode = "variational";
    std::string stop_rule = "sigma";
    std::optional<double> sigma_min, sigma_max;
    std::string initial;
    std::string preconditioner = "jacobi";
    void add(CLI::App* c) {
        c->add_option("--epsilon", cfg.epsilon, "Electrode smoothing")->capture_default_str();
        c->add_option("--delta", cfg.delta, "Gradient regularization")->capture_default_str();
        c->add_option("--max-iter", cfg.max_outer_iterations, "Outer iteration cap")->capture_default_str();
        c->add_option("--stop-tol", cfg.stop_tol, "Relative change threshold")->capture_default_str();
        c->add_option("--stop-rule", stop_rule, "sigma or functional")->capture_default_str();
        c->add_option("--grad-floor", cfg.grad_floor, "Floor on |grad u|")->capture_default_str();
        c->add_option("--sigma-min", sigma_min, "Lower bound for sigma");
        c->add_option("--sigma-max", sigma_max, "Upper bound for sigma");
        c->add_option("--rhs-mode", rhs_mode, "variational or lift-flux")->capture_default_str();
        c->add_option("--initial-sigma", cfg.initial_sigma, "Constant starting conductivity")->capture_default_str();
        c->add_option("--initial", initial, "Starting conductivity field");
        c->add_option("--transition-width", cfg.transition_width, "Electrode edge width (default 4h)");
        c->add_option("--inner-tol", cfg.inner_tol, "PCG tolerance")->capture_default_str();
        c->add_option("--max-inner", cfg.inner_max_iter, "PCG iteration cap");
        c->add_option("--preconditioner", preconditioner, "jacobi or ic0")->capture_default_str();
    }
    ReconConfig resolve() {
        cfg.rhs_mode = parse_rhs_mode(rhs_mode);
        cfg.stop_rule = parse_stop_rule(stop_rule);
        cfg.preconditioner = parse_preconditioner(preconditioner);
        if (sigma_min || sigma_max) {
            if (!sigma_min || !sigma_max) {
                throw Error(Error::Kind::invalid_argument, "--sigma-min and --sigma-max go together");
            }
            cfg.sigma_bounds = std::make_pair(*sigma_min, *sigma_max);
        }
        if (!initial.empty()) cfg.initial_field = read_field(initial);
        cfg.validate();
        return cfg;
    }
};

std::optional<ScalarField> optional_field(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return read_field(path);
}

Ellipse parse_ellipse(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            v.push_back(std::stod(tok));
        } catch (const std::exception&) {
            v.clear();
            break;
        }
    }
    if (v.size() != 6) {
        throw Error(Error::Kind::invalid_argument, "--ellipse expects cx,cy,ax,ay,angle,value; got " + s);
    }
    return Ellipse{v[0], v[1], v[2], v[3], v[4], v[5]};
}

int run(int argc, char** argv) {
    CLI::App app{"Current density impedance imaging by weighted least gradient"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every command");
    std::function<void()> action;

    // phantom
    PhantomSpec ps;
    std::string ph_kind = "blobs", ph_image, ph_out;
    std::vector<std::string> ph_ellipses;
    auto* phantom = app.add_subcommand("phantom", "Generate a conductivity phantom");
    phantom->add_option("--kind", ph_kind, "blobs, ellipses or image")->capture_default_str();
    phantom->add_option("--n", ps.n, "Nodes per side")->capture_default_str();
    phantom->add_option("--seed", ps.seed, "Blob seed")->capture_default_str();
    phantom->add_option("--lo", ps.lo, "Background conductivity")->capture_default_str();
    phantom->add_option("--hi", ps.hi, "Peak conductivity")->capture_default_str();
    phantom->add_option("--count", ps.count, "Number of blobs")->capture_default_str();
    phantom->add_option("--width-min", ps.width_min)->capture_default_str();
    phantom->add_option("--width-max", ps.width_max)->capture_default_str();
    phantom->add_option("--ellipse", ph_ellipses, "cx,cy,ax,ay,angle,value (repeatable)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    phantom->add_option("--image", ph_image, "P5 graymap for --kind image");
    phantom->add_option("--margin", ps.margin, "Background margin around the image")->capture_default_str();
    phantom->add_option("--out", ph_out, "Output field")->required();
    phantom->callback([&] {
        action = [&] {
            ps.kind = parse_phantom_kind(ph_kind);
            for (const std::string& s : ph_ellipses) ps.ellipses.push_back(parse_ellipse(s));
            ps.image_path = ph_image;
            write_field(generate_phantom(ps), ph_out);
        };
    });

    // forward
    std::string fw_sigma, fw_out_a, fw_out_u, fw_model = "robin";
    double fw_eps = 5e-4, fw_noise = 0.0;
    std::optional<double> fw_width;
    std::uint64_t fw_seed = 1;
    ElectrodeFlags fw_e;
    SolverFlags fw_s;
    auto* forward = app.add_subcommand("forward", "Simulate interior data |sigma grad u|");
    forward->add_option("--sigma", fw_sigma, "Conductivity field")->required();
    forward->add_option("--model", fw_model, "robin or cem")->capture_default_str();
    forward->add_option("--epsilon", fw_eps, "Electrode smoothing; 0 uses the sharp coefficients")
        ->capture_default_str();
    forward->add_option("--transition-width", fw_width, "Electrode edge width (default 4h)");
    forward->add_option("--noise", fw_noise, "Relative noise level")->capture_default_str();
    forward->add_option("--seed", fw_seed, "Noise seed")->capture_default_str();
    forward->add_option("--out-a", fw_out_a, "Interior data output")->required();
    forward->add_option("--out-u", fw_out_u, "Potential output");
    fw_e.add(forward);
    fw_s.add(forward);
    forward->callback([&] {
        action = [&] {
            const ScalarField sigma = read_field(fw_sigma);
            const Grid& g = sigma.grid();
            const SolveOptions opt = fw_s.options(g);
            const ForwardResult fr = [&] {
                if (fw_model == "cem") return solve_cem_forward(sigma, fw_e.e, g, opt);
                if (fw_model != "robin") throw Error(Error::Kind::invalid_argument, "unknown model " + fw_model + " (robin, cem)");
                const double w = fw_width.value_or(default_transition_width(g));
                const RobinCoefficients rc =
                    fw_eps == 0.0 ? base_coefficients(fw_e.e, g) : smoothed_coefficients(fw_e.e, g, fw_eps, w);
                return solve_forward(sigma, rc, g, opt);
            }();
            if (fr.v_cem) std::printf("electrode_voltage=%.17g\n", *fr.v_cem);
            write_field(add_noise(fr.a, fw_noise, fw_seed), fw_out_a);
            if (!fw_out_u.empty()) write_field(fr.u, fw_out_u);
        };
    });

    // reconstruct
    std::string rc_a, rc_truth, rc_out, rc_out_u, rc_report;
    ElectrodeFlags rc_e;
    ReconFlags rc_f;
    auto* recon = app.add_subcommand("reconstruct", "Recover sigma from interior data");
    recon->add_option("--a", rc_a, "Interior data")->required();
    recon->add_option("--truth", rc_truth, "Reference conductivity for the error column");
    recon->add_option("--out", rc_out, "Reconstructed conductivity")->required();
    recon->add_option("--out-u", rc_out_u, "Final potential");
    recon->add_option("--report", rc_report, "Per-iteration CSV");
    rc_e.add(recon);
    rc_f.add(recon);
    recon->callback([&] {
        action = [&] {
            const ReconConfig cfg = rc_f.resolve();
            const ScalarField a = read_field(rc_a);
            const ReconResult res = reconstruct(a, rc_e.e, cfg, a.grid(), optional_field(rc_truth));
            write_field(res.sigma, rc_out);
            if (!rc_out_u.empty()) write_field(res.u, rc_out_u);
            if (!rc_report.empty()) write_file_atomic(rc_report, csv(res.report));
            std::printf("iterations=%zu converged=%d\n", res.report.iterations(), res.report.converged ? 1 : 0);
        };
    });

    // bregman
    std::string br_a, br_u, br_truth, br_out, br_out_v, br_report, br_pre = "ic0";
    BregmanConfig bc;
    auto* bregman = app.add_subcommand("bregman", "Split Bregman comparator");
    bregman->add_option("--a", br_a, "Interior data")->required();
    bregman->add_option("--u", br_u, "Potential whose boundary trace is imposed")->required();
    bregman->add_option("--truth", br_truth, "Reference conductivity for the error column");
    bregman->add_option("--out", br_out, "Conductivity a / |grad v|")->required();
    bregman->add_option("--out-v", br_out_v, "Minimizer v");
    bregman->add_option("--report", br_report, "Per-iteration CSV");
    bregman->add_option("--rho", bc.rho, "Penalty weight")->capture_default_str();
    bregman->add_option("--max-iter", bc.max_iterations)->capture_default_str();
    bregman->add_option("--tol", bc.tol, "Relative change threshold")->capture_default_str();
    bregman->add_option("--grad-floor", bc.grad_floor)->capture_default_str();
    bregman->add_option("--inner-tol", bc.inner_tol)->capture_default_str();
    bregman->add_option("--preconditioner", br_pre, "jacobi or ic0")->capture_default_str();
    bregman->callback([&] {
        action = [&] {
            bc.preconditioner = parse_preconditioner(br_pre);
            bc.validate();
            const ScalarField a = read_field(br_a);
            const ScalarField u = read_field(br_u);
            const BregmanResult res =
                split_bregman_minimize(a, boundary_trace(u), bc, a.grid(), optional_field(br_truth));
            write_field(sigma_from_potential(a, res.v, bc.grad_floor), br_out);
            if (!br_out_v.empty()) write_field(res.v, br_out_v);
            if (!br_report.empty()) write_file_atomic(br_report, csv(res.report));
            std::printf("iterations=%zu converged=%d\n", res.report.iterations(), res.report.converged ? 1 : 0);
        };
    });

    // compare
    std::string cmp_rec, cmp_ref;
    auto* compare = app.add_subcommand("compare", "Relative l2 error of a reconstruction");
    compare->add_option("--rec", cmp_rec, "Reconstruction")->required();
    compare->add_option("--ref", cmp_ref, "Reference")->required();
    compare->callback([&] {
        action = [&] {
            std::printf("rel_l2_error=%.17g\n", rel_l2_error(read_field(cmp_rec), read_field(cmp_ref)));
        };
    });

    // study
    std::string st_a, st_truth, st_out;
    double st_delta0 = 3e-3;
    std::size_t st_steps = 6;
    std::uint64_t st_seed = 1;
    ElectrodeFlags st_e;
    ReconFlags st_f;
    auto* study = app.add_subcommand("study", "Reconstruct along delta_n = delta0 2^-n with eta_n = delta_n");
    study->add_option("--a", st_a, "Noise-free interior data")->required();
    study->add_option("--truth", st_truth, "Reference conductivity");
    study->add_option("--delta0", st_delta0)->capture_default_str();
    study->add_option("--steps", st_steps, "Last index n")->capture_default_str();
    study->add_option("--noise-seed", st_seed)->capture_default_str();
    study->add_option("--report", st_out, "Per-step CSV")->required();
    st_e.add(study);
    st_f.add(study);
    study->callback([&] {
        action = [&] {
            const ReconConfig cfg = st_f.resolve();
            const ScalarField a = read_field(st_a);
            const ScheduleStudy s = convergence_study(a, st_e.e, a.grid(), Schedule::geometric(st_delta0, st_steps, st_seed),
                                                      cfg, optional_field(st_truth));
            std::ostringstream os;
            os.precision(17);
            os << "n,delta,eta,G_delta_noisy,G_clean,rel_l2_error,outer_iterations\n";
            for (std::size_t k = 0; k < s.entries.size(); ++k) {
                const StudyEntry& e = s.entries[k];
                os << k << ',' << e.delta << ',' << e.eta << ',' << e.G_delta_noisy << ',' << e.G_clean << ','
                   << e.sigma_error << ',' << e.outer_iterations << '\n';
            }
            write_file_atomic(st_out, os.str());
            std::printf("head_spread=%.6g tail_spread=%.6g cauchy_tail=%d\n", s.head_spread, s.tail_spread,
                        s.cauchy_tail ? 1 : 0);
        };
    });

    // export-pgm
    std::string ex_in, ex_out;
    std::optional<double> ex_lo, ex_hi;
    auto* exporter = app.add_subcommand("export-pgm", "Render a field as a 16-bit P5 graymap");
    exporter->add_option("--in", ex_in, "Field")->required();
    exporter->add_option("--out", ex_out, "Graymap")->required();
    exporter->add_option("--lo", ex_lo, "Value mapped to black (default field min)");
    exporter->add_option("--hi", ex_hi, "Value mapped to white (default field max)");
    exporter->callback([&] {
        action = [&] {
            const ScalarField f = read_field(ex_in);
            write_file_atomic(ex_out, encode_pgm(field_to_image(f, ex_lo.value_or(f.min()), ex_hi.value_or(f.max()))));
        };
    });

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const Error& e) {
        std::fprintf(stderr, "lgr: %s\n", e.what());
        return exit_code(e.kind());
    }
    std::vector<const char*> cargs;
    for (const std::string& s : args) cargs.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        action();
    } catch (const Error& e) {
        std::fprintf(stderr, "lgr: %s\n", e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "lgr: %s\n", e.what());
        return numeric;
    }
    return ok;
}

} // namespace

int main(int argc, char** argv) { return run(argc, argv); }
