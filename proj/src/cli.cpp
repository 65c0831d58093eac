#include "couette/cli.hpp"

#include "couette/config.hpp"
#include "couette/diagnostics.hpp"
#include "couette/errors.hpp"
#include "couette/linear_lab.hpp"
#include "couette/multipliers.hpp"
#include "couette/simulation.hpp"
#include "couette/threshold.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#ifndef COUETTE_LAB_VERSION
#define COUETTE_LAB_VERSION "unknown"
#endif

namespace couette {

namespace {

namespace fs = std::filesystem;

struct KeyFlags {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void add(CLI::App* app, const std::set<std::string>& keys) {
        for (const auto& k : keys) options[k] = app->add_option("--" + k, values[k], "overrides config key " + k);
    }

    ConfigMap merged(const std::string& config_path) const {
        ConfigMap m = config_path.empty() ? ConfigMap{} : read_config_file(config_path);
        for (const auto& [k, opt] : options)
            if (opt->count() > 0) m[k] = values.at(k);
        return m;
    }
};

std::vector<double> parse_list(const std::string& s, const std::string& name) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (item.empty() || *end != '\0' || !std::isfinite(v))
            throw ValidationError(name + ": bad list entry '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::string join(const fs::path& dir, const std::string& file) { return (dir / file).string(); }

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_manifest(const fs::path& dir, RunManifest m) {
    m.code_version = COUETTE_LAB_VERSION;
    m.end_time = utc_timestamp();
    append_manifest(join(dir, "manifest.jsonl"), m);
}

int run_linear(const ConfigMap& cfg, const fs::path& dir, std::ostream& out, RunManifest& man) {
    const LinearRequest r = load_linear_config(cfg);
    man.config = cfg;
    ModeState s0{r.k, r.eta, cplx(r.f0, 0.0), cplx(0.0, r.k) * cplx(r.theta0, 0.0), 0.0};
    const auto traj = integrate_mode(s0, r.params, r.t_end, r.dt);
    ensure_dir(dir);
    const std::string path = join(dir, "linear_trajectory.csv");
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot write " + path);
    os << "t,f_re,f_im,Theta_re,Theta_im,abs_f,abs_theta,env_f,env_theta,growth_f,decay_theta\n";
    std::vector<double> ts, ef, et;
    const bool env = r.params.has_sigma();
    for (const auto& s : traj) {
        const Envelope e = env ? mode_amplitudes(s, r.params) : Envelope{NAN, NAN};
        const Envelope d = decay_envelope(r.k, r.eta, s.t, r.params.nu, r.c);
        const double v[] = {s.t, s.f_hat.real(), s.f_hat.imag(), s.Theta_hat.real(), s.Theta_hat.imag(),
                            std::abs(s.f_hat), std::abs(s.Theta_hat) / std::abs(r.k), e.growth_f, e.decay_theta,
                            d.growth_f, d.decay_theta};
        for (std::size_t i = 0; i < std::size(v); ++i) os << (i ? "," : "") << format_double(v[i]);
        os << '\n';
        ts.push_back(s.t);
        ef.push_back(e.growth_f);
        et.push_back(e.decay_theta);
    }
    man.outputs.push_back(path);
    const double t1 = std::min(20.0, 0.1 * r.t_end), t2 = r.t_end;
    if (env) {
        const std::string fpath = join(dir, "linear_fit.csv");
        std::ofstream fs_(fpath);
        fs_ << "quantity,t1,t2,power_exponent,exp_rate,residual\n";
        for (const auto& [name, series] : {std::pair{"f", &ef}, std::pair{"theta", &et}}) {
            const RateFit fit = fit_rates(ts, *series, t1, t2, r.params.nu);
            fs_ << name << ',' << format_double(t1) << ',' << format_double(t2) << ','
                << format_double(fit.power_exponent) << ',' << format_double(fit.exp_rate) << ','
                << format_double(fit.residual) << '\n';
            out << "fitted power of |" << name << "| envelope over [" << t1 << ", " << t2
                << "]: " << fit.power_exponent << '\n';
        }
        man.outputs.push_back(fpath);
    }
    return kExitOk;
}

int run_simulate(const ConfigMap& cfg, const fs::path& dir, bool require_stable, const std::string& resume,
                 const std::string& snapshot, std::ostream& out, std::ostream& err, RunManifest& man) {
    if (require_stable) {
        auto it = cfg.find("gamma2");
        if (it != cfg.end()) {
            const double g2 = std::strtod(it->second.c_str(), nullptr);
            if (!(g2 > 0.25)) throw ValidationError("gamma2: --require-stable needs γ² > 1/4, got " + it->second);
        }
    }
    const SimConfig c = load_sim_config(cfg);
    man.config = to_map(c);
    man.seed = c.seed;
    RunOptions opt;
    if (!resume.empty()) {
        auto [h, st] = read_snapshot(resume);
        if (h.n_z != c.grid.n_z() || h.n_y != c.grid.n_y() || h.L_y != c.grid.L_y())
            throw ValidationError("resume snapshot grid does not match config");
        opt.resume = st;
    }
    const RunResult r = run(c, opt);
    ensure_dir(dir);
    const std::string ts = join(dir, "timeseries.csv");
    write_timeseries(r.ledgers, ts);
    man.outputs.push_back(ts);
    const auto audit = theorem_audit(r.ledgers, {c.nu, c.epsilon, 1.0 / 12.0, 1e3});
    const std::string ap = join(dir, "audit.csv");
    {
        std::ofstream os(ap);
        os << "inequality,C,rate,t_worst,flagged\n";
        for (const auto& a : audit)
            os << a.name << ',' << format_double(a.C) << ',' << format_double(a.rate) << ','
               << format_double(a.t_worst) << ',' << (a.flagged ? "true" : "false") << '\n';
    }
    man.outputs.push_back(ap);
    if (!snapshot.empty() && r.final_state) {
        write_snapshot(snapshot, *r.final_state, c);
        man.outputs.push_back(snapshot);
    }
    out << "dt = " << r.dt << ", resolution time = " << r.t_res << ", t_end = " << r.t_end
        << (r.t_end_capped ? " (capped)" : "") << '\n';
    if (r.aborted) {
        err << "numerical abort at t = " << r.abort_t << " (k = " << r.abort_k << ", eta index = "
            << r.abort_eta_index << "): " << r.abort_reason << '\n';
        if (r.suggested_dt > 0.0) err << "suggested dt = " << r.suggested_dt << '\n';
        std::ostringstream note;
        note << "aborted at t=" << format_double(r.abort_t) << ": " << r.abort_reason;
        man.note = note.str();
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sheared-frame Couette-Boussinesq laboratory"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all");

    std::string config_path, out_dir = ".";
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key = value config file");
        sub->add_option("--out", out_dir, "output directory");
    };

    auto* lin = app.add_subcommand("linear", "integrate one linear (k, eta) mode");
    common(lin);
    KeyFlags lin_keys;
    lin_keys.add(lin, allowed_keys(ConfigTarget::linear));

    auto* sim = app.add_subcommand("simulate", "run the nonlinear solver");
    common(sim);
    KeyFlags sim_keys;
    sim_keys.add(sim, allowed_keys(ConfigTarget::simulation));
    bool require_stable = false;
    std::string resume, snapshot;
    sim->add_flag("--require-stable", require_stable, "reject gamma2 <= 1/4");
    sim->add_option("--resume", resume, "snapshot to continue from");
    sim->add_option("--snapshot", snapshot, "write the final state here");

    auto* sw = app.add_subcommand("sweep", "toy or full-solver parameter sweep");
    common(sw);
    std::string mode = "toy", alphas, betas = "0.75", epsilons = "1", nus = "1e-16";
    double sweep_t_end = 100.0;
    unsigned threads = 0;
    sw->add_option("--mode", mode, "toy or full")->check(CLI::IsMember({"toy", "full"}));
    sw->add_option("--alpha", alphas, "comma-separated alpha values (toy) or ignored (full)");
    sw->add_option("--beta", betas, "comma-separated beta values");
    sw->add_option("--epsilon", epsilons, "comma-separated epsilon values");
    sw->add_option("--nu", nus, "comma-separated nu values");
    sw->add_option("--t_end", sweep_t_end, "toy horizon");
    sw->add_option("--threads", threads, "worker cap (COUETTE_LAB_THREADS also applies)");

    auto* vm = app.add_subcommand("verify-multipliers", "randomized multiplier lemma checks");
    common(vm);
    std::string samples = "1e5";
    std::uint64_t vm_seed = 1;
    vm->add_option("--samples", samples, "sample count");
    vm->add_option("--seed", vm_seed, "random seed");

    auto* toy = app.add_subcommand("toy", "integrate the threshold toy model");
    common(toy);
    KeyFlags toy_keys;
    toy_keys.add(toy, allowed_keys(ConfigTarget::toy));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitValidation;
    }

    const fs::path dir(out_dir);
    RunManifest man;
    man.start_time = utc_timestamp();
    int status = kExitOk;
    try {
        if (*lin) {
            man.command = "linear";
            status = run_linear(lin_keys.merged(config_path), dir, out, man);
        } else if (*sim) {
            man.command = "simulate";
            status = run_simulate(sim_keys.merged(config_path), dir, require_stable, resume, snapshot, out, err, man);
        } else if (*sw) {
            man.command = "sweep";
            SweepOptions opt;
            opt.mode = mode == "full" ? SweepMode::full : SweepMode::toy;
            opt.toy_t_end = sweep_t_end;
            opt.threads = threads;
            std::vector<SweepCell> cells;
            const auto B = parse_list(betas, "beta"), E = parse_list(epsilons, "epsilon"), N = parse_list(nus, "nu");
            if (opt.mode == SweepMode::full) {
                ConfigMap base = config_path.empty() ? ConfigMap{} : read_config_file(config_path);
                base.emplace("nu", N.empty() ? "1e-3" : format_double(N.front()));
                base.emplace("gamma2", "1");
                opt.base = load_sim_config(base);
                man.config = to_map(opt.base);
                for (double nu : N)
                    for (double eps : E) cells.push_back({eps * std::sqrt(nu), 0.0, eps, nu});
            } else {
                const auto A = alphas.empty() ? std::vector<double>{} : parse_list(alphas, "alpha");
                for (double nu : N)
                    for (double eps : E)
                        for (double b : B)
                            for (double a : A) cells.push_back({a, b, eps, nu});
                man.config = {{"alpha", alphas}, {"beta", betas}, {"epsilon", epsilons}, {"nu", nus},
                              {"t_end", format_double(sweep_t_end)}};
            }
            const auto rows = sweep(cells, opt);
            ensure_dir(dir);
            const std::string path = join(dir, "sweep.csv");
            std::ofstream os(path);
            if (!os) throw ValidationError("cannot write " + path);
            os << "alpha/amplitude,beta,epsilon,nu,verdict,max_ratio,t_of_max\n";
            for (const auto& r : rows)
                os << format_double(r.cell.alpha_or_amplitude) << ',' << format_double(r.cell.beta) << ','
                   << format_double(r.cell.epsilon) << ',' << format_double(r.cell.nu) << ','
                   << to_string(r.verdict) << ',' << format_double(r.max_ratio) << ','
                   << format_double(r.t_of_max) << '\n';
            man.outputs.push_back(path);
        } else if (*vm) {
            man.command = "verify-multipliers";
            char* end = nullptr;
            const double n = std::strtod(samples.c_str(), &end);
            if (*end != '\0' || !(n >= 1.0) || n > 1e9) throw ValidationError("samples: expected a count >= 1");
            man.seed = vm_seed;
            man.config = {{"samples", samples}, {"seed", std::to_string(vm_seed)}};
            const auto report = verify_multipliers(static_cast<std::size_t>(n), vm_seed);
            ensure_dir(dir);
            const std::string path = join(dir, "multipliers_report.csv");
            std::ofstream os(path);
            if (!os) throw ValidationError("cannot write " + path);
            os << "lemma,samples,worst_margin,pass\n";
            bool all = true;
            for (const auto& r : report) {
                os << r.lemma << ',' << r.samples << ',' << format_double(r.worst) << ','
                   << (r.pass ? "pass" : "fail") << '\n';
                out << r.lemma << ": worst " << r.worst << (r.pass ? " pass" : " FAIL") << '\n';
                all = all && r.pass;
            }
            man.outputs.push_back(path);
            status = all ? kExitOk : kExitValidation;
        } else if (*toy) {
            man.command = "toy";
            const ConfigMap cfg = toy_keys.merged(config_path);
            const ToyConfig tc = load_toy_config(cfg);
            man.config = cfg;
            const ToyResult r = integrate_toy(tc);
            ensure_dir(dir);
            const std::string path = join(dir, "toy_series.csv");
            std::ofstream os(path);
            if (!os) throw ValidationError("cannot write " + path);
            os << "t,X2,theta02\n";
            for (std::size_t i = 0; i < r.t.size(); ++i)
                os << format_double(r.t[i]) << ',' << format_double(r.X2[i]) << ',' << format_double(r.theta02[i])
                   << '\n';
            man.outputs.push_back(path);
            out << "verdict: " << to_string(r.verdict) << ", max ratio " << r.max_ratio << " at t = " << r.t_of_max
                << '\n';
        }
    } catch (const NumericalAbort& e) {
        err << "numerical abort at t = " << e.time() << ": " << e.what() << '\n';
        status = kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    man.exit_status = status;
    try {
        ensure_dir(dir);
        write_manifest(dir, man);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return status;
}

}  // namespace couette
