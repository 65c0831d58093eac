#include "couette/simulation.hpp"

#include "couette/diagnostics.hpp"
#include "couette/errors.hpp"
#include "couette/linear_lab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace couette {

void SimConfig::validate() const {
    if (!(nu > 0.0 && nu < 1.0)) throw ValidationError("nu: must satisfy 0 < nu < 1");
    if (!(gamma2 > 0.0) || !std::isfinite(gamma2)) throw ValidationError("gamma2: must satisfy gamma2 > 0");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ValidationError("epsilon: must satisfy epsilon >= 0");
    if (!(s >= 6.0)) throw ValidationError("s: must satisfy s >= 6");
    if (!(c > 0.0 && c <= 0.125)) throw ValidationError("c: must satisfy 0 < c <= 1/8");
    if (K < 0.0) throw ValidationError("K: must be >= 0 (0 selects the default)");
    if (K > 0.0 && gamma2 > 0.25 && K < 3.0 / std::sqrt(4.0 * gamma2 - 1.0))
        throw ValidationError("K: must satisfy K >= 3/sigma");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end: must satisfy t_end > 0");
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw ValidationError("dt: must satisfy dt > 0 (or 0 for automatic)");
    if (!(dt_out > 0.0)) throw ValidationError("dt_out: must satisfy dt_out > 0");
    if (!(kappa > 0.0)) throw ValidationError("kappa: must satisfy kappa > 0");
    if (grid.n_z() / 6 < 1 || grid.n_y() / 6 < 1)
        throw ValidationError("grid too small to band-limit initial data (need n_z, n_y >= 6)");
    if (init == InitKind::wave && !(gamma2 > 0.25))
        throw ValidationError("init: wave initial data requires gamma2 > 1/4");
}

MultiplierParams SimConfig::multiplier_params() const {
    MultiplierParams p;
    p.nu = nu;
    p.s = s;
    p.c = c;
    p.gamma2 = gamma2;
    p.K = K > 0.0 ? K : MultiplierParams::default_K(gamma2);
    return p;
}

SimState::SimState(const Grid& g)
    : f_neq(g), theta_neq(g), f0(g), theta01(g), theta02(g), u0_1(g) {}

double resolution_time(const Grid& grid) { return grid.d_eta() * std::floor(grid.n_y() / 3.0); }

double initial_size(const SpectralField& omega, const SpectralField& theta, double s) {
    const Grid& g = omega.grid();
    double u2 = 0.0, t2 = 0.0;
    for (int j = 0; j < g.n_y(); ++j) {
        const double eta = g.eta(j);
        for (int k = 0; k < g.n_k(); ++k) {
            const double w = k == 0 ? 1.0 : 2.0;
            const double jp2 = 1.0 + static_cast<double>(k) * k + eta * eta;
            const double p = jp2 - 1.0;
            if (p > 0.0) u2 += w * std::pow(jp2, s + 1.0) * std::norm(omega.at(j, k)) / p;
            t2 += w * std::pow(jp2, s + 2.0) * std::norm(theta.at(j, k));
        }
    }
    return std::sqrt(u2) + std::sqrt(t2);
}

namespace {

// Wrapped physical y coordinate of row j.
double y_of(const Grid& g, int j) {
    const double y = j * g.dy();
    return y >= g.L_y() ? y - 2.0 * g.L_y() : y;
}

}  // namespace

struct Simulator::Impl {
    SimConfig cfg;
    FourierTransform ft;
    double dt = 0.0;
    std::size_t n2d = 0;   // entries per 2-D field
    std::size_t n1d = 0;   // entries per profile
    std::vector<int> kk;   // per packed entry
    std::vector<double> ee;

    explicit Impl(const SimConfig& c) : cfg(c), ft(c.grid) {
        const Grid& g = cfg.grid;
        n2d = g.spectral_size();
        n1d = static_cast<std::size_t>(g.n_y());
        const std::size_t total = 2 * n2d + 4 * n1d;
        kk.resize(total);
        ee.resize(total);
        for (std::size_t f = 0; f < 2; ++f)
            for (int j = 0; j < g.n_y(); ++j)
                for (int k = 0; k < g.n_k(); ++k) {
                    const std::size_t i = f * n2d + static_cast<std::size_t>(j) * g.n_k() + k;
                    kk[i] = k;
                    ee[i] = g.eta(j);
                }
        for (std::size_t f = 0; f < 4; ++f)
            for (int j = 0; j < g.n_y(); ++j) {
                const std::size_t i = 2 * n2d + f * n1d + static_cast<std::size_t>(j);
                kk[i] = 0;
                ee[i] = g.eta(j);
            }
    }

    std::vector<cplx> pack(const SimState& s) const {
        std::vector<cplx> v;
        v.reserve(kk.size());
        for (const SpectralField* f : {&s.f_neq, &s.theta_neq}) v.insert(v.end(), f->data().begin(), f->data().end());
        for (const ZeroModeField* z : {&s.f0, &s.theta01, &s.theta02, &s.u0_1})
            v.insert(v.end(), z->data().begin(), z->data().end());
        return v;
    }

    void unpack(const std::vector<cplx>& v, SimState& s) const {
        auto it = v.begin();
        for (SpectralField* f : {&s.f_neq, &s.theta_neq}) {
            std::copy(it, it + static_cast<std::ptrdiff_t>(n2d), f->data().begin());
            it += static_cast<std::ptrdiff_t>(n2d);
        }
        for (ZeroModeField* z : {&s.f0, &s.theta01, &s.theta02, &s.u0_1}) {
            std::copy(it, it + static_cast<std::ptrdiff_t>(n1d), z->data().begin());
            it += static_cast<std::ptrdiff_t>(n1d);
        }
    }

    NonlinearTerms nonlinear(const SimState& s) const {
        const Grid& g = cfg.grid;
        const double t = s.t;
        SpectralField f = s.f_neq, th = s.theta_neq;
        for (int j = 0; j < g.n_y(); ++j) {
            f.at(j, 0) = s.f0.at(j);
            th.at(j, 0) = s.theta01.at(j) + s.theta02.at(j);
        }
        Velocity u = biot_savart(s.f_neq, ShearFrame(t));
        for (int j = 0; j < g.n_y(); ++j) u.u1.at(j, 0) = s.u0_1.at(j);

        SpectralField fz(g), fy(g), tz(g), ty(g);
        for (int j = 0; j < g.n_y(); ++j) {
            const double eta = g.eta(j);
            for (int k = 0; k < g.n_k(); ++k) {
                const cplx dz(0.0, k), dy(0.0, eta - k * t);
                fz.at(j, k) = dz * f.at(j, k);
                fy.at(j, k) = dy * f.at(j, k);
                tz.at(j, k) = dz * th.at(j, k);
                ty.at(j, k) = dy * th.at(j, k);
            }
        }
        const std::size_t np = g.physical_size();
        std::vector<double> U1(np), U2(np), Fz(np), Fy(np), Tz(np), Ty(np);
        ft.inverse(u.u1, U1);
        ft.inverse(u.u2, U2);
        ft.inverse(fz, Fz);
        ft.inverse(fy, Fy);
        ft.inverse(tz, Tz);
        ft.inverse(ty, Ty);

        std::vector<double> Af(np), At(np), q(static_cast<std::size_t>(g.n_y()), 0.0);
        double vmax = 0.0;
        const int nz = g.n_z();
        for (int j = 0; j < g.n_y(); ++j) {
            double row = 0.0;
            for (int i = 0; i < nz; ++i) {
                const std::size_t n = static_cast<std::size_t>(j) * nz + i;
                Af[n] = U1[n] * Fz[n] + U2[n] * Fy[n];
                At[n] = U1[n] * Tz[n] + U2[n] * Ty[n];
                row += U1[n] * U2[n];
                vmax = std::max(vmax, std::max(std::abs(U1[n]), std::abs(U2[n])));
            }
            q[static_cast<std::size_t>(j)] = row / nz;
        }
        NonlinearTerms out{ft.forward(Af), ft.forward(At), ft.forward_1d(q), vmax};
        for (int j = 0; j < g.n_y(); ++j) out.N_u0.at(j) *= cplx(0.0, g.eta(j));
        out.N_u0.zero_nyquist();
        if (cfg.dealias) {
            dealias_in_place(out.N_f);
            dealias_in_place(out.N_theta);
            dealias_in_place(out.N_u0);
        }
        return out;
    }

    // Non-viscous right-hand side. Returns the max speed when nonlinear.
    double rhs(const SimState& s, std::vector<cplx>& out) const {
        const Grid& g = cfg.grid;
        out.assign(kk.size(), cplx{});
        const double t = s.t, g2 = cfg.gamma2;
        const int nk = g.n_k();
        for (int j = 0; j < g.n_y(); ++j) {
            const double eta = g.eta(j);
            for (int k = 1; k < nk; ++k) {
                const std::size_t i = static_cast<std::size_t>(j) * nk + k;
                const double xi = eta - k * t;
                const double p = static_cast<double>(k) * k + xi * xi;
                out[i] = -g2 * (cplx(0.0, k) * s.theta_neq.at(j, k));
                out[n2d + i] = cplx(0.0, -static_cast<double>(k)) * s.f_neq.at(j, k) / p;
            }
        }
        if (!cfg.nonlinear) return 0.0;
        const NonlinearTerms N = nonlinear(s);
        for (int j = 0; j < g.n_y(); ++j) {
            for (int k = 1; k < nk; ++k) {
                const std::size_t i = static_cast<std::size_t>(j) * nk + k;
                out[i] -= N.N_f.at(j, k);
                out[n2d + i] -= N.N_theta.at(j, k);
            }
            const std::size_t z = 2 * n2d + static_cast<std::size_t>(j);
            out[z] = -N.N_f.at(j, 0);
            out[z + 2 * n1d] = -N.N_theta.at(j, 0);
            out[z + 3 * n1d] = -N.N_u0.at(j);
        }
        return N.max_speed;
    }

    void locate(std::size_t i, int& k, int& m) const {
        const Grid& g = cfg.grid;
        k = kk[i];
        std::size_t r = i < 2 * n2d ? (i % n2d) / static_cast<std::size_t>(g.n_k()) : (i - 2 * n2d) % n1d;
        m = g.eta_index(static_cast<int>(r));
    }

    void step(SimState& s, double t_stop) const {
        double h = dt;
        if (t_stop > s.t && s.t + h > t_stop) h = t_stop - s.t;
        const double t0 = s.t, tm = t0 + 0.5 * h, t1 = t0 + h;
        const double nu = cfg.nu;
        const std::size_t n = kk.size();
        std::vector<double> Ea(n), Eb(n);
        for (std::size_t i = 0; i < n; ++i) {
            Ea[i] = std::exp(-nu * lap_integral(kk[i], ee[i], t0, tm));
            Eb[i] = std::exp(-nu * lap_integral(kk[i], ee[i], tm, t1));
        }
        const std::vector<cplx> u = pack(s);
        std::vector<cplx> k1, k2, k3, k4, w(n);
        SimState stage = s;

        const double speed = rhs(s, k1);
        if (cfg.nonlinear && speed > 0.0) {
            const double spacing = std::min(cfg.grid.dz(), cfg.grid.dy());
            if (speed * h > spacing)
                throw NumericalAbort("CFL violation: max|u| dt = " + std::to_string(speed * h) +
                                         " exceeds grid spacing " + std::to_string(spacing),
                                     t0, 0, 0, 0.9 * spacing / speed);
        }
        for (std::size_t i = 0; i < n; ++i) w[i] = Ea[i] * (u[i] + 0.5 * h * k1[i]);
        unpack(w, stage);
        stage.t = tm;
        rhs(stage, k2);
        for (std::size_t i = 0; i < n; ++i) w[i] = Ea[i] * u[i] + 0.5 * h * k2[i];
        unpack(w, stage);
        rhs(stage, k3);
        for (std::size_t i = 0; i < n; ++i) w[i] = Ea[i] * Eb[i] * u[i] + h * Eb[i] * k3[i];
        unpack(w, stage);
        stage.t = t1;
        rhs(stage, k4);
        for (std::size_t i = 0; i < n; ++i) {
            const double Eab = Ea[i] * Eb[i];
            w[i] = Eab * u[i] + (h / 6.0) * (Eab * k1[i] + 2.0 * Eb[i] * (k2[i] + k3[i]) + k4[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(w[i].real()) || !std::isfinite(w[i].imag())) {
                int k = 0, m = 0;
                locate(i, k, m);
                throw NumericalAbort("non-finite value at t = " + std::to_string(t1), t1, k, m);
            }
        }
        unpack(w, s);
        s.t = (t_stop > t0 && h == t_stop - t0) ? t_stop : t1;
    }
};

Simulator::Simulator(const SimConfig& config) : impl_(std::make_unique<Impl>(config)) {
    config.validate();
    if (config.dt > 0.0) {
        impl_->dt = config.dt;
    } else {
        // Automatic: resolve nu^{-1/3}, stay on the critical-layer step, respect CFL.
        double dt = std::min(0.1, 0.005 / std::cbrt(config.nu));
        if (config.nonlinear) {
            const double v = max_speed(initialize());
            if (v > 0.0) dt = std::min(dt, 0.5 * std::min(config.grid.dz(), config.grid.dy()) / v);
        }
        impl_->dt = dt;
    }
}

Simulator::~Simulator() = default;

const SimConfig& Simulator::config() const { return impl_->cfg; }
double Simulator::dt() const { return impl_->dt; }
void Simulator::set_dt(double dt) {
    if (!(dt > 0.0)) throw ValidationError("dt: must satisfy dt > 0");
    impl_->dt = dt;
}

SimState Simulator::initialize() const {
    const SimConfig& cfg = impl_->cfg;
    const Grid& g = cfg.grid;
    SimState st(g);
    if (cfg.epsilon == 0.0) return st;

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int kmax = g.n_z() / 6, mmax = g.n_y() / 6;
    const double w = g.L_y() / 8.0;

    auto draw = [&]() {
        SpectralField c(g);
        for (int j = 0; j < g.n_y(); ++j) {
            const int m = g.eta_index(j);
            if (std::abs(m) > mmax) continue;
            const double eta = g.eta(j);
            for (int k = 0; k <= kmax; ++k) {
                const double re = normal(rng), im = normal(rng);
                const double roll = std::exp(-(k * k + eta * eta) / (2.0 * cfg.kappa * cfg.kappa));
                c.at(j, k) = cplx(re, im) * roll;
            }
        }
        c.symmetrize();
        std::vector<double> phys = impl_->ft.inverse(c);
        for (int j = 0; j < g.n_y(); ++j) {
            const double y = y_of(g, j);
            const double env = std::exp(-y * y / (2.0 * w * w));
            for (int i = 0; i < g.n_z(); ++i) phys[static_cast<std::size_t>(j) * g.n_z() + i] *= env;
        }
        SpectralField out = impl_->ft.forward(phys);
        dealias_in_place(out);
        out.at(0, 0) = 0.0;
        return out;
    };

    SpectralField omega = draw();
    SpectralField theta = draw();
    if (cfg.init == InitKind::wave) {
        // Single-branch wave: X2 = -i X1 for every k > 0 mode, no zero-mode theta.
        theta.fill_zero();
        for (int j = 0; j < g.n_y(); ++j)
            for (int k = 1; k < g.n_k(); ++k) {
                const cplx X1 = omega.at(j, k) / symbol_N(0.0, k, g.eta(j));
                const auto [f, Theta] = from_good_unknowns_mode(k, g.eta(j), 0.0, X1, cplx(0.0, -1.0) * X1, cfg.gamma2);
                theta.at(j, k) = Theta / cplx(0.0, k);
            }
    }
    const double size = initial_size(omega, theta, cfg.s);
    if (size > 0.0) {
        const double scale = cfg.epsilon * std::sqrt(cfg.nu) / size;
        omega *= scale;
        theta *= scale;
    }
    for (int j = 0; j < g.n_y(); ++j) {
        st.f0.at(j) = omega.at(j, 0);
        st.theta01.at(j) = theta.at(j, 0);
        omega.at(j, 0) = 0.0;
        theta.at(j, 0) = 0.0;
    }
    st.f_neq = omega;
    st.theta_neq = theta;
    st.u0_1 = biot_savart_zero(st.f0);
    return st;
}

NonlinearTerms Simulator::nonlinear_term(const SimState& state) const { return impl_->nonlinear(state); }

void Simulator::step(SimState& state, double t_stop) const { impl_->step(state, t_stop); }

double Simulator::max_speed(const SimState& state) const {
    const Grid& g = impl_->cfg.grid;
    Velocity u = biot_savart(state.f_neq, ShearFrame(state.t));
    for (int j = 0; j < g.n_y(); ++j) u.u1.at(j, 0) = state.u0_1.at(j);
    double v = 0.0;
    for (const auto& x : impl_->ft.inverse(u.u1)) v = std::max(v, std::abs(x));
    for (const auto& x : impl_->ft.inverse(u.u2)) v = std::max(v, std::abs(x));
    return v;
}

SimState initialize(const SimConfig& config) { return Simulator(config).initialize(); }

NonlinearTerms nonlinear_term(const SimState& state, const SimConfig& config) {
    SimConfig c = config;
    c.dt = c.dt > 0.0 ? c.dt : 0.1;
    return Simulator(c).nonlinear_term(state);
}

SimState imex_step(const SimState& state, const SimConfig& config) {
    Simulator sim(config);
    SimState out = state;
    sim.step(out);
    return out;
}

RunResult run(const SimConfig& config, const RunOptions& options) {
    Simulator sim(config);
    RunResult res;
    res.dt = sim.dt();
    res.t_res = resolution_time(config.grid);
    res.t_end = config.t_end;
    if (config.nonlinear && config.t_end > res.t_res) {
        res.t_end = res.t_res;
        res.t_end_capped = true;
    }
    SimState st = options.resume ? *options.resume : sim.initialize();
    if (!(st.grid() == config.grid)) throw ValidationError("resume state grid does not match config");
    const LedgerComputer ledger(config.grid, config.multiplier_params());
    const double dt = sim.dt();
    const long every = std::max(1L, std::lround(config.dt_out / dt));

    auto record = [&](const SimState& s) {
        res.ledgers.push_back(ledger(s));
        if (options.on_output) options.on_output(s);
    };
    record(st);
    long n = 0;
    const double t0 = st.t;
    try {
        while (st.t < res.t_end - 1e-12 * dt) {
            sim.step(st, res.t_end);
            ++n;
            // keep output times on the n*dt lattice
            const double lattice = t0 + static_cast<double>(n) * dt;
            if (std::abs(st.t - lattice) <= 1e-9 * dt) st.t = std::min(lattice, res.t_end);
            if (n % every == 0 || st.t >= res.t_end) record(st);
        }
    } catch (const NumericalAbort& e) {
        res.aborted = true;
        res.abort_reason = e.what();
        res.abort_t = e.time();
        res.abort_k = e.k();
        res.abort_eta_index = e.eta_index();
        res.suggested_dt = e.suggested_dt();
    }
    res.final_state = st;
    return res;
}

namespace {

constexpr char kMagic[8] = {'C', 'L', 'A', 'B', 'S', 'N', 'P', '1'};

template <class T>
void put_le(std::ostream& os, T v) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U bits = std::bit_cast<U>(v);
    char b[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    os.write(b, sizeof(U));
}

template <class T>
T get_le(std::istream& is) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    unsigned char b[sizeof(U)];
    is.read(reinterpret_cast<char*>(b), sizeof(U));
    if (!is) throw ValidationError("snapshot truncated");
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(b[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

void put_complex(std::ostream& os, std::span<const cplx> data) {
    for (const auto& c : data) {
        put_le(os, static_cast<float>(c.real()));
        put_le(os, static_cast<float>(c.imag()));
    }
}

void get_complex(std::istream& is, std::span<cplx> data) {
    for (auto& c : data) {
        const float re = get_le<float>(is);
        const float im = get_le<float>(is);
        c = cplx(re, im);
    }
}

}  // namespace

void write_snapshot(const std::string& path, const SimState& state, const SimConfig& config) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ValidationError("cannot open snapshot for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    put_le(os, static_cast<std::int32_t>(config.grid.n_z()));
    put_le(os, static_cast<std::int32_t>(config.grid.n_y()));
    put_le(os, config.grid.L_y());
    put_le(os, state.t);
    put_le(os, config.nu);
    put_le(os, config.gamma2);
    put_le(os, config.epsilon);
    put_le(os, config.seed);
    put_complex(os, state.f_neq.data());
    put_complex(os, state.theta_neq.data());
    for (const ZeroModeField* z : {&state.f0, &state.theta01, &state.theta02, &state.u0_1}) put_complex(os, z->data());
    if (!os) throw ValidationError("failed writing snapshot: " + path);
}

std::pair<SnapshotHeader, SimState> read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open snapshot: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw ValidationError("not a snapshot file: " + path);
    SnapshotHeader h;
    h.n_z = get_le<std::int32_t>(is);
    h.n_y = get_le<std::int32_t>(is);
    h.L_y = get_le<double>(is);
    h.t = get_le<double>(is);
    h.nu = get_le<double>(is);
    h.gamma2 = get_le<double>(is);
    h.epsilon = get_le<double>(is);
    h.seed = get_le<std::uint64_t>(is);
    const Grid g(h.n_z, h.n_y, h.L_y);
    SimState st(g);
    st.t = h.t;
    get_complex(is, st.f_neq.data());
    get_complex(is, st.theta_neq.data());
    for (ZeroModeField* z : {&st.f0, &st.theta01, &st.theta02, &st.u0_1}) get_complex(is, z->data());
    return {h, st};
}

}  // namespace couette
