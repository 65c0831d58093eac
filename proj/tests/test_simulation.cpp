#include "doctest.h"
#include "support.hpp"

#include "couette/diagnostics.hpp"
#include "couette/errors.hpp"
#include "couette/linear_lab.hpp"
#include "couette/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace couette;
using namespace testing_support;

namespace {

SimConfig small_config(int nz = 32, int ny = 64) {
    SimConfig c;
    c.grid = Grid(nz, ny, 4.0 * kPi);
    c.nu = 1e-3;
    c.gamma2 = 1.0;
    c.epsilon = 0.01;
    c.t_end = 2.0;
    c.dt = 0.05;
    return c;
}

bool zero_k0(const SpectralField& f) {
    for (int j = 0; j < f.grid().n_y(); ++j)
        if (f.at(j, 0) != cplx(0.0)) return false;
    return true;
}

double max_abs(const ZeroModeField& z) {
    double m = 0.0;
    for (const auto& c : z.data()) m = std::max(m, std::abs(c));
    return m;
}

double hs2(const ZeroModeField& z, double weight_power, bool dy) {
    const Grid& g = z.grid();
    double s = 0.0;
    for (int j = 0; j < g.n_y(); ++j) {
        const double eta = g.eta(j);
        s += std::pow(1.0 + eta * eta, weight_power) * (dy ? eta * eta : 1.0) * std::norm(z.at(j));
    }
    return s;
}

SimState random_state(const Grid& g, std::mt19937_64& rng, int kmax, int mmax, double scale, double t = 0.0) {
    SimState s(g);
    s.t = t;
    s.f_neq = random_field(g, rng, kmax, mmax, false);
    s.theta_neq = random_field(g, rng, kmax, mmax, false);
    s.f0 = random_profile(g, rng, mmax);
    s.theta01 = random_profile(g, rng, mmax);
    s.f_neq *= scale;
    s.theta_neq *= scale;
    s.f0 *= scale;
    s.theta01 *= scale;
    s.u0_1 = biot_savart_zero(s.f0);
    return s;
}

}  // namespace

TEST_CASE("initialize: epsilon = 0 gives the zero state, which stays zero") {
    SimConfig c = small_config();
    c.epsilon = 0.0;
    Simulator sim(c);
    SimState s = sim.initialize();
    CHECK(s.f_neq.max_abs() == 0.0);
    CHECK(s.theta_neq.max_abs() == 0.0);
    CHECK(max_abs(s.f0) == 0.0);
    CHECK(max_abs(s.theta01) == 0.0);
    for (int n = 0; n < 5; ++n) sim.step(s);
    CHECK(s.f_neq.max_abs() == 0.0);
    CHECK(s.theta_neq.max_abs() == 0.0);
    CHECK(max_abs(s.theta02) == 0.0);
    CHECK(max_abs(s.u0_1) == 0.0);
}

TEST_CASE("initialize: scaled size, invariants and determinism") {
    for (InitKind kind : {InitKind::random, InitKind::wave}) {
        SimConfig c = small_config();
        c.init = kind;
        c.seed = 77;
        const SimState s = initialize(c);
        const Grid& g = c.grid;
        SpectralField omega = s.f_neq, theta = s.theta_neq;
        for (int j = 0; j < g.n_y(); ++j) {
            omega.at(j, 0) = s.f0.at(j);
            theta.at(j, 0) = s.theta01.at(j);
        }
        CHECK(rel_diff(initial_size(omega, theta, c.s), c.epsilon * std::sqrt(c.nu)) < 1e-12);
        CHECK(zero_k0(s.f_neq));
        CHECK(zero_k0(s.theta_neq));
        CHECK(max_abs(s.theta02) == 0.0);
        CHECK(s.f0.hermitian_defect() == 0.0);
        CHECK(s.theta01.hermitian_defect() == 0.0);
        const auto u = biot_savart_zero(s.f0);
        for (int j = 0; j < g.n_y(); ++j) CHECK(u.at(j) == s.u0_1.at(j));
        // band limit
        for (int j = 0; j < g.n_y(); ++j)
            for (int k = 0; k < g.n_k(); ++k)
                if (6 * k > g.n_z() || 6 * std::abs(g.eta_index(j)) > g.n_y()) {
                    // the y-Gaussian spreads eta; only the dealiased band may be populated
                    if (!retained(g, k, g.eta_index(j))) CHECK(s.f_neq.at(j, k) == cplx(0.0));
                }
        const SimState again = initialize(c);
        for (std::size_t i = 0; i < s.f_neq.data().size(); ++i) {
            CHECK(std::bit_cast<std::uint64_t>(s.f_neq.data()[i].real()) == std::bit_cast<std::uint64_t>(again.f_neq.data()[i].real()));
            CHECK(s.theta_neq.data()[i] == again.theta_neq.data()[i]);
        }
        c.seed = 78;
        CHECK(initialize(c).f_neq.data()[g.n_k() + 1] != s.f_neq.data()[g.n_k() + 1]);
    }
}

TEST_CASE("initialize rejects grids too small to band-limit") {
    SimConfig c = small_config();
    c.grid = Grid(4, 64, 1.0);
    CHECK_THROWS_AS(initialize(c), ValidationError);
}

TEST_CASE("nonlinear term vanishes without nonzero modes") {
    const SimConfig c = small_config(16, 16);
    std::mt19937_64 rng(1);
    SimState s = random_state(c.grid, rng, 5, 5, 1.0, 0.3);
    s.f_neq.fill_zero();
    s.theta_neq.fill_zero();
    const auto N = nonlinear_term(s, c);
    CHECK(N.N_f.max_abs() < 1e-15);
    CHECK(N.N_theta.max_abs() < 1e-15);
    CHECK(max_abs(N.N_u0) < 1e-15);
}

TEST_CASE("nonlinear term matches a brute-force convolution on 16x16") {
    const SimConfig c = small_config(16, 16);
    const Grid& g = c.grid;
    std::mt19937_64 rng(2);
    for (double t : {0.0, 0.7, 3.1}) {
        const SimState s = random_state(g, rng, 5, 5, 1.0, t);
        const auto N = nonlinear_term(s, c);
        const auto u = biot_savart(s.f_neq, ShearFrame(t));
        SpectralField u1 = u.u1, f = s.f_neq, th = s.theta_neq;
        for (int j = 0; j < g.n_y(); ++j) {
            u1.at(j, 0) = s.u0_1.at(j);
            f.at(j, 0) = s.f0.at(j);
            th.at(j, 0) = s.theta01.at(j) + s.theta02.at(j);
        }
        auto grad = [&](const SpectralField& a, bool z) {
            SpectralField out(g);
            for (int j = 0; j < g.n_y(); ++j)
                for (int k = 0; k < g.n_k(); ++k)
                    out.at(j, k) = (z ? cplx(0.0, k) : cplx(0.0, g.eta(j) - k * t)) * a.at(j, k);
            return out;
        };
        const Plane P1 = full_plane(u1), P2 = full_plane(u.u2);
        const Plane Nf = [&] {
            Plane a = convolve(P1, full_plane(grad(f, true))), b = convolve(P2, full_plane(grad(f, false)));
            for (auto& [key, v] : b) a[key] += v;
            return a;
        }();
        const Plane Nt = [&] {
            Plane a = convolve(P1, full_plane(grad(th, true))), b = convolve(P2, full_plane(grad(th, false)));
            for (auto& [key, v] : b) a[key] += v;
            return a;
        }();
        const Plane Q = convolve(P1, P2);
        double worst = 0.0, scale = 0.0;
        for (int j = 0; j < g.n_y(); ++j) {
            const int m = g.eta_index(j);
            for (int k = 0; k < g.n_k(); ++k) {
                const bool keep = retained(g, k, m);
                worst = std::max(worst, std::abs(N.N_f.at(j, k) - (keep ? plane_at(Nf, k, m) : cplx(0.0))));
                worst = std::max(worst, std::abs(N.N_theta.at(j, k) - (keep ? plane_at(Nt, k, m) : cplx(0.0))));
                scale = std::max(scale, std::abs(plane_at(Nf, k, m)));
            }
            const cplx q0 = retained(g, 0, m) ? cplx(0.0, g.eta(j)) * plane_at(Q, 0, m) : cplx(0.0);
            worst = std::max(worst, std::abs(N.N_u0.at(j) - q0));
        }
        CHECK(worst <= 1e-13 * scale);
        CHECK(N.N_f.hermitian_defect() == 0.0);
        CHECK(N.N_theta.hermitian_defect() == 0.0);
    }
}

TEST_CASE("single-mode self-interaction lands at k = 2") {
    const SimConfig c = small_config(16, 16);
    const Grid& g = c.grid;
    SimState s(g);
    s.t = 0.4;
    s.f_neq.at(g.row_of(1), 1) = cplx(0.6, -0.2);
    s.f_neq.at(g.row_of(-2), 1) = cplx(0.1, 0.3);
    const auto N = nonlinear_term(s, c);
    const auto u = biot_savart(s.f_neq, ShearFrame(s.t));
    // hand convolution for the (2, -1) output: pairs (1, 1) x (1, -2) and (1, -2) x (1, 1)
    auto grad_f = [&](int m) {
        const double xi = g.eta(g.row_of(m)) - 1.0 * s.t;
        return std::pair{cplx(0.0, 1.0) * s.f_neq.at(g.row_of(m), 1), cplx(0.0, xi) * s.f_neq.at(g.row_of(m), 1)};
    };
    auto term = [&](int ma, int mb) {
        const auto [fz, fy] = grad_f(mb);
        return u.u1.at(g.row_of(ma), 1) * fz + u.u2.at(g.row_of(ma), 1) * fy;
    };
    const cplx want = term(1, -2) + term(-2, 1);
    CHECK(std::abs(N.N_f.at(g.row_of(-1), 2) - want) < 1e-15);
}

TEST_CASE("nonlinear term is equivariant under z translation") {
    const SimConfig c = small_config(16, 32);
    const Grid& g = c.grid;
    std::mt19937_64 rng(3);
    const SimState s = random_state(g, rng, 5, 10, 1.0, 1.3);
    SimState shifted = s;
    const double a = 0.37;
    for (int j = 0; j < g.n_y(); ++j)
        for (int k = 0; k < g.n_k(); ++k) {
            shifted.f_neq.at(j, k) *= std::polar(1.0, k * a);
            shifted.theta_neq.at(j, k) *= std::polar(1.0, k * a);
        }
    const auto N = nonlinear_term(s, c), Ns = nonlinear_term(shifted, c);
    double worst = 0.0;
    for (int j = 0; j < g.n_y(); ++j)
        for (int k = 0; k < g.n_k(); ++k) {
            worst = std::max(worst, std::abs(Ns.N_f.at(j, k) - std::polar(1.0, k * a) * N.N_f.at(j, k)));
            worst = std::max(worst, std::abs(Ns.N_theta.at(j, k) - std::polar(1.0, k * a) * N.N_theta.at(j, k)));
        }
    CHECK(worst <= 1e-13 * N.N_f.max_abs());
}

TEST_CASE("linear limit reproduces the per-mode integrator") {
    SimConfig c = small_config(16, 32);
    c.nonlinear = false;
    c.dt = 0.05;
    const Grid& g = c.grid;
    std::mt19937_64 rng(4);
    SimState s = random_state(g, rng, 5, 10, 1.0);
    const SimState s0 = s;
    Simulator sim(c);
    while (s.t < 50.0 - 1e-9) sim.step(s, 50.0);
    const LinearParams lp(c.nu, c.gamma2);
    double worst = 0.0;
    for (int j = 0; j < g.n_y(); ++j)
        for (int k = 1; k < g.n_k(); ++k) {
            if (s0.f_neq.at(j, k) == cplx(0.0) && s0.theta_neq.at(j, k) == cplx(0.0)) continue;
            const ModeState m0{k, g.eta(j), s0.f_neq.at(j, k), cplx(0.0, k) * s0.theta_neq.at(j, k), 0.0};
            const auto end = integrate_mode(m0, lp, 50.0, c.dt).back();
            const double scale = std::abs(end.f_hat) + std::abs(end.Theta_hat);
            const double err = std::abs(s.f_neq.at(j, k) - end.f_hat) + std::abs(cplx(0.0, k) * s.theta_neq.at(j, k) - end.Theta_hat);
            worst = std::max(worst, err / scale);
        }
    MESSAGE("worst relative mismatch " << worst);
    CHECK(worst < 1e-8);
}

TEST_CASE("theta01 heat-energy identity holds per step") {
    SimConfig c = small_config(32, 64);
    c.epsilon = 0.05;
    Simulator sim(c);
    SimState s = sim.initialize();
    const double w = c.s + 2.0;
    for (int n = 0; n < 20; ++n) {
        const ZeroModeField before = s.theta01;
        const double h = c.dt;
        sim.step(s);
        const double dE = hs2(s.theta01, w, false) - hs2(before, w, false);
        // exact time integral of 2 nu ||d_y theta01||^2 over the step
        double diss = 0.0;
        for (int j = 0; j < c.grid.n_y(); ++j) {
            const double eta = c.grid.eta(j);
            diss += std::pow(1.0 + eta * eta, w) * std::norm(before.at(j)) * -std::expm1(-2.0 * c.nu * eta * eta * h);
        }
        CHECK(std::abs(dE + diss) <= 1e-10 * hs2(before, w, false));
    }
}

TEST_CASE("zero state stays zero; theta02 needs nonzero modes") {
    SimConfig c = small_config(16, 32);
    Simulator sim(c);
    SimState z(c.grid);
    sim.step(z);
    CHECK(z.f_neq.max_abs() == 0.0);
    CHECK(max_abs(z.theta02) == 0.0);
    std::mt19937_64 rng(5);
    SimState s = random_state(c.grid, rng, 5, 10, 1e-3);
    s.f_neq.fill_zero();
    s.theta_neq.fill_zero();
    for (int n = 0; n < 40; ++n) sim.step(s);
    CHECK(max_abs(s.theta02) == 0.0);
    CHECK(s.f_neq.max_abs() == 0.0);
    CHECK(s.theta_neq.max_abs() == 0.0);
}

TEST_CASE("reality, zero rows and incompressibility along a nonlinear run") {
    SimConfig c = small_config(32, 64);
    c.epsilon = 1.0;
    Simulator sim(c);
    SimState s = sim.initialize();
    const double u0 = [&] {
        ZeroModeField b = biot_savart_zero(s.f0);
        double m = 0.0;
        for (int j = 0; j < c.grid.n_y(); ++j) m = std::max(m, std::abs(b.at(j)));
        return m;
    }();
    for (int n = 0; n < 40; ++n) {
        sim.step(s);
        CHECK(zero_k0(s.f_neq));
        CHECK(zero_k0(s.theta_neq));
        CHECK(s.f_neq.hermitian_defect() == 0.0);
        CHECK(s.f0.hermitian_defect() == 0.0);
        CHECK(s.theta01.hermitian_defect() == 0.0);
        CHECK(s.theta02.hermitian_defect() == 0.0);
        CHECK(s.u0_1.hermitian_defect() == 0.0);
        const auto u = biot_savart(s.f_neq, ShearFrame(s.t));
        double div = 0.0;
        for (int j = 0; j < c.grid.n_y(); ++j)
            for (int k = 0; k < c.grid.n_k(); ++k)
                div = std::max(div, std::abs(cplx(0.0, k) * u.u1.at(j, k) + cplx(0.0, c.grid.eta(j) - k * s.t) * u.u2.at(j, k)));
        CHECK(div <= 1e-12);
    }
    // u0 evolved by its own equation tracks the Biot-Savart recovery from f0
    const ZeroModeField b = biot_savart_zero(s.f0);
    double drift = 0.0;
    for (int j = 0; j < c.grid.n_y(); ++j) drift = std::max(drift, std::abs(b.at(j) - s.u0_1.at(j)));
    MESSAGE("u0 drift " << drift / u0 << " over t = " << s.t);
    CHECK(drift <= 1e-6 * u0 * s.t);
}

TEST_CASE("run: zero amplitude gives a zero ledger") {
    SimConfig c = small_config(16, 32);
    c.epsilon = 0.0;
    c.t_end = 1.0;
    const auto r = run(c);
    CHECK_FALSE(r.aborted);
    for (const auto& l : r.ledgers) {
        CHECK(l.E_neq == 0.0);
        CHECK(l.D == 0.0);
        CHECK(l.F0 == 0.0);
        CHECK(l.H02 == 0.0);
        CHECK(l.V0 == 0.0);
        CHECK(l.theta_neq == 0.0);
    }
}

TEST_CASE("run: tiny amplitude stays bounded; outputs follow the cadence; deterministic") {
    SimConfig c = small_config(32, 64);
    c.epsilon = 1e-3;
    c.t_end = 4.0;
    c.dt_out = 0.5;
    const auto r = run(c);
    REQUIRE_FALSE(r.aborted);
    REQUIRE(r.ledgers.size() == 9);
    for (std::size_t i = 0; i < r.ledgers.size(); ++i) {
        CHECK(r.ledgers[i].t == doctest::Approx(0.5 * i).epsilon(1e-12));
        CHECK(r.ledgers[i].E_neq <= 4.0 * r.ledgers[0].E_neq);
    }
    const auto again = run(c);
    for (std::size_t i = 0; i < r.ledgers.size(); ++i) {
        CHECK(again.ledgers[i].E_neq == r.ledgers[i].E_neq);
        CHECK(again.ledgers[i].H02 == r.ledgers[i].H02);
    }
}

TEST_CASE("run caps nonlinear runs at the resolution time") {
    SimConfig c = small_config(16, 32);
    c.t_end = 100.0;
    c.dt = 0.1;
    const double tr = resolution_time(c.grid);
    CHECK(tr == doctest::Approx(c.grid.d_eta() * 10).epsilon(1e-15));
    const auto r = run(c);
    CHECK(r.t_end_capped);
    CHECK(r.t_end == tr);
    CHECK(r.ledgers.back().t == doctest::Approx(tr).epsilon(1e-12));
}

TEST_CASE("CFL violation aborts with a suggested step and leaves the state untouched") {
    SimConfig c = small_config(16, 32);
    c.dt = 5.0;
    c.epsilon = 1e5;
    Simulator sim(c);
    SimState s = sim.initialize();
    const SimState before = s;
    try {
        sim.step(s);
        FAIL("expected abort");
    } catch (const NumericalAbort& e) {
        CHECK(e.suggested_dt() > 0.0);
        CHECK(e.suggested_dt() < 5.0);
    }
    CHECK(s.t == before.t);
    for (std::size_t i = 0; i < s.f_neq.data().size(); ++i) CHECK(s.f_neq.data()[i] == before.f_neq.data()[i]);
}

TEST_CASE("non-finite values abort with time and mode") {
    SimConfig c = small_config(16, 32);
    c.nonlinear = false;
    Simulator sim(c);
    SimState s(c.grid);
    s.f_neq.at(c.grid.row_of(-3), 2) = cplx(std::nan(""), 0.0);
    try {
        sim.step(s);
        FAIL("expected abort");
    } catch (const NumericalAbort& e) {
        CHECK(e.k() == 2);
        CHECK(e.eta_index() == -3);
        CHECK(e.time() >= 0.0);
    }
}

TEST_CASE("snapshot round trip and resume") {
    SimConfig c = small_config(16, 32);
    c.t_end = 1.0;
    const auto dir = std::filesystem::temp_directory_path() / "couette_snap_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "state.bin").string();
    const auto r1 = run(c);
    write_snapshot(path, *r1.final_state, c);
    CHECK(std::filesystem::file_size(path) == 8 + 8 + 5 * 8 + 8 + (2 * c.grid.spectral_size() + 4 * 32) * 8);
    const auto [h, st] = read_snapshot(path);
    CHECK(h.n_z == 16);
    CHECK(h.n_y == 32);
    CHECK(h.L_y == c.grid.L_y());
    CHECK(h.t == r1.final_state->t);
    CHECK(h.nu == c.nu);
    CHECK(h.gamma2 == c.gamma2);
    CHECK(h.epsilon == c.epsilon);
    CHECK(h.seed == c.seed);
    const double scale = r1.final_state->f_neq.max_abs();
    for (std::size_t i = 0; i < st.f_neq.data().size(); ++i)
        CHECK(std::abs(st.f_neq.data()[i] - r1.final_state->f_neq.data()[i]) <= 1e-7 * scale);
    CHECK(st.f_neq.hermitian_defect() == 0.0);

    // resume to t = 2 against a straight run
    SimConfig c2 = c;
    c2.t_end = 2.0;
    RunOptions opt;
    opt.resume = st;
    const auto resumed = run(c2, opt);
    const auto direct = run(c2);
    CHECK(rel_diff(resumed.ledgers.back().E_neq, direct.ledgers.back().E_neq) < 1e-5);

    {
        std::ofstream bad(path, std::ios::binary);
        bad << "NOTASNAP";
    }
    CHECK_THROWS_AS(read_snapshot(path), ValidationError);
    std::filesystem::remove_all(dir);
}
