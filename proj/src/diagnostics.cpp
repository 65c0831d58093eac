#include "couette/diagnostics.hpp"

#include "couette/errors.hpp"
#include "couette/linear_lab.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace couette {

struct LedgerComputer::Impl {
    Grid grid;
    MultiplierParams params;
    bool good = false;
    double sigma = 0.0;
    std::vector<double> m3_offset;  // F(-eta/k) per (row, k)

    Impl(const Grid& g, const MultiplierParams& p) : grid(g), params(p), good(p.gamma2 > 0.25) {
        if (good) sigma = p.sigma();
        m3_offset.assign(g.spectral_size(), 0.0);
    }

    double m3_at(double t, int j, int k) {
        double& off = m3_offset[static_cast<std::size_t>(j) * grid.n_k() + k];
        const double r = grid.eta(j) / k;
        if (off == 0.0 && r != 0.0) off = algebraic_integral(-r);
        const double ak = k;
        return -(algebraic_integral(t - r) - off) / (ak * std::sqrt(ak));
    }
};

LedgerComputer::LedgerComputer(const Grid& grid, const MultiplierParams& params)
    : impl_(std::make_unique<Impl>(grid, params)) {}

LedgerComputer::~LedgerComputer() = default;

namespace {

double hs_norm2(const ZeroModeField& z, double s, const std::vector<double>* divide = nullptr) {
    const Grid& g = z.grid();
    double acc = 0.0;
    for (int j = 0; j < g.n_y(); ++j) {
        const double eta = g.eta(j);
        double v = std::norm(z.at(j));
        if (divide) v /= (*divide)[static_cast<std::size_t>(j)] * (*divide)[static_cast<std::size_t>(j)];
        acc += std::pow(1.0 + eta * eta, s) * v;
    }
    return acc;
}

}  // namespace

EnergyLedger LedgerComputer::operator()(const SimState& st) const {
    Impl& I = *impl_;
    const Grid& g = st.grid();
    if (!(g == I.grid)) throw ValidationError("ledger grid mismatch");
    const MultiplierParams& P = I.params;
    const double t = st.t;
    EnergyLedger L;
    L.t = t;

    const PhysicalNorms pn = physical_norms(st);
    L.u1_neq = pn.u1_neq;
    L.u2_neq = pn.u2_neq;
    L.omega_neq = pn.omega_neq;
    L.theta_neq = pn.theta_neq;

    L.F0 = hs_norm2(st.f0, P.s);
    L.V0 = hs_norm2(st.u0_1, P.s);
    std::vector<double> m(static_cast<std::size_t>(g.n_y()));
    for (int j = 0; j < g.n_y(); ++j) m[static_cast<std::size_t>(j)] = m_zero_mode(t, g.eta(j));
    L.H02 = hs_norm2(st.theta02, P.s, &m);
    {
        ZeroModeField th0 = st.theta01;
        th0 += st.theta02;
        L.theta0_Hs = std::sqrt(hs_norm2(th0, P.s));
    }

    if (!I.good) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        L.E_neq = L.D = L.ED = L.CK2 = L.CK3 = L.L_abs = L.X1_Hs = nan;
    } else {
        const double g2 = P.gamma2;
        const double nu3 = std::cbrt(P.nu);
        const double ecnu = std::exp(P.c * nu3 * t);
        double E = 0, D = 0, ED = 0, CK2 = 0, CK3 = 0, Labs = 0, X1h = 0;
        for (int j = 0; j < g.n_y(); ++j) {
            const double eta = g.eta(j);
            for (int k = 1; k < g.n_k(); ++k) {
                const cplx f = st.f_neq.at(j, k), th = st.theta_neq.at(j, k);
                if (f == cplx{} && th == cplx{}) continue;
                const double w = 2.0;
                const double xi = eta - k * t;
                const double k2 = static_cast<double>(k) * k;
                const double p = k2 + xi * xi;
                const auto X = good_unknowns_mode(k, eta, t, f, cplx(0.0, k) * th, g2);
                const double x2 = std::norm(X.X1) + std::norm(X.X2);
                const double jp = japanese(k, eta);
                const double M = std::exp(P.K * (m1(t, k, eta, P) + m2(t, k, eta) + I.m3_at(t, j, k)));
                const double A = ecnu * M * std::pow(jp, P.s);
                const double A2x = A * A * x2;
                E += w * 0.5 * A2x;
                D += w * 0.75 * P.nu * p * A2x;
                ED += w * 0.125 * nu3 * std::cbrt(k2) * A2x;
                CK2 += w * P.K * (k2 / p) * A2x;
                CK3 += w * P.K * std::pow(p, -0.75) * A2x;
                const double Ninv2 = k / std::sqrt(p);
                Labs += w * std::abs(A * A * (1.5 / I.sigma) * (k2 / p) * Ninv2 * std::real(X.X1 * std::conj(X.X2)));
                X1h += w * std::pow(jp, 2.0 * P.s) * std::norm(X.X1);
            }
        }
        L.E_neq = E;
        L.D = D;
        L.ED = ED;
        L.CK2 = CK2;
        L.CK3 = CK3;
        L.L_abs = Labs;
        L.X1_Hs = std::sqrt(X1h);
    }

    double nth = 0.0;
    for (int j = 0; j < g.n_y(); ++j) {
        const double eta = g.eta(j);
        for (int k = 1; k < g.n_k(); ++k) {
            const cplx th = st.theta_neq.at(j, k);
            if (th == cplx{}) continue;
            const double N = symbol_N(t, k, eta);
            nth += 2.0 * std::pow(japanese(k, eta), 2.0 * P.s) * std::norm(N * k * th);
        }
    }
    L.Ntheta_Hs = std::sqrt(nth);
    return L;
}

EnergyLedger compute_ledger(const SimState& state, const MultiplierParams& params) {
    if (!(params.gamma2 > 0.25)) throw ValidationError("gamma2: ledger requires gamma2 > 1/4");
    return LedgerComputer(state.grid(), params)(state);
}

PhysicalNorms physical_norms(const SimState& st) {
    const Grid& g = st.grid();
    const double t = st.t;
    double u1 = 0, u2 = 0, om = 0, th = 0;
    for (int j = 0; j < g.n_y(); ++j) {
        const double eta = g.eta(j);
        for (int k = 1; k < g.n_k(); ++k) {
            const cplx f = st.f_neq.at(j, k);
            const double xi = eta - k * t;
            const double p = static_cast<double>(k) * k + xi * xi;
            const double af2 = std::norm(f);
            u1 += 2.0 * xi * xi * af2 / (p * p);
            u2 += 2.0 * static_cast<double>(k) * k * af2 / (p * p);
            om += 2.0 * af2;
            th += 2.0 * std::norm(st.theta_neq.at(j, k));
        }
    }
    return {std::sqrt(u1), std::sqrt(u2), std::sqrt(om), std::sqrt(th)};
}

RateFit fit_rates(std::span<const double> t, std::span<const double> v, double t1, double t2, double nu) {
    if (t.size() != v.size()) throw ValidationError("fit_rates: series length mismatch");
    if (!(t1 < t2)) throw ValidationError("fit_rates: window requires t1 < t2");
    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t1 || t[i] > t2) continue;
        if (!(v[i] > 0.0)) throw ValidationError("fit_rates: nonpositive value in window");
        ts.push_back(t[i]);
        ys.push_back(std::log(v[i]));
    }
    if (ts.size() < 8) throw ValidationError("fit_rates: fewer than 8 samples in window");
    RateFit out;
    out.t1 = t1;
    out.t2 = t2;
    out.samples = ts.size();
    const double nu3 = nu > 0.0 ? std::cbrt(nu) : 0.0;
    out.exp_fitted = nu3 * (t2 - t1) >= 0.5;
    const Eigen::Index n = static_cast<Eigen::Index>(ts.size());
    const Eigen::Index cols = out.exp_fitted ? 3 : 2;
    Eigen::MatrixXd A(n, cols);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double tt = ts[static_cast<std::size_t>(i)];
        A(i, 0) = 1.0;
        A(i, 1) = 0.5 * std::log1p(tt * tt);
        if (out.exp_fitted) A(i, 2) = -nu3 * tt;
        y(i) = ys[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    out.power_exponent = c(1);
    out.exp_rate = out.exp_fitted ? c(2) : 0.0;
    out.residual = std::sqrt((A * c - y).squaredNorm() / static_cast<double>(n));
    return out;
}

std::vector<AuditEntry> theorem_audit(const std::vector<EnergyLedger>& ledgers, const AuditConfig& cfg) {
    const double nu3 = std::cbrt(cfg.nu);
    const double amp = cfg.epsilon * std::sqrt(cfg.nu);
    std::vector<AuditEntry> out{{"velocity_decay", 0, cfg.rate, 0, false},
                                {"zero_mode", 0, 0.0, 0, false},
                                {"good_unknown_X1", 0, cfg.rate, 0, false},
                                {"good_unknown_theta", 0, cfg.rate, 0, false}};
    auto update = [&](AuditEntry& e, double lhs, double bound, double t) {
        double C;
        if (lhs == 0.0)
            C = 0.0;
        else if (bound == 0.0)
            C = std::numeric_limits<double>::infinity();
        else
            C = lhs / bound;
        if (C > e.C || std::isnan(C)) {
            e.C = C;
            e.t_worst = t;
        }
    };
    for (const auto& L : ledgers) {
        const double jt = std::sqrt(1.0 + L.t * L.t);
        const double damp = std::exp(-cfg.rate * nu3 * L.t);
        update(out[0], L.u1_neq + jt * L.u2_neq + L.omega_neq / jt + L.theta_neq, amp / std::sqrt(jt) * damp, L.t);
        const double nm4 = std::pow(cfg.nu, -0.25);
        update(out[1], nm4 * std::sqrt(L.V0) + std::sqrt(L.F0) + nm4 * L.theta0_Hs, amp / std::pow(cfg.nu, 0.25), L.t);
        update(out[2], L.X1_Hs, amp * damp, L.t);
        update(out[3], L.Ntheta_Hs, amp * damp, L.t);
    }
    for (auto& e : out) e.flagged = !(e.C <= cfg.sanity_bound);
    return out;
}

InequalityCheck energy_inequality(const std::vector<EnergyLedger>& ledgers, double slack) {
    InequalityCheck out;
    out.worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < ledgers.size(); ++i) {
        const auto& a = ledgers[i];
        const auto& b = ledgers[i + 1];
        const double h = b.t - a.t;
        if (!(h > 0.0)) continue;
        const double Sa = a.D + a.ED + a.CK2 + a.CK3, Sb = b.D + b.ED + b.CK2 + b.CK3;
        const double lhs = (b.E_neq - a.E_neq) / h + 0.5 * (Sa + Sb);
        const double lin = 0.5 * (a.L_abs + b.L_abs);
        const double scale = 0.5 * (Sa + Sb) + lin;
        const double rhs = lin + slack * scale;
        const double excess = scale > 0.0 ? (lhs - rhs) / scale : (lhs - rhs);
        ++out.intervals;
        if (excess > out.worst_excess) {
            out.worst_excess = excess;
            out.t_worst = b.t;
        }
        if (!(lhs <= rhs)) out.pass = false;
    }
    if (out.intervals == 0) out.worst_excess = 0.0;
    return out;
}

}  // namespace couette
