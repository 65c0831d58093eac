#include "couette/linear_lab.hpp"

#include "couette/errors.hpp"
#include "couette/multipliers.hpp"

#include <cmath>
#include <string>

namespace couette {

namespace {

void require_k(int k) {
    if (k == 0) throw ValidationError("linear mode requires k != 0");
}

void require_sigma(double gamma2) {
    if (!(gamma2 > 0.25)) throw ValidationError("gamma2 must satisfy gamma2 > 1/4");
}

void require_zero_column(const SpectralField& f, const char* name) {
    for (int j = 0; j < f.grid().n_y(); ++j)
        if (f.at(j, 0) != cplx{})
            throw ValidationError(std::string(name) + " has nonzero k = 0 content");
}

}  // namespace

LinearParams::LinearParams(double nu_, double gamma2_) : nu(nu_), gamma2(gamma2_) {
    if (!(nu_ >= 0.0) || !std::isfinite(nu_)) throw ValidationError("nu must be >= 0");
    if (!(gamma2_ >= 0.0) || !std::isfinite(gamma2_)) throw ValidationError("gamma2 must be >= 0");
}

double LinearParams::sigma() const {
    require_sigma(gamma2);
    return std::sqrt(4.0 * gamma2 - 1.0);
}

ModeRhs mode_rhs(const ModeState& s, const LinearParams& params) {
    require_k(s.k);
    const double xi = s.eta - s.k * s.t;
    const double k2 = static_cast<double>(s.k) * s.k;
    const double p = k2 + xi * xi;
    return {-params.nu * p * s.f_hat - params.gamma2 * s.Theta_hat,
            -params.nu * p * s.Theta_hat + (k2 / p) * s.f_hat};
}

double lap_integral(int k, double eta, double t0, double t1) {
    const double h = t1 - t0;
    const double a = eta - k * t0, b = eta - k * t1;
    return static_cast<double>(k) * k * h + h * (a * a + a * b + b * b) / 3.0;
}

double critical_step(int k, double eta, double t, double dt_base) {
    require_k(k);
    return std::min(dt_base, 0.1 * (1.0 + std::abs(t - eta / k)));
}

namespace {

struct Pair {
    cplx f, th;
};

Pair inviscid_rhs(int k, double eta, double t, const Pair& u, double gamma2) {
    const double xi = eta - k * t;
    const double k2 = static_cast<double>(k) * k;
    return {-gamma2 * u.th, (k2 / (k2 + xi * xi)) * u.f};
}

}  // namespace

std::vector<ModeState> integrate_mode(const ModeState& state0, const LinearParams& params,
                                      double t_end, double dt) {
    require_k(state0.k);
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    const int k = state0.k;
    const double eta = state0.eta, g2 = params.gamma2, nu = params.nu;
    std::vector<ModeState> traj{state0};
    Pair u{state0.f_hat, state0.Theta_hat};
    double t = state0.t;
    while (t < t_end) {
        double h = critical_step(k, eta, t, dt);
        if (t + h >= t_end || t_end - (t + h) < 1e-12 * h) h = t_end - t;
        const double tm = t + 0.5 * h, t1 = t + h;
        const double Ea = std::exp(-nu * lap_integral(k, eta, t, tm));
        const double Eb = std::exp(-nu * lap_integral(k, eta, tm, t1));
        const double Eab = Ea * Eb;
        const Pair k1 = inviscid_rhs(k, eta, t, u, g2);
        const Pair u2{Ea * (u.f + 0.5 * h * k1.f), Ea * (u.th + 0.5 * h * k1.th)};
        const Pair k2 = inviscid_rhs(k, eta, tm, u2, g2);
        const Pair u3{Ea * u.f + 0.5 * h * k2.f, Ea * u.th + 0.5 * h * k2.th};
        const Pair k3 = inviscid_rhs(k, eta, tm, u3, g2);
        const Pair u4{Eab * u.f + h * Eb * k3.f, Eab * u.th + h * Eb * k3.th};
        const Pair k4 = inviscid_rhs(k, eta, t1, u4, g2);
        u.f = Eab * u.f + (h / 6.0) * (Eab * k1.f + 2.0 * Eb * (k2.f + k3.f) + k4.f);
        u.th = Eab * u.th + (h / 6.0) * (Eab * k1.th + 2.0 * Eb * (k2.th + k3.th) + k4.th);
        t = (h == t_end - t) ? t_end : t1;
        traj.push_back({k, eta, u.f, u.th, t});
    }
    return traj;
}

Envelope decay_envelope(int k, double eta, double t, double nu, double c) {
    require_k(k);
    const double k2 = static_cast<double>(k) * k;
    const double xi = k * t - eta;
    const double r = std::pow((k2 + xi * xi) / (k2 + eta * eta), 0.25);
    const double damp = std::exp(-c * nu * k2 * t * t * t);
    return {r * damp, damp / r};
}

std::array<double, 3> symmetrized_form(const ModeState& s, double gamma2) {
    require_k(s.k);
    const double r = s.eta / s.k;
    const double w = std::sqrt(1.0 + (s.t - r) * (s.t - r));
    const double sign = s.t >= r ? 1.0 : -1.0;
    return {1.0 / w, 0.5 * sign, w * gamma2};
}

double symmetrized_energy(const ModeState& s, const LinearParams& params) {
    require_sigma(params.gamma2);
    const auto q = symmetrized_form(s, params.gamma2);
    return q[0] * std::norm(s.f_hat) + q[2] * std::norm(s.Theta_hat) +
           2.0 * q[1] * std::real(s.f_hat * std::conj(s.Theta_hat));
}

GoodModes good_unknowns_mode(int k, double eta, double t, cplx f, cplx Theta, double gamma2) {
    require_sigma(gamma2);
    const double g = std::sqrt(gamma2);
    const double a = 1.0 / std::sqrt(1.0 - 1.0 / (4.0 * gamma2));
    const double N = symbol_N(t, k, eta), Nd = symbol_Ndot(t, k, eta);
    return {f / N, a * (Nd / g * f + g * N * Theta)};
}

std::pair<cplx, cplx> from_good_unknowns_mode(int k, double eta, double t, cplx X1, cplx X2, double gamma2) {
    require_sigma(gamma2);
    const double g = std::sqrt(gamma2);
    const double a = 1.0 / std::sqrt(1.0 - 1.0 / (4.0 * gamma2));
    const double N = symbol_N(t, k, eta), Nd = symbol_Ndot(t, k, eta);
    return {N * X1, X2 / (a * g * N) - Nd / gamma2 * X1};
}

GoodUnknowns to_good_unknowns(const SpectralField& f, const SpectralField& theta,
                              const ShearFrame& frame, const LinearParams& params) {
    require_sigma(params.gamma2);
    if (!(f.grid() == theta.grid())) throw ValidationError("grid mismatch");
    require_zero_column(f, "f_neq");
    require_zero_column(theta, "theta_neq");
    const Grid& g = f.grid();
    GoodUnknowns out{SpectralField(g), SpectralField(g)};
    for (int j = 0; j < g.n_y(); ++j) {
        const double eta = g.eta(j);
        for (int k = 1; k < g.n_k(); ++k) {
            const cplx Theta = cplx(0.0, k) * theta.at(j, k);
            const auto X = good_unknowns_mode(k, eta, frame.t, f.at(j, k), Theta, params.gamma2);
            out.X1.at(j, k) = X.X1;
            out.X2.at(j, k) = X.X2;
        }
    }
    out.X1.zero_nyquist();
    out.X2.zero_nyquist();
    return out;
}

NonzeroFields from_good_unknowns(const SpectralField& X1, const SpectralField& X2,
                                 const ShearFrame& frame, const LinearParams& params) {
    require_sigma(params.gamma2);
    if (!(X1.grid() == X2.grid())) throw ValidationError("grid mismatch");
    require_zero_column(X1, "X1");
    require_zero_column(X2, "X2");
    const Grid& g = X1.grid();
    NonzeroFields out{SpectralField(g), SpectralField(g)};
    for (int j = 0; j < g.n_y(); ++j) {
        const double eta = g.eta(j);
        for (int k = 1; k < g.n_k(); ++k) {
            const auto [f, Theta] = from_good_unknowns_mode(k, eta, frame.t, X1.at(j, k), X2.at(j, k), params.gamma2);
            out.f_neq.at(j, k) = f;
            out.theta_neq.at(j, k) = Theta / cplx(0.0, k);
        }
    }
    out.f_neq.zero_nyquist();
    out.theta_neq.zero_nyquist();
    return out;
}

Envelope mode_amplitudes(const ModeState& s, const LinearParams& params) {
    const auto X = good_unknowns_mode(s.k, s.eta, s.t, s.f_hat, s.Theta_hat, params.gamma2);
    const double amp = std::sqrt(std::norm(X.X1) + std::norm(X.X2));
    const double N = symbol_N(s.t, s.k, s.eta);
    return {N * amp, amp / (std::sqrt(params.gamma2) * std::abs(s.k) * N)};
}

}  // namespace couette
