#pragma once

#include "couette/spectral.hpp"

#include <array>
#include <vector>

namespace couette {

struct LinearParams {
    LinearParams(double nu, double gamma2);

    double nu;
    double gamma2;

    bool has_sigma() const { return gamma2 > 0.25; }
    /// sqrt(4 gamma2 - 1); throws ValidationError when gamma2 <= 1/4.
    double sigma() const;
};

/// One (k, eta) mode of the linearized system; Theta = i k theta.
struct ModeState {
    int k = 1;
    double eta = 0.0;
    cplx f_hat{};
    cplx Theta_hat{};
    double t = 0.0;
};

struct ModeRhs {
    cplx df_hat;
    cplx dTheta_hat;
};

ModeRhs mode_rhs(const ModeState& state, const LinearParams& params);

/// int_{t0}^{t1} (k^2 + (eta - k s)^2) ds in closed form.
double lap_integral(int k, double eta, double t0, double t1);

/// Step used at time t: min(dt_base, 0.1 (1 + |t - eta/k|)).
double critical_step(int k, double eta, double t, double dt_base);

/// Integrating-factor RK4 from state0.t to t_end. Returns every step,
/// starting with state0 and ending exactly at t_end.
std::vector<ModeState> integrate_mode(const ModeState& state0, const LinearParams& params,
                                      double t_end, double dt);

struct Envelope {
    double growth_f;
    double decay_theta;
};

/// ((k^2+(kt-eta)^2)/(k^2+eta^2))^{+-1/4} exp(-c nu k^2 t^3).
Envelope decay_envelope(int k, double eta, double t, double nu, double c = 1.0 / 12.0);

/// Coefficients (a, b, d) of the Hermitian form a|f|^2 + d|Theta|^2 + 2 b Re(f conj(Theta)).
/// Defined for every gamma2; positive definite iff gamma2 > 1/4.
std::array<double, 3> symmetrized_form(const ModeState& state, double gamma2);

double symmetrized_energy(const ModeState& state, const LinearParams& params);

struct GoodModes {
    cplx X1;
    cplx X2;
};

/// Per-mode good unknowns from (f, Theta = i k theta).
GoodModes good_unknowns_mode(int k, double eta, double t, cplx f_hat, cplx Theta_hat, double gamma2);
/// Exact inverse of good_unknowns_mode, returning (f, Theta).
std::pair<cplx, cplx> from_good_unknowns_mode(int k, double eta, double t, cplx X1, cplx X2, double gamma2);

struct GoodUnknowns {
    SpectralField X1;
    SpectralField X2;
};

struct NonzeroFields {
    SpectralField f_neq;
    SpectralField theta_neq;
};

GoodUnknowns to_good_unknowns(const SpectralField& f_neq, const SpectralField& theta_neq,
                              const ShearFrame& frame, const LinearParams& params);
NonzeroFields from_good_unknowns(const SpectralField& X1, const SpectralField& X2,
                                 const ShearFrame& frame, const LinearParams& params);

/// Oscillation envelopes N|X| for |f| and |X| / (gamma |k| N) for |theta|,
/// with |X| = sqrt(|X1|^2 + |X2|^2).
Envelope mode_amplitudes(const ModeState& state, const LinearParams& params);

}  // namespace couette
