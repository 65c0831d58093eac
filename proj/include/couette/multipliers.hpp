#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace couette {

/// Smooth non-decreasing step: phi' = 1/4 on [-1, 1], phi = 0 below -3 and
/// 1 above 3. The shoulders use the exp(-1/u) smoothstep.
class PhiProfile {
public:
    double operator()(double x) const;
    double derivative(double x) const;
    /// The smoothstep S: 0 for u <= 0, 1 for u >= 1, C-infinity in between.
    static double smoothstep(double u);
};

struct MultiplierParams {
    double nu = 1e-3;
    double s = 6.0;
    double c = 0.125;
    double K = 4.0;
    double gamma2 = 1.0;
    PhiProfile phi{};

    double sigma() const;
    /// Default K = max(3/sigma, 4).
    static double default_K(double gamma2);
    /// Throws ValidationError naming the offending field.
    void validate() const;
};

/// int_0^x (1 + u^2)^{-3/4} du, odd in x.
double algebraic_integral(double x);
/// int over the real line of (1 + u^2)^{-3/4} (Beta(1/2, 1/4)).
double algebraic_integral_total();

double m1(double t, int k, double eta, const MultiplierParams& params);
double m2(double t, int k, double eta);
double m3(double t, int k, double eta);

/// Defining right-hand sides dM_i/dt.
double m1_rate(double t, int k, double eta, const MultiplierParams& params);
double m2_rate(double t, int k, double eta);
double m3_rate(double t, int k, double eta);

/// Caller-supplied M3 avoids the quadrature when it is cached.
double script_M(double t, int k, double eta, const MultiplierParams& params);
double script_M(double t, int k, double eta, const MultiplierParams& params, double m3_value);
double calA(double t, int k, double eta, const MultiplierParams& params);
double calA(double t, int k, double eta, const MultiplierParams& params, double m3_value);

/// <k, eta> = sqrt(1 + k^2 + eta^2).
double japanese(double k, double eta);

/// N = |k|^{-1/2} p^{1/4} with p = k^2 + (eta - k t)^2.
double symbol_N(double t, int k, double eta);
/// Time derivative of symbol_N.
double symbol_Ndot(double t, int k, double eta);

/// c0 = exp(-K (1 + pi + I_inf)).
double c0(double K);
/// exp(-(pi^2/6) I_inf): lower bound of the zero-mode multiplier.
double m_min();

struct ResonanceIndex {
    double eta;
    int k;
    double t_lo;
    double t_hi;
};

/// Intervals [2|eta|/(2|k|+1), 2|eta|/(2|k|-1)] for |k| = 1..floor(sqrt|eta|),
/// ordered by |k|; k carries the sign of eta.
std::vector<ResonanceIndex> resonance_partition(double eta);
/// t(eta) = 2|eta| / (2 floor(sqrt|eta|) + 1).
double resonance_start(double eta);

double m_zero_mode(double t, double eta);
/// dm/dt at an interior point of a resonance interval, 0 elsewhere.
double m_zero_mode_rate(double t, double eta);

/// Left-hand side minus right-hand side of the enhanced-dissipation lower
/// bound, divided by the right-hand side.
double low_bound_margin(double t, int k, double eta, double nu, const PhiProfile& phi);

/// |M<k,eta>^s - M<k,xi>^s| over the commutator bound.
double commutator_ratio(double t, int k, double eta, double xi, const MultiplierParams& params);

struct LemmaReport {
    std::string lemma;
    std::size_t samples = 0;
    double worst = 0.0;
    bool pass = false;
};

/// Randomized checks of the multiplier lemmas; deterministic given seed.
std::vector<LemmaReport> verify_multipliers(std::size_t samples, std::uint64_t seed);

}  // namespace couette
