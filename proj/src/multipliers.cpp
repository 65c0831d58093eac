#include "couette/multipliers.hpp"

#include "couette/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace couette {

namespace {

using boost::math::quadrature::gauss;
using boost::math::quadrature::gauss_kronrod;

constexpr double kQuadTol = 1e-13;

void require_k(int k) {
    if (k == 0) throw ValidationError("multiplier symbols require k != 0");
}

double psi(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

// int_0^v S(u) du for v in [0, 1]. The fixed rule scaled to [0, v] is
// v * sum w_i S(v x_i), monotone in v because S is.
double smoothstep_head(double v) {
    if (v <= 0.0) return 0.0;
    return gauss<double, 30>::integrate([](double u) { return PhiProfile::smoothstep(u); }, 0.0, std::min(v, 1.0));
}

double p_symbol(double t, int k, double eta) {
    const double xi = eta - k * t;
    return static_cast<double>(k) * k + xi * xi;
}

// int_X^inf (1+u^2)^{-3/4} du for X >= 1 via u = X / w^2.
double algebraic_tail(double X) {
    auto g = [X](double w) { return 2.0 * X * std::pow(w * w * w * w + X * X, -0.75); };
    return gauss_kronrod<double, 31>::integrate(g, 0.0, 1.0, 15, kQuadTol);
}

double algebraic_core(double x) {
    if (x <= 0.01) {
        // binomial series; the adaptive estimate stalls on tiny intervals
        const double y = x * x;
        return x * (1.0 + y * (-0.25 + y * (21.0 / 160.0 + y * (-11.0 / 128.0 + y * (1155.0 / 18432.0)))));
    }
    auto g = [](double u) { return std::pow(1.0 + u * u, -0.75); };
    return gauss_kronrod<double, 31>::integrate(g, 0.0, x, 15, kQuadTol);
}

}  // namespace

double PhiProfile::smoothstep(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = psi(u), b = psi(1.0 - u);
    return a / (a + b);
}

double PhiProfile::derivative(double x) const { return 0.25 * smoothstep((3.0 - std::abs(x)) / 2.0); }

double PhiProfile::operator()(double x) const {
    const double ax = std::abs(x);
    if (ax <= 1.0) return 0.5 + 0.25 * x;
    if (ax >= 3.0) return x > 0.0 ? 1.0 : 0.0;
    // phi(x) = 1/2 int_0^{(3+x)/2} S on the left shoulder, mirrored on the right
    const double head = 0.5 * smoothstep_head((3.0 - ax) / 2.0);
    return x > 0.0 ? 1.0 - head : head;
}

double MultiplierParams::sigma() const {
    if (!(gamma2 > 0.25)) throw ValidationError("gamma2 must exceed 1/4 for sigma");
    return std::sqrt(4.0 * gamma2 - 1.0);
}

double MultiplierParams::default_K(double gamma2) {
    if (!(gamma2 > 0.25)) return 4.0;
    return std::max(3.0 / std::sqrt(4.0 * gamma2 - 1.0), 4.0);
}

void MultiplierParams::validate() const {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ValidationError("nu: must satisfy nu > 0");
    if (!(s >= 6.0)) throw ValidationError("s: must satisfy s >= 6");
    if (!(c > 0.0 && c <= 0.125)) throw ValidationError("c: must satisfy 0 < c <= 1/8");
    if (!(gamma2 > 0.25)) throw ValidationError("gamma2: must satisfy gamma2 > 1/4");
    if (!(K >= 3.0 / sigma())) throw ValidationError("K: must satisfy K >= 3/sigma");
}

double algebraic_integral(double x) {
    const double ax = std::abs(x);
    double v;
    if (ax <= 1.0)
        v = algebraic_core(ax);
    else
        v = 0.5 * algebraic_integral_total() - algebraic_tail(ax);
    return x >= 0.0 ? v : -v;
}

double algebraic_integral_total() {
    static const double total = 2.0 * (algebraic_core(1.0) + algebraic_tail(1.0));
    return total;
}

double m1(double t, int k, double eta, const MultiplierParams& params) {
    require_k(k);
    const double a = std::cbrt(params.nu) / std::cbrt(std::abs(static_cast<double>(k))) * (k > 0 ? 1.0 : -1.0);
    return params.phi(a * (eta - k * t)) - params.phi(a * eta);
}

double m2(double t, int k, double eta) {
    require_k(k);
    const double r = eta / k;
    return std::atan(r - t) - std::atan(r);
}

double m3(double t, int k, double eta) {
    require_k(k);
    const double r = eta / k;
    const double ak = std::abs(static_cast<double>(k));
    return -(algebraic_integral(t - r) - algebraic_integral(-r)) / (ak * std::sqrt(ak));
}

double m1_rate(double t, int k, double eta, const MultiplierParams& params) {
    require_k(k);
    const double ak = std::abs(static_cast<double>(k));
    const double nu3 = std::cbrt(params.nu);
    const double x = nu3 / std::cbrt(ak) * (k > 0 ? 1.0 : -1.0) * (eta - k * t);
    return -nu3 * std::cbrt(ak * ak) * params.phi.derivative(x);
}

double m2_rate(double t, int k, double eta) {
    require_k(k);
    return -static_cast<double>(k) * k / p_symbol(t, k, eta);
}

double m3_rate(double t, int k, double eta) {
    require_k(k);
    return -std::pow(p_symbol(t, k, eta), -0.75);
}

double script_M(double t, int k, double eta, const MultiplierParams& params, double m3_value) {
    return std::exp(params.K * (m1(t, k, eta, params) + m2(t, k, eta) + m3_value));
}

double script_M(double t, int k, double eta, const MultiplierParams& params) {
    return script_M(t, k, eta, params, m3(t, k, eta));
}

double japanese(double k, double eta) { return std::sqrt(1.0 + k * k + eta * eta); }

double calA(double t, int k, double eta, const MultiplierParams& params, double m3_value) {
    return std::exp(params.c * std::cbrt(params.nu) * t) * script_M(t, k, eta, params, m3_value) *
           std::pow(japanese(k, eta), params.s);
}

double calA(double t, int k, double eta, const MultiplierParams& params) {
    return calA(t, k, eta, params, m3(t, k, eta));
}

double symbol_N(double t, int k, double eta) {
    require_k(k);
    const double ak = std::abs(static_cast<double>(k));
    return std::pow(p_symbol(t, k, eta), 0.25) / std::sqrt(ak);
}

double symbol_Ndot(double t, int k, double eta) {
    require_k(k);
    const double ak = std::abs(static_cast<double>(k));
    const double xi = eta - k * t;
    return -0.5 * xi * k / std::sqrt(ak) * std::pow(p_symbol(t, k, eta), -0.75);
}

double c0(double K) { return std::exp(-K * (1.0 + std::numbers::pi + algebraic_integral_total())); }

double m_min() {
    return std::exp(-(std::numbers::pi * std::numbers::pi / 6.0) * algebraic_integral_total());
}

std::vector<ResonanceIndex> resonance_partition(double eta) {
    const double a = std::abs(eta);
    if (!(a >= 3.0)) throw ValidationError("resonance partition requires |eta| >= 3");
    const int E = static_cast<int>(std::floor(std::sqrt(a)));
    const int sgn = eta > 0 ? 1 : -1;
    std::vector<ResonanceIndex> out;
    out.reserve(static_cast<std::size_t>(E));
    for (int k = 1; k <= E; ++k)
        out.push_back({eta, sgn * k, 2.0 * a / (2.0 * k + 1.0), 2.0 * a / (2.0 * k - 1.0)});
    return out;
}

double resonance_start(double eta) {
    const double a = std::abs(eta);
    const int E = static_cast<int>(std::floor(std::sqrt(a)));
    return 2.0 * a / (2.0 * E + 1.0);
}

namespace {

// int_lo^hi k^{-2} (1 + (s - a/k)^2)^{-3/4} ds.
double interval_weight(int k, double a, double lo, double hi) {
    const double c = a / k;
    return (algebraic_integral(hi - c) - algebraic_integral(lo - c)) / (static_cast<double>(k) * k);
}

}  // namespace

double m_zero_mode(double t, double eta) {
    const double a = std::abs(eta);
    if (a < 3.0 || t >= 2.0 * a) return 1.0;
    const auto parts = resonance_partition(a);
    const double tt = std::max(t, parts.back().t_lo);
    double expo = 0.0;
    for (const auto& r : parts) {
        if (r.t_lo >= tt) {
            expo += interval_weight(r.k, a, r.t_lo, r.t_hi);
        } else {
            expo += interval_weight(r.k, a, tt, r.t_hi);
            break;
        }
    }
    return std::exp(-expo);
}

double m_zero_mode_rate(double t, double eta) {
    const double a = std::abs(eta);
    if (a < 3.0 || t >= 2.0 * a) return 0.0;
    const auto parts = resonance_partition(a);
    if (t <= parts.back().t_lo) return 0.0;
    for (const auto& r : parts) {
        if (t >= r.t_lo) {
            const double u = t - a / r.k;
            const double w = std::pow(1.0 + u * u, -0.75) / (static_cast<double>(r.k) * r.k);
            return m_zero_mode(t, a) * w;
        }
    }
    return 0.0;
}

double low_bound_margin(double t, int k, double eta, double nu, const PhiProfile& phi) {
    require_k(k);
    const double ak = std::abs(static_cast<double>(k));
    const double nu3 = std::cbrt(nu);
    const double xi = eta - k * t;
    const double x = nu3 / std::cbrt(ak) * (k > 0 ? 1.0 : -1.0) * xi;
    const double k23 = std::cbrt(ak * ak);
    const double lhs = 0.25 * nu * (ak * ak + xi * xi) + nu3 * k23 * phi.derivative(x);
    const double rhs = 0.25 * nu3 * k23;
    return (lhs - rhs) / rhs;
}

double commutator_ratio(double t, int k, double eta, double xi, const MultiplierParams& params) {
    require_k(k);
    const double ak = std::abs(static_cast<double>(k));
    const double s = params.s;
    const double lhs = std::abs(script_M(t, k, eta, params) * std::pow(japanese(k, eta), s) -
                                script_M(t, k, xi, params) * std::pow(japanese(k, xi), s));
    const double d = std::abs(eta - xi);
    const double rhs = d * (std::cbrt(params.nu) / std::cbrt(ak) + 1.0 / ak) * std::pow(japanese(k, xi), s) +
                       d * std::pow(japanese(k, eta - xi), s - 1.0);
    if (rhs == 0.0) return 0.0;
    return lhs / rhs;
}

namespace {

// Fourth-order central difference.
template <class F>
double fd(F&& f, double t, double h) {
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h);
}

}  // namespace

std::vector<LemmaReport> verify_multipliers(std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) {
        return std::exp(std::log(lo) + unit(rng) * (std::log(hi) - std::log(lo)));
    };
    auto rand_k = [&](int kmax) {
        const int k = 1 + static_cast<int>(unit(rng) * kmax);
        return unit(rng) < 0.5 ? -std::min(k, kmax) : std::min(k, kmax);
    };
    std::vector<LemmaReport> out;
    const PhiProfile phi;

    {
        LemmaReport r{"low_bound", samples, std::numeric_limits<double>::infinity(), false};
        for (std::size_t i = 0; i < samples; ++i) {
            const double nu = log_uniform(1e-12, 1e-1);
            const int k = rand_k(1000);
            const double t = log_uniform(1e-3, 1e6);
            // Concentrate eta around the critical layer to exercise the shoulders.
            const double spread = 4.0 * std::cbrt(std::abs(k) / nu);
            const double eta = k * t + (2.0 * unit(rng) - 1.0) * spread;
            r.worst = std::min(r.worst, low_bound_margin(t, k, eta, nu, phi));
        }
        r.pass = r.worst >= -1e-12;
        out.push_back(r);
    }

    const std::size_t n2 = std::min<std::size_t>(samples, 100000);
    {
        LemmaReport bounds{"script_M_bounds", n2, std::numeric_limits<double>::infinity(), false};
        LemmaReport a_bounds{"calA_bounds", n2, std::numeric_limits<double>::infinity(), false};
        LemmaReport mono{"script_M_monotone", n2, std::numeric_limits<double>::infinity(), false};
        for (std::size_t i = 0; i < n2; ++i) {
            MultiplierParams p;
            p.nu = log_uniform(1e-8, 1e-1);
            p.gamma2 = 0.26 + unit(rng) * 10.0;
            p.K = MultiplierParams::default_K(p.gamma2) * (1.0 + unit(rng));
            p.c = 0.125 * (0.01 + 0.99 * unit(rng));
            p.s = 6.0 + 4.0 * unit(rng);
            const int k = rand_k(64);
            const double eta = (2.0 * unit(rng) - 1.0) * 200.0;
            const double t = log_uniform(1e-3, 1e3);
            const double c0v = c0(p.K);
            const double M = script_M(t, k, eta, p);
            bounds.worst = std::min(bounds.worst, std::min((M - c0v) / c0v, 1.0 - M));
            const double ratio = calA(t, k, eta, p) /
                                 (std::exp(p.c * std::cbrt(p.nu) * t) * std::pow(japanese(k, eta), p.s));
            a_bounds.worst = std::min(a_bounds.worst, std::min((ratio - c0v) / c0v, 1.0 - ratio));
            const double M_later = script_M(t * (1.0 + unit(rng)), k, eta, p);
            mono.worst = std::min(mono.worst, M - M_later);
        }
        bounds.pass = bounds.worst >= -1e-12;
        a_bounds.pass = a_bounds.worst >= -1e-12;
        mono.pass = mono.worst >= -1e-12;
        out.push_back(bounds);
        out.push_back(a_bounds);
        out.push_back(mono);
    }

    {
        LemmaReport r{"m_bounds", n2, std::numeric_limits<double>::infinity(), false};
        const double lo = m_min() * (1.0 - 1e-6);
        for (std::size_t i = 0; i < n2; ++i) {
            const double eta = (unit(rng) < 0.5 ? -1.0 : 1.0) * log_uniform(1.0, 1e4);
            const double t = unit(rng) * 2.5 * std::abs(eta);
            const double m = m_zero_mode(t, eta);
            r.worst = std::min(r.worst, std::min((m - lo) / lo, 1.0 - m));
        }
        r.pass = r.worst >= -1e-12;
        out.push_back(r);
    }

    {
        LemmaReport r{"M_lem_ratio", n2, 0.0, false};
        for (std::size_t i = 0; i < n2; ++i) {
            MultiplierParams p;
            p.nu = log_uniform(1e-8, 1e-1);
            p.gamma2 = 1.0;
            p.K = MultiplierParams::default_K(p.gamma2);
            p.s = 6.0;
            const int k = rand_k(64);
            const double eta = (2.0 * unit(rng) - 1.0) * 200.0;
            const double xi = eta + (2.0 * unit(rng) - 1.0) * log_uniform(1e-3, 100.0);
            const double t = log_uniform(1e-3, 1e3);
            r.worst = std::max(r.worst, commutator_ratio(t, k, eta, xi, p));
        }
        r.pass = r.worst < 100.0;
        out.push_back(r);
    }

    {
        const std::size_t n3 = std::min<std::size_t>(samples, 2000);
        LemmaReport r{"finite_difference", 4 * n3, 0.0, false};
        const double h = 1e-3;
        for (std::size_t i = 0; i < n3; ++i) {
            MultiplierParams p;
            p.nu = log_uniform(1e-6, 1e-1);
            const int k = rand_k(16);
            const double eta = (2.0 * unit(rng) - 1.0) * 50.0;
            const double tc = std::max(eta / k, 0.0);
            const double t = std::max(0.01, tc + (2.0 * unit(rng) - 1.0) * 5.0);
            auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
            // M1 is checked where its rate is not in the flat zero region.
            const double r1 = m1_rate(t, k, eta, p);
            if (std::abs(r1) > 1e-3 * std::cbrt(p.nu) * std::cbrt(double(k) * k))
                r.worst = std::max(r.worst, rel(fd([&](double s) { return m1(s, k, eta, p); }, t, h), r1));
            r.worst = std::max(r.worst, rel(fd([&](double s) { return m2(s, k, eta); }, t, h), m2_rate(t, k, eta)));
            r.worst = std::max(r.worst, rel(fd([&](double s) { return m3(s, k, eta); }, t, h), m3_rate(t, k, eta)));
            // m: interior point of a resonance interval with room for the stencil.
            const double a = log_uniform(3.0, 1e3);
            const auto parts = resonance_partition(a);
            const auto& iv = parts[static_cast<std::size_t>(unit(rng) * parts.size()) % parts.size()];
            const double hm = std::min(h, (iv.t_hi - iv.t_lo) / 16.0);
            const double tm = iv.t_lo + 4 * hm + unit(rng) * (iv.t_hi - iv.t_lo - 8 * hm);
            r.worst = std::max(r.worst, rel(fd([&](double s) { return m_zero_mode(s, a); }, tm, hm),
                                            m_zero_mode_rate(tm, a)));
        }
        r.pass = r.worst <= 1e-6;
        out.push_back(r);
    }
    return out;
}

}  // namespace couette
