#include "couette/threshold.hpp"

#include "couette/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <thread>

namespace couette {

void ToyConfig::validate() const {
    if (!(alpha > 0.0)) throw ValidationError("alpha: must be > 0");
    if (!(beta > 0.0)) throw ValidationError("beta: must be > 0");
    if (!(epsilon >= 0.0)) throw ValidationError("epsilon: must be >= 0");
    if (!(nu > 0.0 && nu < 1.0)) throw ValidationError("nu: must satisfy 0 < nu < 1");
    if (!(t_end > 0.0)) throw ValidationError("t_end: must be > 0");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::bounded: return "bounded";
        case Verdict::growth: return "growth";
        case Verdict::non_finite: return "non-finite";
    }
    return "unknown";
}

ToyResult integrate_toy(const ToyConfig& cfg) {
    cfg.validate();
    const double A = cfg.epsilon * std::pow(cfg.nu, cfg.alpha - 0.75);
    const double B = cfg.epsilon * std::pow(cfg.nu, cfg.alpha - 0.25);
    const double size = std::max(std::pow(cfg.nu, cfg.alpha), std::pow(cfg.nu, cfg.beta));
    const double coupling = std::sqrt(A * B);
    auto g = [](double t) { return std::pow(1.0 + t * t, -0.75); };
    auto rhs = [&](double t, double x, double y, double& dx, double& dy) {
        const double gt = g(t);
        dx = A * gt * y - x;
        dy = B * gt * x - y;
    };

    ToyResult r;
    double t = 0.0, x = std::pow(cfg.nu, cfg.alpha), y = std::pow(cfg.nu, cfg.beta);
    auto record = [&]() {
        r.t.push_back(t);
        r.X2.push_back(x);
        r.theta02.push_back(y);
        const double ratio = std::max(std::abs(x), std::abs(y)) / size;
        if (ratio > r.max_ratio) {
            r.max_ratio = ratio;
            r.t_of_max = t;
        }
    };
    record();
    while (t < cfg.t_end) {
        // The fastest local rate is 1 + sqrt(AB) g(t).
        double h = std::min(0.01, 0.2 / (1.0 + coupling * g(t)));
        if (t + h > cfg.t_end) h = cfg.t_end - t;
        double k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
        rhs(t, x, y, k1x, k1y);
        rhs(t + 0.5 * h, x + 0.5 * h * k1x, y + 0.5 * h * k1y, k2x, k2y);
        rhs(t + 0.5 * h, x + 0.5 * h * k2x, y + 0.5 * h * k2y, k3x, k3y);
        rhs(t + h, x + h * k3x, y + h * k3y, k4x, k4y);
        x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
        y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
        t += h;
        if (!std::isfinite(x) || !std::isfinite(y)) {
            r.verdict = Verdict::non_finite;
            r.bounded = false;
            return r;
        }
        record();
        if (r.max_ratio > 1e6) break;
    }
    r.bounded = r.max_ratio <= 10.0;
    r.verdict = r.bounded ? Verdict::bounded : Verdict::growth;
    return r;
}

Rational::Rational(std::int64_t n, std::int64_t d) {
    if (d == 0) throw ValidationError("rational with zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    num = g ? n / g : 0;
    den = g ? d / g : 1;
}

Rational Rational::operator+(const Rational& o) const { return {num * o.den + o.num * den, den * o.den}; }
Rational Rational::operator-(const Rational& o) const { return {num * o.den - o.num * den, den * o.den}; }
Rational Rational::operator*(const Rational& o) const { return {num * o.num, den * o.den}; }

ClosureExponents closure_exponents(Rational a, Rational b) {
    return {(a - Rational(3, 4)) + a + b, Rational(2) * a, (a - Rational(1, 4)) + a + b, Rational(2) * b};
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("COUETTE_LAB_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

namespace {

SweepRow run_cell(const SweepCell& cell, const SweepOptions& opt) {
    SweepRow row{cell, Verdict::bounded, 0.0, 0.0, {}};
    try {
        if (opt.mode == SweepMode::toy) {
            ToyConfig tc{cell.alpha_or_amplitude, cell.beta, cell.epsilon, cell.nu, opt.toy_t_end};
            const ToyResult r = integrate_toy(tc);
            row.verdict = r.verdict;
            row.max_ratio = r.max_ratio;
            row.t_of_max = r.t_of_max;
        } else {
            SimConfig c = opt.base;
            c.nu = cell.nu;
            c.epsilon = cell.epsilon;
            c.t_end = 2.0 / std::cbrt(cell.nu);
            const RunResult r = run(c);
            const double e0 = r.ledgers.empty() ? 0.0 : r.ledgers.front().E_neq;
            for (const auto& L : r.ledgers) {
                const double ratio = e0 > 0.0 ? L.E_neq / e0 : 0.0;
                if (!std::isfinite(ratio) || ratio > row.max_ratio) {
                    row.max_ratio = ratio;
                    row.t_of_max = L.t;
                }
            }
            if (r.aborted)
                row.verdict = Verdict::non_finite;
            else
                row.verdict = row.max_ratio <= 10.0 ? Verdict::bounded : Verdict::growth;
        }
    } catch (const std::exception& e) {
        row.verdict = Verdict::non_finite;
        row.error = e.what();
    }
    return row;
}

}  // namespace

std::vector<SweepRow> sweep(const std::vector<SweepCell>& cells, const SweepOptions& options) {
    std::vector<SweepRow> rows(cells.size());
    if (cells.empty()) return rows;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = run_cell(cells[i], options);
    };
    const unsigned n = worker_count(options.threads, cells.size());
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return rows;
}

double flip_point(const std::vector<double>& params, const std::vector<SweepRow>& rows) {
    if (params.size() != rows.size()) throw ValidationError("flip_point: size mismatch");
    double flip = std::numeric_limits<double>::quiet_NaN();
    bool seen_growth = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].verdict == Verdict::bounded) {
            if (std::isnan(flip) && seen_growth) flip = params[i];
        } else {
            seen_growth = true;
            flip = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return flip;
}

}  // namespace couette
