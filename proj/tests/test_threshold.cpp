#include "doctest.h"

#include "couette/errors.hpp"
#include "couette/threshold.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

using namespace couette;

namespace {

std::vector<double> ladder(double lo, double hi, double step) {
    std::vector<double> v;
    for (int i = 0; lo + i * step <= hi + 1e-12; ++i) v.push_back(lo + i * step);
    return v;
}

struct EnvGuard {
    explicit EnvGuard(const char* value) {
        if (const char* old = std::getenv("COUETTE_LAB_THREADS")) {
            had = true;
            saved = old;
        }
        if (value)
            setenv("COUETTE_LAB_THREADS", value, 1);
        else
            unsetenv("COUETTE_LAB_THREADS");
    }
    ~EnvGuard() {
        if (had)
            setenv("COUETTE_LAB_THREADS", saved.c_str(), 1);
        else
            unsetenv("COUETTE_LAB_THREADS");
    }
    bool had = false;
    std::string saved;
};

}  // namespace

TEST_CASE("toy model verdicts") {
    SUBCASE("zero coupling stays at its initial size") {
        ToyConfig c;
        c.alpha = 0.3;
        c.beta = 0.75;
        c.epsilon = 0.0;
        const auto r = integrate_toy(c);
        CHECK(r.bounded);
        CHECK(r.verdict == Verdict::bounded);
        CHECK(r.max_ratio == doctest::Approx(1.0));
        CHECK(r.t_of_max == 0.0);
        // pure damping
        CHECK(r.X2.back() == doctest::Approx(std::pow(c.nu, c.alpha) * std::exp(-c.t_end)).epsilon(1e-8));
    }
    SUBCASE("critical exponents with small amplitude") {
        ToyConfig c;
        c.alpha = 0.5;
        c.beta = 0.75;
        c.epsilon = 0.01;
        const auto r = integrate_toy(c);
        CHECK(r.bounded);
        CHECK(r.max_ratio < 1.1);
    }
    SUBCASE("subcritical alpha grows") {
        ToyConfig c;
        c.alpha = 0.3;
        c.beta = 0.75;
        c.epsilon = 1.0;
        c.nu = 1e-4;
        const auto r = integrate_toy(c);
        CHECK_FALSE(r.bounded);
        CHECK(r.verdict == Verdict::growth);
        CHECK(r.max_ratio > 10.0);
    }
    SUBCASE("series layout") {
        ToyConfig c;
        c.t_end = 3.0;
        const auto r = integrate_toy(c);
        CHECK(r.t.size() == r.X2.size());
        CHECK(r.t.size() == r.theta02.size());
        CHECK(r.t.front() == 0.0);
        CHECK(r.t.back() == doctest::Approx(3.0).epsilon(1e-14));
        CHECK(r.X2.front() == std::pow(c.nu, c.alpha));
        CHECK(r.theta02.front() == std::pow(c.nu, c.beta));
        for (std::size_t i = 1; i < r.t.size(); ++i) CHECK(r.t[i] > r.t[i - 1]);
    }
}

TEST_CASE("toy parameter validation") {
    auto bad = [](auto mutate) {
        ToyConfig c;
        mutate(c);
        return c;
    };
    CHECK_THROWS_AS(integrate_toy(bad([](ToyConfig& c) { c.nu = 0.0; })), ValidationError);
    CHECK_THROWS_AS(integrate_toy(bad([](ToyConfig& c) { c.nu = 1.0; })), ValidationError);
    CHECK_THROWS_AS(integrate_toy(bad([](ToyConfig& c) { c.alpha = -0.1; })), ValidationError);
    CHECK_THROWS_AS(integrate_toy(bad([](ToyConfig& c) { c.alpha = 0.0; })), ValidationError);
    CHECK_THROWS_AS(integrate_toy(bad([](ToyConfig& c) { c.beta = -1.0; })), ValidationError);
    CHECK_THROWS_AS(integrate_toy(bad([](ToyConfig& c) { c.epsilon = -1.0; })), ValidationError);
    CHECK_THROWS_AS(integrate_toy(bad([](ToyConfig& c) { c.t_end = 0.0; })), ValidationError);
}

TEST_CASE("closure exponents in exact arithmetic") {
    const Rational half(1, 2), three_q(3, 4);
    const auto e = closure_exponents(half, three_q);
    // both forcings close exactly at the critical pair
    CHECK(e.forcing_X == e.target_X);
    CHECK(e.forcing_theta == e.target_theta);
    CHECK(e.target_X == Rational(1));
    CHECK(e.target_theta == Rational(3, 2));

    // alpha below 1/2: the theta forcing beats its target
    const auto lo = closure_exponents(Rational(2, 5), three_q);
    CHECK(lo.forcing_theta - lo.target_theta == Rational(-1, 5));
    CHECK(lo.forcing_X == lo.target_X);

    // beta below 3/4: the X forcing is stronger than its target
    const auto b = closure_exponents(half, Rational(2, 3));
    CHECK((b.forcing_X - b.target_X).value() < 0.0);

    CHECK(Rational(6, -8) == Rational(-3, 4));
    CHECK(Rational(0, 5) == Rational(0));
    CHECK_THROWS_AS(Rational(1, 0), ValidationError);
    CHECK((Rational(1, 3) + Rational(1, 6)) == Rational(1, 2));
    CHECK((Rational(1, 3) * Rational(3, 7)) == Rational(1, 7));
}

namespace {

double alpha_flip(double step, double eps, double nu, std::vector<SweepRow>* out = nullptr) {
    const auto alphas = ladder(0.30, 0.70, step);
    std::vector<SweepCell> cells;
    for (double a : alphas) cells.push_back({a, 0.75, eps, nu});
    auto rows = sweep(cells, {});
    const double f = flip_point(alphas, rows);
    if (out) *out = std::move(rows);
    return f;
}

double beta_flip(double step, double eps, double nu, std::vector<SweepRow>* out = nullptr) {
    const auto betas = ladder(0.55, 0.95, step);
    std::vector<SweepCell> cells;
    for (double b : betas) cells.push_back({0.5, b, eps, nu});
    auto rows = sweep(cells, {});
    const double f = flip_point(betas, rows);
    if (out) *out = std::move(rows);
    return f;
}

void check_monotone(const std::vector<SweepRow>& rows) {
    bool bounded = false;
    for (const auto& r : rows) {
        if (bounded) CHECK(r.verdict == Verdict::bounded);
        bounded = bounded || r.verdict == Verdict::bounded;
    }
}

}  // namespace

TEST_CASE("toy sweep flips on the default grid") {
    const ToyConfig d;
    std::vector<SweepRow> ra, rb;
    CHECK(alpha_flip(0.05, d.epsilon, d.nu, &ra) == doctest::Approx(0.50));
    // finite nu pulls the beta flip below 3/4, see the drift case
    CHECK(beta_flip(0.05, d.epsilon, d.nu, &rb) == doctest::Approx(0.70));
    check_monotone(ra);
    check_monotone(rb);
    CHECK(ra.front().verdict == Verdict::growth);
    CHECK(rb.front().verdict == Verdict::growth);
    CHECK(rb.back().verdict == Verdict::bounded);
}

TEST_CASE("toy flips approach the critical pair as nu decreases") {
    double prev_a = 1.0, prev_b = 1.0;
    for (double nu : {1e-16, 1e-32, 1e-64}) {
        std::vector<SweepRow> ra, rb;
        const double da = std::abs(alpha_flip(0.01, 1.0, nu, &ra) - 0.5);
        const double db = std::abs(beta_flip(0.01, 1.0, nu, &rb) - 0.75);
        CAPTURE(nu);
        check_monotone(ra);
        check_monotone(rb);
        CHECK(da <= prev_a + 1e-9);
        CHECK(db <= prev_b + 1e-9);
        prev_a = da;
        prev_b = db;
    }
    CHECK(prev_a <= 0.01 + 1e-9);
    CHECK(prev_b <= 0.03 + 1e-9);
}

TEST_CASE("sweep bookkeeping") {
    SweepOptions opt;
    CHECK(sweep({}, opt).empty());

    std::vector<SweepCell> cells;
    for (double a : ladder(0.3, 0.7, 0.1))
        for (double b : ladder(0.6, 0.9, 0.1)) cells.push_back({a, b, 1.0, 1e-12});
    opt.threads = 1;
    const auto serial = sweep(cells, opt);
    opt.threads = 4;
    const auto parallel = sweep(cells, opt);
    REQUIRE(serial.size() == cells.size());
    REQUIRE(parallel.size() == cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        CHECK(serial[i].cell.alpha_or_amplitude == cells[i].alpha_or_amplitude);
        CHECK(serial[i].cell.beta == cells[i].beta);
        CHECK(serial[i].verdict == parallel[i].verdict);
        CHECK(serial[i].max_ratio == parallel[i].max_ratio);
        CHECK(serial[i].t_of_max == parallel[i].t_of_max);
    }

    // a failing cell reports an error instead of stopping the sweep
    const auto bad = sweep({{0.5, 0.75, 1.0, 0.0}, {0.5, 0.75, 1.0, 1e-16}}, opt);
    CHECK_FALSE(bad[0].error.empty());
    CHECK(bad[1].error.empty());
    CHECK(bad[1].verdict == Verdict::bounded);

    CHECK(std::isnan(flip_point({}, {})));
    CHECK_THROWS_AS(flip_point({1.0}, {}), ValidationError);
}

TEST_CASE("worker count honours the environment cap") {
    {
        EnvGuard g(nullptr);
        CHECK(worker_count(3, 100) == 3);
        CHECK(worker_count(8, 2) == 2);
        CHECK(worker_count(0, 0) == 1);
        CHECK(worker_count(0, 1000) >= 1);
    }
    {
        EnvGuard g("2");
        CHECK(worker_count(8, 100) == 2);
        CHECK(worker_count(1, 100) == 1);
        CHECK(worker_count(0, 100) <= 2);
    }
    {
        EnvGuard g("junk");
        CHECK(worker_count(5, 100) == 5);
    }
}

TEST_CASE("verdict names") {
    CHECK(to_string(Verdict::bounded) == "bounded");
    CHECK(to_string(Verdict::growth) == "growth");
    CHECK(to_string(Verdict::non_finite) == "non-finite");
}

TEST_CASE("full sweep at small amplitude is bounded") {
    SweepOptions opt;
    opt.mode = SweepMode::full;
    opt.base.grid = Grid(16, 32, 4.0 * std::numbers::pi);
    const double nu = 0.05;
    std::vector<SweepCell> cells;
    for (double eps : {0.01, 0.1}) cells.push_back({eps * std::sqrt(nu), 0.0, eps, nu});
    const auto rows = sweep(cells, opt);
    for (const auto& r : rows) {
        CAPTURE(r.error);
        CHECK(r.error.empty());
        CHECK(r.verdict == Verdict::bounded);
        CHECK(r.max_ratio >= 1.0);
        CHECK(r.max_ratio <= 10.0);
    }
}
