#pragma once

#include "couette/simulation.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace couette {

struct ToyConfig {
    double alpha = 0.5;
    double beta = 0.75;
    double epsilon = 1.0;
    double nu = 1e-16;
    double t_end = 100.0;

    void validate() const;
};

enum class Verdict { bounded, growth, non_finite };

std::string to_string(Verdict v);

struct ToyResult {
    std::vector<double> t;
    std::vector<double> X2;
    std::vector<double> theta02;
    bool bounded = true;
    Verdict verdict = Verdict::bounded;
    /// max over t of max(|X2|, |theta02|) / max(nu^alpha, nu^beta).
    double max_ratio = 0.0;
    double t_of_max = 0.0;
};

/// RK4 on X' = eps nu^{a-3/4} <t>^{-3/2} th - X, th' = eps nu^{a-1/4} <t>^{-3/2} X - th
/// from (nu^a, nu^b). Integration stops early once the ratio exceeds 1e6.
ToyResult integrate_toy(const ToyConfig& config);

/// Exponents as exact rationals p/q.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d = 1);
    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    bool operator==(const Rational& o) const = default;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct ClosureExponents {
    Rational forcing_X;      // (alpha - 3/4) + alpha + beta
    Rational target_X;       // 2 alpha
    Rational forcing_theta;  // (alpha - 1/4) + alpha + beta
    Rational target_theta;   // 2 beta
};

ClosureExponents closure_exponents(Rational alpha, Rational beta);

enum class SweepMode { toy, full };

struct SweepCell {
    double alpha_or_amplitude = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;
    double nu = 0.0;
};

struct SweepRow {
    SweepCell cell;
    Verdict verdict = Verdict::bounded;
    double max_ratio = 0.0;
    double t_of_max = 0.0;
    std::string error;  // non-empty when the cell failed outright
};

struct SweepOptions {
    SweepMode mode = SweepMode::toy;
    double toy_t_end = 100.0;
    /// Template for full-mode cells; epsilon and nu are taken from the cell
    /// and t_end from 2 nu^{-1/3}.
    SimConfig base{};
    unsigned threads = 0;  // 0: hardware concurrency capped by COUETTE_LAB_THREADS
};

/// Worker count honoring COUETTE_LAB_THREADS.
unsigned worker_count(unsigned requested, std::size_t jobs);

std::vector<SweepRow> sweep(const std::vector<SweepCell>& cells, const SweepOptions& options);

/// Growth-to-bounded flip along a sorted 1-D sweep: the first parameter value
/// whose verdict is bounded with every later value bounded. NaN if none.
double flip_point(const std::vector<double>& params, const std::vector<SweepRow>& rows);

}  // namespace couette
