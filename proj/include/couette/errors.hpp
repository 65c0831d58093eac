#pragma once

#include <stdexcept>
#include <string>

namespace couette {

/// Input or configuration rejected before any computation ran.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A spectral field whose stored coefficients break conjugate symmetry or
/// carry Nyquist content.
class CorruptedField : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time integration stopped: non-finite state or a CFL violation.
class NumericalAbort : public std::runtime_error {
public:
    NumericalAbort(const std::string& what, double t, int k, int eta_index,
                   double suggested_dt = 0.0)
        : std::runtime_error(what), t_(t), k_(k), eta_index_(eta_index),
          suggested_dt_(suggested_dt) {}

    double time() const noexcept { return t_; }
    int k() const noexcept { return k_; }
    int eta_index() const noexcept { return eta_index_; }
    /// Non-zero only for CFL rejections.
    double suggested_dt() const noexcept { return suggested_dt_; }

private:
    double t_;
    int k_;
    int eta_index_;
    double suggested_dt_;
};

}  // namespace couette
