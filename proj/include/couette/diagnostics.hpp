#pragma once

#include "couette/ledger.hpp"
#include "couette/multipliers.hpp"
#include "couette/simulation.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace couette {

/// Ledger evaluation with per-grid caches of the M3 offsets. When gamma2 <= 1/4
/// the good-unknown columns are NaN.
class LedgerComputer {
public:
    LedgerComputer(const Grid& grid, const MultiplierParams& params);
    ~LedgerComputer();
    LedgerComputer(const LedgerComputer&) = delete;
    LedgerComputer& operator=(const LedgerComputer&) = delete;

    EnergyLedger operator()(const SimState& state) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Throws ValidationError when gamma2 <= 1/4.
EnergyLedger compute_ledger(const SimState& state, const MultiplierParams& params);

struct PhysicalNorms {
    double u1_neq = 0.0;
    double u2_neq = 0.0;
    double omega_neq = 0.0;
    double theta_neq = 0.0;
};

PhysicalNorms physical_norms(const SimState& state);

struct RateFit {
    double t1 = 0.0;
    double t2 = 0.0;
    double power_exponent = 0.0;
    double exp_rate = 0.0;  // r in exp(-r nu^{1/3} t)
    double residual = 0.0;  // RMS log misfit
    std::size_t samples = 0;
    bool exp_fitted = false;
};

/// Least squares on log v = a + p log<t> - r nu^{1/3} t over t in [t1, t2].
/// r is fitted only when nu^{1/3} (t2 - t1) >= 0.5; otherwise r = 0.
RateFit fit_rates(std::span<const double> t, std::span<const double> v, double t1, double t2, double nu);

struct AuditConfig {
    double nu = 1e-3;
    double epsilon = 0.01;
    double rate = 1.0 / 12.0;
    double sanity_bound = 1e3;
};

struct AuditEntry {
    std::string name;
    double C = 0.0;
    double rate = 0.0;
    double t_worst = 0.0;
    bool flagged = false;
};

/// Smallest constants making each bound of the main stability estimate hold
/// over the trajectory.
std::vector<AuditEntry> theorem_audit(const std::vector<EnergyLedger>& ledgers, const AuditConfig& config);

struct InequalityCheck {
    std::size_t intervals = 0;
    double worst_excess = 0.0;  // max of lhs - rhs relative to the slack scale
    double t_worst = 0.0;
    bool pass = true;
};

/// dE/dt + D + ED + CK2 + CK3 <= |L| on consecutive ledgers, trapezoidal in
/// time, with slack * (D + ED + CK2 + CK3 + |L|).
InequalityCheck energy_inequality(const std::vector<EnergyLedger>& ledgers, double slack = 0.1);

}  // namespace couette
