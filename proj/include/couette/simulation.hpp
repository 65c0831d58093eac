#pragma once

#include "couette/ledger.hpp"
#include "couette/multipliers.hpp"
#include "couette/spectral.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace couette {

enum class InitKind { random, wave };

struct SimConfig {
    Grid grid{64, 64, 4.0 * std::numbers::pi};
    double nu = 1e-3;
    double gamma2 = 1.0;
    double epsilon = 0.01;
    double s = 6.0;
    double K = 0.0;  // 0 selects max(3/sigma, 4)
    double c = 0.125;
    std::uint64_t seed = 1;
    double t_end = 10.0;
    double dt = 0.0;  // 0 selects the automatic step
    double dt_out = 0.5;
    bool dealias = true;
    bool nonlinear = true;
    InitKind init = InitKind::random;
    /// Spectral roll-off width of the initial data.
    double kappa = 1.0;

    void validate() const;
    MultiplierParams multiplier_params() const;
};

/// Decomposed state. f_neq and theta_neq keep their k = 0 column at zero;
/// the four zero-mode profiles carry the x-averaged parts.
struct SimState {
    explicit SimState(const Grid& grid);

    double t = 0.0;
    SpectralField f_neq;
    SpectralField theta_neq;
    ZeroModeField f0;
    ZeroModeField theta01;
    ZeroModeField theta02;
    ZeroModeField u0_1;

    const Grid& grid() const { return f_neq.grid(); }
};

struct NonlinearTerms {
    /// u.grad_L f and u.grad_L theta for the full fields. Column k = 0 holds
    /// d_y(u^2 f)_0 and d_y(u^2 theta)_0.
    SpectralField N_f;
    SpectralField N_theta;
    /// d_y(u^2 u^1)_0.
    ZeroModeField N_u0;
    double max_speed = 0.0;
};

/// Time at which k = 1 critical layers leave the retained eta band.
double resolution_time(const Grid& grid);

/// ||u||_{H^{s+1}} + ||theta||_{H^{s+2}} at t = 0 from vorticity and temperature.
double initial_size(const SpectralField& omega, const SpectralField& theta, double s);

class Simulator {
public:
    explicit Simulator(const SimConfig& config);
    ~Simulator();
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    const SimConfig& config() const;
    /// Step actually used (resolves dt = 0).
    double dt() const;
    void set_dt(double dt);

    SimState initialize() const;
    NonlinearTerms nonlinear_term(const SimState& state) const;
    /// Advances by dt (or to t_stop if closer). Throws NumericalAbort on a
    /// CFL violation (state untouched) or a non-finite result.
    void step(SimState& state, double t_stop = -1.0) const;
    double max_speed(const SimState& state) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SimState initialize(const SimConfig& config);
NonlinearTerms nonlinear_term(const SimState& state, const SimConfig& config);
SimState imex_step(const SimState& state, const SimConfig& config);

struct RunOptions {
    std::optional<SimState> resume;
    std::function<void(const SimState&)> on_output;
};

struct RunResult {
    std::vector<EnergyLedger> ledgers;
    std::optional<SimState> final_state;
    double dt = 0.0;
    double t_res = 0.0;
    double t_end = 0.0;
    bool t_end_capped = false;
    bool aborted = false;
    std::string abort_reason;
    double abort_t = 0.0;
    int abort_k = 0;
    int abort_eta_index = 0;
    double suggested_dt = 0.0;
};

RunResult run(const SimConfig& config, const RunOptions& options = {});

struct SnapshotHeader {
    int n_z = 0;
    int n_y = 0;
    double L_y = 0.0;
    double t = 0.0;
    double nu = 0.0;
    double gamma2 = 0.0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

/// Layout: 8-byte magic "CLABSNP1", int32 n_z, int32 n_y, float64 L_y, t,
/// nu, gamma2, epsilon, uint64 seed, then complex64 arrays (re, im as
/// float32) for f_neq and theta_neq (n_y x (n_z/2+1), row-major) and f0,
/// theta01, theta02, u0_1 (n_y each). All little-endian.
void write_snapshot(const std::string& path, const SimState& state, const SimConfig& config);
std::pair<SnapshotHeader, SimState> read_snapshot(const std::string& path);

}  // namespace couette
