#pragma once

namespace couette {

/// One time slice of the energy functionals and physical norms.
struct EnergyLedger {
    double t = 0.0;
    double E_neq = 0.0;
    double D = 0.0;
    double ED = 0.0;
    double CK2 = 0.0;
    double CK3 = 0.0;
    double F0 = 0.0;
    double H02 = 0.0;
    double V0 = 0.0;
    double u1_neq = 0.0;
    double u2_neq = 0.0;
    double omega_neq = 0.0;
    double theta_neq = 0.0;

    // Not part of the CSV schema.
    double L_abs = 0.0;          // sum over modes of |linear coupling term|
    double theta0_Hs = 0.0;      // ||theta01 + theta02||_{H^s}
    double X1_Hs = 0.0;          // ||X1||_{H^s}
    double Ntheta_Hs = 0.0;      // || |k|^{1/2} p^{1/4} theta_neq ||_{H^s}
};

}  // namespace couette
