#pragma once

#include <string>
#include <vector>

namespace carl {

struct SelfTestOptions {
    /// Negates the light-coupling term of d sigma_z / d tau, which breaks
    /// Bloch-sphere conservation. Used to check that the suite can fail.
    bool perturb_inversion_coupling = false;
};

struct SelfTestResult {
    std::string name;
    bool passed = false;
    double value = 0.0;     ///< measured quantity
    double threshold = 0.0; ///< pass boundary for `value`
    std::string detail;
    double seconds = 0.0;
};

/// Small-N invariant checks: Bloch conservation, RK4 order, probe
/// quadrature equivalence, Jacobi-Anger truncation, resonance-kernel limit
/// and the adiabatic polarization. Deterministic; no I/O.
std::vector<SelfTestResult> run_selftest(const SelfTestOptions& options = {});

} // namespace carl
