#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "carl/model.hpp"

namespace carl {

/// Motionless freezes theta and p (with p forced to zero by `integrate`),
/// leaving only the internal atomic state and the probe to evolve.
enum class MotionMode { Full, Motionless };

/// Frozen holds A1 at its initial value; used for single-atom
/// optical-Bloch checks against the adiabatic polarization.
enum class ProbeMode { Dynamic, Frozen };

/// Raised when a non-finite value shows up. `atom` is set when the culprit
/// is a specific atom, `stage` (1..4) when raised inside an RK4 stage.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::optional<std::size_t> atom,
                   std::optional<int> stage)
        : std::runtime_error(what), atom_(atom), stage_(stage) {}

    std::optional<std::size_t> atom() const noexcept { return atom_; }
    std::optional<int> stage() const noexcept { return stage_; }

private:
    std::optional<std::size_t> atom_;
    std::optional<int> stage_;
};

/// Writes d(state)/dtau into `out` (resized as needed). `out.tau` is unused.
using VectorField = std::function<void(const EnsembleState&, EnsembleState&)>;

/// Unchecked right-hand side of the atom-field equations; the hot path.
/// The collective sum runs sequentially in atom order.
void evaluate_rhs(const EnsembleState& state, const SystemParams& params, MotionMode mode,
                  ProbeMode probe, EnsembleState& out);

/// Checked right-hand side. Throws NumericalError naming the first atom
/// with a non-finite component.
EnsembleState rhs(const EnsembleState& state, const SystemParams& params,
                  MotionMode mode = MotionMode::Full, ProbeMode probe = ProbeMode::Dynamic);

/// The model vector field bound to fixed parameters and modes.
VectorField model_field(const SystemParams& params, MotionMode mode,
                        ProbeMode probe = ProbeMode::Dynamic);

/// Classical fourth-order Runge-Kutta with reusable stage buffers.
class Rk4Stepper {
public:
    /// Advances `state` in place by `dtau`. On a non-finite stage the state
    /// is left untouched and NumericalError carries the stage index.
    void step(EnsembleState& state, double dtau, const VectorField& field);

private:
    EnsembleState k1_, k2_, k3_, k4_, tmp_;
};

EnsembleState step_rk4(const EnsembleState& state, const SystemParams& params, double dtau,
                       MotionMode mode = MotionMode::Full,
                       ProbeMode probe = ProbeMode::Dynamic);

struct RunSchedule {
    double dtau = 0.005;
    double tau_end = 0.0;
    std::size_t record_stride = 20;
    std::vector<double> snapshot_times;
};

std::vector<std::string> validate_schedule(const RunSchedule& schedule);

struct Snapshot {
    double tau = 0.0;
    EnsembleState state;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<cplx> a1_series;
    std::vector<cplx> c_series; ///< collective coherence
    std::vector<double> r_series;
    std::vector<double> phi_series;
    std::vector<Snapshot> snapshots;
    EnsembleState final_state;
    bool diverged = false;
    std::string divergence_reason;

    std::size_t size() const noexcept { return times.size(); }
};

/// Any |component| above this aborts a run as diverged.
inline constexpr double kDivergenceThreshold = 1e12;

/// Runs fixed-step RK4 from the given state (tau is reset to 0) to
/// `schedule.tau_end`. The last step is shortened when tau_end is not a
/// multiple of dtau. Samples are taken at step 0, every `record_stride`
/// steps and at the final step; snapshots at the step nearest each
/// requested time.
Trajectory integrate(const EnsembleState& initial, const SystemParams& params,
                     const RunSchedule& schedule, MotionMode mode = MotionMode::Full,
                     ProbeMode probe = ProbeMode::Dynamic);

/// Same stepping as `integrate` with a caller-supplied vector field; used by
/// the self-test to integrate deliberately perturbed equations.
Trajectory integrate_field(const EnsembleState& initial, const VectorField& field,
                           const RunSchedule& schedule, MotionMode mode);

/// Final state only, without recording; the sweep inner loop.
/// Returns std::nullopt on divergence.
std::optional<EnsembleState> evolve(const EnsembleState& initial, const SystemParams& params,
                                    double dtau, double tau_end, MotionMode mode);

/// Probe amplitude rebuilt from the recorded coherence by quadrature of the
/// formally integrated field equation:
///   A1(tau) = e^{(i D21 - kappa) tau} [A1(0) + int_0^tau C(t) e^{(kappa - i D21) t} dt].
/// C is interpolated by the cubic through the four samples around each
/// interval (linear when fewer than four samples exist) and the weighted
/// integral is evaluated by Gauss-Legendre quadrature.
std::vector<cplx> reconstruct_probe(std::span<const cplx> c_series,
                                    std::span<const double> times, cplx a1_0,
                                    const SystemParams& params);

} // namespace carl
