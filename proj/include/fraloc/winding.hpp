#pragma once

#include <Eigen/Dense>

#include "fraloc/error.hpp"

namespace fraloc {

/// Lumped-parameter ladder model of a sectioned HV winding.
///
/// Each section k is a series L_k-R_k branch in parallel with the section
/// series capacitance Cs_k; the junction node after section k has a ground
/// capacitance Cg_k. The winding head is driven by an ideal unit voltage
/// source and the tail node is terminated in the measurement resistance R_m,
/// through which the ground current I_o is sensed.
struct WindingModel {
    Eigen::VectorXd series_inductance;     ///< L_k per section, henries
    Eigen::VectorXd series_resistance;     ///< R_k per section, ohms
    Eigen::VectorXd series_capacitance;    ///< Cs_k per section, farads
    Eigen::VectorXd ground_capacitance;    ///< Cg_k per section node, farads
    double measurement_resistance = 50.0;  ///< R_m, ohms

    Eigen::Index n_sections() const { return series_inductance.size(); }

    /// Throws a validation error on any invariant breach (empty model,
    /// non-positive L/Cs/Cg/R_m, negative R, mismatched array lengths).
    void validate() const;
};

/// Radial-deformation fault: 1-based section index and deformation depth.
struct FaultSpec {
    int section = 1;
    double depth_mm = 0.0;
};

/// Strictly increasing frequency grid, DC excluded.
struct FrequencyGrid {
    Eigen::VectorXd points_hz;

    Eigen::Index size() const { return points_hz.size(); }
    void validate() const;
};

/// |I_o(f)/V_i(f)| sampled on a grid, units of siemens.
struct FrequencyResponse {
    FrequencyGrid grid;
    Eigen::VectorXd magnitude;
};

/// Ground-capacitance sensitivity of the RD fault mapping:
/// Cg' = Cg * (1 + kFaultCgSlopePerMm * depth_mm).
inline constexpr double kFaultCgSlopePerMm = 0.05;

/// Relative residual bound enforced on every nodal solve.
inline constexpr double kSolveResidualTolerance = 1e-9;

// Default sweep (the full catalog is simulated on this grid).
inline constexpr double kDefaultFreqMinHz = 20.0;
inline constexpr double kDefaultFreqMaxHz = 2.5e6;
inline constexpr Eigen::Index kDefaultGridPoints = 1000;

/// Canonical 4-section model. Parameter values (L = 2 mH, R = 5 ohm,
/// Cs = 200 pF, Cg = 1 nF, R_m = 50 ohm per section) place the dominant
/// resonances inside the default 20 Hz - 2.5 MHz sweep.
WindingModel default_model();

/// Uniform model with n sections and the default per-section values.
WindingModel uniform_model(Eigen::Index n_sections);

/// Returns a copy with Cg of the faulted section scaled by
/// (1 + kFaultCgSlopePerMm * depth_mm); every other field is bit-identical.
/// Throws a validation error for an out-of-range section or negative depth.
WindingModel inject_fault(const WindingModel& model, const FaultSpec& fault);

/// n_points log-spaced frequencies from f_min_hz to f_max_hz inclusive.
FrequencyGrid log_spaced_grid(double f_min_hz, double f_max_hz, Eigen::Index n_points);

FrequencyGrid default_grid();

/// Solves the complex nodal equations of the ladder at one frequency and
/// returns |I_o/V_i|. Throws a numerical error naming the frequency if the
/// tridiagonal solve leaves a relative residual above kSolveResidualTolerance.
double response_at(const WindingModel& model, double f_hz);

/// Full sweep of response_at over the grid. Deterministic: the returned
/// curve is a pure function of (model, grid), independent of evaluation
/// order, and both inputs are safe to share across concurrent callers.
FrequencyResponse frequency_response(const WindingModel& model, const FrequencyGrid& grid);

}  // namespace fraloc
