#include "fraloc/winding.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

namespace fraloc {

namespace {

using Complex = std::complex<double>;

std::string describe(const char* what, double value) {
    std::ostringstream oss;
    oss << what << " (" << value << ")";
    return oss.str();
}

}  // namespace

void WindingModel::validate() const {
    const Eigen::Index n = n_sections();
    if (n < 1) throw_validation("winding model needs at least one section");
    if (series_resistance.size() != n || series_capacitance.size() != n ||
        ground_capacitance.size() != n) {
        throw_validation("winding model per-section arrays have mismatched lengths");
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        if (!(series_inductance[k] > 0.0))
            throw_validation(describe("series inductance must be positive", series_inductance[k]));
        if (!(series_resistance[k] >= 0.0))
            throw_validation(describe("series resistance must be nonnegative", series_resistance[k]));
        if (!(series_capacitance[k] > 0.0))
            throw_validation(describe("series capacitance must be positive", series_capacitance[k]));
        if (!(ground_capacitance[k] > 0.0))
            throw_validation(describe("ground capacitance must be positive", ground_capacitance[k]));
    }
    if (!(measurement_resistance > 0.0))
        throw_validation(describe("measurement resistance must be positive", measurement_resistance));
}

void FrequencyGrid::validate() const {
    if (points_hz.size() < 1) throw_validation("frequency grid is empty");
    if (!(points_hz[0] > 0.0)) throw_validation("frequency grid must exclude DC (f > 0)");
    for (Eigen::Index i = 1; i < points_hz.size(); ++i) {
        if (!(points_hz[i] > points_hz[i - 1]))
            throw_validation("frequency grid must be strictly increasing");
    }
}

WindingModel default_model() { return uniform_model(4); }

WindingModel uniform_model(Eigen::Index n_sections) {
    WindingModel model;
    model.series_inductance = Eigen::VectorXd::Constant(n_sections, 2e-3);
    model.series_resistance = Eigen::VectorXd::Constant(n_sections, 5.0);
    model.series_capacitance = Eigen::VectorXd::Constant(n_sections, 200e-12);
    model.ground_capacitance = Eigen::VectorXd::Constant(n_sections, 1e-9);
    model.measurement_resistance = 50.0;
    return model;
}

WindingModel inject_fault(const WindingModel& model, const FaultSpec& fault) {
    if (fault.section < 1 || fault.section > model.n_sections()) {
        std::ostringstream oss;
        oss << "invalid fault: section " << fault.section << " out of range [1, "
            << model.n_sections() << "]";
        throw_validation(oss.str());
    }
    if (!(fault.depth_mm >= 0.0)) {
        throw_validation(describe("invalid fault: depth_mm must be nonnegative", fault.depth_mm));
    }
    WindingModel faulted = model;
    if (fault.depth_mm > 0.0) {
        faulted.ground_capacitance[fault.section - 1] *= 1.0 + kFaultCgSlopePerMm * fault.depth_mm;
    }
    return faulted;
}

FrequencyGrid log_spaced_grid(double f_min_hz, double f_max_hz, Eigen::Index n_points) {
    if (!(f_min_hz > 0.0)) throw_validation("grid f_min must be positive");
    if (!(f_max_hz > f_min_hz)) throw_validation("grid f_max must exceed f_min");
    if (n_points < 2) throw_validation("grid needs at least two points");
    FrequencyGrid grid;
    grid.points_hz.resize(n_points);
    const double log_min = std::log(f_min_hz);
    const double log_max = std::log(f_max_hz);
    for (Eigen::Index i = 0; i < n_points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n_points - 1);
        grid.points_hz[i] = std::exp(log_min + t * (log_max - log_min));
    }
    // Snap endpoints so grid and encoding spans compare exactly.
    grid.points_hz[0] = f_min_hz;
    grid.points_hz[n_points - 1] = f_max_hz;
    return grid;
}

FrequencyGrid default_grid() {
    return log_spaced_grid(kDefaultFreqMinHz, kDefaultFreqMaxHz, kDefaultGridPoints);
}

double response_at(const WindingModel& model, double f_hz) {
    const Eigen::Index n = model.n_sections();
    const double omega = 2.0 * M_PI * f_hz;
    const Complex j(0.0, 1.0);

    // Branch admittance of section k: series L-R paralleled by Cs.
    std::vector<Complex> branch(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex z_lr(model.series_resistance[k], omega * model.series_inductance[k]);
        branch[k] = 1.0 / z_lr + j * omega * model.series_capacitance[k];
    }

    // Nodal equations at the junction after each section; the head node is
    // pinned to V_i = 1 by the ideal source, so it moves to the RHS of row 0.
    std::vector<Complex> diag(n), lower(n), upper(n), rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        diag[i] = branch[i] + j * omega * model.ground_capacitance[i];
        if (i < n - 1) {
            diag[i] += branch[i + 1];
            upper[i] = -branch[i + 1];
        }
        if (i > 0) lower[i] = -branch[i];
        rhs[i] = Complex(0.0, 0.0);
    }
    diag[n - 1] += 1.0 / model.measurement_resistance;
    rhs[0] = branch[0];

    // Thomas sweep on the tridiagonal system.
    std::vector<Complex> cdiag(diag), crhs(rhs), v(n);
    for (Eigen::Index i = 1; i < n; ++i) {
        const Complex m = lower[i] / cdiag[i - 1];
        cdiag[i] -= m * upper[i - 1];
        crhs[i] -= m * crhs[i - 1];
    }
    v[n - 1] = crhs[n - 1] / cdiag[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i) {
        v[i] = (crhs[i] - upper[i] * v[i + 1]) / cdiag[i];
    }

    // Residual check against the unmodified system.
    double res_sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Complex r = diag[i] * v[i] - rhs[i];
        if (i > 0) r += lower[i] * v[i - 1];
        if (i < n - 1) r += upper[i] * v[i + 1];
        res_sq += std::norm(r);
    }
    const double rel_residual = std::sqrt(res_sq) / std::abs(rhs[0]);
    const double magnitude = std::abs(v[n - 1]) / model.measurement_resistance;
    if (!std::isfinite(rel_residual) || rel_residual > kSolveResidualTolerance ||
        !std::isfinite(magnitude)) {
        std::ostringstream oss;
        oss << "nodal solve failed at " << f_hz << " Hz (relative residual " << rel_residual
            << ")";
        throw_numerical(oss.str());
    }
    return magnitude;
}

FrequencyResponse frequency_response(const WindingModel& model, const FrequencyGrid& grid) {
    model.validate();
    grid.validate();
    FrequencyResponse fr;
    fr.grid = grid;
    fr.magnitude.resize(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        fr.magnitude[i] = response_at(model, grid.points_hz[i]);
    }
    return fr;
}

}  // namespace fraloc
