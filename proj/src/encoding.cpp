#include "fraloc/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fraloc {

Eigen::VectorXd resample_log_curve(const FrequencyResponse& fr, const EncodingSpec& spec,
                                   bool* floored) {
    if (spec.n_steps < 2) throw_validation("encoding: n_steps must be at least 2");
    if (!(spec.f_min_hz > 0.0) || !(spec.f_max_hz > spec.f_min_hz))
        throw_validation("encoding: invalid frequency span");
    fr.grid.validate();
    if (fr.magnitude.size() != fr.grid.size())
        throw_validation("encoding: curve grid and magnitude lengths differ");

    const double curve_lo = fr.grid.points_hz[0];
    const double curve_hi = fr.grid.points_hz[fr.grid.size() - 1];
    // Tiny relative slack so a span equal up to rounding still qualifies.
    if (spec.f_min_hz < curve_lo * (1.0 - 1e-12) || spec.f_max_hz > curve_hi * (1.0 + 1e-12)) {
        std::ostringstream oss;
        oss << "coverage error: curve span [" << curve_lo << ", " << curve_hi
            << "] Hz does not cover encoding span [" << spec.f_min_hz << ", " << spec.f_max_hz
            << "] Hz";
        throw_validation(oss.str());
    }

    bool any_floored = false;
    Eigen::VectorXd log_mag(fr.magnitude.size());
    for (Eigen::Index i = 0; i < fr.magnitude.size(); ++i) {
        double m = fr.magnitude[i];
        if (!(m > kMagnitudeFloor)) {
            m = kMagnitudeFloor;
            any_floored = true;
        }
        log_mag[i] = std::log10(m);
    }
    if (floored != nullptr) *floored = any_floored;

    const double log_min = std::log(spec.f_min_hz);
    const double log_max = std::log(spec.f_max_hz);
    const auto& f = fr.grid.points_hz;

    Eigen::VectorXd out(spec.n_steps);
    for (Eigen::Index i = 0; i < spec.n_steps; ++i) {
        double target;
        if (i == 0) {
            target = spec.f_min_hz;
        } else if (i == spec.n_steps - 1) {
            target = spec.f_max_hz;
        } else {
            const double t = static_cast<double>(i) / static_cast<double>(spec.n_steps - 1);
            target = std::exp(log_min + t * (log_max - log_min));
        }
        target = std::clamp(target, curve_lo, curve_hi);

        const double* begin = f.data();
        const double* end = f.data() + f.size();
        const double* hi = std::lower_bound(begin, end, target);
        if (hi == begin) {
            out[i] = log_mag[0];
            continue;
        }
        if (hi == end) {
            out[i] = log_mag[f.size() - 1];
            continue;
        }
        const Eigen::Index hi_idx = hi - begin;
        const Eigen::Index lo_idx = hi_idx - 1;
        const double lf_lo = std::log(f[lo_idx]);
        const double lf_hi = std::log(f[hi_idx]);
        const double t = (std::log(target) - lf_lo) / (lf_hi - lf_lo);
        out[i] = (1.0 - t) * log_mag[lo_idx] + t * log_mag[hi_idx];
    }
    return out;
}

EncodedSequence encode_curve(const FrequencyResponse& fr, const EncodingSpec& spec,
                             const NormConstants& norm) {
    EncodedSequence seq;
    seq.steps = resample_log_curve(fr, spec, &seq.floored);
    seq.steps = (seq.steps.array() - norm.mean) / norm.std_dev;
    return seq;
}

NormConstants fit_norm_constants(const std::vector<Eigen::VectorXd>& raw_encodings) {
    if (raw_encodings.empty()) throw_validation("normalization: empty training corpus");
    double sum = 0.0;
    Eigen::Index count = 0;
    for (const auto& v : raw_encodings) {
        sum += v.sum();
        count += v.size();
    }
    NormConstants norm;
    norm.mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const auto& v : raw_encodings) {
        ss += (v.array() - norm.mean).square().sum();
    }
    norm.std_dev = std::sqrt(ss / static_cast<double>(count));
    if (!(norm.std_dev > 0.0)) norm.std_dev = 1.0;
    return norm;
}

}  // namespace fraloc
