#pragma once

#include <Eigen/Dense>

#include <vector>

#include "fraloc/winding.hpp"

namespace fraloc {

/// Fixed-length log-log resampling window shared by training and inference.
struct EncodingSpec {
    Eigen::Index n_steps = 200;
    double f_min_hz = kDefaultFreqMinHz;
    double f_max_hz = kDefaultFreqMaxHz;
};

/// Frozen normalization constants, fitted on training data only.
struct NormConstants {
    double mean = 0.0;
    double std_dev = 1.0;
};

/// Scalar input sequence for the classifier (input_size = 1).
struct EncodedSequence {
    Eigen::VectorXd steps;
    bool floored = false;  ///< a magnitude was floored to 1e-300 before log10
};

/// Floor applied to magnitudes before taking log10.
inline constexpr double kMagnitudeFloor = 1e-300;

/// Resamples log10(magnitude) at spec.n_steps log-spaced frequencies via
/// linear interpolation in log-frequency. No normalization. Sets *floored
/// when any curve magnitude was raised to kMagnitudeFloor.
/// Throws: invalid-argument for n_steps < 2; coverage error when the curve
/// span does not contain [f_min_hz, f_max_hz].
Eigen::VectorXd resample_log_curve(const FrequencyResponse& fr, const EncodingSpec& spec,
                                   bool* floored = nullptr);

/// resample_log_curve followed by (x - mean) / std_dev.
EncodedSequence encode_curve(const FrequencyResponse& fr, const EncodingSpec& spec,
                             const NormConstants& norm);

/// Grand mean / population std over every step of the raw training
/// encodings. A degenerate (constant) corpus gets std_dev = 1.
NormConstants fit_norm_constants(const std::vector<Eigen::VectorXd>& raw_encodings);

}  // namespace fraloc
