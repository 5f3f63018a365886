#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include "fraloc/error.hpp"

namespace fraloc::metrics {

template <class Scalar>
using Vector = Eigen::VectorX<Scalar>;

/// Real (X) and predicted (Y) value vectors of equal length.
template <class Scalar = double>
struct PairedSeries {
    Vector<Scalar> real_values;
    Vector<Scalar> predicted_values;
};

namespace detail {

template <class Scalar>
void check_lengths(const Eigen::Ref<const Vector<Scalar>>& x,
                   const Eigen::Ref<const Vector<Scalar>>& y, Eigen::Index min_len) {
    if (x.size() != y.size()) throw_validation("metrics shape error: series lengths differ");
    if (x.size() < min_len) throw_validation("metrics: series too short");
}

}  // namespace detail

/// Pearson correlation coefficient. Returns nullopt (the undefined flag)
/// when either series has zero variance; otherwise a value clamped to
/// [-1, 1].
template <class Scalar>
std::optional<Scalar> correlation(const Eigen::Ref<const Vector<Scalar>>& x,
                                  const Eigen::Ref<const Vector<Scalar>>& y) {
    detail::check_lengths<Scalar>(x, y, 2);
    const Scalar mean_x = x.mean();
    const Scalar mean_y = y.mean();
    const auto dx = x.array() - mean_x;
    const auto dy = y.array() - mean_y;
    const Scalar ss_x = dx.square().sum();
    const Scalar ss_y = dy.square().sum();
    if (ss_x == Scalar(0) || ss_y == Scalar(0)) return std::nullopt;
    const Scalar r = (dx * dy).sum() / std::sqrt(ss_x * ss_y);
    return std::clamp(r, Scalar(-1), Scalar(1));
}

/// Mean squared error (1/T) sum (X_t - Y_t)^2.
template <class Scalar>
Scalar mse(const Eigen::Ref<const Vector<Scalar>>& x, const Eigen::Ref<const Vector<Scalar>>& y) {
    detail::check_lengths<Scalar>(x, y, 1);
    return (x - y).array().square().mean();
}

template <class Scalar>
Scalar rmse(const Eigen::Ref<const Vector<Scalar>>& x, const Eigen::Ref<const Vector<Scalar>>& y) {
    return std::sqrt(mse<Scalar>(x, y));
}

template <class Scalar>
std::optional<Scalar> correlation(const PairedSeries<Scalar>& series) {
    return correlation<Scalar>(series.real_values, series.predicted_values);
}

template <class Scalar>
Scalar mse(const PairedSeries<Scalar>& series) {
    return mse<Scalar>(series.real_values, series.predicted_values);
}

template <class Scalar>
Scalar rmse(const PairedSeries<Scalar>& series) {
    return rmse<Scalar>(series.real_values, series.predicted_values);
}

/// The R / MSE / RMSE triple of an evaluation.
struct Metrics {
    std::optional<double> r;
    double mse = 0.0;
    double rmse = 0.0;
};

template <class Scalar>
Metrics evaluate(const PairedSeries<Scalar>& series) {
    Metrics m;
    const auto r = correlation<Scalar>(series);
    if (r) m.r = static_cast<double>(*r);
    m.mse = static_cast<double>(mse<Scalar>(series));
    m.rmse = std::sqrt(m.mse);
    return m;
}

/// Flat key-value block used in evaluation reports.
inline std::string to_kv(const Metrics& m) {
    char buf[128];
    std::string out;
    if (m.r) {
        std::snprintf(buf, sizeof(buf), "r=%.17g\n", *m.r);
    } else {
        std::snprintf(buf, sizeof(buf), "r=undefined\n");
    }
    out += buf;
    std::snprintf(buf, sizeof(buf), "mse=%.17g\n", m.mse);
    out += buf;
    std::snprintf(buf, sizeof(buf), "rmse=%.17g\n", m.rmse);
    out += buf;
    return out;
}

}  // namespace fraloc::metrics
