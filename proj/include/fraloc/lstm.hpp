#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "fraloc/error.hpp"
#include "fraloc/rng.hpp"

namespace fraloc::lstm {

template <class Scalar>
using Vector = Eigen::VectorX<Scalar>;
template <class Scalar>
using Matrix = Eigen::MatrixX<Scalar>;

/// Gate weights and biases. Each weight matrix is hidden x (hidden + input)
/// and acts on the concatenation [h_prev, x]; the same bundle shape doubles
/// as the gradient container.
template <class Scalar = double>
struct Params {
    Matrix<Scalar> w_f, w_i, w_g, w_o;
    Vector<Scalar> b_f, b_i, b_g, b_o;

    Eigen::Index hidden_size() const { return w_f.rows(); }
    Eigen::Index input_size() const { return w_f.cols() - w_f.rows(); }

    static Params zeros(Eigen::Index input_size, Eigen::Index hidden_size) {
        Params p;
        const Eigen::Index cols = hidden_size + input_size;
        p.w_f = Matrix<Scalar>::Zero(hidden_size, cols);
        p.w_i = Matrix<Scalar>::Zero(hidden_size, cols);
        p.w_g = Matrix<Scalar>::Zero(hidden_size, cols);
        p.w_o = Matrix<Scalar>::Zero(hidden_size, cols);
        p.b_f = Vector<Scalar>::Zero(hidden_size);
        p.b_i = Vector<Scalar>::Zero(hidden_size);
        p.b_g = Vector<Scalar>::Zero(hidden_size);
        p.b_o = Vector<Scalar>::Zero(hidden_size);
        return p;
    }
};

/// Applies fn to every tensor of the bundle in checkpoint order
/// (w_f, b_f, w_i, b_i, w_g, b_g, w_o, b_o).
template <class Scalar, class Fn>
void visit_tensors(Params<Scalar>& p, Fn&& fn) {
    fn(p.w_f);
    fn(p.b_f);
    fn(p.w_i);
    fn(p.b_i);
    fn(p.w_g);
    fn(p.b_g);
    fn(p.w_o);
    fn(p.b_o);
}

template <class Scalar, class Fn>
void visit_tensors(const Params<Scalar>& p, Fn&& fn) {
    fn(p.w_f);
    fn(p.b_f);
    fn(p.w_i);
    fn(p.b_i);
    fn(p.w_g);
    fn(p.b_g);
    fn(p.w_o);
    fn(p.b_o);
}

/// Recurrent state: output vector h and memory cell c.
template <class Scalar = double>
struct State {
    Vector<Scalar> h, c;

    static State zeros(Eigen::Index hidden_size) {
        return {Vector<Scalar>::Zero(hidden_size), Vector<Scalar>::Zero(hidden_size)};
    }
};

/// Per-step gate activations recorded for the backward pass.
/// f, i, o lie in (0, 1); g lies in (-1, 1).
template <class Scalar = double>
struct Gates {
    Vector<Scalar> f, i, g, o;
};

/// One tape entry: everything the backward pass needs about a timestep.
template <class Scalar = double>
struct Step {
    Vector<Scalar> x, h_prev, c_prev;
    Gates<Scalar> gates;
    Vector<Scalar> c;
};

template <class Scalar = double>
using Tape = std::vector<Step<Scalar>>;

namespace detail {

template <class Scalar>
Vector<Scalar> sigmoid(const Vector<Scalar>& z) {
    return ((-z.array()).exp() + Scalar(1)).inverse().matrix();
}

template <class Scalar>
void check_cell_shapes(const Params<Scalar>& params, const State<Scalar>& state,
                       const Vector<Scalar>& x) {
    const Eigen::Index hidden = params.hidden_size();
    const Eigen::Index input = params.input_size();
    if (input < 1 || hidden < 1) throw_validation("lstm shape error: empty parameter bundle");
    bool consistent = true;
    visit_tensors(params, [&](const auto& t) {
        if (t.cols() == 1 && t.rows() == hidden) return;  // bias
        if (t.rows() != hidden || t.cols() != hidden + input) consistent = false;
    });
    if (!consistent) throw_validation("lstm shape error: gate tensors disagree on dimensions");
    if (state.h.size() != hidden || state.c.size() != hidden)
        throw_validation("lstm shape error: state does not match hidden size");
    if (x.size() != input) throw_validation("lstm shape error: input vector size mismatch");
}

}  // namespace detail

/// One cell update:
///   f = sigma(w_f [h, x] + b_f), i = sigma(w_i [h, x] + b_i),
///   g = tanh(w_g [h, x] + b_g), c' = f (*) c + i (*) g,
///   o = sigma(w_o [h, x] + b_o), h' = o (*) tanh(c').
template <class Scalar>
std::pair<State<Scalar>, Gates<Scalar>> cell_forward(const Params<Scalar>& params,
                                                     const State<Scalar>& state,
                                                     const Vector<Scalar>& x) {
    detail::check_cell_shapes(params, state, x);
    const Eigen::Index hidden = params.hidden_size();
    Vector<Scalar> z(hidden + x.size());
    z.head(hidden) = state.h;
    z.tail(x.size()) = x;

    Gates<Scalar> gates;
    gates.f = detail::sigmoid<Scalar>(params.w_f * z + params.b_f);
    gates.i = detail::sigmoid<Scalar>(params.w_i * z + params.b_i);
    gates.g = (params.w_g * z + params.b_g).array().tanh().matrix();
    gates.o = detail::sigmoid<Scalar>(params.w_o * z + params.b_o);

    State<Scalar> next;
    next.c = (gates.f.array() * state.c.array() + gates.i.array() * gates.g.array()).matrix();
    next.h = (gates.o.array() * next.c.array().tanh()).matrix();
    return {std::move(next), std::move(gates)};
}

/// Folds cell_forward over xs from the zero state, recording a tape for
/// backpropagation through time.
template <class Scalar>
std::pair<State<Scalar>, Tape<Scalar>> sequence_forward(const Params<Scalar>& params,
                                                        const std::vector<Vector<Scalar>>& xs) {
    if (xs.empty()) throw_validation("lstm sequence_forward: empty input sequence");
    State<Scalar> state = State<Scalar>::zeros(params.hidden_size());
    Tape<Scalar> tape;
    tape.reserve(xs.size());
    for (const auto& x : xs) {
        auto [next, gates] = cell_forward(params, state, x);
        tape.push_back({x, state.h, state.c, std::move(gates), next.c});
        state = std::move(next);
    }
    return {std::move(state), std::move(tape)};
}

/// Exact reverse-mode differentiation through the taped forward pass.
/// grad_h_final is dL/dh at the last timestep; the return bundle holds
/// dL/d(w_f, b_f, ..., w_o, b_o).
template <class Scalar>
Params<Scalar> sequence_backward(const Params<Scalar>& params, const Tape<Scalar>& tape,
                                 const Vector<Scalar>& grad_h_final) {
    if (tape.empty()) throw_validation("lstm sequence_backward: empty tape");
    const Eigen::Index hidden = params.hidden_size();
    const Eigen::Index input = params.input_size();
    if (grad_h_final.size() != hidden)
        throw_validation("lstm shape error: grad_h_final does not match hidden size");
    for (const auto& step : tape) {
        if (step.x.size() != input || step.h_prev.size() != hidden)
            throw_validation("lstm shape error: tape does not match params");
    }

    Params<Scalar> grads = Params<Scalar>::zeros(input, hidden);
    Vector<Scalar> dh = grad_h_final;
    Vector<Scalar> dc = Vector<Scalar>::Zero(hidden);
    Vector<Scalar> z(hidden + input);

    for (auto it = tape.rbegin(); it != tape.rend(); ++it) {
        const Step<Scalar>& step = *it;
        const auto f = step.gates.f.array();
        const auto i = step.gates.i.array();
        const auto g = step.gates.g.array();
        const auto o = step.gates.o.array();
        const auto tanh_c = step.c.array().tanh();

        const Vector<Scalar> dpre_o = (dh.array() * tanh_c * o * (Scalar(1) - o)).matrix();
        dc.array() += dh.array() * o * (Scalar(1) - tanh_c.square());
        const Vector<Scalar> dpre_f =
            (dc.array() * step.c_prev.array() * f * (Scalar(1) - f)).matrix();
        const Vector<Scalar> dpre_i = (dc.array() * g * i * (Scalar(1) - i)).matrix();
        const Vector<Scalar> dpre_g = (dc.array() * i * (Scalar(1) - g.square())).matrix();

        z.head(hidden) = step.h_prev;
        z.tail(input) = step.x;
        grads.w_f.noalias() += dpre_f * z.transpose();
        grads.w_i.noalias() += dpre_i * z.transpose();
        grads.w_g.noalias() += dpre_g * z.transpose();
        grads.w_o.noalias() += dpre_o * z.transpose();
        grads.b_f += dpre_f;
        grads.b_i += dpre_i;
        grads.b_g += dpre_g;
        grads.b_o += dpre_o;

        Vector<Scalar> dz = params.w_f.transpose() * dpre_f;
        dz.noalias() += params.w_i.transpose() * dpre_i;
        dz.noalias() += params.w_g.transpose() * dpre_g;
        dz.noalias() += params.w_o.transpose() * dpre_o;
        dh = dz.head(hidden);
        dc.array() *= f;
    }
    return grads;
}

/// Adaptive-moment update hyperparameters.
struct AdamConfig {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First/second moment accumulators shared across one training run.
/// v_max carries the running maximum of the bias-corrected second moment,
/// which keeps the effective step from growing as gradients shrink near a
/// minimum (full-batch Adam can otherwise blow a converged fit apart).
template <class Scalar = double>
struct AdamState {
    Params<Scalar> m, v, v_max;
    long step = 0;

    static AdamState zeros_like(const Params<Scalar>& params) {
        AdamState s;
        s.m = Params<Scalar>::zeros(params.input_size(), params.hidden_size());
        s.v = Params<Scalar>::zeros(params.input_size(), params.hidden_size());
        s.v_max = Params<Scalar>::zeros(params.input_size(), params.hidden_size());
        return s;
    }
};

/// Bias-corrected moment update of one tensor; `step` counts from 1.
/// Throws a training-divergence error on any non-finite gradient component.
template <class ThetaT, class GradT, class MT, class VT, class WT>
void adam_update(Eigen::MatrixBase<ThetaT>& theta, const Eigen::MatrixBase<GradT>& grad,
                 Eigen::MatrixBase<MT>& m, Eigen::MatrixBase<VT>& v,
                 Eigen::MatrixBase<WT>& v_max, long step, const AdamConfig& config) {
    using Scalar = typename ThetaT::Scalar;
    if (!grad.allFinite())
        throw_numerical("training divergence: non-finite gradient component");
    const Scalar b1 = static_cast<Scalar>(config.beta1);
    const Scalar b2 = static_cast<Scalar>(config.beta2);
    m = b1 * m + (Scalar(1) - b1) * grad;
    v.array() = b2 * v.array() + (Scalar(1) - b2) * grad.array().square();
    const Scalar corr1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(step));
    const Scalar corr2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(step));
    v_max.array() = v_max.array().max(v.array() / corr2);
    theta.array() -= static_cast<Scalar>(config.learning_rate) * (m.array() / corr1) /
                     (v_max.array().sqrt() + static_cast<Scalar>(config.epsilon));
}

/// One optimizer step over the whole gate bundle.
template <class Scalar>
void adam_step(Params<Scalar>& params, const Params<Scalar>& grads, AdamState<Scalar>& state,
               const AdamConfig& config) {
    state.step += 1;
    adam_update(params.w_f, grads.w_f, state.m.w_f, state.v.w_f, state.v_max.w_f, state.step,
                config);
    adam_update(params.b_f, grads.b_f, state.m.b_f, state.v.b_f, state.v_max.b_f, state.step,
                config);
    adam_update(params.w_i, grads.w_i, state.m.w_i, state.v.w_i, state.v_max.w_i, state.step,
                config);
    adam_update(params.b_i, grads.b_i, state.m.b_i, state.v.b_i, state.v_max.b_i, state.step,
                config);
    adam_update(params.w_g, grads.w_g, state.m.w_g, state.v.w_g, state.v_max.w_g, state.step,
                config);
    adam_update(params.b_g, grads.b_g, state.m.b_g, state.v.b_g, state.v_max.b_g, state.step,
                config);
    adam_update(params.w_o, grads.w_o, state.m.w_o, state.v.w_o, state.v_max.w_o, state.step,
                config);
    adam_update(params.b_o, grads.b_o, state.m.b_o, state.v.b_o, state.v_max.b_o, state.step,
                config);
}

/// Gate biases at init follow a remember-by-default, write-sparingly
/// policy. The forget bias keeps sigma(b_f)^50 ~ 0.09, so features seen
/// tens of steps before the end of a sequence still reach the readout
/// (sigma(1)^50 ~ 1e-7 would erase them). The negative input bias keeps
/// the cell from drifting into tanh saturation over hundreds of steps:
/// the stationary cell scale is sigma(b_i)/(1 - sigma(b_f)), which stays
/// O(1) with this pairing.
inline constexpr double kForgetBiasInit = 3.0;
inline constexpr double kInputBiasInit = -3.0;

/// Seeded initialization: weights uniform in +/- 1/sqrt(hidden + input),
/// forget-gate bias kForgetBiasInit, remaining biases 0. Draw order is
/// row-major per tensor in checkpoint order, so a seed pins every
/// coefficient.
template <class Scalar>
Params<Scalar> init_params(Eigen::Index input_size, Eigen::Index hidden_size, Rng& rng) {
    Params<Scalar> params = Params<Scalar>::zeros(input_size, hidden_size);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size + input_size));
    auto fill = [&](Matrix<Scalar>& w) {
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                w(r, c) = static_cast<Scalar>(rng.uniform(-bound, bound));
    };
    fill(params.w_f);
    fill(params.w_i);
    fill(params.w_g);
    fill(params.w_o);
    params.b_f.setConstant(static_cast<Scalar>(kForgetBiasInit));
    params.b_i.setConstant(static_cast<Scalar>(kInputBiasInit));
    return params;
}

}  // namespace fraloc::lstm
