#include "l0comb/filter.hpp"

#include <cmath>

namespace l0comb {

void FilterParams::validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("FilterParams: mu must be > 0");
    if (!(kappa >= 0.0)) throw std::invalid_argument("FilterParams: kappa must be >= 0");
    if (!(beta > 0.0)) throw std::invalid_argument("FilterParams: beta must be > 0");
}

FilterState::FilterState(std::size_t length, const FilterParams& p)
    : w(length, 0.0), params(p) {
    if (length == 0) throw std::invalid_argument("FilterState: length must be >= 1");
    p.validate();
}

double f_beta(double a, double beta) {
    if (a > 0.0 && a <= 1.0 / beta) return beta * beta * a - beta;
    if (a < 0.0 && a >= -1.0 / beta) return beta * beta * a + beta;
    return 0.0;
}

double predict(const FilterState& state, std::span<const double> x) {
    if (x.size() != state.w.size())
        throw std::invalid_argument("predict: window length does not match filter length");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += state.w[i] * x[i];
    return acc;
}

namespace {

StepOutput masked_step(FilterState& state, std::span<const double> x, double d,
                       std::span<const std::uint8_t> mask, bool attract) {
    const std::size_t len = state.w.size();
    if (mask.size() != len)
        throw std::invalid_argument("step: mask length does not match filter length");
    const double y = predict(state, x);
    const double e = d - y;
    const double mue = state.params.mu * e;
    if (attract) {
        const double kb = state.params.kappa * state.params.beta;
        const double beta = state.params.beta;
        for (std::size_t i = 0; i < len; ++i) {
            if (!mask[i]) continue;
            state.w[i] += mue * x[i] + kb * f_beta(state.w[i], beta);
            if (!std::isfinite(state.w[i]))
                throw DivergenceError("tap " + std::to_string(i) + " became non-finite");
        }
    } else {
        for (std::size_t i = 0; i < len; ++i) {
            if (!mask[i]) continue;
            state.w[i] += mue * x[i];
            if (!std::isfinite(state.w[i]))
                throw DivergenceError("tap " + std::to_string(i) + " became non-finite");
        }
    }
    return {y, e};
}

}  // namespace

StepOutput lms_step(FilterState& state, std::span<const double> x, double d,
                    std::span<const std::uint8_t> mask) {
    return masked_step(state, x, d, mask, false);
}

StepOutput l0lms_step(FilterState& state, std::span<const double> x, double d,
                      std::span<const std::uint8_t> mask) {
    // kappa == 0 takes the plain-LMS path so the arithmetic is bit-identical.
    return masked_step(state, x, d, mask, state.params.kappa != 0.0);
}

double msd(std::span<const double> w, std::span<const double> w_opt) {
    if (w.size() != w_opt.size())
        throw std::invalid_argument("msd: vector lengths differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double diff = w[i] - w_opt[i];
        acc += diff * diff;
    }
    return acc;
}

}  // namespace l0comb
