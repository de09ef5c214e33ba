#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace l0comb {

/// Step-size and zero-attractor parameters of one component filter.
/// kappa = 0 degrades the filter to plain LMS exactly.
struct FilterParams {
    double mu = 0.005;   // step size, > 0
    double kappa = 0.0;  // zero-attraction intensity, >= 0
    double beta = 10.0;  // attractor shape, > 0; attraction zone is |w| <= 1/beta

    void validate() const;
    bool operator==(const FilterParams&) const = default;
};

/// Output and a-priori error of one adaptation step: e = d - y.
struct StepOutput {
    double y = 0.0;
    double e = 0.0;
};

/// Tap weights of one adaptive filter. Length is fixed at construction.
struct FilterState {
    std::vector<double> w;
    FilterParams params;

    FilterState(std::size_t length, const FilterParams& p);
    std::size_t length() const { return w.size(); }
};

/// A tap weight became non-finite during an update. The harness augments
/// the message with run/iteration context when it propagates one.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Piecewise zero attractor (first-order Taylor form of the exponential
/// l0-norm surrogate gradient):
///   beta^2*a + beta  for -1/beta <= a < 0
///   beta^2*a - beta  for  0 < a <= 1/beta
///   0                elsewhere and at a = 0 (sgn(0) = 0, so exact zeros stay exact)
double f_beta(double a, double beta);

/// Inner product of the taps with the input window
/// x = [x(n), x(n-1), ..., x(n-L+1)].
double predict(const FilterState& state, std::span<const double> x);

/// Plain LMS step restricted to the masked-in taps (mask entry 1 = update).
StepOutput lms_step(FilterState& state, std::span<const double> x, double d,
                    std::span<const std::uint8_t> mask);

/// l0-LMS step: w_i += mu*e*x_i + kappa*beta*f_beta(w_i) on masked-in taps,
/// masked-out taps untouched. With kappa = 0 the attraction term is skipped
/// entirely so the step is bitwise identical to lms_step.
/// Throws DivergenceError if any updated tap becomes non-finite.
StepOutput l0lms_step(FilterState& state, std::span<const double> x, double d,
                      std::span<const std::uint8_t> mask);

/// Squared deviation ||w - w_opt||^2.
double msd(std::span<const double> w, std::span<const double> w_opt);

}  // namespace l0comb
