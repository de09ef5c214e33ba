#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace l0comb {

/// Mixing pre-activations are kept in [-5, 5] so the sigmoid/softmax cannot
/// get stuck at an extreme.
inline constexpr double kPreactivationClip = 5.0;

/// Ceiling for the inverse-energy scalars r_in and p_k; reaching it sets the
/// saturation flag on the state.
inline constexpr double kGainMemoryCeiling = 1e12;

/// lambda(a) = 1 / (1 + exp(-a)); strictly increasing, output in (0, 1).
double sigmoid_lambda(double a);

/// Convex output mix lambda*y1 + (1-lambda)*y2. Caller keeps lam in [0, 1];
/// the unconstrained direct-form recursion computes its affine mix inline.
double combine2(double lam, double y1, double y2);

/// Two-filter combiner with gradient-adapted pre-activation.
struct SigmoidCombiner {
    double a = 0.0;     // lambda(0) = 0.5, unbiased start
    double mu_c = 1.0;  // combiner step size
};

/// a <- clip(a + mu_c * e * (y1 - y2) * lambda * (1 - lambda), +-5).
/// Gradient descent on (1/2) e_c^2 in a.
SigmoidCombiner grad_step(const SigmoidCombiner& c, double e, double y1, double y2);

/// Exponentially weighted least-squares minimizer over the full histories
/// (chronological order, most recent sample last, weight beta_f^k counting
/// back from the end):
///   lambda_opt = [sum beta^k y_d^2]^-1 [sum beta^m y_d (d - y2)]
/// Unconstrained; may exit [0, 1]. Throws std::domain_error when every
/// weighted y_d is zero.
double batch_lambda_opt(std::span<const double> y1, std::span<const double> y2,
                        std::span<const double> d, double beta_f);

/// Recursive gain k = (1/beta_f) r_in y_d / (1 + (1/beta_f) y_d^2 r_in).
double rls_gain2(double r_in, double y_d, double beta_f);

/// One step of the unconstrained direct-lambda recursion (validation form).
struct Rls2DirectState {
    double lam = 0.5;
    double r_in = kGainMemoryCeiling;  // effectively unregularized fresh start
    bool saturated = false;
};

struct Rls2DirectStep {
    Rls2DirectState state;
    double y_c = 0.0;
    double e_c = 0.0;
};

/// lam' = lam + k*e_c (not clipped); r_in' = 1/(beta_f/r_in + y_d^2),
/// capped at kGainMemoryCeiling with the saturation flag set.
Rls2DirectStep rls_step2_direct(const Rls2DirectState& s, double y1, double y2,
                                double d, double beta_f);

/// Two-filter RLS-type combiner adapted in the a-domain (production form).
struct RlsCombiner2 {
    double a_opt = 0.0;
    double r_in = 100.0;  // 1/delta with regularization delta = 1e-2
    double beta_f = 0.99;
    bool saturated = false;

    RlsCombiner2() = default;
    explicit RlsCombiner2(double forgetting, double delta = 1e-2);
};

struct Rls2AStep {
    RlsCombiner2 state;
    double y_c = 0.0;
};

/// lambda = sigmoid(a_opt); a_opt' = clip(a_opt + k*e_c, +-5); same gain and
/// r_in recursion as the direct form.
Rls2AStep rls_step2_adomain(const RlsCombiner2& c, double y1, double y2, double d);

/// Numerically stable softmax (max-subtracted); weights positive, sum to 1,
/// invariant under adding a constant to all entries.
std::vector<double> softmax_weights(std::span<const double> phi);

/// M-filter combiner with softmax weights and per-filter RLS-type gains.
struct SoftmaxCombinerM {
    std::vector<double> phi;  // pre-activations, kept mean-centered in [-5, 5]
    std::vector<double> p;    // positive gain memories
    double lambda_f = 0.99;
    bool saturated = false;

    SoftmaxCombinerM() = default;
    SoftmaxCombinerM(std::size_t filters, double forgetting, double delta = 1e-2);
    std::size_t size() const { return phi.size(); }
};

struct SoftmaxStep {
    SoftmaxCombinerM state;
    double y_c = 0.0;
};

/// Per-filter updates with g_k = y_c - y_k and e_k = d - y_k:
///   gain_k = (p_k/lambda_f) g_k / (1 + (p_k/lambda_f) g_k^2)
///   phi_k  += gain_k * e_k
///   p_k    <- 1 / (lambda_f/p_k + g_k^2), capped at kGainMemoryCeiling
/// phi is then centered by its mean (softmax-invariant) and clipped to +-5.
SoftmaxStep m_combiner_step(const SoftmaxCombinerM& c, std::span<const double> y, double d);

}  // namespace l0comb
