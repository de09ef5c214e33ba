#include "l0comb/combiner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace l0comb {

namespace {

double clip_preactivation(double a) {
    return std::clamp(a, -kPreactivationClip, kPreactivationClip);
}

void check_forgetting(double beta_f, const char* who) {
    if (!(beta_f > 0.0) || beta_f > 1.0)
        throw std::invalid_argument(std::string(who) + ": forgetting factor must be in (0, 1]");
}

}  // namespace

double sigmoid_lambda(double a) { return 1.0 / (1.0 + std::exp(-a)); }

double combine2(double lam, double y1, double y2) {
    return lam * y1 + (1.0 - lam) * y2;
}

SigmoidCombiner grad_step(const SigmoidCombiner& c, double e, double y1, double y2) {
    const double lam = sigmoid_lambda(c.a);
    SigmoidCombiner out = c;
    out.a = clip_preactivation(c.a + c.mu_c * e * (y1 - y2) * lam * (1.0 - lam));
    return out;
}

double batch_lambda_opt(std::span<const double> y1, std::span<const double> y2,
                        std::span<const double> d, double beta_f) {
    if (y1.size() != y2.size() || y1.size() != d.size())
        throw std::invalid_argument("batch_lambda_opt: history lengths differ");
    if (y1.empty()) throw std::invalid_argument("batch_lambda_opt: empty history");
    check_forgetting(beta_f, "batch_lambda_opt");
    double num = 0.0;
    double den = 0.0;
    double wk = 1.0;
    for (std::size_t i = y1.size(); i-- > 0;) {
        const double yd = y1[i] - y2[i];
        num += wk * yd * (d[i] - y2[i]);
        den += wk * yd * yd;
        wk *= beta_f;
    }
    if (den == 0.0)
        throw std::domain_error("batch_lambda_opt: all weighted output differences are zero");
    return num / den;
}

double rls_gain2(double r_in, double y_d, double beta_f) {
    const double q = r_in / beta_f;
    return q * y_d / (1.0 + q * y_d * y_d);
}

Rls2DirectStep rls_step2_direct(const Rls2DirectState& s, double y1, double y2,
                                double d, double beta_f) {
    if (!(s.r_in > 0.0)) throw std::invalid_argument("rls_step2_direct: r_in must be > 0");
    check_forgetting(beta_f, "rls_step2_direct");
    const double yd = y1 - y2;
    Rls2DirectStep out;
    out.y_c = s.lam * y1 + (1.0 - s.lam) * y2;  // affine: lam unconstrained
    out.e_c = d - out.y_c;
    const double gain = rls_gain2(s.r_in, yd, beta_f);
    out.state.lam = s.lam + gain * out.e_c;
    out.state.r_in = 1.0 / (beta_f / s.r_in + yd * yd);
    out.state.saturated = s.saturated;
    if (out.state.r_in > kGainMemoryCeiling) {
        out.state.r_in = kGainMemoryCeiling;
        out.state.saturated = true;
    }
    return out;
}

RlsCombiner2::RlsCombiner2(double forgetting, double delta) : beta_f(forgetting) {
    check_forgetting(forgetting, "RlsCombiner2");
    if (!(delta > 0.0)) throw std::invalid_argument("RlsCombiner2: delta must be > 0");
    r_in = 1.0 / delta;
}

Rls2AStep rls_step2_adomain(const RlsCombiner2& c, double y1, double y2, double d) {
    if (!(c.r_in > 0.0)) throw std::invalid_argument("rls_step2_adomain: r_in must be > 0");
    const double lam = sigmoid_lambda(c.a_opt);
    const double yd = y1 - y2;
    Rls2AStep out;
    out.y_c = combine2(lam, y1, y2);
    const double e_c = d - out.y_c;
    const double gain = rls_gain2(c.r_in, yd, c.beta_f);
    out.state = c;
    out.state.a_opt = clip_preactivation(c.a_opt + gain * e_c);
    out.state.r_in = 1.0 / (c.beta_f / c.r_in + yd * yd);
    if (out.state.r_in > kGainMemoryCeiling) {
        out.state.r_in = kGainMemoryCeiling;
        out.state.saturated = true;
    }
    return out;
}

std::vector<double> softmax_weights(std::span<const double> phi) {
    if (phi.empty()) throw std::invalid_argument("softmax_weights: empty input");
    const double m = *std::max_element(phi.begin(), phi.end());
    std::vector<double> out(phi.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
        out[k] = std::exp(phi[k] - m);
        sum += out[k];
    }
    for (double& v : out) v /= sum;
    return out;
}

SoftmaxCombinerM::SoftmaxCombinerM(std::size_t filters, double forgetting, double delta)
    : phi(filters, 0.0), p(filters, 0.0), lambda_f(forgetting) {
    if (filters < 2) throw std::invalid_argument("SoftmaxCombinerM: need at least 2 filters");
    check_forgetting(forgetting, "SoftmaxCombinerM");
    if (!(delta > 0.0)) throw std::invalid_argument("SoftmaxCombinerM: delta must be > 0");
    std::fill(p.begin(), p.end(), 1.0 / delta);
}

SoftmaxStep m_combiner_step(const SoftmaxCombinerM& c, std::span<const double> y, double d) {
    const std::size_t m = c.phi.size();
    if (y.size() != m) throw std::invalid_argument("m_combiner_step: output count mismatch");
    SoftmaxStep out;
    out.state = c;
    const std::vector<double> psi = softmax_weights(c.phi);
    double y_c = 0.0;
    for (std::size_t k = 0; k < m; ++k) y_c += psi[k] * y[k];
    out.y_c = y_c;
    for (std::size_t k = 0; k < m; ++k) {
        if (!(c.p[k] > 0.0)) throw std::invalid_argument("m_combiner_step: p_k must be > 0");
        const double g = y_c - y[k];
        const double q = c.p[k] / c.lambda_f;
        const double gain = q * g / (1.0 + q * g * g);
        const double e_k = d - y[k];
        out.state.phi[k] = c.phi[k] + gain * e_k;
        out.state.p[k] = 1.0 / (c.lambda_f / c.p[k] + g * g);
        if (out.state.p[k] > kGainMemoryCeiling) {
            out.state.p[k] = kGainMemoryCeiling;
            out.state.saturated = true;
        }
    }
    // Center by the mean (free under softmax shift invariance), then clip.
    double mean = 0.0;
    for (double v : out.state.phi) mean += v;
    mean /= static_cast<double>(m);
    for (double& v : out.state.phi) v = clip_preactivation(v - mean);
    return out;
}

}  // namespace l0comb
