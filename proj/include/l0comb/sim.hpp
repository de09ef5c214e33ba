#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace l0comb {

/// One piece of the piecewise-constant noise schedule: from iteration
/// `start` (inclusive) the additive noise realizes `snr_db`.
struct SnrSegment {
    std::size_t start = 0;
    double snr_db = 0.0;

    bool operator==(const SnrSegment&) const = default;
};

/// Unknown system plus input/noise model for one experiment.
struct Scenario {
    std::vector<double> w_opt;
    double input_variance = 1.0;
    std::vector<SnrSegment> snr_schedule;
    std::size_t horizon = 0;

    std::size_t length() const { return w_opt.size(); }
    void validate() const;
};

/// (base_seed, run_index) fully determines every random draw of a run.
struct RngSpec {
    std::uint64_t base_seed = 0;
    std::uint64_t run_index = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Per-run seed: splitmix64(splitmix64(base_seed) + run_index).
std::uint64_t run_seed(const RngSpec& spec);

/// Deterministic N(0,1) stream: mt19937_64 + Box-Muller with cached spare.
/// The stream is a pure function of the seed on every platform (no
/// std::normal_distribution, whose output is implementation-defined).
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : gen_(seed) {}

    double normal();
    double uniform01();  // [0, 1)

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Exactly n_active entries equal `value` at seed-determined distinct
/// positions; all others exactly 0.
std::vector<double> make_sparse_system(std::size_t length, std::size_t n_active,
                                       double value, std::uint64_t placement_seed);

/// Zero entries replaced with independent uniform draws from
/// [-eps, eps] \ {0}; nonzero entries untouched. Requires
/// 0 < eps <= 0.1 * max|w_i|.
std::vector<double> make_near_sparse(const std::vector<double>& w, double eps,
                                     std::uint64_t seed);

/// sigma_v^2 = sigma_x^2 * ||w_opt||^2 * 10^(-snr_db/10).
double noise_variance_for_snr(std::span<const double> w_opt, double sigma_x2,
                              double snr_db);

struct StepSample {
    double x = 0.0;
    double d = 0.0;
};

/// Per-run signal source: draws x(n) ~ N(0, sigma_x^2), v(n) from the active
/// SNR segment, and forms d(n) = w_opt^T [x(n) ... x(n-L+1)] + v(n).
/// The window is zero-initialized (cold start).
class SignalGenerator {
public:
    SignalGenerator(const Scenario& scenario, const RngSpec& rng);

    /// Generates the sample for the current iteration and advances.
    StepSample next();

    /// x(n), x(n-1), ..., x(n-L+1) for the most recently generated sample.
    std::span<const double> window() const { return window_; }

    std::size_t iteration() const { return n_; }

private:
    const Scenario* scenario_;
    std::vector<double> sigma_v_;  // per segment
    std::vector<double> window_;
    GaussianRng rng_;
    double sigma_x_;
    std::size_t segment_ = 0;
    std::size_t n_ = 0;
};

}  // namespace l0comb
