#include "l0comb/sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace l0comb {

void Scenario::validate() const {
    if (w_opt.empty()) throw std::invalid_argument("Scenario: w_opt must be non-empty");
    bool any = false;
    for (double v : w_opt) any = any || v != 0.0;
    if (!any) throw std::invalid_argument("Scenario: w_opt must be nonzero");
    if (!(input_variance > 0.0))
        throw std::invalid_argument("Scenario: input_variance must be > 0");
    if (horizon < 1) throw std::invalid_argument("Scenario: horizon must be >= 1");
    if (snr_schedule.empty() || snr_schedule.front().start != 0)
        throw std::invalid_argument("Scenario: snr_schedule must start at iteration 0");
    for (std::size_t i = 0; i < snr_schedule.size(); ++i) {
        if (!std::isfinite(snr_schedule[i].snr_db))
            throw std::invalid_argument("Scenario: snr_db must be finite");
        if (snr_schedule[i].start >= horizon && i > 0)
            throw std::invalid_argument("Scenario: segment start must be < horizon");
        if (i > 0 && snr_schedule[i].start <= snr_schedule[i - 1].start)
            throw std::invalid_argument("Scenario: segment starts must be strictly increasing");
    }
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t run_seed(const RngSpec& spec) {
    return splitmix64(splitmix64(spec.base_seed) + spec.run_index);
}

double GaussianRng::uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double GaussianRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] so the log stays finite.
    const double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

std::vector<double> make_sparse_system(std::size_t length, std::size_t n_active,
                                       double value, std::uint64_t placement_seed) {
    if (n_active < 1 || n_active > length)
        throw std::invalid_argument("make_sparse_system: need 0 < n_active <= L");
    std::vector<std::size_t> idx(length);
    for (std::size_t i = 0; i < length; ++i) idx[i] = i;
    std::mt19937_64 gen(placement_seed);
    // Partial Fisher-Yates; the modulo bias is irrelevant for placement.
    for (std::size_t i = 0; i < n_active; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(gen() % (length - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<double> w(length, 0.0);
    for (std::size_t i = 0; i < n_active; ++i) w[idx[i]] = value;
    return w;
}

std::vector<double> make_near_sparse(const std::vector<double>& w, double eps,
                                     std::uint64_t seed) {
    double wmax = 0.0;
    for (double v : w) wmax = std::max(wmax, std::abs(v));
    if (!(eps > 0.0) || eps > 0.1 * wmax)
        throw std::invalid_argument("make_near_sparse: need 0 < eps <= 0.1*max|w_i|");
    std::mt19937_64 gen(seed);
    std::vector<double> out = w;
    for (double& v : out) {
        if (v != 0.0) continue;
        double draw = 0.0;
        do {
            const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
            draw = (2.0 * u - 1.0) * eps;
        } while (draw == 0.0);
        v = draw;
    }
    return out;
}

double noise_variance_for_snr(std::span<const double> w_opt, double sigma_x2,
                              double snr_db) {
    if (!std::isfinite(snr_db))
        throw std::invalid_argument("noise_variance_for_snr: snr_db must be finite");
    double energy = 0.0;
    for (double v : w_opt) energy += v * v;
    const double signal_power = sigma_x2 * energy;
    if (!(signal_power > 0.0))
        throw std::invalid_argument("noise_variance_for_snr: zero system");
    return signal_power * std::pow(10.0, -snr_db / 10.0);
}

SignalGenerator::SignalGenerator(const Scenario& scenario, const RngSpec& rng)
    : scenario_(&scenario),
      window_(scenario.length(), 0.0),
      rng_(run_seed(rng)),
      sigma_x_(std::sqrt(scenario.input_variance)) {
    scenario.validate();
    sigma_v_.reserve(scenario.snr_schedule.size());
    for (const auto& seg : scenario.snr_schedule)
        sigma_v_.push_back(std::sqrt(
            noise_variance_for_snr(scenario.w_opt, scenario.input_variance, seg.snr_db)));
}

StepSample SignalGenerator::next() {
    const auto& schedule = scenario_->snr_schedule;
    while (segment_ + 1 < schedule.size() && n_ >= schedule[segment_ + 1].start) ++segment_;
    const double x = sigma_x_ * rng_.normal();
    for (std::size_t i = window_.size(); i-- > 1;) window_[i] = window_[i - 1];
    window_[0] = x;
    double d = 0.0;
    for (std::size_t i = 0; i < window_.size(); ++i) d += scenario_->w_opt[i] * window_[i];
    d += sigma_v_[segment_] * rng_.normal();
    ++n_;
    return {x, d};
}

}  // namespace l0comb
