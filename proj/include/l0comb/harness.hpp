#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "l0comb/filter.hpp"
#include "l0comb/schedule.hpp"
#include "l0comb/sim.hpp"

namespace l0comb {

enum class CombinerKind { None, GradSigmoid, Rls2, SoftmaxM };

struct CombinerSpec {
    CombinerKind kind = CombinerKind::None;
    double mu_c = 1.0;       // GradSigmoid
    double beta_f = 0.99;    // Rls2
    double lambda_f = 0.99;  // SoftmaxM

    bool operator==(const CombinerSpec&) const = default;
};

/// Recipe for the unknown system; the materialized w_opt is a pure function
/// of these fields, so configs stay small and diffable.
struct SystemSpec {
    std::size_t length = 32;
    std::size_t active_taps = 2;
    double tap_value = 1.0;
    std::uint64_t placement_seed = 7;
    double near_sparse_eps = 0.0;  // 0 = exactly sparse
    std::uint64_t near_sparse_seed = 11;

    std::vector<double> build() const;
    bool operator==(const SystemSpec&) const = default;
};

/// Kappa-sweep definition for the sweep command.
struct SweepSpec {
    double kappa_min = 1e-6;
    double kappa_max = 1e-4;
    std::size_t points = 0;  // 0 = this config defines no sweep
    std::vector<double> snr_list;

    bool operator==(const SweepSpec&) const = default;
};

struct ExperimentConfig {
    SystemSpec system;
    double input_variance = 1.0;
    std::vector<SnrSegment> snr_schedule;
    std::size_t horizon = 0;
    std::vector<FilterParams> filters;
    PolicyKind policy = PolicyKind::FullUpdate;
    CombinerSpec combiner;
    std::size_t runs = 100;
    std::uint64_t base_seed = 1;
    double steady_window = 0.1;
    bool exclude_divergent = false;
    bool invariant_checks = true;
    SweepSpec sweep;

    std::size_t num_filters() const { return filters.size(); }
    Scenario make_scenario() const;
    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

/// Per-iteration records of one run (deviations, mixing weights).
struct RunRecord {
    std::vector<std::vector<double>> filter_msd;  // [M][horizon]
    std::vector<double> comb_msd;                 // [horizon]
    std::vector<std::vector<double>> weights;     // [W][horizon]
};

/// Ensemble-averaged learning curves plus the metadata needed to summarize
/// and serialize them.
struct MsdTrace {
    std::size_t horizon = 0;
    std::size_t num_filters = 0;
    std::vector<std::vector<double>> filter_msd;
    std::vector<double> comb_msd;
    std::vector<std::vector<double>> weights;
    std::vector<std::string> weight_names;  // "lambda", or "w1".."wM", or empty
    std::vector<SnrSegment> segments;
    double steady_window = 0.1;
    std::size_t completed_runs = 0;
    std::size_t divergent_runs = 0;
    std::vector<double> tap_updates_per_iter;  // per filter, from the mask family
};

/// One Monte-Carlo run. Divergence propagates as DivergenceError with
/// run/iteration/filter context.
RunRecord run_single(const ExperimentConfig& cfg, std::uint64_t run_index);

/// Arithmetic mean over run_index of run_single records, accumulated in
/// fixed run-index order. Runs execute in parallel batches when hardware
/// threads are available; the reduction order never changes.
MsdTrace run_ensemble(const ExperimentConfig& cfg);

struct SegmentSummary {
    std::size_t start = 0;
    std::size_t end = 0;  // exclusive
    double snr_db = 0.0;
    std::vector<double> filter_msd;
    double comb_msd = 0.0;
};

struct SteadySummary {
    std::vector<SegmentSummary> segments;
};

/// Mean of each series over the final steady_window fraction of each SNR
/// segment, reported per segment.
SteadySummary steady_state_msd(const MsdTrace& trace);

struct SweepResult {
    std::vector<double> snr_list;
    std::vector<double> kappa_grid;
    std::vector<std::vector<double>> steady_msd;  // [snr][kappa]
};

/// Single-filter l0-LMS steady-state MSD for each (snr, kappa) pair. Each
/// cell replaces the schedule with a fixed-SNR segment and the filter bank
/// with one filter carrying the grid kappa.
SweepResult kappa_sweep(const ExperimentConfig& base, std::span<const double> kappa_grid,
                        std::span<const double> snr_list);

/// Logarithmically spaced grid, endpoints inclusive, ascending.
std::vector<double> log_grid(double lo, double hi, std::size_t points);

enum class PresetScale { Paper, Desk };

/// Named experiment presets (exp1..exp4, pu_compare, uneven) at paper or
/// desk scale. Throws std::invalid_argument for unknown names.
ExperimentConfig preset(std::string_view name, PresetScale scale);

const std::vector<std::string>& preset_names();

}  // namespace l0comb
