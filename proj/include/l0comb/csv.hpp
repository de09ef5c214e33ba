#pragma once

#include <string>
#include <string_view>

#include "l0comb/harness.hpp"

namespace l0comb {

/// Locale-independent general-format rendering with 12 significant digits
/// (comfortably above the 9 the CSV contract requires).
std::string format_double(double v);

/// Learning-curve CSV: header `iter,msd_f1,...,msd_fM,msd_comb` plus one
/// column per mixing-weight series (`lambda`, or `w1..wM`); one row per
/// iteration; trailing newline. Byte-identical for identical traces.
std::string trace_csv(const MsdTrace& trace);

/// Sweep CSV: header `snr_db,kappa,steady_msd`; rows iterate snr-major in
/// the stored order, kappa in grid order.
std::string sweep_csv(const SweepResult& sweep);

/// Aligned per-segment steady-state summary (dB) for standard output,
/// followed by run counts and the per-filter tap-update cost.
std::string steady_table(const MsdTrace& trace, const SteadySummary& summary);

/// Write text to path (binary, no transformation). Throws
/// std::runtime_error naming the path on failure.
void write_file(const std::string& path, std::string_view text);

}  // namespace l0comb
