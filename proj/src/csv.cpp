#include "l0comb/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace l0comb {

namespace {

double to_db(double msd) { return 10.0 * std::log10(msd); }

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

std::string trace_csv(const MsdTrace& trace) {
    std::string out;
    out.reserve((trace.num_filters + trace.weight_names.size() + 2) * 16 *
                (trace.horizon + 1));

    out += "iter";
    for (std::size_t k = 1; k <= trace.num_filters; ++k) out += ",msd_f" + std::to_string(k);
    out += ",msd_comb";
    for (const std::string& name : trace.weight_names) {
        out += ',';
        out += name;
    }
    out += '\n';

    for (std::size_t n = 0; n < trace.horizon; ++n) {
        out += std::to_string(n);
        for (std::size_t k = 0; k < trace.num_filters; ++k) {
            out += ',';
            out += format_double(trace.filter_msd[k][n]);
        }
        out += ',';
        out += format_double(trace.comb_msd[n]);
        for (std::size_t s = 0; s < trace.weights.size(); ++s) {
            out += ',';
            out += format_double(trace.weights[s][n]);
        }
        out += '\n';
    }
    return out;
}

std::string sweep_csv(const SweepResult& sweep) {
    std::string out = "snr_db,kappa,steady_msd\n";
    for (std::size_t si = 0; si < sweep.snr_list.size(); ++si) {
        for (std::size_t ki = 0; ki < sweep.kappa_grid.size(); ++ki) {
            out += format_double(sweep.snr_list[si]);
            out += ',';
            out += format_double(sweep.kappa_grid[ki]);
            out += ',';
            out += format_double(sweep.steady_msd[si][ki]);
            out += '\n';
        }
    }
    return out;
}

std::string steady_table(const MsdTrace& trace, const SteadySummary& summary) {
    std::ostringstream os;
    os.imbue(std::locale::classic());

    os << std::right << std::setw(14) << "segment" << std::setw(10) << "snr_db";
    for (std::size_t k = 1; k <= trace.num_filters; ++k)
        os << std::setw(14) << ("msd_f" + std::to_string(k) + "_db");
    os << std::setw(14) << "msd_comb_db" << '\n';

    os << std::fixed << std::setprecision(2);
    for (const SegmentSummary& seg : summary.segments) {
        os << std::setw(14) << (std::to_string(seg.start) + ".." + std::to_string(seg.end))
           << std::setw(10) << seg.snr_db;
        for (double v : seg.filter_msd) os << std::setw(14) << to_db(v);
        os << std::setw(14) << to_db(seg.comb_msd) << '\n';
    }

    os << "runs: " << trace.completed_runs << " completed, " << trace.divergent_runs
       << " divergent\n";
    if (!trace.tap_updates_per_iter.empty())
        os << "tap updates per iteration per filter: "
           << format_double(trace.tap_updates_per_iter.front()) << '\n';
    return os.str();
}

void write_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace l0comb
