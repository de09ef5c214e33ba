#include "l0comb/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

namespace l0comb {

namespace {

std::string locate(const std::string& key, std::size_t line) {
    std::string where;
    if (line > 0) where += "config line " + std::to_string(line);
    if (!key.empty()) {
        if (!where.empty()) where += ", ";
        where += "key '" + key + "'";
    }
    return where.empty() ? where : where + ": ";
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::string_view unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

double parse_double(std::string_view v, const std::string& key, std::size_t line) {
    double out = 0.0;
    const char* last = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), last, out);
    if (v.empty() || ec != std::errc{} || ptr != last)
        throw ConfigError("expected a number, got '" + std::string(v) + "'", key, line);
    if (!std::isfinite(out)) throw ConfigError("value must be finite", key, line);
    return out;
}

std::uint64_t parse_u64(std::string_view v, const std::string& key, std::size_t line) {
    std::uint64_t out = 0;
    const char* last = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), last, out);
    if (v.empty() || ec != std::errc{} || ptr != last)
        throw ConfigError("expected a non-negative integer, got '" + std::string(v) + "'", key,
                          line);
    return out;
}

std::size_t parse_size(std::string_view v, const std::string& key, std::size_t line) {
    return static_cast<std::size_t>(parse_u64(v, key, line));
}

bool parse_bool(std::string_view v, const std::string& key, std::size_t line) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("expected 'true' or 'false', got '" + std::string(v) + "'", key, line);
}

std::vector<SnrSegment> parse_segments(std::string_view v, const std::string& key,
                                       std::size_t line) {
    std::vector<SnrSegment> out;
    std::size_t pos = 0;
    while (pos < v.size()) {
        std::size_t comma = v.find(',', pos);
        if (comma == std::string_view::npos) comma = v.size();
        const std::string_view token = trim(v.substr(pos, comma - pos));
        pos = comma + 1;
        const std::size_t colon = token.find(':');
        if (token.empty() || colon == std::string_view::npos)
            throw ConfigError("expected comma-separated start:snr_db pairs, got '" +
                                  std::string(v) + "'",
                              key, line);
        SnrSegment seg;
        seg.start = parse_size(trim(token.substr(0, colon)), key, line);
        seg.snr_db = parse_double(trim(token.substr(colon + 1)), key, line);
        out.push_back(seg);
    }
    if (out.empty())
        throw ConfigError("expected at least one start:snr_db pair", key, line);
    return out;
}

std::vector<double> parse_double_list(std::string_view v, const std::string& key,
                                      std::size_t line) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < v.size()) {
        std::size_t comma = v.find(',', pos);
        if (comma == std::string_view::npos) comma = v.size();
        const std::string_view token = trim(v.substr(pos, comma - pos));
        pos = comma + 1;
        if (token.empty())
            throw ConfigError("expected comma-separated numbers, got '" + std::string(v) + "'",
                              key, line);
        out.push_back(parse_double(token, key, line));
    }
    if (out.empty()) throw ConfigError("expected at least one number", key, line);
    return out;
}

PolicyKind parse_policy(std::string_view v, const std::string& key, std::size_t line) {
    if (v == "full") return PolicyKind::FullUpdate;
    if (v == "exclusive") return PolicyKind::ExclusiveRotating;
    if (v == "same_subset") return PolicyKind::SameSubsetRotating;
    if (v == "uneven") return PolicyKind::UnevenRotating;
    throw ConfigError("expected one of full, exclusive, same_subset, uneven; got '" +
                          std::string(v) + "'",
                      key, line);
}

CombinerKind parse_combiner(std::string_view v, const std::string& key, std::size_t line) {
    if (v == "none") return CombinerKind::None;
    if (v == "grad_sigmoid") return CombinerKind::GradSigmoid;
    if (v == "rls2") return CombinerKind::Rls2;
    if (v == "softmax") return CombinerKind::SoftmaxM;
    throw ConfigError("expected one of none, grad_sigmoid, rls2, softmax; got '" +
                          std::string(v) + "'",
                      key, line);
}

void apply_filter_key(ExperimentConfig& cfg, const std::string& key, std::string_view rest,
                      std::string_view value, std::size_t line) {
    // rest = "<index>.<field>" with a 1-based index into the filter list.
    const std::size_t dot = rest.find('.');
    if (dot == std::string_view::npos) throw ConfigError("unknown key", key, line);
    const std::size_t index = parse_size(rest.substr(0, dot), key, line);
    const std::string_view field = rest.substr(dot + 1);
    if (index < 1 || index > cfg.filters.size())
        throw ConfigError("filter index out of range: have " +
                              std::to_string(cfg.filters.size()) +
                              " filters (set filters.count first)",
                          key, line);
    FilterParams& p = cfg.filters[index - 1];
    if (field == "mu")
        p.mu = parse_double(value, key, line);
    else if (field == "kappa")
        p.kappa = parse_double(value, key, line);
    else if (field == "beta")
        p.beta = parse_double(value, key, line);
    else
        throw ConfigError("unknown key", key, line);
    try {
        p.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what(), key, line);
    }
}

void apply_key(ExperimentConfig& cfg, const std::string& key, std::string_view value,
               std::size_t line) {
    if (key == "scenario.length") {
        cfg.system.length = parse_size(value, key, line);
    } else if (key == "scenario.active_taps") {
        cfg.system.active_taps = parse_size(value, key, line);
    } else if (key == "scenario.tap_value") {
        cfg.system.tap_value = parse_double(value, key, line);
    } else if (key == "scenario.placement_seed") {
        cfg.system.placement_seed = parse_u64(value, key, line);
    } else if (key == "scenario.near_sparse_eps") {
        const double v = parse_double(value, key, line);
        if (v < 0.0) throw ConfigError("must be >= 0", key, line);
        cfg.system.near_sparse_eps = v;
    } else if (key == "scenario.near_sparse_seed") {
        cfg.system.near_sparse_seed = parse_u64(value, key, line);
    } else if (key == "scenario.input_variance") {
        const double v = parse_double(value, key, line);
        if (!(v > 0.0)) throw ConfigError("must be > 0", key, line);
        cfg.input_variance = v;
    } else if (key == "scenario.horizon") {
        const std::size_t v = parse_size(value, key, line);
        if (v == 0) throw ConfigError("must be >= 1", key, line);
        cfg.horizon = v;
    } else if (key == "snr.segments") {
        cfg.snr_schedule = parse_segments(value, key, line);
    } else if (key == "policy") {
        cfg.policy = parse_policy(value, key, line);
    } else if (key == "filters.count") {
        const std::size_t v = parse_size(value, key, line);
        if (v == 0) throw ConfigError("must be >= 1", key, line);
        cfg.filters.resize(v);
    } else if (key.rfind("filters.", 0) == 0) {
        apply_filter_key(cfg, key, std::string_view(key).substr(8), value, line);
    } else if (key == "combiner") {
        cfg.combiner.kind = parse_combiner(value, key, line);
    } else if (key == "combiner.mu_c") {
        const double v = parse_double(value, key, line);
        if (!(v > 0.0)) throw ConfigError("must be > 0", key, line);
        cfg.combiner.mu_c = v;
    } else if (key == "combiner.beta_f") {
        const double v = parse_double(value, key, line);
        if (!(v > 0.0 && v <= 1.0)) throw ConfigError("must be in (0, 1]", key, line);
        cfg.combiner.beta_f = v;
    } else if (key == "combiner.lambda_f") {
        const double v = parse_double(value, key, line);
        if (!(v > 0.0 && v <= 1.0)) throw ConfigError("must be in (0, 1]", key, line);
        cfg.combiner.lambda_f = v;
    } else if (key == "runs") {
        const std::size_t v = parse_size(value, key, line);
        if (v == 0) throw ConfigError("must be >= 1", key, line);
        cfg.runs = v;
    } else if (key == "base_seed") {
        cfg.base_seed = parse_u64(value, key, line);
    } else if (key == "steady_window") {
        const double v = parse_double(value, key, line);
        if (!(v > 0.0 && v < 1.0)) throw ConfigError("must lie in (0, 1)", key, line);
        cfg.steady_window = v;
    } else if (key == "exclude_divergent") {
        cfg.exclude_divergent = parse_bool(value, key, line);
    } else if (key == "invariant_checks") {
        cfg.invariant_checks = parse_bool(value, key, line);
    } else if (key == "sweep.kappa_min") {
        const double v = parse_double(value, key, line);
        if (!(v > 0.0)) throw ConfigError("must be > 0", key, line);
        cfg.sweep.kappa_min = v;
    } else if (key == "sweep.kappa_max") {
        const double v = parse_double(value, key, line);
        if (!(v > 0.0)) throw ConfigError("must be > 0", key, line);
        cfg.sweep.kappa_max = v;
    } else if (key == "sweep.points") {
        cfg.sweep.points = parse_size(value, key, line);
    } else if (key == "sweep.snr_list") {
        cfg.sweep.snr_list = parse_double_list(value, key, line);
    } else {
        throw ConfigError("unknown key", key, line);
    }
}

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

const char* policy_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::FullUpdate:
            return "full";
        case PolicyKind::ExclusiveRotating:
            return "exclusive";
        case PolicyKind::SameSubsetRotating:
            return "same_subset";
        case PolicyKind::UnevenRotating:
            return "uneven";
    }
    throw std::logic_error("policy_name: unknown policy kind");
}

const char* combiner_name(CombinerKind k) {
    switch (k) {
        case CombinerKind::None:
            return "none";
        case CombinerKind::GradSigmoid:
            return "grad_sigmoid";
        case CombinerKind::Rls2:
            return "rls2";
        case CombinerKind::SoftmaxM:
            return "softmax";
    }
    throw std::logic_error("combiner_name: unknown combiner kind");
}

}  // namespace

ConfigError::ConfigError(const std::string& message, std::string key, std::size_t line)
    : std::runtime_error(locate(key, line) + message), key_(std::move(key)), line_(line) {}

ExperimentConfig parse_config(std::string_view text) {
    struct Entry {
        std::string key;
        std::string value;
        std::size_t line;
    };
    std::vector<Entry> entries;
    std::string preset_name;
    std::string scale_name;
    std::size_t preset_line = 0;
    std::size_t scale_line = 0;

    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view raw = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++lineno;

        const std::size_t hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        raw = trim(raw);
        if (raw.empty()) continue;

        const std::size_t eq = raw.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("expected 'key = value'", "", lineno);
        std::string key(trim(raw.substr(0, eq)));
        std::string value(unquote(trim(raw.substr(eq + 1))));
        if (key.empty()) throw ConfigError("empty key", "", lineno);

        if (key == "preset") {
            if (!preset_name.empty()) throw ConfigError("duplicate key", key, lineno);
            preset_name = std::move(value);
            preset_line = lineno;
        } else if (key == "scale") {
            if (!scale_name.empty()) throw ConfigError("duplicate key", key, lineno);
            scale_name = std::move(value);
            scale_line = lineno;
        } else {
            entries.push_back(Entry{std::move(key), std::move(value), lineno});
        }
    }

    ExperimentConfig cfg;
    if (!preset_name.empty()) {
        PresetScale scale = PresetScale::Paper;
        if (!scale_name.empty()) {
            if (scale_name == "desk")
                scale = PresetScale::Desk;
            else if (scale_name != "paper")
                throw ConfigError("expected 'paper' or 'desk', got '" + scale_name + "'",
                                  "scale", scale_line);
        }
        try {
            cfg = preset(preset_name, scale);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(ex.what(), "preset", preset_line);
        }
    } else if (!scale_name.empty()) {
        throw ConfigError("'scale' requires 'preset'", "scale", scale_line);
    }

    for (const Entry& e : entries) apply_key(cfg, e.key, e.value, e.line);

    try {
        cfg.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what(), "", 0);
    }
    return cfg;
}

void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError("expected 'key=value', got '" + std::string(assignment) + "'", "", 0);
    const std::string key(trim(assignment.substr(0, eq)));
    const std::string value(unquote(trim(assignment.substr(eq + 1))));
    if (key.empty()) throw ConfigError("empty key", "", 0);
    if (key == "preset" || key == "scale")
        throw ConfigError("cannot be overridden; use --preset/--scale instead", key, 0);
    apply_key(cfg, key, value, 0);
}

std::string serialize(const ExperimentConfig& cfg) {
    std::string out;
    out.reserve(1024);
    const auto emit = [&out](std::string_view key, std::string_view value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };

    emit("scenario.length", std::to_string(cfg.system.length));
    emit("scenario.active_taps", std::to_string(cfg.system.active_taps));
    emit("scenario.tap_value", shortest(cfg.system.tap_value));
    emit("scenario.placement_seed", std::to_string(cfg.system.placement_seed));
    emit("scenario.near_sparse_eps", shortest(cfg.system.near_sparse_eps));
    emit("scenario.near_sparse_seed", std::to_string(cfg.system.near_sparse_seed));
    emit("scenario.input_variance", shortest(cfg.input_variance));
    emit("scenario.horizon", std::to_string(cfg.horizon));

    std::string segments;
    for (std::size_t i = 0; i < cfg.snr_schedule.size(); ++i) {
        if (i > 0) segments += ',';
        segments += std::to_string(cfg.snr_schedule[i].start);
        segments += ':';
        segments += shortest(cfg.snr_schedule[i].snr_db);
    }
    emit("snr.segments", '"' + segments + '"');

    emit("policy", policy_name(cfg.policy));
    emit("filters.count", std::to_string(cfg.filters.size()));
    for (std::size_t i = 0; i < cfg.filters.size(); ++i) {
        const std::string prefix = "filters." + std::to_string(i + 1) + ".";
        emit(prefix + "mu", shortest(cfg.filters[i].mu));
        emit(prefix + "kappa", shortest(cfg.filters[i].kappa));
        emit(prefix + "beta", shortest(cfg.filters[i].beta));
    }
    emit("combiner", combiner_name(cfg.combiner.kind));
    emit("combiner.mu_c", shortest(cfg.combiner.mu_c));
    emit("combiner.beta_f", shortest(cfg.combiner.beta_f));
    emit("combiner.lambda_f", shortest(cfg.combiner.lambda_f));
    emit("runs", std::to_string(cfg.runs));
    emit("base_seed", std::to_string(cfg.base_seed));
    emit("steady_window", shortest(cfg.steady_window));
    emit("exclude_divergent", cfg.exclude_divergent ? "true" : "false");
    emit("invariant_checks", cfg.invariant_checks ? "true" : "false");

    if (cfg.sweep != SweepSpec{}) {
        emit("sweep.kappa_min", shortest(cfg.sweep.kappa_min));
        emit("sweep.kappa_max", shortest(cfg.sweep.kappa_max));
        emit("sweep.points", std::to_string(cfg.sweep.points));
        std::string list;
        for (std::size_t i = 0; i < cfg.sweep.snr_list.size(); ++i) {
            if (i > 0) list += ',';
            list += shortest(cfg.sweep.snr_list[i]);
        }
        emit("sweep.snr_list", '"' + list + '"');
    }
    return out;
}

}  // namespace l0comb
