#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "l0comb/harness.hpp"

namespace l0comb {

/// Parse or validation failure for the flat key-value config format.
/// Carries the offending key ("" when the problem is not tied to one key)
/// and the 1-based source line (0 when the value did not come from a file
/// line, e.g. a --set override or whole-config validation).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, std::string key, std::size_t line);

    const std::string& key() const { return key_; }
    std::size_t line() const { return line_; }

private:
    std::string key_;
    std::size_t line_;
};

/// Parse a config document: one `key = value` per line, `#` starts a
/// comment, values optionally double-quoted. A `preset` key (with optional
/// `scale`) is consumed first as the base config; all other keys then apply
/// in file order, later assignments overriding earlier ones. The result is
/// fully validated.
ExperimentConfig parse_config(std::string_view text);

/// Apply one `key=value` assignment to an existing config (the CLI's
/// --set). The config is not re-validated here; callers validate once all
/// overrides are in.
void apply_override(ExperimentConfig& cfg, std::string_view assignment);

/// Canonical rendering of a valid config; parse_config(serialize(cfg))
/// reproduces cfg exactly (doubles are written in shortest round-trip
/// form).
std::string serialize(const ExperimentConfig& cfg);

}  // namespace l0comb
