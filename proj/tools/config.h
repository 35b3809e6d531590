#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pse::cli {

struct KeySpec {
    std::string name;
    std::string default_value;  ///< empty means "unset"
    std::string help;
};

/// Settings for one subcommand: defaults, overridden by an optional `key = value`
/// file, overridden by `--key value` flags. Every key is declared up front; anything
/// else in the file is rejected.
class RunConfig {
public:
    RunConfig(CLI::App& sub, std::vector<KeySpec> keys);

    /// Merges file and flags; call after CLI11 has parsed.
    void resolve();

    bool has(const std::string& key) const;
    std::string str(const std::string& key) const;
    double real(const std::string& key) const;
    int integer(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::filesystem::path path(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;
    std::vector<int> integers(const std::string& key) const;

private:
    const KeySpec& spec(const std::string& key) const;

    std::vector<KeySpec> keys_;
    std::map<std::string, std::string> flag_values_;
    std::string config_file_;
    std::map<std::string, std::string> resolved_;
};

/// Parses `key = value` lines; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

}  // namespace pse::cli
