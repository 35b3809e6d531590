#include "config.h"

#include <pse/error.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace pse::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw Error("config key '" + key + "': cannot parse '" + text + "'");
    }
    return value;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("file missing: " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

RunConfig::RunConfig(CLI::App& sub, std::vector<KeySpec> keys) : keys_(std::move(keys)) {
    sub.add_option("--config", config_file_, "plain-text 'key = value' file; flags override it");
    for (const auto& k : keys_) {
        std::string help = k.help;
        if (!k.default_value.empty()) help += " [default: " + k.default_value + "]";
        sub.add_option("--" + k.name, flag_values_[k.name], help);
    }
}

void RunConfig::resolve() {
    for (const auto& k : keys_) {
        if (!k.default_value.empty()) resolved_[k.name] = k.default_value;
    }
    if (!config_file_.empty()) {
        for (const auto& [key, value] : read_config_file(config_file_)) {
            const bool known = std::any_of(keys_.begin(), keys_.end(),
                                           [&](const KeySpec& k) { return k.name == key; });
            if (!known) throw Error("unknown config key '" + key + "' in " + config_file_);
            resolved_[key] = value;
        }
    }
    for (const auto& [key, value] : flag_values_) {
        if (!value.empty()) resolved_[key] = value;
    }
}

const KeySpec& RunConfig::spec(const std::string& key) const {
    const auto it = std::find_if(keys_.begin(), keys_.end(), [&](const KeySpec& k) { return k.name == key; });
    if (it == keys_.end()) throw Error("internal: undeclared config key '" + key + "'");
    return *it;
}

bool RunConfig::has(const std::string& key) const {
    spec(key);
    return resolved_.count(key) != 0;
}

std::string RunConfig::str(const std::string& key) const {
    spec(key);
    const auto it = resolved_.find(key);
    if (it == resolved_.end()) throw Error("missing required setting '" + key + "'");
    return it->second;
}

double RunConfig::real(const std::string& key) const { return parse_number<double>(key, str(key)); }
int RunConfig::integer(const std::string& key) const { return parse_number<int>(key, str(key)); }
std::uint64_t RunConfig::u64(const std::string& key) const {
    return parse_number<std::uint64_t>(key, str(key));
}

bool RunConfig::flag(const std::string& key) const {
    const std::string v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::filesystem::path RunConfig::path(const std::string& key) const { return str(key); }

std::vector<double> RunConfig::reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(str(key))) out.push_back(parse_number<double>(key, item));
    return out;
}

std::vector<int> RunConfig::integers(const std::string& key) const {
    std::vector<int> out;
    for (const auto& item : split_list(str(key))) out.push_back(parse_number<int>(key, item));
    return out;
}

}  // namespace pse::cli
