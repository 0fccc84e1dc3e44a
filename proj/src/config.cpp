#include "ccfir/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace ccfir {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

Config Config::parse_string(const std::string& text) {
    Config config;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key_part = trim(line.substr(0, eq));
        if (key_part.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        const std::string key = section.empty() ? key_part : section + "." + key_part;
        if (config.values_.count(key))
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key " + key);
        config.values_[key] = trim(line.substr(eq + 1));
    }
    return config;
}

std::string Config::get_str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

std::string Config::get_str(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_str(key) : fallback;
}

double Config::get_double(const std::string& key) const {
    const std::string raw = get_str(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not a number: " + raw);
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key) const {
    const std::string raw = get_str(key);
    try {
        std::size_t used = 0;
        if (!raw.empty() && raw.front() == '-') throw std::invalid_argument(raw);
        const std::uint64_t v = std::stoull(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not a non-negative integer: " + raw);
    }
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
}

bool Config::get_bool(const std::string& key) const {
    const std::string raw = get_str(key);
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    throw ConfigError("config key " + key + ": not a boolean: " + raw);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

std::vector<std::string> Config::get_str_list(const std::string& key) const {
    const std::string raw = get_str(key);
    std::vector<std::string> out;
    std::istringstream in(raw);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("config key " + key + ": empty list element");
        out.push_back(item);
    }
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : get_str_list(key)) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": not a number: " + item);
        }
    }
    return out;
}

void Config::require_known(const std::set<std::string>& allowed) const {
    for (const auto& [key, value] : values_)
        if (!allowed.count(key)) throw ConfigError("unknown config key: " + key);
}

}  // namespace ccfir
