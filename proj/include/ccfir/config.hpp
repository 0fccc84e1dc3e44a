#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccfir {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key=value file with [section] headers; keys are addressed as
// "section.key". Unknown keys are rejected against a declared schema.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_str(const std::string& key) const;
    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<std::string> get_str_list(const std::string& key) const;

    // Throws ConfigError naming the first key outside the schema.
    void require_known(const std::set<std::string>& allowed) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace ccfir
