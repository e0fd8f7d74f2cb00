#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace policymc {

/// Sectioned key-value configuration text:
///
///   # comment (also //)
///   [section]
///   key = value
///   list = a, b, c
///
/// Keys before the first section header live in the "" section.
struct ConfigFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    std::vector<std::string> get_list(const std::string& section,
                                      const std::string& key) const;
};

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

} // namespace policymc
