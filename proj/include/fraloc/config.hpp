#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fraloc/error.hpp"

namespace fraloc {

/// Flat key-value config: one `key = value` per line, `#` comments, blank
/// lines ignored. Values are scalars or whitespace-separated arrays.
class Config {
public:
    static Config parse_string(const std::string& text, const std::string& name = "<config>");
    static Config parse_file(const std::string& path);

    bool has(const std::string& key) const;

    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key,
                                    const std::vector<double>& fallback) const;
    std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;

private:
    const std::string& raw(const std::string& key) const;

    std::string name_;
    std::map<std::string, std::string> values_;
};

}  // namespace fraloc
