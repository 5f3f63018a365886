#include "fraloc/config.hpp"

#include <cstdlib>
#include <sstream>

#include "fraloc/csv.hpp"

namespace fraloc {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& name) {
    Config config;
    config.name_ = name;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream oss;
            oss << name << ":" << line_no << ": expected 'key = value'";
            throw_validation(oss.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream oss;
            oss << name << ":" << line_no << ": empty key";
            throw_validation(oss.str());
        }
        config.values_[key] = value;
    }
    return config;
}

Config Config::parse_file(const std::string& path) {
    return parse_string(read_text_file(path), path);
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

const std::string& Config::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw_validation(name_ + ": missing key '" + key + "'");
    return it->second;
}

namespace {

double to_double(const std::string& value, const std::string& context) {
    const char* s = value.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *trim(end).c_str() != '\0')
        throw_validation(context + ": not a number: '" + value + "'");
    return v;
}

}  // namespace

double Config::get_double(const std::string& key) const {
    return to_double(raw(key), name_ + " key '" + key + "'");
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const {
    const double v = get_double(key);
    const auto i = static_cast<std::int64_t>(v);
    if (static_cast<double>(i) != v)
        throw_validation(name_ + " key '" + key + "': expected an integer");
    return i;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string& value = raw(key);
    const char* s = value.c_str();
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 10);
    if (end == s || *trim(end).c_str() != '\0')
        throw_validation(name_ + " key '" + key + "': expected an unsigned integer");
    return v;
}

std::vector<double> Config::get_doubles(const std::string& key) const {
    std::istringstream in(raw(key));
    std::vector<double> out;
    std::string token;
    while (in >> token) {
        out.push_back(to_double(token, name_ + " key '" + key + "'"));
    }
    if (out.empty()) throw_validation(name_ + " key '" + key + "': empty array");
    return out;
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        const std::vector<double>& fallback) const {
    return has(key) ? get_doubles(key) : fallback;
}

std::vector<int> Config::get_ints(const std::string& key, const std::vector<int>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<int> out;
    for (const double v : get_doubles(key)) {
        const int i = static_cast<int>(v);
        if (static_cast<double>(i) != v)
            throw_validation(name_ + " key '" + key + "': expected integers");
        out.push_back(i);
    }
    return out;
}

}  // namespace fraloc
