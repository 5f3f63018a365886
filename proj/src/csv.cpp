#include "fraloc/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace fraloc {

std::string format_g17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string curve_to_csv(const FrequencyResponse& fr) {
    std::string out = "frequency_hz,magnitude\n";
    for (Eigen::Index i = 0; i < fr.grid.size(); ++i) {
        out += format_g17(fr.grid.points_hz[i]);
        out += ',';
        out += format_g17(fr.magnitude[i]);
        out += '\n';
    }
    return out;
}

void write_curve_csv(const FrequencyResponse& fr, const std::string& path) {
    write_text_file(path, curve_to_csv(fr));
}

namespace {

[[noreturn]] void parse_fail(const std::string& name, std::size_t line, const std::string& what) {
    std::ostringstream oss;
    oss << name << ":" << line << ": " << what;
    throw_validation(oss.str());
}

double parse_double_field(const std::string& field, const std::string& name, std::size_t line) {
    const char* s = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0') parse_fail(name, line, "not a number: '" + field + "'");
    return v;
}

}  // namespace

FrequencyResponse parse_curve_csv(const std::string& text, const std::string& name) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> freqs, mags;

    if (!std::getline(in, line)) parse_fail(name, 1, "empty curve file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "frequency_hz,magnitude")
        parse_fail(name, line_no, "expected header 'frequency_hz,magnitude'");

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) parse_fail(name, line_no, "expected two comma-separated fields");
        freqs.push_back(parse_double_field(line.substr(0, comma), name, line_no));
        mags.push_back(parse_double_field(line.substr(comma + 1), name, line_no));
    }
    if (freqs.empty()) parse_fail(name, line_no, "curve file has no data rows");

    FrequencyResponse fr;
    fr.grid.points_hz = Eigen::Map<const Eigen::VectorXd>(freqs.data(),
                                                          static_cast<Eigen::Index>(freqs.size()));
    fr.magnitude =
        Eigen::Map<const Eigen::VectorXd>(mags.data(), static_cast<Eigen::Index>(mags.size()));
    fr.grid.validate();
    return fr;
}

FrequencyResponse read_curve_csv(const std::string& path) {
    return parse_curve_csv(read_text_file(path), path);
}

std::string train_log_to_csv(const std::vector<TrainLogEntry>& log) {
    std::string out = "epoch,loss,train_accuracy\n";
    for (const auto& entry : log) {
        out += std::to_string(entry.epoch);
        out += ',';
        out += format_g17(entry.loss);
        out += ',';
        out += format_g17(entry.train_accuracy);
        out += '\n';
    }
    return out;
}

void write_train_log_csv(const std::vector<TrainLogEntry>& log, const std::string& path) {
    write_text_file(path, train_log_to_csv(log));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_validation("cannot open file: " + path);
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_validation("cannot open file for writing: " + path);
    out << text;
    if (!out) throw_validation("failed writing file: " + path);
}

}  // namespace fraloc
