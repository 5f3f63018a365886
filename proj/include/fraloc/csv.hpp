#pragma once

#include <string>
#include <vector>

#include "fraloc/classifier.hpp"
#include "fraloc/winding.hpp"

namespace fraloc {

/// %.17g rendering; round-trips every finite double bit-exactly.
std::string format_g17(double value);

// Curve files: one-line header "frequency_hz,magnitude", then one row per
// grid point at full double precision.
std::string curve_to_csv(const FrequencyResponse& fr);
void write_curve_csv(const FrequencyResponse& fr, const std::string& path);

/// Parse errors name the file and 1-based line number.
FrequencyResponse parse_curve_csv(const std::string& text, const std::string& name);
FrequencyResponse read_curve_csv(const std::string& path);

// Training log: header "epoch,loss,train_accuracy".
std::string train_log_to_csv(const std::vector<TrainLogEntry>& log);
void write_train_log_csv(const std::vector<TrainLogEntry>& log, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace fraloc
