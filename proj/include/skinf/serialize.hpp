#pragma once

#include "skinf/models.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace skinf {

/// Shortest text that survives a round trip: 17 significant digits.
std::string format_double(double x);

nlohmann::json bundle_to_json(const ExperimentBundle& b);
/// Throws std::invalid_argument on schema errors. The result is validated.
ExperimentBundle bundle_from_json(const nlohmann::json& j);

/// Field-by-field comparison, exact on all numbers.
bool bundles_equal(const ExperimentBundle& a, const ExperimentBundle& b);

struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

std::string to_csv(const CsvTable& t);
CsvTable parse_csv(const std::string& text);

std::string read_text_file(const std::string& path);
/// Writes atomically enough for our purposes: truncates and throws on failure.
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace skinf
