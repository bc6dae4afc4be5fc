#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dptune {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Writes `label = value` lines, one per parameter.
void write_labeled_values(const std::filesystem::path& path, const std::vector<std::string>& labels,
                          const std::vector<double>& values);

/// Reads the values back in label order. Throws ConfigError on missing or unknown labels.
std::vector<double> read_labeled_values(const std::filesystem::path& path,
                                        const std::vector<std::string>& labels);

}  // namespace dptune
