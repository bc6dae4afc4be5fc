#include "dptune/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "dptune/errors.hpp"

namespace dptune {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

void write_labeled_values(const std::filesystem::path& path, const std::vector<std::string>& labels,
                          const std::vector<double>& values) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (std::size_t i = 0; i < labels.size() && i < values.size(); ++i) {
    out << labels[i] << " = " << format_double(values[i]) << '\n';
  }
}

std::vector<double> read_labeled_values(const std::filesystem::path& path,
                                        const std::vector<std::string>& labels) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::map<std::string, double> found;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected `label = value` in " + path.string());
    const std::string key = trim(line.substr(0, eq));
    const std::string text = trim(line.substr(eq + 1));
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      throw ConfigError("bad value for " + key + " in " + path.string());
    }
    found[key] = value;
  }
  std::vector<double> values;
  values.reserve(labels.size());
  for (const auto& label : labels) {
    auto it = found.find(label);
    if (it == found.end()) throw ConfigError("missing " + label + " in " + path.string());
    values.push_back(it->second);
    found.erase(it);
  }
  if (!found.empty()) throw ConfigError("unknown label " + found.begin()->first + " in " + path.string());
  return values;
}

}  // namespace dptune
