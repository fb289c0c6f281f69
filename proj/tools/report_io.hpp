#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace soblab::cli {

using Json = nlohmann::ordered_json;

/// One table of numbers with a header row; written as one CSV file.
struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Everything a subcommand produces.
struct Report {
  std::string command;
  bool passed = true;
  Json body = Json::object();
  std::vector<Series> series;
};

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite.
std::string format_number(double x);
/// Quotes a CSV field when it holds a comma, quote, CR or LF.
std::string csv_field(const std::string& text);
void write_csv(std::ostream& out, const Series& series);

/// Writes one series to `path`; throws Error(Io) when the file cannot be written.
void emit_plot_data(const Series& series, const std::filesystem::path& path);

/// Non-finite doubles become strings so the JSON stays valid.
Json number(double x);

/// `<dir>/<command>.json` plus `<dir>/<command>_<series>.csv` per series.
/// Returns the written paths in order.
std::vector<std::filesystem::path> write_report_files(const Report& report, const Json& full,
                                                      const std::filesystem::path& dir);

}  // namespace soblab::cli
