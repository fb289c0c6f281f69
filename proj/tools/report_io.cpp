#include "report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "soblab/errors.hpp"

namespace soblab::cli {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv(std::ostream& out, const Series& series) {
  for (std::size_t i = 0; i < series.columns.size(); ++i) {
    if (i) out << ',';
    out << csv_field(series.columns[i]);
  }
  out << "\r\n";
  for (const auto& row : series.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_number(row[i]);
    }
    out << "\r\n";
  }
}

void emit_plot_data(const Series& series, const std::filesystem::path& path) {
  if (series.columns.empty()) {
    throw Error(ErrorKind::Precondition, "series '" + series.name + "' has no columns");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  write_csv(out, series);
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

std::vector<std::filesystem::path> write_report_files(const Report& report, const Json& full,
                                                      const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  const auto json_path = dir / (report.command + ".json");
  {
    std::ofstream out(json_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + json_path.string() + " for writing");
    out << full.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::Io, "failed writing " + json_path.string());
  }
  written.push_back(json_path);
  for (const Series& s : report.series) {
    const auto path = dir / (report.command + "_" + s.name + ".csv");
    emit_plot_data(s, path);
    written.push_back(path);
  }
  return written;
}

}  // namespace soblab::cli
