#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "expms/errors.hpp"

namespace expms {

/// Shortest round-trip decimal form; keeps identical configs byte-identical.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void ensure_directory(const std::filesystem::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigurationError("cannot create directory " + dir.string() + ": " + ec.message());
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header,
            int schema_version = 1)
      : out_(path, std::ios::binary) {
    if (!out_.is_open()) throw ConfigurationError("cannot open " + path.string() + " for writing");
    out_ << "# schema_version " << schema_version << "\n";
    write_strings(header);
  }

  void comment(const std::string& text) { out_ << "# " << text << "\n"; }

  void write_row(const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out_ << ",";
      out_ << format_double(row[i]);
    }
    out_ << "\n";
  }

  void write_strings(const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out_ << ",";
      out_ << row[i];
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> comments;  ///< key/value "# key value" lines
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw ConfigurationError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = line.substr(1);
      const auto pos = body.find_first_not_of(' ');
      if (pos == std::string::npos) continue;
      const auto space = body.find(' ', pos + 1);
      const auto key_end = body.find(' ', pos);
      if (key_end == std::string::npos) {
        table.comments.emplace_back(body.substr(pos), "");
      } else {
        table.comments.emplace_back(body.substr(pos, key_end - pos), body.substr(key_end + 1));
      }
      (void)space;
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!header_seen) {
      table.header = cells;
      header_seen = true;
      continue;
    }
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& c = cells[i];
      const auto res = std::from_chars(c.data(), c.data() + c.size(), row[i]);
      if (res.ec != std::errc()) {
        throw ConfigurationError("malformed numeric cell '" + c + "' in " + path.string());
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace expms
