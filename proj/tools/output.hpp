#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace wgldos::cli {

extern const char* const kVersion;

/// Shortest decimal string that reads back to the same double.
std::string num(double x);

/// CSV table with a '#' provenance header: tool version, command, source file,
/// the resolved config and any extra comment lines.
class CsvWriter {
 public:
  CsvWriter(std::string command, const RunConfig& cfg, std::vector<std::string> columns);

  void comment(const std::string& line) { comments_.push_back(line); }
  void row(const std::vector<std::string>& cells);
  /// Writes to dir/name, creating dir when needed; returns the path.
  std::string write(const std::string& dir, const std::string& name) const;
  std::string str() const;

 private:
  std::string command_;
  const RunConfig& cfg_;
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::string> rows_;
};

/// Writes text to dir/name, creating dir when needed; returns the path.
std::string write_file(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace wgldos::cli
