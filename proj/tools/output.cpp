#include "output.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace wgldos::cli {

const char* const kVersion = WGLDOS_VERSION;

std::string num(double x) {
  if (x == 0.0) x = 0.0;
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(std::string command, const RunConfig& cfg, std::vector<std::string> columns)
    : command_(std::move(command)), cfg_(cfg), columns_(std::move(columns)) {}

void CsvWriter::row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
  rows_.push_back(std::move(line));
}

std::string CsvWriter::str() const {
  std::ostringstream os;
  os << "# wgldos " << kVersion << ' ' << command_ << '\n';
  os << "# source: " << cfg_.source << '\n';
  os << "# resolved config:\n";
  std::istringstream cfg(cfg_.resolved);
  for (std::string line; std::getline(cfg, line);) os << "#   " << line << '\n';
  for (const auto& c : comments_) os << "# " << c << '\n';
  for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
  os << '\n';
  for (const auto& r : rows_) os << r << '\n';
  return os.str();
}

std::string CsvWriter::write(const std::string& dir, const std::string& name) const {
  return write_file(dir, name, str());
}

std::string write_file(const std::string& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  return path;
}

}  // namespace wgldos::cli
