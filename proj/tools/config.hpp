#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wgldos/errors.hpp"
#include "wgldos/ldos.hpp"
#include "wgldos/physical_model.hpp"

namespace wgldos::cli {

/// Config error carrying the source position when one is known (line 0 = unknown).
class ConfigError : public wgldos::ConfigError {
 public:
  ConfigError(const std::string& message, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& bare_message() const { return bare_; }

 private:
  std::string bare_;
  int line_;
  int column_;
};

struct MapGrid {
  double x0_nm, x1_nm;
  int nx;
  double y0_nm, y1_nm;
  int ny;
  std::optional<double> k_z_over_k0;
  std::optional<Vec3> orientation;  ///< empty: orientation trace (sum over x, y, z)
};

/// Fully resolved run description.
struct RunConfig {
  std::string source;  ///< config path
  ldos::Problem problem;
  std::vector<EmitterSpec> emitters;
  /// Configured surface distances (distances_nm), empty for explicit positions.
  std::vector<double> distances_nm;
  ldos::SpectrumOptions spectrum;
  std::optional<MapGrid> map;
  std::string out_dir = ".";
  bool lossless = false;
  /// Resolved config, defaults included, as TOML text.
  std::string resolved;
};

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<int> workers;
  std::optional<double> tol;
  bool lossless = false;
};

/// Parses a TOML file (or JSON when the path ends in .json), validates it against the
/// schema and builds the run. Throws cli::ConfigError for schema problems.
RunConfig load_config(const std::string& path, const Overrides& overrides = {});

/// Same from in-memory text; `json` selects the input syntax.
RunConfig parse_config(const std::string& text, bool json, const std::string& source_name,
                       const Overrides& overrides = {});

}  // namespace wgldos::cli
