#pragma once

#include <string>

#include "config.hpp"

namespace wgldos::cli {

/// spectrum.csv (one emitter) or spectrum_<i>.csv per emitter.
void cmd_spectrum(const RunConfig& cfg);
/// modes.json for the first emitter's spectrum.
void cmd_modes(const RunConfig& cfg);
/// rates.csv, one row per emitter.
void cmd_rates(const RunConfig& cfg);
/// map.csv over the [map] grid at k_SPP.
void cmd_map(const RunConfig& cfg);
/// Built-in oracle suite; returns false on any failure. `quick` uses a 4 nm pitch.
bool cmd_validate(const std::string& out_dir, bool quick, int workers);

}  // namespace wgldos::cli
