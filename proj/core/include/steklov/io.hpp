#pragma once

// Text artifacts: polyline CSV, hand-written SVG, spectrum and history CSV,
// and JSON fragments of optimizer states.

#include "steklov/fem.hpp"
#include "steklov/geometry.hpp"
#include "steklov/optimizer.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace steklov {

/// "x,y" header then one vertex per line, 17 significant digits so that a
/// reload reproduces the vertices exactly.
void write_polyline_csv(std::ostream& os, const BoundaryPolyline& b);
/// Accepts an optional header line, blank lines and '#' comments. Throws
/// Error("io", ...) on malformed rows or fewer than three vertices.
BoundaryPolyline read_polyline_csv(std::istream& is);
BoundaryPolyline read_polyline_csv(const std::filesystem::path& path);

/// Filled outline, y axis pointing up; diameter pairs drawn as segments when given.
void write_svg(std::ostream& os, const BoundaryPolyline& b, const DiameterReport* diameter = nullptr);

/// "index,sigma" rows for every computed eigenvalue, sigma_0 first.
void write_spectrum_csv(std::ostream& os, const SteklovSpectrum& spec);
void write_history_csv(std::ostream& os, const std::vector<HistoryEntry>& history);

nlohmann::json to_json(const HistoryEntry& h);
nlohmann::json to_json(const DiameterReport& rep);
/// Eigenvalues as a JSON array.
nlohmann::json eigenvalues_json(const SteklovSpectrum& spec);

/// Writes `text` to `path`, creating parent directories. Throws Error("io", ...).
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace steklov
