#include "steklov/io.hpp"

#include "steklov/errors.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace steklov {

namespace {

constexpr int kDigits = std::numeric_limits<double>::max_digits10;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

void write_polyline_csv(std::ostream& os, const BoundaryPolyline& b) {
    os << "x,y\n" << std::setprecision(kDigits);
    for (const Vec2& v : b.vertices) os << v.x() << ',' << v.y() << '\n';
}

BoundaryPolyline read_polyline_csv(std::istream& is) {
    BoundaryPolyline b;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x = 0.0, y = 0.0;
        std::string rest;
        if (!(row >> x >> y) || (row >> rest)) {
            if (b.vertices.empty() && lineno == 1) continue; // header
            throw Error("io", "malformed polyline row " + std::to_string(lineno) + ": '" + line + "'");
        }
        b.vertices.emplace_back(x, y);
    }
    if (b.size() < 3) throw Error("io", "polyline needs at least three vertices");
    return b;
}

BoundaryPolyline read_polyline_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open " + path.string());
    return read_polyline_csv(in);
}

void write_svg(std::ostream& os, const BoundaryPolyline& b, const DiameterReport* diameter) {
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    if (b.size() > 0) {
        xmin = xmax = b[0].x();
        ymin = ymax = b[0].y();
    }
    for (const Vec2& v : b.vertices) {
        xmin = std::min(xmin, v.x());
        xmax = std::max(xmax, v.x());
        ymin = std::min(ymin, v.y());
        ymax = std::max(ymax, v.y());
    }
    const double extent = std::max({xmax - xmin, ymax - ymin, 1e-12});
    const double scale = 400.0 / extent;
    const double margin = 20.0;
    auto px = [&](const Vec2& v) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(3) << margin + (v.x() - xmin) * scale << ','
          << margin + (ymax - v.y()) * scale;
        return s.str();
    };
    const double w = 2 * margin + (xmax - xmin) * scale;
    const double h = 2 * margin + (ymax - ymin) * scale;
    os << std::fixed << std::setprecision(3);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    os << "<path d=\"";
    for (std::size_t i = 0; i < b.size(); ++i) os << (i == 0 ? "M" : " L") << px(b[i]);
    os << " Z\" fill=\"#d8e4f0\" stroke=\"#1f3b5a\" stroke-width=\"1.5\"/>\n";
    if (diameter) {
        for (const auto& [i, j] : diameter->pairs) {
            os << "<path d=\"M" << px(b[i]) << " L" << px(b[j])
               << "\" stroke=\"#b03020\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
        }
    }
    os << "</svg>\n";
}

void write_spectrum_csv(std::ostream& os, const SteklovSpectrum& spec) {
    os << "index,sigma\n" << std::setprecision(kDigits);
    for (std::size_t j = 0; j < spec.size(); ++j) os << j << ',' << spec.sigma(j) << '\n';
}

void write_history_csv(std::ostream& os, const std::vector<HistoryEntry>& history) {
    os << "iteration,sigma,objective,step,active_rows,cluster_size\n" << std::setprecision(kDigits);
    for (const HistoryEntry& h : history) {
        os << h.iteration << ',' << h.sigma << ',' << h.objective << ',' << h.step << ','
           << h.active_rows << ',' << h.cluster_size << '\n';
    }
}

nlohmann::json to_json(const HistoryEntry& h) {
    return {{"iteration", h.iteration}, {"sigma", h.sigma},           {"objective", h.objective},
            {"step", h.step},           {"active_rows", h.active_rows}, {"cluster_size", h.cluster_size}};
}

nlohmann::json to_json(const DiameterReport& rep) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [i, j] : rep.pairs) pairs.push_back({i, j});
    return pairs;
}

nlohmann::json eigenvalues_json(const SteklovSpectrum& spec) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t j = 0; j < spec.size(); ++j) out.push_back(spec.sigma(j));
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write " + path.string());
    out << text;
    if (!out) throw Error("io", "write failed for " + path.string());
}

} // namespace steklov
