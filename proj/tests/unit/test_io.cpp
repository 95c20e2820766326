#include "steklov/errors.hpp"
#include "steklov/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace steklov;

TEST(PolylineCsv, RoundTripIsExact) {
    BoundaryPolyline b;
    for (int i = 0; i < 37; ++i) {
        const double t = 0.1 * i + 1e-3 / 3.0;
        b.vertices.emplace_back(std::cos(t) / 3.0, std::sin(t) * std::sqrt(2.0));
    }
    std::ostringstream os;
    write_polyline_csv(os, b);
    std::istringstream is(os.str());
    const BoundaryPolyline c = read_polyline_csv(is);
    ASSERT_EQ(c.size(), b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_EQ(c[i].x(), b[i].x());
        EXPECT_EQ(c[i].y(), b[i].y());
    }
}

TEST(PolylineCsv, CommentsBlankLinesAndNoHeader) {
    std::istringstream is("# square\n0,0\n\n1, 0\n1,1 # corner\n0,1\n");
    const BoundaryPolyline b = read_polyline_csv(is);
    ASSERT_EQ(b.size(), 4u);
    EXPECT_DOUBLE_EQ(b.signed_area(), 1.0);
}

TEST(PolylineCsv, MalformedRowsThrow) {
    std::istringstream bad("x,y\n0,0\n1,zero\n0,1\n");
    EXPECT_THROW(read_polyline_csv(bad), Error);
    std::istringstream extra("0,0,0\n1,0\n0,1\n");
    EXPECT_THROW(read_polyline_csv(extra), Error);
    std::istringstream few("x,y\n0,0\n1,0\n");
    EXPECT_THROW(read_polyline_csv(few), Error);
    EXPECT_THROW(read_polyline_csv(std::filesystem::path("/nonexistent/shape.csv")), Error);
}

TEST(Svg, ContainsClosedPathAndDiameterSegments) {
    BoundaryPolyline sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    const DiameterReport rep = compute_diameter(sq);
    std::ostringstream os;
    write_svg(os, sq, &rep);
    const std::string s = os.str();
    EXPECT_EQ(s.rfind("<svg", 0), 0u);
    EXPECT_NE(s.find(" Z\""), std::string::npos);
    EXPECT_NE(s.find("</svg>"), std::string::npos);
    std::size_t paths = 0;
    for (std::size_t pos = s.find("<path"); pos != std::string::npos; pos = s.find("<path", pos + 1)) ++paths;
    EXPECT_EQ(paths, 1 + rep.pairs.size());
}

TEST(SpectrumCsv, OneRowPerEigenvalue) {
    SteklovSpectrum s;
    s.eigenvalues = Eigen::Vector3d(0.0, 1.0, 1.0 / 3.0);
    std::ostringstream os;
    write_spectrum_csv(os, s);
    EXPECT_EQ(os.str(), "index,sigma\n0,0\n1,1\n2,0.33333333333333331\n");
}

TEST(HistoryCsv, HeaderAndRows) {
    std::vector<HistoryEntry> h(2);
    h[1].iteration = 1;
    h[1].objective = 2.5;
    std::ostringstream os;
    write_history_csv(os, h);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "iteration,sigma,objective,step,active_rows,cluster_size");
    EXPECT_NE(os.str().find("\n1,0,2.5,0,0,1\n"), std::string::npos);
}

TEST(Json, HistoryAndPairs) {
    HistoryEntry e;
    e.iteration = 3;
    e.sigma = 1.25;
    const auto j = to_json(e);
    EXPECT_EQ(j["iteration"], 3);
    EXPECT_EQ(j["sigma"], 1.25);
    DiameterReport rep;
    rep.pairs = {{0, 5}, {2, 7}};
    EXPECT_EQ(to_json(rep).dump(), "[[0,5],[2,7]]");
}

TEST(WriteTextFile, CreatesParentDirectories) {
    const auto dir = std::filesystem::temp_directory_path() / "steklov_io_test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    write_text_file(dir / "a.txt", "hello\n");
    EXPECT_TRUE(std::filesystem::exists(dir / "a.txt"));
    std::filesystem::remove_all(dir.parent_path());
}
