#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace giantpair::cli {

struct Panel {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<std::string> series;  // gnuplot plot clauses
    bool image = false;
    bool log_y = false;
};

struct Figure {
    std::string name;  // script is <name>.gp, rendering <name>.png
    std::size_t rows = 1;
    std::size_t cols = 1;
    std::vector<Panel> panels;
    std::string preamble{};  // extra gnuplot variable definitions
};

// Plot clause for a binary dump of rows x cols doubles after its header line.
std::string image_series(const std::filesystem::path& dump, std::size_t cols, std::size_t rows, double x_min,
                         double dx, double y_min, double dy);

// Plot clause for CSV columns; `x` and `y` are gnuplot using-expressions.
std::string csv_series(const std::string& file, const std::string& x, const std::string& y,
                       const std::string& title, const std::string& style = "lines");

std::string gnuplot_script(const Figure& fig);
void write_plotscript(const std::filesystem::path& dir, const Figure& fig);

}  // namespace giantpair::cli
