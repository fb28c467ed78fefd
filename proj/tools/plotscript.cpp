#include "plotscript.hpp"

#include <fstream>

#include <fmt/format.h>

#include "giantpair/analysis.hpp"
#include "giantpair/error.hpp"

namespace giantpair::cli {

namespace fs = std::filesystem;

std::string image_series(const fs::path& dump, std::size_t cols, std::size_t rows, double x_min, double dx,
                         double y_min, double dy) {
    return fmt::format(
        "'{}' binary skip={} format='%float64' endian=little array=({},{}) dx={:.10g} dy={:.10g} "
        "origin=({:.10g},{:.10g}) notitle with image",
        dump.filename().string(), dump_header_bytes(dump), cols, rows, dx, dy, x_min, y_min);
}

std::string csv_series(const std::string& file, const std::string& x, const std::string& y, const std::string& title,
                       const std::string& style) {
    return fmt::format("'{}' every ::1 using ({}):({}) with {} title '{}'", file, x, y, style, title);
}

std::string gnuplot_script(const Figure& fig) {
    std::string s = fmt::format(
        "# Run from this directory: gnuplot {0}.gp\n"
        "set terminal pngcairo size {1},{2}\n"
        "set output '{0}.png'\n"
        "set datafile separator ','\n"
        "x0 = 2*pi\n"
        "{5}"
        "set multiplot layout {3},{4}\n",
        fig.name, 500 * fig.cols, 420 * fig.rows, fig.rows, fig.cols, fig.preamble);
    for (const auto& p : fig.panels) {
        s += fmt::format("set title '{}'\nset xlabel '{}'\nset ylabel '{}'\n", p.title, p.xlabel, p.ylabel);
        s += p.log_y ? "set logscale y\n" : "unset logscale y\n";
        if (p.image) s += "set datafile separator whitespace\nset view map\n";
        s += "plot ";
        for (std::size_t i = 0; i < p.series.size(); ++i) s += (i ? ", \\\n     " : "") + p.series[i];
        s += "\n";
        if (p.image) s += "set datafile separator ','\n";
    }
    s += "unset multiplot\n";
    return s;
}

void write_plotscript(const fs::path& dir, const Figure& fig) {
    const auto path = dir / (fig.name + ".gp");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write {}", path.string()));
    out << gnuplot_script(fig);
}

}  // namespace giantpair::cli
