#include "giantpair/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "giantpair/error.hpp"

namespace giantpair {

AtomSpec::AtomSpec(double omega_eg, double omega_fe, double omega0)
    : omega_eg_(omega_eg), omega_fe_(omega_fe) {
    if (!(omega_eg > 0.0) || !(omega_fe > 0.0))
        throw ConfigError("atom transition frequencies must be positive");
    if (std::abs(0.5 * (omega_eg + omega_fe) - omega0) > 1e-12 * omega0)
        throw ConfigError(fmt::format("ladder not symmetric about omega0 = {}: omega_eg = {}, omega_fe = {}",
                                omega0, omega_eg, omega_fe));
}

AtomSpec AtomSpec::from_detuning(double delta, double omega0) {
    return AtomSpec(omega0 + delta, omega0 - delta, omega0);
}

ModeGrid::ModeGrid(std::size_t M, double k_max, double c) : k_max_(k_max), c_(c) {
    if (M < 4 || M % 2 != 0)
        throw InvalidGridError(fmt::format("mode count must be even and >= 4, got {}", M));
    if (!(k_max > 0.0)) throw InvalidGridError("k_max must be positive");
    if (!(c > 0.0)) throw InvalidGridError("group velocity must be positive");
    k_.resize(M);
    omega_.resize(M);
    const auto m = static_cast<double>(M);
    for (std::size_t i = 0; i < M; ++i) {
        // Integer numerator keeps k = 0, k = k_max and the mirror pairs exact.
        const double num = 2.0 * static_cast<double>(i + 1) - m;
        k_[i] = k_max * num / m;
        omega_[i] = c * std::abs(k_[i]);
    }
}

std::size_t ModeGrid::index_of(double k) const {
    const double pos = (k + k_max_) / dk() - 1.0;
    const auto last = static_cast<double>(size() - 1);
    return static_cast<std::size_t>(std::llround(std::clamp(pos, 0.0, last)));
}

bool ModeGrid::same_as(const ModeGrid& other) const {
    return size() == other.size() && k_max_ == other.k_max_ && c_ == other.c_;
}

ModeGrid build_mode_grid(std::size_t M, double k_max, double c) { return ModeGrid(M, k_max, c); }

CouplingSequence::CouplingSequence(std::vector<CouplingPoint> points, double g0, bool chiral)
    : points_(std::move(points)), g0_(g0), chiral_(chiral) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.amplitude) || !std::isfinite(p.theta))
            throw ConfigError(fmt::format("coupling point {} is not finite", i));
        if (p.amplitude < 0.0)
            throw ConfigError(fmt::format("coupling point {} has negative amplitude {}", i, p.amplitude));
        if (!chiral_ && p.theta != 0.0)
            throw ConfigError(fmt::format("coupling point {} has phase {} in a non-chiral sequence", i,
                                    p.theta));
        if (i > 0 && !(points_[i - 1].x < p.x))
            throw ConfigError(fmt::format("coupling positions must be strictly ascending (point {})", i));
    }
}

CouplingSequence CouplingSequence::from_unsorted(std::vector<CouplingPoint> points, double g0,
                                                 bool chiral) {
    std::stable_sort(points.begin(), points.end(),
                     [](const CouplingPoint& a, const CouplingPoint& b) { return a.x < b.x; });
    std::vector<CouplingPoint> merged;
    merged.reserve(points.size());
    for (const auto& p : points) {
        if (!merged.empty() && merged.back().x == p.x) {
            auto& q = merged.back();
            const cplx sum = std::polar(q.amplitude, q.theta) + std::polar(p.amplitude, p.theta);
            q.amplitude = std::abs(sum);
            q.theta = chiral ? std::arg(sum) : 0.0;
        } else {
            merged.push_back(p);
        }
    }
    return CouplingSequence(std::move(merged), g0, chiral);
}

CouplingSequence CouplingSequence::with_g0(double g0) const {
    CouplingSequence out = *this;
    out.g0_ = g0;
    return out;
}

CouplingSequence CouplingSequence::translated(double dx) const {
    auto pts = points_;
    for (auto& p : pts) p.x += dx;
    return CouplingSequence(std::move(pts), g0_, chiral_);
}

CouplingSequence CouplingSequence::with_negated_phases() const {
    auto pts = points_;
    for (auto& p : pts) p.theta = -p.theta;
    return CouplingSequence(std::move(pts), g0_, chiral_);
}

double CouplingSequence::total_amplitude() const {
    double sum = 0.0;
    for (const auto& p : points_) sum += p.amplitude;
    return sum;
}

double CouplingSequence::extent() const {
    return points_.empty() ? 0.0 : points_.back().x - points_.front().x;
}

double CouplingSpectrum::norm() const {
    double s = 0.0;
    for (const auto& v : g) s += std::norm(v);
    return std::sqrt(s);
}

CouplingSpectrum coupling_spectrum(const CouplingSequence& seq, const ModeGrid& grid,
                                   const Units& units) {
    if (seq.empty()) throw ConfigError("coupling sequence is empty");
    CouplingSpectrum out{grid, std::vector<cplx>(grid.size())};
    const double x0 = units.x0();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double k = grid.k(i);
        cplx acc{0.0, 0.0};
        for (const auto& p : seq.points())
            acc += std::polar(p.amplitude, p.theta - k * p.x * x0);
        out.g[i] = seq.g0() * acc;
    }
    return out;
}

CouplingSpectrum ideal_window_spectrum(const ModeGrid& grid, double omega0, double delta_w,
                                       double g_k0, bool directional) {
    if (!(delta_w > 0.0)) throw ConfigError("window half-width must be positive");
    CouplingSpectrum out{grid, std::vector<cplx>(grid.size())};
    const double lo = (omega0 - delta_w) / grid.c();
    const double hi = (omega0 + delta_w) / grid.c();
    const double dk = grid.dk();
    auto overlap = [&](double a, double b) {
        return std::max(0.0, std::min(b, hi) - std::max(a, lo));
    };
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double k = grid.k(i);
        double covered = overlap(k - 0.5 * dk, k + 0.5 * dk);
        if (!directional) covered += overlap(-k - 0.5 * dk, -k + 0.5 * dk);
        out.g[i] = g_k0 * std::sqrt(std::min(1.0, covered / dk));
    }
    return out;
}

WindowTarget::WindowTarget(const Units& units, const AtomSpec& atom, double delta_w,
                           bool directional)
    : omega0_(units.omega0()),
      omega_fe_(atom.omega_fe()),
      omega_eg_(atom.omega_eg()),
      delta_w_(delta_w),
      c_(units.c),
      directional_(directional) {
    if (!(delta_w > 0.0)) throw ConfigError("window half-width must be positive");
    if (!(atom.delta() > delta_w))
        throw OverlappingBandError(fmt::format(
            "detuning {} must exceed the window half-width {}", atom.delta(), delta_w));
}

Band WindowTarget::band(double k) const {
    const double w = c_ * std::abs(k);
    if (std::abs(w - omega0_) < delta_w_) return Band::passband;
    if (std::abs(w - omega_fe_) < delta_w_) return Band::stopband_fe;
    if (std::abs(w - omega_eg_) < delta_w_) return Band::stopband_eg;
    return Band::outside;
}

TargetValue WindowTarget::operator()(double k) const {
    switch (band(k)) {
        case Band::passband:
            return (directional_ && k < 0.0) ? TargetValue::zero : TargetValue::one;
        case Band::stopband_fe:
        case Band::stopband_eg:
            return TargetValue::zero;
        case Band::outside:
            break;
    }
    return TargetValue::dont_care;
}

WindowTarget window_target(const Units& units, const AtomSpec& atom, double delta_w,
                           bool directional) {
    return WindowTarget(units, atom, delta_w, directional);
}

namespace {

bool parse_double(std::string_view token, double& out) {
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, out);
    return ec == std::errc() && ptr == end;
}

std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

CouplingSequence parse_sequence(std::string_view text, double g0) {
    std::vector<CouplingPoint> points;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    bool chiral = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok.size() != 3)
            throw ConfigError(fmt::format("sequence line {}: expected 3 columns, got {}", lineno,
                                    tok.size()));
        CouplingPoint p;
        if (!parse_double(tok[0], p.x) || !parse_double(tok[1], p.amplitude) ||
            !parse_double(tok[2], p.theta))
            throw ConfigError(fmt::format("sequence line {}: malformed number", lineno));
        chiral = chiral || p.theta != 0.0;
        points.push_back(p);
    }
    return CouplingSequence(std::move(points), g0, chiral);
}

CouplingSequence read_sequence(const std::filesystem::path& path, double g0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open sequence file {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_sequence(ss.str(), g0);
}

std::string format_sequence(const CouplingSequence& seq, std::string_view comment) {
    std::string out;
    if (!comment.empty()) {
        std::istringstream lines{std::string(comment)};
        for (std::string l; std::getline(lines, l);) out += "# " + l + "\n";
    }
    out += "# x_over_x0 amplitude_over_g0 theta_radians\n";
    for (const auto& p : seq.points())
        out += shortest(p.x) + " " + shortest(p.amplitude) + " " + shortest(p.theta) + "\n";
    return out;
}

void write_sequence(const std::filesystem::path& path, const CouplingSequence& seq,
                    std::string_view comment) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write sequence file {}", path.string()));
    out << format_sequence(seq, comment);
}

}  // namespace giantpair
