#include "giantpair/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "giantpair/error.hpp"

namespace giantpair {

void OptimizationProblem::validate() const {
    if (n_points == 0) throw ConfigError("optimization needs at least one coupling point");
    if (!(k_max > 0.0) || grid_modes < 4) throw ConfigError("objective grid is invalid");
    if (weights.elsewhere < 0.0 || !(weights.passband > weights.elsewhere) ||
        !(weights.stopband > weights.elsewhere))
        throw ConfigError("band weights must exceed the weight elsewhere, which must be >= 0");
    if (!(x_span > 0.0) || !(amplitude_max > 0.0) || !(phase_bound > 0.0))
        throw ConfigError("optimization bounds must be positive");
    if (restarts == 0) throw ConfigError("at least one restart is required");
    if (epsilon_schedule.empty()) throw ConfigError("smoothing schedule is empty");
}

double OptimizationProblem::weight(double k) const {
    switch (target.band(k)) {
        case Band::passband:
            return (target.directional() && k < 0.0) ? weights.stopband : weights.passband;
        case Band::stopband_fe:
        case Band::stopband_eg:
            return weights.stopband;
        case Band::outside:
            break;
    }
    return weights.elsewhere;
}

OptimizationProblem paper_problem(bool chiral) {
    OptimizationProblem p(WindowTarget(Units{}, AtomSpec::from_detuning(0.15), 0.1, chiral));
    p.chiral = chiral;
    return p;
}

namespace {

std::vector<double> problem_k(const OptimizationProblem& p) {
    const ModeGrid grid(p.grid_modes, p.k_max, p.target.c());
    std::vector<double> k;
    for (double v : grid.k_values())
        if (std::abs(v) <= p.k_max) k.push_back(v);
    return k;
}

}  // namespace

double objective_cm(const CouplingSequence& seq, const OptimizationProblem& problem) {
    const ModeGrid grid(problem.grid_modes, problem.k_max, problem.target.c());
    const double x0 = Units{}.x0();
    const double dk = grid.dk();
    double cm = 0.0;
    for (double k : problem_k(problem)) {
        cplx g{};
        for (const auto& p : seq.points()) g += std::polar(p.amplitude, p.theta - k * p.x * x0);
        cm += std::abs(std::abs(g) - problem.target.value(k)) * problem.weight(k) * dk;
    }
    return cm;
}

SpectralObjective::SpectralObjective(const OptimizationProblem& problem)
    : n_(problem.n_points),
      chiral_(problem.chiral),
      x0_(Units{}.x0()),
      x_span_(problem.x_span),
      amplitude_max_(problem.amplitude_max),
      phase_bound_(problem.phase_bound) {
    problem.validate();
    const ModeGrid grid(problem.grid_modes, problem.k_max, problem.target.c());
    dk_ = grid.dk();
    const auto ks = problem_k(problem);
    // Zero phases and a mirror-symmetric target give |g_-k| = |g_k|: fold onto k >= 0.
    const bool fold = !chiral_ && !problem.target.directional();
    std::vector<double> kept;
    for (double k : ks) {
        if (fold && k < 0.0) continue;
        double w = problem.weight(k) * dk_;
        if (fold && k > 0.0 && std::find(ks.begin(), ks.end(), -k) != ks.end())
            w += problem.weight(-k) * dk_;
        kept.push_back(k);
        target_.push_back(problem.target.value(k));
        weight_.push_back(w);
    }
    k_start_ = kept.front();
}

std::size_t SpectralObjective::variable_count() const { return (chiral_ ? 3 : 2) * n_; }

void SpectralObjective::spectrum(std::span<const double> v, std::vector<cplx>& g) const {
    const std::size_t K = target_.size();
    g.assign(K, cplx{});
    for (std::size_t j = 0; j < n_; ++j) {
        const double X = v[j] * x0_;
        const cplx c = std::polar(v[n_ + j], chiral_ ? v[2 * n_ + j] : 0.0);
        const cplx step = std::polar(1.0, -dk_ * X);
        cplx z;
        for (std::size_t n = 0; n < K; ++n) {
            // Re-anchor the recurrence periodically to bound rounding growth.
            if (n % 128 == 0) z = std::polar(1.0, -(k_start_ + static_cast<double>(n) * dk_) * X);
            g[n] += c * z;
            z *= step;
        }
    }
}

double SpectralObjective::value(std::span<const double> vars, double eps) const {
    std::vector<cplx> g;
    spectrum(vars, g);
    double f = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double y = std::abs(g[n]) - target_[n];
        f += weight_[n] * (eps > 0.0 ? std::sqrt(y * y + eps * eps) : std::abs(y));
    }
    return f;
}

double SpectralObjective::value_and_gradient(std::span<const double> v, double eps,
                                             std::span<double> grad) const {
    std::vector<cplx> g;
    spectrum(v, g);
    const std::size_t K = g.size();
    std::vector<cplx> h(K);
    double f = 0.0;
    for (std::size_t n = 0; n < K; ++n) {
        const double mag = std::abs(g[n]);
        const double y = mag - target_[n];
        const double s = eps > 0.0 ? std::sqrt(y * y + eps * eps) : std::abs(y);
        f += weight_[n] * s;
        double q = 0.0;
        if (s > 0.0) q = weight_[n] * y / s;
        h[n] = mag > 0.0 ? q * std::conj(g[n]) / mag : cplx{};
    }
    for (std::size_t j = 0; j < n_; ++j) {
        const double X = v[j] * x0_;
        const cplx c = std::polar(v[n_ + j], chiral_ ? v[2 * n_ + j] : 0.0);
        const cplx step = std::polar(1.0, -dk_ * X);
        cplx z, s0, s1;
        for (std::size_t n = 0; n < K; ++n) {
            const double k = k_start_ + static_cast<double>(n) * dk_;
            if (n % 128 == 0) z = std::polar(1.0, -k * X);
            const cplx t = h[n] * z;
            s0 += t;
            s1 += k * t;
            z *= step;
        }
        const cplx ei = std::polar(1.0, chiral_ ? v[2 * n_ + j] : 0.0);
        grad[j] = (cplx{0.0, -x0_} * c * s1).real();
        grad[n_ + j] = (ei * s0).real();
        if (chiral_) grad[2 * n_ + j] = (cplx{0.0, 1.0} * c * s0).real();
    }
    return f;
}

std::vector<double> SpectralObjective::pack(const CouplingSequence& seq) const {
    if (seq.size() != n_) throw DimensionError("sequence length differs from the problem size");
    std::vector<double> v(variable_count());
    for (std::size_t j = 0; j < n_; ++j) {
        const auto& p = seq.points()[j];
        v[j] = p.x;
        v[n_ + j] = p.amplitude;
        if (chiral_) v[2 * n_ + j] = p.theta;
    }
    return v;
}

CouplingSequence SpectralObjective::unpack(std::span<const double> v) const {
    std::vector<CouplingPoint> pts(n_);
    for (std::size_t j = 0; j < n_; ++j)
        pts[j] = {v[j], v[n_ + j], chiral_ ? v[2 * n_ + j] : 0.0};
    return CouplingSequence::from_unsorted(std::move(pts), 1.0, chiral_);
}

void SpectralObjective::bounds(std::vector<double>& lo, std::vector<double>& hi) const {
    const std::size_t nv = variable_count();
    lo.assign(nv, 0.0);
    hi.assign(nv, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
        lo[j] = -x_span_;
        hi[j] = x_span_;
        hi[n_ + j] = amplitude_max_;
        if (chiral_) {
            lo[2 * n_ + j] = -phase_bound_;
            hi[2 * n_ + j] = phase_bound_;
        }
    }
}

std::vector<double> SpectralObjective::residuals(std::span<const double> vars) const {
    std::vector<cplx> g;
    spectrum(vars, g);
    std::vector<double> r(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) r[n] = std::abs(std::abs(g[n]) - target_[n]);
    return r;
}

namespace {

using ValueGrad = std::function<double(const std::vector<double>&, std::vector<double>&)>;

struct BoxResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Projected L-BFGS: two-loop direction restricted to the variables not held
// at a bound, projected Armijo backtracking.
BoxResult minimize_box(const ValueGrad& fg, std::vector<double> x, const std::vector<double>& lo,
                       const std::vector<double>& hi, std::size_t max_iter) {
    const std::size_t n = x.size();
    const std::size_t memory = 10;
    const double pgtol = 1e-9;
    const double ftol = 1e-12;
    auto project = [&](std::vector<double>& v) {
        for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
    };
    project(x);
    std::vector<double> g(n), g_new(n), d(n), x_new(n), q(n);
    double f = fg(x, g);
    std::deque<std::vector<double>> S, Y;
    std::deque<double> rho;
    BoxResult res;
    std::size_t stall = 0;

    for (std::size_t it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        std::vector<char> free(n);
        double pg_max = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool at_lo = x[i] <= lo[i] && g[i] > 0.0;
            const bool at_hi = x[i] >= hi[i] && g[i] < 0.0;
            free[i] = !(at_lo || at_hi);
            if (free[i]) pg_max = std::max(pg_max, std::abs(g[i]));
        }
        if (pg_max < pgtol) {
            res.converged = true;
            break;
        }

        for (std::size_t i = 0; i < n; ++i) q[i] = free[i] ? g[i] : 0.0;
        std::vector<double> alpha(S.size());
        for (std::size_t m = S.size(); m-- > 0;) {
            double a = 0.0;
            for (std::size_t i = 0; i < n; ++i) a += S[m][i] * q[i];
            a *= rho[m];
            alpha[m] = a;
            for (std::size_t i = 0; i < n; ++i) q[i] -= a * Y[m][i];
        }
        if (!S.empty()) {
            double sy = 0.0, yy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sy += S.back()[i] * Y.back()[i];
                yy += Y.back()[i] * Y.back()[i];
            }
            const double gamma = sy / yy;
            for (auto& v : q) v *= gamma;
        }
        for (std::size_t m = 0; m < S.size(); ++m) {
            double b = 0.0;
            for (std::size_t i = 0; i < n; ++i) b += Y[m][i] * q[i];
            b *= rho[m];
            for (std::size_t i = 0; i < n; ++i) q[i] += S[m][i] * (alpha[m] - b);
        }
        double gd = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = free[i] ? -q[i] : 0.0;
            gd += g[i] * d[i];
        }
        if (!(gd < 0.0)) {
            S.clear();
            Y.clear();
            rho.clear();
            for (std::size_t i = 0; i < n; ++i) d[i] = free[i] ? -g[i] : 0.0;
        }

        double step = 1.0;
        if (S.empty()) {
            double dn = 0.0;
            for (double v : d) dn = std::max(dn, std::abs(v));
            step = std::min(1.0, 0.1 / std::max(dn, 1e-300));
        }
        double f_new = f;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * d[i];
            project(x_new);
            double decrease = 0.0;
            for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (x_new[i] - x[i]);
            f_new = fg(x_new, g_new);
            if (f_new <= f + 1e-4 * decrease && decrease < 0.0) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (S.empty()) {
                res.converged = true;  // no descent possible along the projected gradient
                break;
            }
            S.clear();
            Y.clear();
            rho.clear();
            continue;
        }

        std::vector<double> s(n), y(n);
        double sy = 0.0, ss = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
            sy += s[i] * y[i];
            ss += s[i] * s[i];
            yy += y[i] * y[i];
        }
        if (sy > 1e-10 * std::sqrt(ss * yy)) {
            if (S.size() == memory) {
                S.pop_front();
                Y.pop_front();
                rho.pop_front();
            }
            S.push_back(std::move(s));
            Y.push_back(std::move(y));
            rho.push_back(1.0 / sy);
        }
        const double rel = (f - f_new) / std::max({std::abs(f), std::abs(f_new), 1.0});
        x.swap(x_new);
        g.swap(g_new);
        f = f_new;
        stall = rel < ftol ? stall + 1 : 0;
        if (stall >= 5) {
            res.converged = true;
            break;
        }
    }
    res.x = std::move(x);
    res.f = f;
    return res;
}

struct RestartOutcome {
    std::vector<double> vars;
    double cm = 0.0;
    double initial_cm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

RestartOutcome run_restart(const OptimizationProblem& p, const SpectralObjective& obj,
                           std::size_t index) {
    const std::size_t N = p.n_points;
    std::seed_seq seq{static_cast<std::uint32_t>(p.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(p.seed >> 32), static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> ux(-p.x_span, p.x_span);
    std::uniform_real_distribution<double> ua(0.0, p.amplitude_max / static_cast<double>(N));
    std::uniform_real_distribution<double> ut(-p.phase_bound, p.phase_bound);

    const std::size_t nv = obj.variable_count();
    std::vector<double> v(nv), lo, hi;
    obj.bounds(lo, hi);
    for (std::size_t j = 0; j < N; ++j) v[j] = ux(rng);
    for (std::size_t j = 0; j < N; ++j) v[N + j] = ua(rng);
    if (p.chiral)
        for (std::size_t j = 0; j < N; ++j) v[2 * N + j] = ut(rng);

    RestartOutcome out;
    out.initial_cm = obj.value(v, 0.0);
    std::vector<double> x = v;
    for (double eps : p.epsilon_schedule) {
        auto fg = [&](const std::vector<double>& xv, std::vector<double>& gv) {
            return obj.value_and_gradient(xv, eps, gv);
        };
        auto r = minimize_box(fg, x, lo, hi, p.max_iterations);
        x = std::move(r.x);
        out.iterations += r.iterations;
        out.converged = r.converged;
    }
    const double final_cm = obj.value(x, 0.0);
    if (final_cm <= out.initial_cm) {
        out.vars = std::move(x);
        out.cm = final_cm;
    } else {
        out.vars = std::move(v);
        out.cm = out.initial_cm;
    }
    return out;
}

OptimizationResult optimize(const OptimizationProblem& problem, const Execution& exec) {
    const SpectralObjective obj(problem);
    const std::size_t R = problem.restarts;
    std::vector<RestartOutcome> outcomes(R);
    const auto nR = static_cast<std::ptrdiff_t>(R);
    const int threads = worker_count(exec);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1)
    for (std::ptrdiff_t r = 0; r < nR; ++r)
        outcomes[static_cast<std::size_t>(r)] = run_restart(problem, obj, static_cast<std::size_t>(r));

    OptimizationResult res;
    std::size_t best = 0;
    bool any_converged = false;
    for (std::size_t r = 0; r < R; ++r) {
        res.restart_cm.push_back(outcomes[r].cm);
        res.initial_cm.push_back(outcomes[r].initial_cm);
        any_converged = any_converged || outcomes[r].converged;
        if (outcomes[r].cm < outcomes[best].cm) best = r;
    }
    res.restart_index = best;
    res.iterations = outcomes[best].iterations;
    res.converged = any_converged;
    res.sequence = obj.unpack(outcomes[best].vars);
    res.cm_value = objective_cm(res.sequence, problem);
    return res;
}

}  // namespace

OptimizationResult optimize_bidirectional(const OptimizationProblem& problem,
                                          const Execution& exec) {
    if (problem.chiral) throw ConfigError("bidirectional optimization requires chiral = false");
    return optimize(problem, exec);
}

OptimizationResult optimize_chiral(const OptimizationProblem& problem, const Execution& exec) {
    if (!problem.chiral) throw ConfigError("chiral optimization requires chiral = true");
    if (!problem.target.directional()) throw ConfigError("chiral optimization needs a one-sided target");
    return optimize(problem, exec);
}

}  // namespace giantpair
