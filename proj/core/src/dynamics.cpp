#include "giantpair/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "giantpair/error.hpp"
#include "kernels.hpp"

namespace giantpair {

Method parse_method(const std::string& name) {
    if (name == "rk4") return Method::rk4;
    if (name == "split-step" || name == "split_step") return Method::split_step;
    throw ConfigError(fmt::format("unknown propagation method '{}' (rk4 | split-step)", name));
}

std::string to_string(Method m) { return m == Method::rk4 ? "rk4" : "split-step"; }

std::vector<double> Trajectory::pf() const {
    std::vector<double> v(populations.size());
    std::transform(populations.begin(), populations.end(), v.begin(),
                   [](const Populations& p) { return p.f; });
    return v;
}

std::vector<double> Trajectory::pe() const {
    std::vector<double> v(populations.size());
    std::transform(populations.begin(), populations.end(), v.begin(),
                   [](const Populations& p) { return p.e; });
    return v;
}

std::vector<double> Trajectory::pg() const {
    std::vector<double> v(populations.size());
    std::transform(populations.begin(), populations.end(), v.begin(),
                   [](const Populations& p) { return p.g; });
    return v;
}

const Snapshot* Trajectory::snapshot_near(double t) const {
    const Snapshot* best = nullptr;
    for (const auto& s : snapshots)
        if (!best || std::abs(s.time - t) < std::abs(best->time - t)) best = &s;
    return best;
}

namespace {

using detail::AtomCouplings;

using PopsCallback = std::function<void(std::size_t, const Populations&)>;
using StateCallback = std::function<void(std::size_t, const TwoExcState&)>;
using NeedState = std::function<bool(std::size_t)>;

// Phase factors e^{i w_j t}.
void phases(const std::vector<double>& w, double t, double sign, std::vector<cplx>& out) {
    out.resize(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) out[j] = std::polar(1.0, sign * w[j] * t);
}

class SplitStepper {
public:
    SplitStepper(const AtomCouplings& c, int threads) : c_(c), threads_(threads) {
        const std::size_t M = c.size();
        double s2 = 0.0;
        for (const auto& v : c.g) s2 += std::norm(v);
        s_ = std::sqrt(s2);
        u_.assign(M, cplx{});
        if (s_ > 0.0)
            for (std::size_t j = 0; j < M; ++j) u_[j] = std::conj(c.g[j]) / s_;
        u_prev_.resize(M);
        u_next_.resize(M);
        beta_.resize(M);
        dots_.resize(M);
        row_norm_.resize(M);
        b_.resize(M);
        b_new_.resize(M);
        e_s_.resize(M);
    }

    // psi is taken as the state at local time 0; on return it holds the
    // Schroedinger-picture state at steps*dt.
    void run(TwoExcState& psi, double dt, std::size_t steps, const NeedState& need_state,
             const PopsCallback& on_pops, const StateCallback& on_state) {
        const std::size_t M = c_.size();
        cplx f = psi.cf;
        std::vector<cplx>& e = psi.ce;
        bool pending = false;
        std::size_t reported = 0;

        auto report = [&](std::size_t k) {
            if (!on_pops || reported != k) return;
            Populations p;
            p.f = std::norm(f);
            for (const auto& v : e) p.e += std::norm(v);
            for (double r : row_norm_) p.g += r;
            on_pops(k, p);
            reported = k + 1;
        };

        for (std::size_t n = 0; n < steps; ++n) {
            const double tm = (static_cast<double>(n) + 0.5) * dt;
            for (std::size_t j = 0; j < M; ++j)
                u_next_[j] = u_[j] * std::polar(1.0, c_.w[j] * tm);
            pass(psi, pending, true);
            pending = false;
            report(n);
            if (s_ > 0.0) {
                for (std::size_t i = 0; i < M; ++i) b_[i] = std::polar(1.0, -c_.w[i] * tm) * dots_[i];
                cplx f_s = f * std::polar(1.0, -c_.w_fg * tm);
                for (std::size_t i = 0; i < M; ++i)
                    e_s_[i] = e[i] * std::polar(1.0, -(c_.w[i] + c_.w_eg) * tm);
                exact_coupling_step(f_s, dt);
                f = f_s * std::polar(1.0, c_.w_fg * tm);
                for (std::size_t i = 0; i < M; ++i) {
                    e[i] = e_s_[i] * std::polar(1.0, (c_.w[i] + c_.w_eg) * tm);
                    beta_[i] = (b_new_[i] - b_[i]) * std::polar(1.0, c_.w[i] * tm);
                }
                std::swap(u_prev_, u_next_);
                pending = true;
            }
            if (need_state && need_state(n + 1)) {
                pass(psi, pending, false);
                pending = false;
                report(n + 1);
                if (on_state) on_state(n + 1, schroedinger(psi, f, static_cast<double>(n + 1) * dt));
            }
        }
        if (pending || reported <= steps) {
            pass(psi, pending, false);
            report(steps);
        }
        psi.cf = f;
        to_schroedinger(psi, static_cast<double>(steps) * dt);
    }

private:
    // Applies the pending rank-1 row update (c~_ij += beta_i u_prev_j), then
    // accumulates row norms and, when requested, the row dots with u_next.
    void pass(TwoExcState& psi, bool apply, bool dot) {
        const std::size_t M = c_.size();
        cplx* cg = psi.cg.data();
        const cplx* up = u_prev_.data();
        const cplx* un = u_next_.data();
        const auto n = static_cast<std::ptrdiff_t>(M);
#pragma omp parallel for schedule(static) num_threads(threads_) if (threads_ > 1)
        for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            cplx* row = cg + i * M;
            double nrm = 0.0;
            cplx acc{0.0, 0.0};
            if (apply) {
                const cplx bi = beta_[i];
                if (dot) {
                    for (std::size_t j = 0; j < M; ++j) {
                        const cplx v = row[j] + bi * up[j];
                        row[j] = v;
                        nrm += std::norm(v);
                        acc += std::conj(un[j]) * v;
                    }
                } else {
                    for (std::size_t j = 0; j < M; ++j) {
                        const cplx v = row[j] + bi * up[j];
                        row[j] = v;
                        nrm += std::norm(v);
                    }
                }
            } else if (dot) {
                for (std::size_t j = 0; j < M; ++j) {
                    nrm += std::norm(row[j]);
                    acc += std::conj(un[j]) * row[j];
                }
            } else {
                for (std::size_t j = 0; j < M; ++j) nrm += std::norm(row[j]);
            }
            row_norm_[i] = nrm;
            dots_[i] = acc;
        }
    }

    // exp(-i V dt) on (f, e, b); V mixes (f, <u,e>, <u,b>) through
    // s [[0,1,0],[1,0,1],[0,1,0]] and the orthogonal parts of e, b pairwise.
    void exact_coupling_step(cplx& f, double dt) {
        const std::size_t M = c_.size();
        cplx E{0.0, 0.0}, B{0.0, 0.0};
        for (std::size_t i = 0; i < M; ++i) {
            E += std::conj(u_[i]) * e_s_[i];
            B += std::conj(u_[i]) * b_[i];
        }
        const double theta = s_ * dt;
        const double r2 = std::sqrt(2.0);
        const double cq = 0.5 * (std::cos(r2 * theta) - 1.0);
        const cplx sq{0.0, -std::sin(r2 * theta) / r2};
        const cplx a1[3] = {E, f + B, E};
        const cplx a2[3] = {f + B, 2.0 * E, f + B};
        const cplx f_new = f + sq * a1[0] + cq * a2[0];
        const cplx E_new = E + sq * a1[1] + cq * a2[1];
        const cplx B_new = B + sq * a1[2] + cq * a2[2];
        const double co = std::cos(theta);
        const cplx si{0.0, -std::sin(theta)};
        for (std::size_t i = 0; i < M; ++i) {
            const cplx ep = e_s_[i] - E * u_[i];
            const cplx bp = b_[i] - B * u_[i];
            e_s_[i] = E_new * u_[i] + co * ep + si * bp;
            b_new_[i] = B_new * u_[i] + co * bp + si * ep;
        }
        f = f_new;
    }

    TwoExcState schroedinger(const TwoExcState& psi, cplx f, double t) const {
        TwoExcState out = psi;
        out.cf = f;
        to_schroedinger(out, t);
        return out;
    }

    void to_schroedinger(TwoExcState& s, double t) const {
        const std::size_t M = c_.size();
        std::vector<cplx> p;
        phases(c_.w, t, -1.0, p);
        s.cf *= std::polar(1.0, -c_.w_fg * t);
        for (std::size_t i = 0; i < M; ++i) s.ce[i] *= p[i] * std::polar(1.0, -c_.w_eg * t);
        cplx* cg = s.cg.data();
        const auto n = static_cast<std::ptrdiff_t>(M);
#pragma omp parallel for schedule(static) num_threads(threads_) if (threads_ > 1)
        for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            for (std::size_t j = 0; j < M; ++j) cg[i * M + j] *= p[i] * p[j];
        }
    }

    const AtomCouplings& c_;
    int threads_;
    double s_ = 0.0;
    std::vector<cplx> u_, u_prev_, u_next_, beta_, dots_, b_, b_new_, e_s_;
    std::vector<double> row_norm_;
};

void run_rk4(const AtomCouplings& c, TwoExcState& psi, double dt, std::size_t steps, int threads,
             const NeedState& need_state, const PopsCallback& on_pops,
             const StateCallback& on_state) {
    const std::size_t M = c.size();
    TwoExcState k(M), tmp(M), acc(M);
    const cplx mi{0.0, -1.0};
    auto stage = [&](const TwoExcState& in, cplx weight, double tmp_coeff, bool last) {
        detail::apply_h_raw(c, in, k, threads);
        scale(k, mi * dt);
        axpy(weight, k, acc);
        if (!last) {
            tmp = psi;
            axpy(tmp_coeff, k, tmp);
        }
    };
    if (on_pops) on_pops(0, populations(psi));
    for (std::size_t n = 0; n < steps; ++n) {
        acc = psi;
        stage(psi, 1.0 / 6.0, 0.5, false);
        stage(tmp, 1.0 / 3.0, 0.5, false);
        stage(tmp, 1.0 / 3.0, 1.0, false);
        stage(tmp, 1.0 / 6.0, 0.0, true);
        std::swap(psi, acc);
        if (on_pops) on_pops(n + 1, populations(psi));
        if (need_state && need_state(n + 1) && on_state) on_state(n + 1, psi);
    }
}

struct Support {
    std::vector<std::size_t> index;
    bool compressed = false;
};

Support find_support(const AtomCouplings& c, const TwoExcState& psi) {
    const std::size_t M = c.size();
    Support s;
    std::vector<char> active(M, 0);
    for (std::size_t i = 0; i < M; ++i)
        if (c.g[i] != cplx{}) {
            active[i] = 1;
            s.index.push_back(i);
        }
    if (s.index.size() == M || s.index.empty()) return s;
    for (std::size_t i = 0; i < M; ++i) {
        if (!active[i] && psi.ce[i] != cplx{}) return s;
        for (std::size_t j = 0; j < M; ++j)
            if ((!active[i] || !active[j]) && psi.cg[i * M + j] != cplx{}) return s;
    }
    s.compressed = true;
    return s;
}

AtomCouplings restrict_couplings(const AtomCouplings& c, const std::vector<std::size_t>& idx) {
    AtomCouplings out{{}, {}, c.w_eg, c.w_fg};
    for (auto i : idx) {
        out.w.push_back(c.w[i]);
        out.g.push_back(c.g[i]);
    }
    return out;
}

TwoExcState restrict_state(const TwoExcState& s, const std::vector<std::size_t>& idx) {
    const std::size_t M = s.modes();
    const std::size_t m = idx.size();
    TwoExcState out(m);
    out.cf = s.cf;
    for (std::size_t a = 0; a < m; ++a) {
        out.ce[a] = s.ce[idx[a]];
        for (std::size_t b = 0; b < m; ++b) out.cg[a * m + b] = s.cg[idx[a] * M + idx[b]];
    }
    return out;
}

TwoExcState expand_state(const TwoExcState& s, const std::vector<std::size_t>& idx,
                         std::size_t M) {
    const std::size_t m = idx.size();
    TwoExcState out(M);
    out.cf = s.cf;
    for (std::size_t a = 0; a < m; ++a) {
        out.ce[idx[a]] = s.ce[a];
        for (std::size_t b = 0; b < m; ++b) out.cg[idx[a] * M + idx[b]] = s.cg[a * m + b];
    }
    return out;
}

void check_rk4_step(const SingleAtomModel& model, double dt) {
    const double guard = std::abs(dt) * model.max_diagonal();
    if (guard >= 0.1)
        throw ResolutionError(fmt::format(
            "rk4 step {} too large: dt * max_diag = {:.3g} must stay below 0.1", dt, guard));
}

void run_method(const AtomCouplings& c, TwoExcState& psi, double dt, std::size_t steps,
                Method method, int threads, const NeedState& need, const PopsCallback& on_pops,
                const StateCallback& on_state) {
    if (method == Method::rk4) {
        run_rk4(c, psi, dt, steps, threads, need, on_pops, on_state);
    } else {
        SplitStepper stepper(c, threads);
        stepper.run(psi, dt, steps, need, on_pops, on_state);
    }
}

}  // namespace

void evolve(const SingleAtomModel& model, TwoExcState& psi, double dt, std::size_t steps,
            Method method, const Execution& exec) {
    if (psi.modes() != model.modes()) throw DimensionError("state and model mode counts differ");
    if (method == Method::rk4) check_rk4_step(model, dt);
    run_method(detail::couplings_of(model), psi, dt, steps, method, worker_count(exec), {}, {},
               {});
}

Trajectory propagate(const SingleAtomModel& model, const TwoExcState& state0,
                     const PropagationPlan& plan, const Execution& exec) {
    const std::size_t M = model.modes();
    if (state0.modes() != M || state0.cg.size() != M * M)
        throw DimensionError("initial state does not match the model grid");
    if (!(plan.dt > 0.0) || !(plan.t_end >= 0.0) || !std::isfinite(plan.t_end))
        throw ConfigError("propagation plan needs dt > 0 and a finite t_end >= 0");
    if (!(plan.norm_tol > 0.0)) throw ConfigError("norm tolerance must be positive");
    const double n0 = norm_squared(state0);
    if (std::abs(n0 - 1.0) > plan.norm_tol)
        throw ConfigError(fmt::format("initial state is not normalized (|psi|^2 = {:.12g})", n0));

    const auto steps = static_cast<std::size_t>(std::ceil(plan.t_end / plan.dt - 1e-9));
    const double dt = steps > 0 ? plan.t_end / static_cast<double>(steps) : plan.dt;
    if (plan.method == Method::rk4) check_rk4_step(model, dt);

    std::set<std::size_t> wanted;
    for (double t : plan.snapshot_times) {
        if (t < 0.0 || t > plan.t_end * (1.0 + 1e-12))
            throw ConfigError(fmt::format("snapshot time {} outside [0, t_end]", t));
        wanted.insert(static_cast<std::size_t>(std::llround(t / dt)));
    }
    auto need = [&](std::size_t k) {
        return wanted.count(k) > 0 || (plan.snapshot_stride > 0 && k % plan.snapshot_stride == 0) ||
               (plan.energy_stride > 0 && k % plan.energy_stride == 0);
    };

    const auto full = detail::couplings_of(model);
    const Support support = find_support(full, state0);
    const AtomCouplings work = support.compressed ? restrict_couplings(full, support.index) : full;
    TwoExcState psi = support.compressed ? restrict_state(state0, support.index) : state0;
    const int threads = worker_count(exec);

    Trajectory traj;
    traj.dt = dt;
    traj.times.reserve(steps + 1);
    traj.populations.reserve(steps + 1);

    auto on_pops = [&](std::size_t k, const Populations& p) {
        const double t = static_cast<double>(k) * dt;
        const double drift = std::abs(p.total() - 1.0);
        if (drift > plan.norm_tol) throw NormDriftError(k, t, drift);
        traj.times.push_back(t);
        traj.populations.push_back(p);
    };
    TwoExcState hbuf;
    auto on_state = [&](std::size_t k, const TwoExcState& s) {
        const double t = static_cast<double>(k) * dt;
        if (plan.energy_stride > 0 && k % plan.energy_stride == 0) {
            detail::apply_h_raw(work, s, hbuf, threads);
            traj.energy_times.push_back(t);
            traj.energies.push_back(inner(s, hbuf).real());
        }
        if (wanted.count(k) > 0 || (plan.snapshot_stride > 0 && k % plan.snapshot_stride == 0))
            traj.snapshots.push_back(
                {t, support.compressed ? expand_state(s, support.index, M) : s});
    };
    if (need(0)) on_state(0, psi);

    run_method(work, psi, dt, steps, plan.method, threads, need, on_pops, on_state);
    traj.final_state = support.compressed ? expand_state(psi, support.index, M) : std::move(psi);
    return traj;
}

DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> p,
                        const FitWindow& window) {
    if (t.size() != p.size()) throw DimensionError("time and population series differ in length");
    DecayFit fit;
    double running_min = 1e300;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < window.t_min || !(p[i] > window.p_floor)) continue;
        if (p[i] > running_min * (1.0 + window.oscillation_tol)) fit.poor_fit = true;
        running_min = std::min(running_min, p[i]);
        const double y = std::log(p[i]);
        pts.emplace_back(t[i], y);
        sx += t[i];
        sy += y;
        sxx += t[i] * t[i];
        sxy += t[i] * y;
    }
    fit.points = pts.size();
    if (pts.size() < 3) {
        fit.poor_fit = true;
        fit.gamma = std::nan("");
        fit.r_squared = 0.0;
        return fit;
    }
    const auto n = static_cast<double>(pts.size());
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double icpt = (sy - slope * sx) / n;
    const double mean = sy / n;
    double ss_res = 0, ss_tot = 0;
    for (auto [x, y] : pts) {
        const double r = y - (icpt + slope * x);
        ss_res += r * r;
        ss_tot += (y - mean) * (y - mean);
    }
    fit.gamma = -slope;
    fit.intercept = icpt;
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

DecayFit fit_decay_rate(const Trajectory& traj, const FitWindow& window) {
    const auto pf = traj.pf();
    return fit_decay_rate(traj.times, pf, window);
}

std::string population_csv(const Trajectory& traj) {
    std::string out = "t,P_f,P_e,P_g\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& p = traj.populations[i];
        out += fmt::format("{},{},{},{}\n", traj.times[i], p.f, p.e, p.g);
    }
    return out;
}

void write_population_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write {}", path.string()));
    out << population_csv(traj);
}

}  // namespace giantpair
