#include "giantpair/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "giantpair/analytic.hpp"
#include "giantpair/error.hpp"

namespace giantpair {

CascadeModel::CascadeModel(ModeGrid grid, AtomSpec atom, CouplingSpectrum spectrum_a,
                           double d_s, Units units)
    : grid_(std::move(grid)),
      atom_(atom),
      spectrum_a_(std::move(spectrum_a)),
      d_s_(d_s),
      units_(units) {
    if (!spectrum_a_.grid.same_as(grid_) || spectrum_a_.size() != grid_.size())
        throw DimensionError("coupling spectrum does not live on the model grid");
    if (!std::isfinite(d_s_)) throw ConfigError("atom separation must be finite");
    const std::size_t M = grid_.size();
    const double tol = grid_.c() * grid_.dk() / 10.0;
    a_.resize(M);
    shift_.resize(M);
    const double d = separation();
    for (std::size_t i = 0; i < M; ++i) {
        const double det = grid_.omega(i) - atom_.omega_eg();
        if (spectrum_a_.g[i] != cplx{} && std::abs(det) < tol)
            throw PoleError(fmt::format(
                "mode {} (k = {}) lies within c dk / 10 of omega_eg; shift the grid", i,
                grid_.k(i)));
        a_[i] = spectrum_a_.g[i] == cplx{} ? cplx{} : spectrum_a_.g[i] / det;
        shift_[i] = std::polar(1.0, grid_.k(i) * d);
    }
}

CouplingSpectrum CascadeModel::spectrum_b() const {
    CouplingSpectrum s = spectrum_a_;
    for (std::size_t i = 0; i < s.size(); ++i) s.g[i] *= shift_[i];
    return s;
}

cplx CascadeModel::coupling(std::size_t atom_index, std::size_t i, std::size_t j) const {
    const cplx g = a_[i] * spectrum_a_.g[j];
    return atom_index == 0 ? g : g * shift_[i] * shift_[j];
}

double CascadeModel::detuning(std::size_t i, std::size_t j) const {
    return grid_.omega(i) + grid_.omega(j) - atom_.omega_fg();
}

CascadeModel cascade_model(const CouplingSequence& seq_a, const ModeGrid& grid,
                           const AtomSpec& atom, double d_s, Units units) {
    return CascadeModel(grid, atom, coupling_spectrum(seq_a, grid, units), d_s, units);
}

std::size_t CascadeState::modes() const {
    return static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(field.size()))));
}

CascadePopulations populations(const CascadeState& s) {
    CascadePopulations p;
    p.a = std::norm(s.ca);
    p.b = std::norm(s.cb);
    for (const auto& v : s.field) p.field += std::norm(v);
    return p;
}

CascadeState initial_a_state(std::size_t M) {
    CascadeState s(M);
    s.ca = 1.0;
    return s;
}

FieldView field_of(const CascadeState& s) { return {s.modes(), s.field.data(), nullptr}; }

namespace {

void check_state(const CascadeModel& model, const CascadeState& s) {
    const std::size_t M = model.modes();
    if (s.field.size() != M * M)
        throw DimensionError(fmt::format("cascade state has {} field amplitudes, grid needs {}",
                                         s.field.size(), M * M));
}

}  // namespace

CascadeState apply_cascade_h(const CascadeModel& model, const CascadeState& psi,
                             const Execution& exec) {
    check_state(model, psi);
    const std::size_t M = model.modes();
    const auto& a = model.pole_factor();
    const auto& b = model.spectrum_a().g;
    const auto& z = model.shift();
    const auto& w = model.grid().omega_values();
    const double w_fg = model.atom().omega_fg();

    CascadeState out(M);
    std::vector<cplx> rows_a(M), rows_b(M);
    const auto nM = static_cast<std::ptrdiff_t>(M);
    const int threads = worker_count(exec);
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
    for (std::ptrdiff_t ii = 0; ii < nM; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const cplx* row = psi.field.data() + i * M;
        cplx* orow = out.field.data() + i * M;
        const cplx la = std::conj(a[i]) * psi.ca;
        const cplx lb = std::conj(a[i] * z[i]) * psi.cb;
        cplx sa{}, sb{};
        for (std::size_t j = 0; j < M; ++j) {
            const cplx bj = b[j];
            const cplx bzj = b[j] * z[j];
            sa += bj * row[j];
            sb += bzj * row[j];
            orow[j] = (w[i] + w[j] - w_fg) * row[j] + la * std::conj(bj) + lb * std::conj(bzj);
        }
        rows_a[i] = a[i] * sa;
        rows_b[i] = a[i] * z[i] * sb;
    }
    for (std::size_t i = 0; i < M; ++i) {
        out.ca += rows_a[i];
        out.cb += rows_b[i];
    }
    return out;
}

std::vector<double> CascadeTrajectory::pa() const {
    std::vector<double> v;
    for (const auto& p : populations) v.push_back(p.a);
    return v;
}

std::vector<double> CascadeTrajectory::pb() const {
    std::vector<double> v;
    for (const auto& p : populations) v.push_back(p.b);
    return v;
}

std::vector<double> CascadeTrajectory::pfield() const {
    std::vector<double> v;
    for (const auto& p : populations) v.push_back(p.field);
    return v;
}

const CascadeSnapshot* CascadeTrajectory::snapshot_near(double t) const {
    const CascadeSnapshot* best = nullptr;
    for (const auto& s : snapshots)
        if (!best || std::abs(s.time - t) < std::abs(best->time - t)) best = &s;
    return best;
}

namespace {

// Interaction-picture stepper. Field amplitudes are stored as
// c~_kk' = c_kk' e^{i delta_kk' t}; the atoms carry no energy.
class CascadeStepper {
public:
    CascadeStepper(const CascadeModel& model, double dt, int threads)
        : model_(model), M_(model.modes()), threads_(threads) {
        const auto& a = model.pole_factor();
        const auto& b = model.spectrum_a().g;
        const auto& z = model.shift();
        double na = 0.0, nb = 0.0;
        cplx ta{}, tb{};
        for (std::size_t i = 0; i < M_; ++i) {
            na += std::norm(a[i]);
            nb += std::norm(b[i]);
            ta += std::norm(a[i]) * std::conj(z[i]);
            tb += std::norm(b[i]) * std::conj(z[i]);
        }
        s_ = std::sqrt(na * nb);
        if (s_ > 0.0) {
            beta1_ = ta * tb / (na * nb);
            beta2_ = std::sqrt(std::max(0.0, 1.0 - std::norm(beta1_)));
        }
        degenerate_ = beta2_ < 1e-12;

        // V in the orthonormal basis (A, B, Phi_A, e2), Phi_B = beta1 Phi_A + beta2 e2.
        Eigen::Matrix4cd V = Eigen::Matrix4cd::Zero();
        V(2, 0) = s_;
        V(2, 1) = s_ * beta1_;
        V(3, 1) = degenerate_ ? 0.0 : s_ * beta2_;
        V(0, 2) = std::conj(V(2, 0));
        V(1, 2) = std::conj(V(2, 1));
        V(1, 3) = std::conj(V(3, 1));
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(V);
        Eigen::Vector4cd ph;
        for (int i = 0; i < 4; ++i) ph(i) = std::polar(1.0, -es.eigenvalues()(i) * dt);
        const Eigen::Matrix4cd U = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) U_[static_cast<std::size_t>(4 * r + c)] = U(r, c);

        ra_.resize(M_);
        rb_.resize(M_);
        ca_.resize(M_);
        cb_.resize(M_);
        ca_prev_.resize(M_);
        cb_prev_.resize(M_);
        ga_.resize(M_);
        gb_.resize(M_);
        dot_a_.resize(M_);
        dot_b_.resize(M_);
        row_norm_.resize(M_);
    }

    double coupling_norm() const { return s_; }

    // Row factors ra_k = a_k e^{-i w_k t}, rb_k = ra_k e^{ikd}; column factors
    // ca_k' = b_k' e^{-i w_k' t}, cb_k' = ca_k' e^{ik'd}.
    void set_time(double t) {
        const auto& a = model_.pole_factor();
        const auto& b = model_.spectrum_a().g;
        const auto& z = model_.shift();
        const auto& w = model_.grid().omega_values();
        for (std::size_t i = 0; i < M_; ++i) {
            const cplx ph = std::polar(1.0, -w[i] * t);
            ra_[i] = a[i] * ph;
            rb_[i] = ra_[i] * z[i];
            ca_[i] = b[i] * ph;
            cb_[i] = ca_[i] * z[i];
        }
        phase_ = std::polar(1.0, model_.atom().omega_fg() * t);
    }

    // Applies any pending rank-1 updates, then accumulates row norms and (if
    // `dots`) the column contractions with the current factors.
    void pass(std::vector<cplx>& field, bool pending, bool dots) {
        const auto nM = static_cast<std::ptrdiff_t>(M_);
#pragma omp parallel for schedule(static) num_threads(threads_) if (threads_ > 1)
        for (std::ptrdiff_t ii = 0; ii < nM; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            cplx* row = field.data() + i * M_;
            const cplx ga = ga_[i], gb = gb_[i];
            double nrm = 0.0;
            cplx da{}, db{};
            for (std::size_t j = 0; j < M_; ++j) {
                if (pending) row[j] += ga * std::conj(ca_prev_[j]) + gb * std::conj(cb_prev_[j]);
                nrm += std::norm(row[j]);
                if (dots) {
                    da += ca_[j] * row[j];
                    db += cb_[j] * row[j];
                }
            }
            row_norm_[i] = nrm;
            if (dots) {
                dot_a_[i] = da;
                dot_b_[i] = db;
            }
        }
    }

    double field_norm() const {
        double s = 0.0;
        for (double v : row_norm_) s += v;
        return s;
    }

    // Exact coupling exponential at the current factors. Expects pass(..., dots = true).
    void couple(cplx& cA, cplx& cB) {
        cplx pa{}, pb{};
        for (std::size_t i = 0; i < M_; ++i) {
            pa += ra_[i] * dot_a_[i];
            pb += rb_[i] * dot_b_[i];
        }
        pa *= phase_ / s_;
        pb *= phase_ / s_;
        const cplx p1 = pa;
        const cplx p2 = degenerate_ ? cplx{} : (pb - std::conj(beta1_) * pa) / beta2_;
        const std::array<cplx, 4> x{cA, cB, p1, p2};
        std::array<cplx, 4> y{};
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 4; ++c) y[r] += U_[4 * r + c] * x[c];
        cA = y[0];
        cB = y[1];
        cplx alpha_a = y[2] - p1;
        cplx alpha_b{};
        if (!degenerate_) {
            alpha_b = (y[3] - p2) / beta2_;
            alpha_a -= alpha_b * beta1_;
        }
        const cplx base = std::conj(phase_) / s_;
        for (std::size_t i = 0; i < M_; ++i) {
            ga_[i] = alpha_a * base * std::conj(ra_[i]);
            gb_[i] = alpha_b * base * std::conj(rb_[i]);
        }
        std::swap(ca_prev_, ca_);
        std::swap(cb_prev_, cb_);
    }

private:
    const CascadeModel& model_;
    std::size_t M_;
    int threads_;
    double s_ = 0.0;
    cplx beta1_{};
    double beta2_ = 0.0;
    bool degenerate_ = true;
    std::array<cplx, 16> U_{};
    cplx phase_{1.0, 0.0};
    std::vector<cplx> ra_, rb_, ca_, cb_, ca_prev_, cb_prev_, ga_, gb_, dot_a_, dot_b_;
    std::vector<double> row_norm_;
};

// Lab-frame copy of an interaction-picture state at time t.
CascadeState to_lab(const CascadeModel& model, const CascadeState& s, double t) {
    const std::size_t M = model.modes();
    const auto& w = model.grid().omega_values();
    std::vector<cplx> ph(M);
    for (std::size_t i = 0; i < M; ++i) ph[i] = std::polar(1.0, -w[i] * t);
    const cplx base = std::polar(1.0, model.atom().omega_fg() * t);
    CascadeState out = s;
    for (std::size_t i = 0; i < M; ++i) {
        const cplx ri = base * ph[i];
        for (std::size_t j = 0; j < M; ++j) out.field[i * M + j] *= ri * ph[j];
    }
    return out;
}

double max_detuning(const CascadeModel& model) {
    double lo = 1e300, hi = -1e300;
    for (double w : model.grid().omega_values()) {
        lo = std::min(lo, w);
        hi = std::max(hi, w);
    }
    const double w_fg = model.atom().omega_fg();
    return std::max(std::abs(2.0 * lo - w_fg), std::abs(2.0 * hi - w_fg));
}

}  // namespace

CascadeTrajectory propagate_cascade(const CascadeModel& model, const CascadeState& state0,
                                    const CascadePlan& plan, const Execution& exec) {
    check_state(model, state0);
    if (!(plan.t_end > 0.0) || !(plan.dt > 0.0))
        throw ConfigError("cascade plan needs t_end > 0 and dt > 0");
    const double n0 = populations(state0).total();
    if (std::abs(n0 - 1.0) > plan.norm_tol)
        throw ConfigError(fmt::format("initial cascade state has norm^2 {}", n0));

    const auto steps = static_cast<std::size_t>(std::ceil(plan.t_end / plan.dt - 1e-9));
    const double dt = plan.t_end / static_cast<double>(steps);
    const int threads = worker_count(exec);

    std::set<std::size_t> snap_steps;
    if (plan.snapshot_stride > 0)
        for (std::size_t n = 0; n <= steps; n += plan.snapshot_stride) snap_steps.insert(n);
    for (double t : plan.snapshot_times) {
        if (t < 0.0 || t > plan.t_end + 0.5 * dt)
            throw ConfigError(fmt::format("snapshot time {} outside [0, {}]", t, plan.t_end));
        snap_steps.insert(std::min(steps, static_cast<std::size_t>(std::llround(t / dt))));
    }
    auto wants_diagonal = [&](std::size_t n) {
        return plan.diagonal_stride > 0 && (n % plan.diagonal_stride == 0 || n == steps);
    };

    CascadeTrajectory traj;
    traj.grid = model.grid();
    traj.dt = dt;
    traj.times.reserve(steps + 1);
    traj.populations.reserve(steps + 1);

    auto record = [&](std::size_t n, const CascadePopulations& p) {
        const double drift = std::abs(p.total() - 1.0);
        if (drift > plan.norm_tol) throw NormDriftError(n, static_cast<double>(n) * dt, drift);
        traj.times.push_back(static_cast<double>(n) * dt);
        traj.populations.push_back(p);
    };
    auto capture = [&](std::size_t n, const CascadeState& lab) {
        const double t = static_cast<double>(n) * dt;
        if (snap_steps.count(n)) traj.snapshots.push_back({t, lab});
        if (wants_diagonal(n)) {
            const auto prof = diagonal_profile(field_of(lab), model.grid());
            traj.diagonal_times.push_back(t);
            traj.diagonal.insert(traj.diagonal.end(), prof.begin(), prof.end());
        }
    };
    auto needs_capture = [&](std::size_t n) { return snap_steps.count(n) || wants_diagonal(n); };

    if (plan.method == Method::rk4) {
        const double bound = dt * (max_detuning(model) + 2.0 * CascadeStepper(model, dt, 1).coupling_norm());
        if (bound >= 0.1)
            throw ResolutionError(fmt::format(
                "rk4 step {} too coarse for spectral radius bound {}; lower dt", dt, bound / dt));
        CascadeState psi = state0;
        auto axpy = [](const CascadeState& x, cplx a, const CascadeState& y) {
            CascadeState r = x;
            r.ca += a * y.ca;
            r.cb += a * y.cb;
            for (std::size_t i = 0; i < r.field.size(); ++i) r.field[i] += a * y.field[i];
            return r;
        };
        const cplx mi{0.0, -1.0};
        for (std::size_t n = 0;; ++n) {
            record(n, populations(psi));
            if (needs_capture(n)) capture(n, psi);
            if (n == steps) break;
            const CascadeState k1 = apply_cascade_h(model, psi, exec);
            const CascadeState k2 = apply_cascade_h(model, axpy(psi, mi * dt / 2.0, k1), exec);
            const CascadeState k3 = apply_cascade_h(model, axpy(psi, mi * dt / 2.0, k2), exec);
            const CascadeState k4 = apply_cascade_h(model, axpy(psi, mi * dt, k3), exec);
            const cplx h = mi * dt / 6.0;
            psi.ca += h * (k1.ca + 2.0 * k2.ca + 2.0 * k3.ca + k4.ca);
            psi.cb += h * (k1.cb + 2.0 * k2.cb + 2.0 * k3.cb + k4.cb);
            for (std::size_t i = 0; i < psi.field.size(); ++i)
                psi.field[i] += h * (k1.field[i] + 2.0 * k2.field[i] + 2.0 * k3.field[i] + k4.field[i]);
        }
        traj.final_state = std::move(psi);
        return traj;
    }

    CascadeStepper stepper(model, dt, threads);
    CascadeState psi = state0;  // interaction picture; equal to the lab frame at t = 0
    bool pending = false;
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        stepper.set_time(t + 0.5 * dt);
        stepper.pass(psi.field, pending, stepper.coupling_norm() > 0.0);
        pending = false;
        record(n, {std::norm(psi.ca), std::norm(psi.cb), stepper.field_norm()});
        if (needs_capture(n)) capture(n, to_lab(model, psi, t));
        if (stepper.coupling_norm() > 0.0) {
            stepper.couple(psi.ca, psi.cb);
            pending = true;
        }
    }
    stepper.pass(psi.field, pending, false);
    record(steps, {std::norm(psi.ca), std::norm(psi.cb), stepper.field_norm()});
    traj.final_state = to_lab(model, psi, plan.t_end);
    if (needs_capture(steps)) capture(steps, traj.final_state);
    return traj;
}

std::string cascade_population_csv(const CascadeTrajectory& traj) {
    std::string out = "t,P_A,P_B,P_field\n";
    for (std::size_t n = 0; n < traj.times.size(); ++n) {
        const auto& p = traj.populations[n];
        out += fmt::format("{},{},{},{}\n", traj.times[n], p.a, p.b, p.field);
    }
    return out;
}

void write_cascade_population_csv(const std::filesystem::path& path,
                                  const CascadeTrajectory& traj) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(fmt::format("cannot open {} for writing", path.string()));
    f << cascade_population_csv(traj);
}

cplx TwoQubitRho::trace() const { return at(gg, gg) + at(gf, gf) + at(fg, fg) + at(ff, ff); }
double TwoQubitRho::population_a() const { return (at(fg, fg) + at(ff, ff)).real(); }
double TwoQubitRho::population_b() const { return (at(gf, gf) + at(ff, ff)).real(); }

TwoQubitRho TwoQubitRho::pure(Index state, double gamma_r) {
    TwoQubitRho r;
    r.gamma_r = gamma_r;
    r.at(state, state) = 1.0;
    return r;
}

namespace {

using Mat4 = Eigen::Matrix4cd;

Mat4 to_eigen(const TwoQubitRho& r) {
    Mat4 m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = r.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    return m;
}

}  // namespace

std::vector<TwoQubitRho> cascaded_master_equation(double gamma_r,
                                                  const std::vector<double>& t_grid,
                                                  const TwoQubitRho& rho0,
                                                  const MasterEquationOptions& opt) {
    if (!(gamma_r > 0.0)) throw ConfigError("cascaded master equation needs gamma_R > 0");
    if (t_grid.empty()) return {};
    for (std::size_t n = 1; n < t_grid.size(); ++n)
        if (!(t_grid[n] >= t_grid[n - 1])) throw ConfigError("time grid must be non-decreasing");
    const Mat4 r0 = to_eigen(rho0);
    if (std::abs(r0.trace() - 1.0) > 1e-9 || (r0 - r0.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw ConfigError("initial density matrix must be Hermitian with unit trace");

    using TQ = TwoQubitRho;
    Mat4 sa = Mat4::Zero(), sb = Mat4::Zero();  // lowering operators
    sa(TQ::gg, TQ::fg) = 1.0;
    sa(TQ::gf, TQ::ff) = 1.0;
    sb(TQ::gg, TQ::gf) = 1.0;
    sb(TQ::fg, TQ::ff) = 1.0;
    if (!opt.downstream) sb.setZero();
    const cplx I{0.0, 1.0};
    const Mat4 H = -I * (gamma_r / 2.0) * (sa.adjoint() * sa + sb.adjoint() * sb) -
                   I * gamma_r * sb.adjoint() * sa;
    const Mat4 L = std::sqrt(gamma_r) * (sa + sb);
    const Mat4 Hd = H.adjoint();
    const Mat4 Ld = L.adjoint();
    auto rhs = [&](const Mat4& r) -> Mat4 { return -I * H * r + I * r * Hd + L * r * Ld; };

    std::vector<TwoQubitRho> out;
    out.reserve(t_grid.size());
    Mat4 r = r0;
    auto emit = [&](double t) {
        TwoQubitRho q;
        q.time = t;
        q.gamma_r = gamma_r;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) q.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = r(i, j);
        out.push_back(q);
    };
    emit(t_grid.front());
    for (std::size_t n = 1; n < t_grid.size(); ++n) {
        const double span = t_grid[n] - t_grid[n - 1];
        const auto sub = std::max<std::size_t>(
            opt.min_substeps,
            static_cast<std::size_t>(std::ceil(span * gamma_r / opt.max_rate_step)));
        const double h = span / static_cast<double>(sub);
        for (std::size_t s = 0; s < sub; ++s) {
            const Mat4 k1 = rhs(r);
            const Mat4 k2 = rhs(r + 0.5 * h * k1);
            const Mat4 k3 = rhs(r + 0.5 * h * k2);
            const Mat4 k4 = rhs(r + h * k3);
            r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        const double drift = std::abs(r.trace() - 1.0);
        if (drift > opt.trace_tol)
            throw IntegratorFailure(
                fmt::format("trace drifted by {} at t = {}", drift, t_grid[n]));
        emit(t_grid[n]);
    }
    return out;
}

double closed_form_pa(double gamma_r, double t) { return t <= 0.0 ? 1.0 : std::exp(-gamma_r * t); }

double closed_form_pb(double gamma_r, double t) {
    if (t <= 0.0) return 0.0;
    const double x = gamma_r * t;
    return x * x * std::exp(-x);
}

double matched_gamma_right(const CascadeModel& model, double delta_w, Units units) {
    WindowModelParams p;
    p.L = model.grid().L_eff();
    p.g_k0 = model.spectrum_a().magnitude_at(units.k0);
    p.delta_w = delta_w;
    p.Delta = model.atom().delta();
    p.c = model.grid().c();
    return gamma_right(p);
}

namespace {

double interpolate(const std::vector<double>& t, const std::vector<double>& y, double x) {
    if (t.empty()) return 0.0;
    if (x <= t.front()) return y.front();
    if (x >= t.back()) return y.back();
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const auto i = static_cast<std::size_t>(it - t.begin());
    const double w = (x - t[i - 1]) / (t[i] - t[i - 1]);
    return (1.0 - w) * y[i - 1] + w * y[i];
}

// First time y exceeds `fraction` of its maximum, linearly interpolated.
// Early rise P ~ (G (t - t_on))^2: fit sqrt(P) linearly where it lies between
// 3% and 20% of its maximum and extrapolate to zero.
bool onset(const std::vector<double>& t, const std::vector<double>& y, double& out) {
    if (y.empty()) return false;
    const double peak = std::sqrt(std::max(0.0, *std::max_element(y.begin(), y.end())));
    if (!(peak > 0.0)) return false;
    const double lo = 0.03 * peak, hi = 0.2 * peak;
    double n = 0.0, st = 0.0, ss = 0.0, stt = 0.0, sts = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double s = std::sqrt(std::max(0.0, y[i]));
        if (s > hi) break;
        if (s < lo) continue;
        n += 1.0;
        st += t[i];
        ss += s;
        stt += t[i] * t[i];
        sts += t[i] * s;
    }
    const double den = n * stt - st * st;
    if (n < 2.0 || !(den > 0.0)) return false;
    const double slope = (n * sts - st * ss) / den;
    if (!(slope > 0.0)) return false;
    const double intercept = (ss - slope * st) / n;
    out = -intercept / slope;
    return true;
}

}  // namespace

CascadeComparison compare_cascade(const CascadeTrajectory& unitary,
                                  const std::vector<TwoQubitRho>& me, double separation,
                                  double c, const FitWindow& fit) {
    CascadeComparison r;
    r.retardation = separation / c;
    r.gamma_r = me.empty() ? 0.0 : me.front().gamma_r;
    const auto pa = unitary.pa();
    const auto pb = unitary.pb();

    const auto f = fit_decay_rate(unitary.times, pa, fit);
    r.gamma_fit = f.gamma;
    r.fit_r_squared = f.r_squared;

    if (!pb.empty()) {
        const auto it = std::max_element(pb.begin(), pb.end());
        r.peak_b = *it;
        r.peak_time = unitary.times[static_cast<std::size_t>(it - pb.begin())];
    }
    r.onset_found = onset(unitary.times, pb, r.onset_time);

    std::vector<double> tm, pm;
    for (const auto& q : me) {
        tm.push_back(q.time);
        pm.push_back(q.population_b());
    }
    double me_onset = 0.0;
    if (onset(tm, pm, me_onset)) {
        r.me_onset_time = me_onset;
        if (r.onset_found) r.retardation_estimate = r.onset_time - me_onset;
    }
    if (!tm.empty()) {
        for (std::size_t n = 0; n < unitary.times.size(); ++n) {
            const double ts = unitary.times[n] - r.retardation;
            const double ref = ts < tm.front() ? pm.front() : interpolate(tm, pm, ts);
            if (ts > tm.back()) break;
            r.max_discrepancy = std::max(r.max_discrepancy, std::abs(pb[n] - ref));
        }
    }

    // Worst left-moving share among the stored fields after B's peak.
    if (!unitary.final_state.field.empty())
        r.left_fraction_after_peak = left_moving_fraction(field_of(unitary.final_state), unitary.grid);
    for (const auto& s : unitary.snapshots)
        if (s.time >= r.peak_time)
            r.left_fraction_after_peak =
                std::max(r.left_fraction_after_peak, left_moving_fraction(field_of(s.state), unitary.grid));

    if (r.gamma_r > 0.0) {
        r.wavepacket_extent = c / r.gamma_r;
        if (separation > 0.0) r.extent_ratio = r.wavepacket_extent / separation;
    }
    return r;
}

}  // namespace giantpair
