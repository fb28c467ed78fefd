#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "giantpair/execution.hpp"
#include "giantpair/model.hpp"

namespace giantpair {

struct BandWeights {
    double passband = 50.0;
    double stopband = 500.0;
    double elsewhere = 1.0;
};

struct OptimizationProblem {
    WindowTarget target;
    BandWeights weights;
    double k_max = 2.0;
    std::size_t grid_modes = 2000;
    std::size_t n_points = 50;
    double x_span = 7.5;  // positions in [-x_span, x_span] x0
    double amplitude_max = 1.0;
    double phase_bound = pi / 2.0;
    bool chiral = false;
    std::uint64_t seed = 1;
    std::size_t restarts = 32;
    std::size_t max_iterations = 1500;  // per smoothing stage
    std::vector<double> epsilon_schedule{1e-2, 1e-3, 1e-4, 1e-9};

    explicit OptimizationProblem(WindowTarget t) : target(t) {}

    void validate() const;
    double weight(double k) const;
};

// Delta = 0.15, delta_w = 0.1 in units of omega0; one-sided target when chiral.
OptimizationProblem paper_problem(bool chiral);

struct OptimizationResult {
    CouplingSequence sequence;
    double cm_value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t restart_index = 0;
    std::vector<double> restart_cm;  // best of (initial, final) per restart
    std::vector<double> initial_cm;
};

// C_m = sum_k | |g_k| - target_k | w(k) dk on the problem grid, with the
// spectrum in units of g0.
double objective_cm(const CouplingSequence& seq, const OptimizationProblem& problem);

// Smoothed objective over the packed variables [x_1..x_N, A_1..A_N, (theta_1..theta_N)],
// |y| replaced by sqrt(y^2 + eps^2). eps = 0 gives C_m itself.
class SpectralObjective {
public:
    explicit SpectralObjective(const OptimizationProblem& problem);

    std::size_t variable_count() const;
    double value(std::span<const double> vars, double eps) const;
    double value_and_gradient(std::span<const double> vars, double eps,
                              std::span<double> grad) const;

    std::vector<double> pack(const CouplingSequence& seq) const;
    CouplingSequence unpack(std::span<const double> vars) const;
    void bounds(std::vector<double>& lo, std::vector<double>& hi) const;

    // Per-grid-point residuals | |g_k| - target_k | (for kink screening in tests).
    std::vector<double> residuals(std::span<const double> vars) const;

private:
    void spectrum(std::span<const double> vars, std::vector<cplx>& g) const;

    std::size_t n_;
    bool chiral_;
    double x0_;
    double x_span_;
    double amplitude_max_;
    double phase_bound_;
    double k_start_;
    double dk_;
    std::vector<double> target_;
    std::vector<double> weight_;  // w(k) dk, doubled for mirrored points
};

OptimizationResult optimize_bidirectional(const OptimizationProblem& problem,
                                          const Execution& exec = {});
OptimizationResult optimize_chiral(const OptimizationProblem& problem, const Execution& exec = {});

enum class TableId { table1, table2 };

// Shipped fixture text, identical to core/data/table{1,2}.seq.
std::string_view table_text(TableId id);
CouplingSequence load_table_sequence(TableId id, double g0 = 1.0);

}  // namespace giantpair
