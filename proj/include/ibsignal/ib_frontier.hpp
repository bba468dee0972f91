// Theoretical complexity-informativeness bound for the color domain.
// Meanings are Gaussian distributions over the chip universe; the bound is
// traced by self-consistent fixed-point iteration at each beta, annealed
// along an increasing beta schedule with warm starts. Complexity and
// informativeness are reported in bits; informativeness is -E[D_KL[m || mhat]]
// and never positive.
#pragma once

#include <string>
#include <vector>

#include "ibsignal/random.hpp"
#include "ibsignal/wcs.hpp"

namespace ibsignal {

// Row-stochastic n x n matrix; row x is the meaning m_x over all chips.
struct MeaningDistribution {
    int n = 0;
    std::vector<double> rows;

    const double* row(int x) const { return rows.data() + static_cast<size_t>(x) * n; }
    void validate(double tol = 1e-9) const;
};

// m_x(u) proportional to exp(-|lab(u) - lab(x)|^2 / (2 sigma^2)) over scaled
// CIELAB coordinates.
MeaningDistribution build_meanings(const ChipTable& chips, double sigma);

constexpr double kMeaningSigma = 0.64;
constexpr int kFrontierClusters = 40;

// 100 log-spaced betas in [2^-2, 2^10].
std::vector<double> default_beta_schedule();

struct IBSolution {
    double beta = 0.0;
    int cluster_count = 0;
    std::vector<double> encoder;   // n x K, q(c|x)
    std::vector<double> decoder;   // K x n, mhat_c
    std::vector<double> marginal;  // q(c)
    double complexity_bits = 0.0;
    double informativeness_bits = 0.0;
    bool converged = false;
    int rounds = 0;
    // IB Lagrangian I(X;C) + beta * E[D] in nats after each round; never
    // increases from one round to the next.
    std::vector<double> objective_trace;
};

// Fixed-point iteration at one beta from the given encoder init (n x K,
// row-stochastic). Stops when the encoder max-norm change drops below 1e-8
// or after max_rounds, flagging the result non-converged in the latter case.
IBSolution ib_iterate(const std::vector<double>& px, const MeaningDistribution& meanings,
                      double beta, std::vector<double> q_init, int max_rounds = 10000);

// Deterministic annealing along an increasing beta schedule; each solve warm
// starts from the previous encoder with 1e-6 symmetry-breaking noise.
std::vector<IBSolution> compute_frontier(const std::vector<double>& px,
                                         const MeaningDistribution& meanings,
                                         const std::vector<double>& betas, int cluster_count,
                                         RandomSource& rng);

// -E[D_KL[m_x || mhat_c]] in bits for an arbitrary encoder (n x K), with
// mhat derived from the encoder itself. This is the informativeness
// coordinate used to place trained agents against the frontier.
double ib_informativeness(const std::vector<double>& px, const MeaningDistribution& meanings,
                          const std::vector<double>& encoder);

// Frontier informativeness at a complexity value, piecewise-linear between
// the solved points and clamped at the ends.
double frontier_informativeness_at(const std::vector<IBSolution>& frontier,
                                   double complexity_bits);

// CSV with header beta,complexity_bits,informativeness_bits,converged.
void save_frontier_csv(const std::string& path, const std::vector<IBSolution>& solutions);

}  // namespace ibsignal
