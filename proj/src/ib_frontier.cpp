#include "ibsignal/ib_frontier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ibsignal/csvio.hpp"
#include "ibsignal/errors.hpp"

#ifdef IBSIGNAL_USE_BLAS
#include <cblas.h>
#endif

namespace ibsignal {

namespace {

constexpr double kConvergenceTol = 1e-8;
constexpr double kDeadCluster = 1e-300;

void check_problem(const std::vector<double>& px, const MeaningDistribution& meanings,
                   size_t encoder_size) {
    if (meanings.n < 1) throw std::invalid_argument("ib: empty meaning distribution");
    if (px.size() != static_cast<size_t>(meanings.n))
        throw std::invalid_argument("ib: prior size does not match meaning rows");
    if (encoder_size % px.size() != 0 || encoder_size == 0)
        throw std::invalid_argument("ib: encoder size is not a multiple of the chip count");
}

// Sum_u m_x(u) ln m_x(u) per row, fixed across iterations.
std::vector<double> row_mlogm(const MeaningDistribution& meanings) {
    std::vector<double> out(static_cast<size_t>(meanings.n), 0.0);
    for (int x = 0; x < meanings.n; ++x) {
        const double* m = meanings.row(x);
        double acc = 0.0;
        for (int u = 0; u < meanings.n; ++u)
            if (m[u] > 0.0) acc += m[u] * std::log(m[u]);
        out[static_cast<size_t>(x)] = acc;
    }
    return out;
}

void compute_marginal(const std::vector<double>& px, const std::vector<double>& q, int n, int k,
                      std::vector<double>& marginal) {
    marginal.assign(static_cast<size_t>(k), 0.0);
    for (int x = 0; x < n; ++x) {
        const double p = px[static_cast<size_t>(x)];
        const double* qx = q.data() + static_cast<size_t>(x) * k;
        for (int c = 0; c < k; ++c) marginal[static_cast<size_t>(c)] += p * qx[c];
    }
}

void compute_decoder(const std::vector<double>& px, const MeaningDistribution& meanings,
                     const std::vector<double>& q, const std::vector<double>& marginal, int k,
                     std::vector<double>& mhat, std::vector<double>& log_mhat) {
    const int n = meanings.n;
    mhat.assign(static_cast<size_t>(k) * n, 0.0);
    for (int x = 0; x < n; ++x) {
        const double p = px[static_cast<size_t>(x)];
        if (p == 0.0) continue;
        const double* m = meanings.row(x);
        const double* qx = q.data() + static_cast<size_t>(x) * k;
        for (int c = 0; c < k; ++c) {
            const double w = p * qx[c];
            if (w == 0.0) continue;
            double* target = mhat.data() + static_cast<size_t>(c) * n;
            for (int u = 0; u < n; ++u) target[u] += w * m[u];
        }
    }
    log_mhat.resize(static_cast<size_t>(k) * n);
    for (int c = 0; c < k; ++c) {
        double* row = mhat.data() + static_cast<size_t>(c) * n;
        const double qc = marginal[static_cast<size_t>(c)];
        if (qc < kDeadCluster) {
            for (int u = 0; u < n; ++u) row[u] = 1.0 / n;
        } else {
            for (int u = 0; u < n; ++u) row[u] /= qc;
        }
        double* lrow = log_mhat.data() + static_cast<size_t>(c) * n;
        for (int u = 0; u < n; ++u) lrow[u] = std::log(row[u]);
    }
}

// D_KL[m_x || mhat_c] in nats for every (x, c).
void compute_distortion(const MeaningDistribution& meanings, const std::vector<double>& mlogm,
                        const std::vector<double>& log_mhat, int k,
                        std::vector<double>& distortion) {
    const int n = meanings.n;
    distortion.resize(static_cast<size_t>(n) * k);
    for (int x = 0; x < n; ++x) {
        const double* m = meanings.row(x);
        double* dx = distortion.data() + static_cast<size_t>(x) * k;
        for (int c = 0; c < k; ++c) {
            const double* lmh = log_mhat.data() + static_cast<size_t>(c) * n;
            double cross = 0.0;
            for (int u = 0; u < n; ++u) cross += m[u] * lmh[u];
            dx[c] = mlogm[static_cast<size_t>(x)] - cross;
        }
    }
}

// Lagrangian I(X;C) + beta E[D] in nats with the current marginal.
double lagrangian(const std::vector<double>& px, const std::vector<double>& q,
                  const std::vector<double>& marginal, const std::vector<double>& distortion,
                  double beta, int n, int k) {
    double objective = 0.0;
    for (int x = 0; x < n; ++x) {
        const double p = px[static_cast<size_t>(x)];
        const double* qx = q.data() + static_cast<size_t>(x) * k;
        const double* dx = distortion.data() + static_cast<size_t>(x) * k;
        for (int c = 0; c < k; ++c) {
            if (qx[c] > 0.0)
                objective += p * qx[c] * std::log(qx[c] / marginal[static_cast<size_t>(c)]);
            objective += beta * p * qx[c] * dx[c];
        }
    }
    return objective;
}

double expected_distortion(const std::vector<double>& px, const std::vector<double>& q,
                           const std::vector<double>& distortion, int n, int k) {
    double acc = 0.0;
    for (int x = 0; x < n; ++x) {
        const double p = px[static_cast<size_t>(x)];
        const double* qx = q.data() + static_cast<size_t>(x) * k;
        const double* dx = distortion.data() + static_cast<size_t>(x) * k;
        for (int c = 0; c < k; ++c) acc += p * qx[c] * dx[c];
    }
    return acc;
}

double plugin_complexity_nats(const std::vector<double>& px, const std::vector<double>& q,
                              const std::vector<double>& marginal, int n, int k) {
    double acc = 0.0;
    for (int x = 0; x < n; ++x) {
        const double p = px[static_cast<size_t>(x)];
        const double* qx = q.data() + static_cast<size_t>(x) * k;
        for (int c = 0; c < k; ++c)
            if (qx[c] > 0.0 && p > 0.0)
                acc += p * qx[c] * std::log(qx[c] / marginal[static_cast<size_t>(c)]);
    }
    return std::max(acc, 0.0);
}

}  // namespace

void MeaningDistribution::validate(double tol) const {
    if (rows.size() != static_cast<size_t>(n) * n)
        throw DataError("meaning distribution: wrong matrix size");
    for (int x = 0; x < n; ++x) {
        double total = 0.0;
        for (int u = 0; u < n; ++u) {
            const double v = row(x)[u];
            if (!(v >= 0.0)) throw DataError("meaning distribution: negative entry");
            total += v;
        }
        if (std::abs(total - 1.0) > tol)
            throw DataError("meaning distribution: row does not sum to 1");
    }
}

MeaningDistribution build_meanings(const ChipTable& chips, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("build_meanings: sigma must be positive");
    MeaningDistribution meanings;
    meanings.n = chips.count();
    meanings.rows.resize(static_cast<size_t>(meanings.n) * meanings.n);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int x = 0; x < meanings.n; ++x) {
        const Tensor& a = chips.scaled_lab(x);
        double* row = meanings.rows.data() + static_cast<size_t>(x) * meanings.n;
        double total = 0.0;
        for (int u = 0; u < meanings.n; ++u) {
            const Tensor& b = chips.scaled_lab(u);
            double d2 = 0.0;
            for (int i = 0; i < 3; ++i) {
                const double d = a.data[static_cast<size_t>(i)] - b.data[static_cast<size_t>(i)];
                d2 += d * d;
            }
            row[u] = std::exp(-d2 * inv);
            total += row[u];
        }
        for (int u = 0; u < meanings.n; ++u) row[u] /= total;
    }
    return meanings;
}

std::vector<double> default_beta_schedule() {
    std::vector<double> betas;
    const int count = 100;
    for (int i = 0; i < count; ++i) {
        const double exponent = -2.0 + 12.0 * static_cast<double>(i) / (count - 1);
        betas.push_back(std::pow(2.0, exponent));
    }
    return betas;
}

IBSolution ib_iterate(const std::vector<double>& px, const MeaningDistribution& meanings,
                      double beta, std::vector<double> q_init, int max_rounds) {
    check_problem(px, meanings, q_init.size());
    if (!(beta > 0.0)) throw std::invalid_argument("ib_iterate: beta must be positive");
    if (max_rounds < 1) throw std::invalid_argument("ib_iterate: max_rounds must be positive");

    const int n = meanings.n;
    const int k = static_cast<int>(q_init.size() / px.size());
    const std::vector<double> mlogm = row_mlogm(meanings);

    std::vector<double> q = std::move(q_init);
    std::vector<double> marginal, mhat, log_mhat, distortion;
    std::vector<double> log_weights(static_cast<size_t>(k));

    IBSolution solution;
    solution.beta = beta;
    solution.cluster_count = k;

    for (int round = 1; round <= max_rounds; ++round) {
        compute_marginal(px, q, n, k, marginal);
        compute_decoder(px, meanings, q, marginal, k, mhat, log_mhat);
        compute_distortion(meanings, mlogm, log_mhat, k, distortion);

        double delta = 0.0;
        for (int x = 0; x < n; ++x) {
            double* qx = q.data() + static_cast<size_t>(x) * k;
            const double* dx = distortion.data() + static_cast<size_t>(x) * k;
            double best = -1e308;
            for (int c = 0; c < k; ++c) {
                const double qc = marginal[static_cast<size_t>(c)];
                log_weights[static_cast<size_t>(c)] =
                    qc < kDeadCluster ? -1e308 : std::log(qc) - beta * dx[c];
                best = std::max(best, log_weights[static_cast<size_t>(c)]);
            }
            double total = 0.0;
            for (int c = 0; c < k; ++c) {
                log_weights[static_cast<size_t>(c)] =
                    std::exp(log_weights[static_cast<size_t>(c)] - best);
                total += log_weights[static_cast<size_t>(c)];
            }
            for (int c = 0; c < k; ++c) {
                const double next = log_weights[static_cast<size_t>(c)] / total;
                delta = std::max(delta, std::abs(next - qx[c]));
                qx[c] = next;
            }
        }

        solution.objective_trace.push_back(lagrangian(px, q, marginal, distortion, beta, n, k));
        solution.rounds = round;
        if (delta < kConvergenceTol) {
            solution.converged = true;
            break;
        }
    }

    compute_marginal(px, q, n, k, marginal);
    compute_decoder(px, meanings, q, marginal, k, mhat, log_mhat);
    compute_distortion(meanings, mlogm, log_mhat, k, distortion);
    solution.complexity_bits = plugin_complexity_nats(px, q, marginal, n, k) / std::numbers::ln2;
    solution.informativeness_bits =
        -std::max(expected_distortion(px, q, distortion, n, k), 0.0) / std::numbers::ln2;
    solution.encoder = std::move(q);
    solution.decoder = std::move(mhat);
    solution.marginal = std::move(marginal);
    return solution;
}

std::vector<IBSolution> compute_frontier(const std::vector<double>& px,
                                         const MeaningDistribution& meanings,
                                         const std::vector<double>& betas, int cluster_count,
                                         RandomSource& rng) {
    if (cluster_count < 1) throw std::invalid_argument("compute_frontier: need clusters");
    if (betas.empty()) throw std::invalid_argument("compute_frontier: empty beta schedule");
    for (size_t i = 0; i + 1 < betas.size(); ++i)
        if (betas[i + 1] <= betas[i])
            throw std::invalid_argument("compute_frontier: beta schedule must increase");
    check_problem(px, meanings, static_cast<size_t>(meanings.n) * cluster_count);

    const int n = meanings.n;
    const int k = cluster_count;
    std::vector<double> q(static_cast<size_t>(n) * k, 1.0 / k);

    std::vector<IBSolution> frontier;
    frontier.reserve(betas.size());
    for (double beta : betas) {
        for (int x = 0; x < n; ++x) {
            double* qx = q.data() + static_cast<size_t>(x) * k;
            double total = 0.0;
            for (int c = 0; c < k; ++c) {
                qx[c] += 1e-6 * rng.uniform();
                total += qx[c];
            }
            for (int c = 0; c < k; ++c) qx[c] /= total;
        }
        IBSolution solution = ib_iterate(px, meanings, beta, q);
        q = solution.encoder;
        frontier.push_back(std::move(solution));
    }
    return frontier;
}

double ib_informativeness(const std::vector<double>& px, const MeaningDistribution& meanings,
                          const std::vector<double>& encoder) {
    check_problem(px, meanings, encoder.size());
    const int n = meanings.n;
    const int k = static_cast<int>(encoder.size() / px.size());
    const std::vector<double> mlogm = row_mlogm(meanings);
    std::vector<double> marginal, mhat, log_mhat, distortion;
    compute_marginal(px, encoder, n, k, marginal);
    compute_decoder(px, meanings, encoder, marginal, k, mhat, log_mhat);
    compute_distortion(meanings, mlogm, log_mhat, k, distortion);
    return -std::max(expected_distortion(px, encoder, distortion, n, k), 0.0) /
           std::numbers::ln2;
}

double frontier_informativeness_at(const std::vector<IBSolution>& frontier,
                                   double complexity_bits) {
    if (frontier.empty())
        throw std::invalid_argument("frontier_informativeness_at: empty frontier");
    std::vector<std::pair<double, double>> points;
    points.reserve(frontier.size());
    for (const IBSolution& s : frontier)
        points.emplace_back(s.complexity_bits, s.informativeness_bits);
    std::sort(points.begin(), points.end());

    if (complexity_bits <= points.front().first) return points.front().second;
    if (complexity_bits >= points.back().first) return points.back().second;
    for (size_t i = 0; i + 1 < points.size(); ++i) {
        if (complexity_bits > points[i + 1].first) continue;
        const double span = points[i + 1].first - points[i].first;
        if (span < 1e-15) return std::max(points[i].second, points[i + 1].second);
        const double t = (complexity_bits - points[i].first) / span;
        return points[i].second + t * (points[i + 1].second - points[i].second);
    }
    return points.back().second;
}

void save_frontier_csv(const std::string& path, const std::vector<IBSolution>& solutions) {
    std::string out = "beta,complexity_bits,informativeness_bits,converged\n";
    for (const IBSolution& s : solutions) {
        out += format_double(s.beta);
        out += "," + format_double(s.complexity_bits);
        out += "," + format_double(s.informativeness_bits);
        out += s.converged ? ",1\n" : ",0\n";
    }
    write_text_file(path, out);
}

}  // namespace ibsignal
