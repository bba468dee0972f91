#include "ibsignal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ibsignal/csvio.hpp"
#include "ibsignal/errors.hpp"

namespace ibsignal {

namespace {

// MI in bits of a joint table [rows x cols]; zero cells contribute nothing.
double joint_mi_bits(const std::vector<double>& joint, int rows, int cols) {
    std::vector<double> row_marg(static_cast<size_t>(rows), 0.0);
    std::vector<double> col_marg(static_cast<size_t>(cols), 0.0);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const double v = joint[static_cast<size_t>(i) * cols + j];
            row_marg[static_cast<size_t>(i)] += v;
            col_marg[static_cast<size_t>(j)] += v;
        }
    double mi = 0.0;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const double v = joint[static_cast<size_t>(i) * cols + j];
            if (v <= 0.0) continue;
            mi += v * std::log2(v / (row_marg[static_cast<size_t>(i)] * col_marg[static_cast<size_t>(j)]));
        }
    return std::max(0.0, mi);
}

// Joint p(w,v) = sum_x p(x) a(w|x) b(v|x) for two conditionals over one x.
std::vector<double> cross_joint(const NamingSystem& a, const NamingSystem& b) {
    const int chips = a.chip_count();
    std::vector<double> joint(static_cast<size_t>(a.signal_count) * b.signal_count, 0.0);
    for (int x = 0; x < chips; ++x) {
        const double px = a.px[static_cast<size_t>(x)];
        if (px == 0.0) continue;
        for (int w = 0; w < a.signal_count; ++w) {
            const double qa = a.q_at(x, w);
            if (qa == 0.0) continue;
            for (int v = 0; v < b.signal_count; ++v)
                joint[static_cast<size_t>(w) * b.signal_count + v] += px * qa * b.q_at(x, v);
        }
    }
    return joint;
}

int argmax_signal(const NamingSystem& system, int chip) {
    int best = 0;
    for (int c = 1; c < system.signal_count; ++c)
        if (system.q_at(chip, c) > system.q_at(chip, best)) best = c;
    return best;
}

// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns
// eigenvalues in `values` and eigenvectors as columns of `vectors`.
void jacobi_eigen(std::vector<double> a, int n, std::vector<double>& values,
                  std::vector<double>& vectors) {
    vectors.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) vectors[static_cast<size_t>(i) * n + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a[static_cast<size_t>(p) * n + q] * a[static_cast<size_t>(p) * n + q];
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[static_cast<size_t>(p) * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double app = a[static_cast<size_t>(p) * n + p];
                const double aqq = a[static_cast<size_t>(q) * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a[static_cast<size_t>(i) * n + p];
                    const double aiq = a[static_cast<size_t>(i) * n + q];
                    a[static_cast<size_t>(i) * n + p] = c * aip - s * aiq;
                    a[static_cast<size_t>(i) * n + q] = s * aip + c * aiq;
                }
                for (int j = 0; j < n; ++j) {
                    const double apj = a[static_cast<size_t>(p) * n + j];
                    const double aqj = a[static_cast<size_t>(q) * n + j];
                    a[static_cast<size_t>(p) * n + j] = c * apj - s * aqj;
                    a[static_cast<size_t>(q) * n + j] = s * apj + c * aqj;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = vectors[static_cast<size_t>(i) * n + p];
                    const double viq = vectors[static_cast<size_t>(i) * n + q];
                    vectors[static_cast<size_t>(i) * n + p] = c * vip - s * viq;
                    vectors[static_cast<size_t>(i) * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    values.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) values[static_cast<size_t>(i)] = a[static_cast<size_t>(i) * n + i];
}

double euclidean(const Tensor& a, const Tensor& b) {
    double total = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        const double d = a(i) - b(i);
        total += d * d;
    }
    return std::sqrt(total);
}

}  // namespace

double estimate_complexity(const NamingSystem& system) {
    const int chips = system.chip_count();
    std::vector<double> joint(static_cast<size_t>(chips) * system.signal_count, 0.0);
    for (int x = 0; x < chips; ++x)
        for (int c = 0; c < system.signal_count; ++c)
            joint[static_cast<size_t>(x) * system.signal_count + c] =
                system.px[static_cast<size_t>(x)] * system.q_at(x, c);
    return joint_mi_bits(joint, chips, system.signal_count);
}

double gnid(const NamingSystem& q1, const NamingSystem& q2) {
    if (q1.chip_count() != q2.chip_count())
        throw DegenerateInputError("gnid: systems cover different chip sets");
    const double mi_wv = joint_mi_bits(cross_joint(q1, q2), q1.signal_count, q2.signal_count);
    const double mi_ww = joint_mi_bits(cross_joint(q1, q1), q1.signal_count, q1.signal_count);
    const double mi_vv = joint_mi_bits(cross_joint(q2, q2), q2.signal_count, q2.signal_count);
    const double denom = std::max(mi_ww, mi_vv);
    if (denom == 0.0)
        throw UndefinedResultError("gnid: both systems are constant, dissimilarity undefined");
    return 1.0 - mi_wv / denom;
}

MatchResult best_match(int language_id, const NamingSystem& language,
                       const std::vector<AgentSystemRef>& agents) {
    if (agents.empty()) throw std::invalid_argument("best_match: empty agent set");
    MatchResult best;
    best.language_id = language_id;
    bool have = false;
    for (const AgentSystemRef& agent : agents) {
        const double g = gnid(language, *agent.system);
        if (!have || g < best.gnid_value ||
            (g == best.gnid_value && agent.epoch < best.epoch)) {
            best.gnid_value = g;
            best.run_id = agent.run_id;
            best.epoch = agent.epoch;
            have = true;
        }
    }
    return best;
}

void save_match_table_csv(const std::string& path, const std::vector<MatchResult>& results) {
    std::ostringstream out;
    out << "language_id,best_agent_run,best_epoch,gnid\n";
    for (const MatchResult& r : results)
        out << r.language_id << ',' << r.run_id << ',' << r.epoch << ','
            << format_double(r.gnid_value) << '\n';
    write_text_file(path, out.str());
}

ModeMap mode_map(const NamingSystem& system, const ChipTable& chips) {
    if (system.chip_count() != chips.count())
        throw DegenerateInputError("mode_map: system does not cover the chip table");
    ModeMap map;
    map.signal_count = system.signal_count;
    map.modal.resize(static_cast<size_t>(chips.count()));
    map.used.assign(static_cast<size_t>(system.signal_count), false);
    std::vector<int> members(static_cast<size_t>(system.signal_count), 0);
    std::vector<Tensor> sums(static_cast<size_t>(system.signal_count), Tensor::zeros({3}));

    for (int x = 0; x < chips.count(); ++x) {
        const int c = argmax_signal(system, x);
        map.modal[static_cast<size_t>(x)] = c;
        map.used[static_cast<size_t>(c)] = true;
        members[static_cast<size_t>(c)]++;
        const ChipRow& chip = chips.chip(x);
        sums[static_cast<size_t>(c)].data[0] += chip.lab_l;
        sums[static_cast<size_t>(c)].data[1] += chip.lab_a;
        sums[static_cast<size_t>(c)].data[2] += chip.lab_b;
    }

    map.centroids.resize(static_cast<size_t>(system.signal_count), Tensor::zeros({3}));
    for (int c = 0; c < system.signal_count; ++c) {
        if (!map.used[static_cast<size_t>(c)]) continue;
        for (int d = 0; d < 3; ++d)
            map.centroids[static_cast<size_t>(c)].data[static_cast<size_t>(d)] =
                sums[static_cast<size_t>(c)].data[static_cast<size_t>(d)] / members[static_cast<size_t>(c)];
    }
    return map;
}

void save_mode_map_csv(const std::string& path, const ModeMap& map, const ChipTable& chips) {
    std::ostringstream out;
    out << "row,col,signal_id,L,a,b\n";
    for (int x = 0; x < chips.count(); ++x) {
        const ChipRow& chip = chips.chip(x);
        const int c = map.modal[static_cast<size_t>(x)];
        const Tensor& color = map.centroids[static_cast<size_t>(c)];
        out << chip.grid_row << ',' << chip.grid_col << ',' << c << ','
            << format_double(color(0)) << ',' << format_double(color(1)) << ','
            << format_double(color(2)) << '\n';
    }
    write_text_file(path, out.str());
}

std::vector<Tensor> pca2(const std::vector<Tensor>& vectors) {
    const int n = static_cast<int>(vectors.size());
    if (n < 2) throw DegenerateInputError("pca2: need at least 2 vectors");
    const int dim = vectors.front().size();
    if (dim < 2) throw DegenerateInputError("pca2: need dimension >= 2");
    for (const Tensor& v : vectors)
        if (v.size() != dim) throw DegenerateInputError("pca2: inconsistent dimensions");

    Tensor mean = Tensor::zeros({dim});
    for (const Tensor& v : vectors)
        for (int d = 0; d < dim; ++d) mean.data[static_cast<size_t>(d)] += v(d) / n;

    std::vector<double> cov(static_cast<size_t>(dim) * dim, 0.0);
    for (const Tensor& v : vectors)
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                cov[static_cast<size_t>(i) * dim + j] += (v(i) - mean(i)) * (v(j) - mean(j)) / (n - 1);

    double max_cov = 0.0;
    for (double v : cov) max_cov = std::max(max_cov, std::abs(v));
    if (max_cov < 1e-24) throw DegenerateInputError("pca2: zero variance input");

    std::vector<double> values;
    std::vector<double> eigvecs;
    jacobi_eigen(cov, dim, values, eigvecs);

    std::vector<int> order(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) order[static_cast<size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values[static_cast<size_t>(a)] > values[static_cast<size_t>(b)]; });

    std::vector<Tensor> axes;
    for (int rank = 0; rank < 2; ++rank) {
        const int col = order[static_cast<size_t>(rank)];
        Tensor axis = Tensor::zeros({dim});
        for (int i = 0; i < dim; ++i)
            axis.data[static_cast<size_t>(i)] = eigvecs[static_cast<size_t>(i) * dim + col];
        for (int i = 0; i < dim; ++i) {
            if (std::abs(axis(i)) > 1e-12) {
                if (axis(i) < 0)
                    for (double& v : axis.data) v = -v;
                break;
            }
        }
        axes.push_back(std::move(axis));
    }

    std::vector<Tensor> projected;
    projected.reserve(vectors.size());
    for (const Tensor& v : vectors) {
        double p0 = 0.0, p1 = 0.0;
        for (int d = 0; d < dim; ++d) {
            p0 += (v(d) - mean(d)) * axes[0](d);
            p1 += (v(d) - mean(d)) * axes[1](d);
        }
        projected.push_back(Tensor::vec({p0, p1}));
    }
    return projected;
}

double comm_color_correlation(const NamingSystem& system, const ChipTable& chips,
                              const std::vector<Tensor>& embeddings) {
    if (static_cast<int>(embeddings.size()) != system.signal_count)
        throw DegenerateInputError("comm_color_correlation: one embedding per signal required");
    ModeMap map = mode_map(system, chips);
    std::vector<int> used;
    for (int c = 0; c < system.signal_count; ++c)
        if (map.used[static_cast<size_t>(c)]) used.push_back(c);
    if (used.size() < 2)
        throw DegenerateInputError("comm_color_correlation: fewer than 2 used signals");

    std::vector<double> xs, ys;
    for (size_t i = 0; i < used.size(); ++i)
        for (size_t j = i + 1; j < used.size(); ++j) {
            xs.push_back(euclidean(embeddings[static_cast<size_t>(used[i])],
                                   embeddings[static_cast<size_t>(used[j])]));
            ys.push_back(euclidean(map.centroids[static_cast<size_t>(used[i])],
                                   map.centroids[static_cast<size_t>(used[j])]));
        }

    const double n = static_cast<double>(xs.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i] / n;
        mean_y += ys[i] / n;
    }
    double ss_x = 0.0, ss_y = 0.0, ss_xy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        ss_x += (xs[i] - mean_x) * (xs[i] - mean_x);
        ss_y += (ys[i] - mean_y) * (ys[i] - mean_y);
        ss_xy += (xs[i] - mean_x) * (ys[i] - mean_y);
    }
    if (ss_y < 1e-24) return 1.0;
    if (ss_x < 1e-24) return 0.0;
    return (ss_xy * ss_xy) / (ss_x * ss_y);
}

}  // namespace ibsignal
