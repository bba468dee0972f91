#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ibsignal/csvio.hpp"
#include "ibsignal/errors.hpp"
#include "ibsignal/ib_frontier.hpp"
#include "ibsignal/random.hpp"
#include "ibsignal/wcs.hpp"

using namespace ibsignal;

namespace {

ChipTable toy_chips() {
    return ChipTable::from_rows({
        {1, 'B', 1, 90.0, 10.0, 20.0},
        {2, 'B', 2, 80.0, -10.0, 30.0},
        {3, 'C', 1, 70.0, 40.0, -20.0},
        {4, 'C', 2, 60.0, -30.0, -40.0},
    });
}

// ---- Independent single-round IB recomputation for the oracle checks ----

std::vector<double> oracle_marginal(const std::vector<double>& px, const std::vector<double>& q,
                                    int n, int k) {
    std::vector<double> r(static_cast<size_t>(k), 0.0);
    for (int c = 0; c < k; ++c)
        for (int x = 0; x < n; ++x)
            r[static_cast<size_t>(c)] += px[static_cast<size_t>(x)] * q[static_cast<size_t>(x) * k + c];
    return r;
}

std::vector<double> oracle_decoder(const std::vector<double>& px,
                                   const MeaningDistribution& meanings,
                                   const std::vector<double>& q,
                                   const std::vector<double>& marginal, int k) {
    const int n = meanings.n;
    std::vector<double> mhat(static_cast<size_t>(k) * n, 0.0);
    for (int c = 0; c < k; ++c) {
        if (marginal[static_cast<size_t>(c)] <= 0.0) continue;
        for (int u = 0; u < n; ++u) {
            double acc = 0.0;
            for (int x = 0; x < n; ++x)
                acc += px[static_cast<size_t>(x)] * q[static_cast<size_t>(x) * k + c] *
                       meanings.row(x)[u];
            mhat[static_cast<size_t>(c) * n + u] = acc / marginal[static_cast<size_t>(c)];
        }
    }
    return mhat;
}

double oracle_kl(const double* p, const double* q, int n) {
    double acc = 0.0;
    for (int u = 0; u < n; ++u)
        if (p[u] > 0.0) acc += p[u] * std::log(p[u] / q[u]);
    return acc;
}

std::vector<double> oracle_update(const std::vector<double>& marginal,
                                  const MeaningDistribution& meanings,
                                  const std::vector<double>& mhat, double beta, int k) {
    const int n = meanings.n;
    std::vector<double> q(static_cast<size_t>(n) * k, 0.0);
    for (int x = 0; x < n; ++x) {
        double total = 0.0;
        for (int c = 0; c < k; ++c) {
            const double w =
                marginal[static_cast<size_t>(c)] *
                std::exp(-beta *
                         oracle_kl(meanings.row(x), mhat.data() + static_cast<size_t>(c) * n, n));
            q[static_cast<size_t>(x) * k + c] = w;
            total += w;
        }
        for (int c = 0; c < k; ++c) q[static_cast<size_t>(x) * k + c] /= total;
    }
    return q;
}

double oracle_mi_bits(const std::vector<double>& px, const std::vector<double>& q, int n, int k) {
    const std::vector<double> r = oracle_marginal(px, q, n, k);
    double acc = 0.0;
    for (int x = 0; x < n; ++x)
        for (int c = 0; c < k; ++c) {
            const double v = q[static_cast<size_t>(x) * k + c];
            if (v > 0.0 && px[static_cast<size_t>(x)] > 0.0)
                acc += px[static_cast<size_t>(x)] * v * std::log2(v / r[static_cast<size_t>(c)]);
        }
    return acc;
}

double oracle_informativeness_bits(const std::vector<double>& px,
                                   const MeaningDistribution& meanings,
                                   const std::vector<double>& q, int k) {
    const int n = meanings.n;
    const std::vector<double> r = oracle_marginal(px, q, n, k);
    const std::vector<double> mhat = oracle_decoder(px, meanings, q, r, k);
    double acc = 0.0;
    for (int x = 0; x < n; ++x)
        for (int c = 0; c < k; ++c) {
            const double v = q[static_cast<size_t>(x) * k + c];
            if (v > 0.0)
                acc += px[static_cast<size_t>(x)] * v *
                       oracle_kl(meanings.row(x), mhat.data() + static_cast<size_t>(c) * n, n);
        }
    return -acc / std::numbers::ln2;
}

MeaningDistribution random_meanings(int n, RandomSource& rng) {
    MeaningDistribution meanings;
    meanings.n = n;
    meanings.rows.resize(static_cast<size_t>(n) * n);
    for (int x = 0; x < n; ++x) {
        double total = 0.0;
        for (int u = 0; u < n; ++u) {
            const double v = rng.uniform() + 0.05;
            meanings.rows[static_cast<size_t>(x) * n + u] = v;
            total += v;
        }
        for (int u = 0; u < n; ++u) meanings.rows[static_cast<size_t>(x) * n + u] /= total;
    }
    return meanings;
}

std::vector<double> random_encoder(int n, int k, RandomSource& rng) {
    std::vector<double> q(static_cast<size_t>(n) * k);
    for (int x = 0; x < n; ++x) {
        double total = 0.0;
        for (int c = 0; c < k; ++c) {
            q[static_cast<size_t>(x) * k + c] = rng.uniform() + 0.01;
            total += q[static_cast<size_t>(x) * k + c];
        }
        for (int c = 0; c < k; ++c) q[static_cast<size_t>(x) * k + c] /= total;
    }
    return q;
}

std::vector<double> uniform_prior(int n) {
    return std::vector<double>(static_cast<size_t>(n), 1.0 / n);
}

}  // namespace

TEST_CASE("meanings are row-stochastic with the declared limits") {
    ChipTable chips = toy_chips();

    MeaningDistribution mid = build_meanings(chips, 0.64);
    mid.validate(1e-12);
    for (double v : mid.rows) CHECK(v > 0.0);

    MeaningDistribution tight = build_meanings(chips, 1e-3);
    for (int x = 0; x < 4; ++x) CHECK(tight.row(x)[x] > 0.999);

    MeaningDistribution wide = build_meanings(chips, 1e6);
    for (double v : wide.rows) CHECK(std::abs(v - 0.25) < 1e-6);

    CHECK_THROWS_AS(build_meanings(chips, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_meanings(chips, -1.0), std::invalid_argument);
}

TEST_CASE("equidistant neighbors receive identical meaning mass") {
    ChipTable chips = ChipTable::from_rows({
        {1, 'B', 1, 50.0, 0.0, 0.0},
        {2, 'B', 2, 50.0, 10.0, 0.0},
        {3, 'C', 1, 50.0, -10.0, 0.0},
    });
    MeaningDistribution meanings = build_meanings(chips, 0.5);
    CHECK(meanings.row(0)[1] == meanings.row(0)[2]);
}

TEST_CASE("meaning validation rejects malformed matrices") {
    MeaningDistribution bad;
    bad.n = 2;
    bad.rows = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(bad.validate(), DataError);
    bad.rows = {0.5, 0.6, 0.5, 0.5};
    CHECK_THROWS_AS(bad.validate(), DataError);
    bad.rows = {1.5, -0.5, 0.5, 0.5};
    CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("tiny beta collapses to a single effective cluster") {
    ChipTable chips = toy_chips();
    MeaningDistribution meanings = build_meanings(chips, 0.64);
    RandomSource rng(70, 0);
    IBSolution solution =
        ib_iterate(uniform_prior(4), meanings, 1e-6, random_encoder(4, 4, rng));
    CHECK(solution.converged);
    CHECK(solution.complexity_bits < 1e-4);
}

TEST_CASE("large beta with tight meanings reaches the deterministic limit") {
    ChipTable chips = toy_chips();
    MeaningDistribution meanings = build_meanings(chips, 0.05);
    RandomSource rng(71, 0);
    IBSolution solution =
        ib_iterate(uniform_prior(4), meanings, 1e4, random_encoder(4, 4, rng));
    CHECK(solution.complexity_bits > 1.9);
    CHECK(solution.complexity_bits <= 2.0 + 1e-9);
}

TEST_CASE("the objective trace never increases across rounds") {
    RandomSource rng(72, 0);
    for (int instance = 0; instance < 20; ++instance) {
        const int n = 3 + static_cast<int>(rng.uniform_int(4));
        const int k = 2 + static_cast<int>(rng.uniform_int(3));
        const double beta = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
        MeaningDistribution meanings = random_meanings(n, rng);
        IBSolution solution =
            ib_iterate(uniform_prior(n), meanings, beta, random_encoder(n, k, rng));
        REQUIRE(!solution.objective_trace.empty());
        for (size_t i = 0; i + 1 < solution.objective_trace.size(); ++i)
            CHECK(solution.objective_trace[i + 1] <= solution.objective_trace[i] + 1e-10);
    }
}

TEST_CASE("a converged solution is self-consistent under recomputation") {
    ChipTable chips = toy_chips();
    MeaningDistribution meanings = build_meanings(chips, 0.3);
    RandomSource rng(73, 0);
    const std::vector<double> px = uniform_prior(4);
    IBSolution solution = ib_iterate(px, meanings, 10.0, random_encoder(4, 4, rng));
    REQUIRE(solution.converged);

    const int n = 4, k = 4;
    const std::vector<double> marginal = oracle_marginal(px, solution.encoder, n, k);
    for (int c = 0; c < k; ++c)
        CHECK(std::abs(marginal[static_cast<size_t>(c)] -
                       solution.marginal[static_cast<size_t>(c)]) < 1e-9);

    const std::vector<double> mhat = oracle_decoder(px, meanings, solution.encoder, marginal, k);
    for (int c = 0; c < k; ++c) {
        if (marginal[static_cast<size_t>(c)] <= 0.0) continue;
        for (int u = 0; u < n; ++u)
            CHECK(std::abs(mhat[static_cast<size_t>(c) * n + u] -
                           solution.decoder[static_cast<size_t>(c) * n + u]) < 1e-9);
    }

    const std::vector<double> next = oracle_update(marginal, meanings, mhat, 10.0, k);
    for (size_t i = 0; i < next.size(); ++i)
        CHECK(std::abs(next[i] - solution.encoder[i]) < 1e-7);

    CHECK(std::abs(oracle_mi_bits(px, solution.encoder, n, k) - solution.complexity_bits) <
          1e-9);
    CHECK(std::abs(oracle_informativeness_bits(px, meanings, solution.encoder, k) -
                   solution.informativeness_bits) < 1e-9);
}

TEST_CASE("hitting the round cap flags non-convergence") {
    ChipTable chips = toy_chips();
    MeaningDistribution meanings = build_meanings(chips, 0.3);
    RandomSource rng(74, 0);
    IBSolution solution =
        ib_iterate(uniform_prior(4), meanings, 50.0, random_encoder(4, 4, rng), 1);
    CHECK(!solution.converged);
    CHECK(solution.rounds == 1);
}

TEST_CASE("ib_iterate validates its inputs") {
    ChipTable chips = toy_chips();
    MeaningDistribution meanings = build_meanings(chips, 0.64);
    RandomSource rng(75, 0);
    std::vector<double> q = random_encoder(4, 2, rng);
    CHECK_THROWS_AS(ib_iterate(uniform_prior(3), meanings, 1.0, q), std::invalid_argument);
    CHECK_THROWS_AS(ib_iterate(uniform_prior(4), meanings, 0.0, q), std::invalid_argument);
    CHECK_THROWS_AS(ib_iterate(uniform_prior(4), meanings, 1.0, {}), std::invalid_argument);
    CHECK_THROWS_AS(ib_iterate(uniform_prior(4), meanings, 1.0, q, 0), std::invalid_argument);
}

TEST_CASE("no deterministic encoder beats the annealed frontier") {
    ChipTable chips = toy_chips();
    MeaningDistribution meanings = build_meanings(chips, 0.3);
    const std::vector<double> px = uniform_prior(4);
    const int n = 4, k = 4;

    std::vector<double> betas;
    for (int i = 0; i < 300; ++i)
        betas.push_back(std::pow(2.0, -2.0 + 14.0 * static_cast<double>(i) / 299));
    RandomSource rng(76, 0);
    std::vector<IBSolution> frontier = compute_frontier(px, meanings, betas, k, rng);

    int assignments = 1;
    for (int x = 0; x < n; ++x) assignments *= k;
    for (int code = 0; code < assignments; ++code) {
        std::vector<double> q(static_cast<size_t>(n) * k, 0.0);
        int rest = code;
        for (int x = 0; x < n; ++x) {
            q[static_cast<size_t>(x) * k + rest % k] = 1.0;
            rest /= k;
        }
        const double complexity = oracle_mi_bits(px, q, n, k);
        const double informativeness = oracle_informativeness_bits(px, meanings, q, k);
        CHECK(informativeness <=
              frontier_informativeness_at(frontier, complexity) + 1e-6);
    }
}

TEST_CASE("the annealed frontier is monotone along its schedule") {
    ChipTable chips = toy_chips();
    MeaningDistribution meanings = build_meanings(chips, 0.64);
    RandomSource rng(77, 0);
    std::vector<IBSolution> frontier =
        compute_frontier(uniform_prior(4), meanings, default_beta_schedule(), 4, rng);
    REQUIRE(frontier.size() == 100);
    CHECK(frontier.front().complexity_bits < 0.01);
    for (size_t i = 0; i + 1 < frontier.size(); ++i) {
        CHECK(frontier[i + 1].complexity_bits >= frontier[i].complexity_bits - 1e-6);
        CHECK(frontier[i + 1].informativeness_bits >= frontier[i].informativeness_bits - 1e-6);
    }
    for (const IBSolution& s : frontier) {
        CHECK(s.converged);
        CHECK(s.informativeness_bits <= 0.0);
        CHECK(s.complexity_bits >= 0.0);
    }
}

TEST_CASE("frontier interpolation clamps and blends linearly") {
    std::vector<IBSolution> frontier(2);
    frontier[0].complexity_bits = 1.0;
    frontier[0].informativeness_bits = -2.0;
    frontier[1].complexity_bits = 3.0;
    frontier[1].informativeness_bits = -1.0;
    CHECK(frontier_informativeness_at(frontier, 0.0) == -2.0);
    CHECK(frontier_informativeness_at(frontier, 5.0) == -1.0);
    CHECK(std::abs(frontier_informativeness_at(frontier, 2.0) + 1.5) < 1e-12);
    CHECK_THROWS_AS(frontier_informativeness_at({}, 1.0), std::invalid_argument);
}

TEST_CASE("agent-style encoders score their hand-computed informativeness") {
    ChipTable chips = toy_chips();
    MeaningDistribution meanings = build_meanings(chips, 0.5);
    const std::vector<double> px = uniform_prior(4);

    std::vector<double> constant(static_cast<size_t>(4) * 3, 0.0);
    for (int x = 0; x < 4; ++x) constant[static_cast<size_t>(x) * 3] = 1.0;
    CHECK(std::abs(ib_informativeness(px, meanings, constant) -
                   oracle_informativeness_bits(px, meanings, constant, 3)) < 1e-12);

    std::vector<double> identity(static_cast<size_t>(4) * 4, 0.0);
    for (int x = 0; x < 4; ++x) identity[static_cast<size_t>(x) * 4 + x] = 1.0;
    CHECK(ib_informativeness(px, meanings, identity) == 0.0);

    RandomSource rng(78, 0);
    const std::vector<double> soft = random_encoder(4, 3, rng);
    CHECK(std::abs(ib_informativeness(px, meanings, soft) -
                   oracle_informativeness_bits(px, meanings, soft, 3)) < 1e-12);
    CHECK(ib_informativeness(px, meanings, soft) <= 0.0);
}

TEST_CASE("frontier CSV carries the declared header and flags") {
    std::vector<IBSolution> solutions(2);
    solutions[0].beta = 0.25;
    solutions[0].complexity_bits = 0.0;
    solutions[0].informativeness_bits = -2.5;
    solutions[0].converged = true;
    solutions[1].beta = 4.0;
    solutions[1].complexity_bits = 1.5;
    solutions[1].informativeness_bits = -0.5;
    solutions[1].converged = false;
    save_frontier_csv("frontier_test.csv", solutions);
    CsvTable table = read_csv("frontier_test.csv");
    REQUIRE(table.header.size() == 4);
    CHECK(table.header[0] == "beta");
    CHECK(table.header[3] == "converged");
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0][3] == "1");
    CHECK(table.rows[1][3] == "0");
    CHECK(table.rows[1][1] == "1.5");
}
