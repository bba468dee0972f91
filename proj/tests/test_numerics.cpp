#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "ibsignal/adam.hpp"
#include "ibsignal/random.hpp"
#include "ibsignal/tape.hpp"
#include "ibsignal/tensor.hpp"
#include "testutil.hpp"

using namespace ibsignal;
using testutil::max_grad_rel_error;
using testutil::random_tensor;

TEST_CASE("affine identity and zero-weight cases") {
    Tape tape;
    NodeId w = tape.leaf(Tensor::matrix(2, 2, {1, 0, 0, 1}));
    NodeId b = tape.leaf(Tensor::vec({0, 0}));
    NodeId x = tape.leaf(Tensor::vec({3, 4}));
    NodeId y = tape.affine(w, b, x);
    CHECK(tape.value(y).data == std::vector<double>{3, 4});

    NodeId w0 = tape.leaf(Tensor::zeros({2, 2}));
    NodeId b1 = tape.leaf(Tensor::vec({1, 1}));
    NodeId y0 = tape.affine(w0, b1, x);
    CHECK(tape.value(y0).data == std::vector<double>{1, 1});
}

TEST_CASE("affine random case matches direct matrix arithmetic") {
    RandomSource rng(7);
    Tensor w = random_tensor({3, 2}, rng);
    Tensor b = random_tensor({3}, rng);
    Tensor x = random_tensor({2}, rng);
    Tape tape;
    NodeId y = tape.affine(tape.leaf(w), tape.leaf(b), tape.leaf(x));
    for (int i = 0; i < 3; ++i) {
        const double expect = w(i, 0) * x(0) + w(i, 1) * x(1) + b(i);
        CHECK(tape.value(y)(i) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("affine rejects mismatched shapes") {
    Tape tape;
    NodeId w = tape.leaf(Tensor::zeros({3, 2}));
    NodeId b = tape.leaf(Tensor::zeros({3}));
    NodeId x = tape.leaf(Tensor::zeros({5}));
    CHECK_THROWS_AS(tape.affine(w, b, x), std::invalid_argument);
    NodeId b_bad = tape.leaf(Tensor::zeros({2}));
    NodeId x_ok = tape.leaf(Tensor::zeros({2}));
    CHECK_THROWS_AS(tape.affine(w, b_bad, x_ok), std::invalid_argument);
}

TEST_CASE("elementwise forward values") {
    Tape tape;
    NodeId x = tape.leaf(Tensor::vec({-1, 0, 2}));
    CHECK(tape.value(tape.relu(x)).data == std::vector<double>{0, 0, 2});
    NodeId z = tape.leaf(Tensor::vec({0}));
    CHECK(tape.value(tape.tanh_(z))(0) == 0.0);
    CHECK(tape.value(tape.exp_(z))(0) == 1.0);
    NodeId s = tape.leaf(Tensor::vec({-3}));
    CHECK(tape.value(tape.square(s))(0) == 9.0);
}

TEST_CASE("tanh derivative matches central finite difference at 0.5") {
    Tape tape;
    NodeId x = tape.leaf(Tensor::vec({0.5}));
    tape.backward(tape.tanh_(x));
    const double h = 1e-6;
    const double fd = (std::tanh(0.5 + h) - std::tanh(0.5 - h)) / (2.0 * h);
    CHECK(testutil::rel_err(tape.grad(x)(0), fd) < 1e-6);
}

TEST_CASE("gaussian_sample near-zero variance collapses to mu") {
    RandomSource rng(1);
    Tape tape;
    NodeId mu = tape.leaf(Tensor::vec({0.3, -1.2}));
    NodeId lv = tape.leaf(Tensor::full({2}, -50.0));
    NodeId z = gaussian_sample(tape, mu, lv, rng);
    CHECK(std::abs(tape.value(z)(0) - 0.3) < 1e-10);
    CHECK(std::abs(tape.value(z)(1) + 1.2) < 1e-10);
}

TEST_CASE("gaussian_sample standard-normal sample mean within 4/sqrt(N)") {
    RandomSource rng(42);
    const int n = 100000;
    double total = 0.0;
    Tape tape;
    NodeId mu = tape.leaf(Tensor::vec({0.0}));
    NodeId lv = tape.leaf(Tensor::vec({0.0}));
    for (int i = 0; i < n; ++i) total += tape.value(gaussian_sample(tape, mu, lv, rng))(0);
    CHECK(std::abs(total / n) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("gaussian_sample is deterministic under a fixed seed") {
    auto draw = [] {
        RandomSource rng(99);
        Tape tape;
        NodeId mu = tape.leaf(Tensor::vec({0.1, 0.2, 0.3}));
        NodeId lv = tape.leaf(Tensor::vec({-1.0, 0.0, 1.0}));
        return tape.value(gaussian_sample(tape, mu, lv, rng)).data;
    };
    CHECK(draw() == draw());
}

TEST_CASE("gaussian_sample reparameterization gradients") {
    RandomSource rng(5);
    std::vector<Tensor> inputs = {random_tensor({3}, rng), random_tensor({3}, rng, 0.5)};
    auto build = [](Tape& t, const std::vector<NodeId>& ids) {
        RandomSource eps_rng(17);
        NodeId z = gaussian_sample(t, ids[0], ids[1], eps_rng);
        return t.sum(t.square(z));
    };
    CHECK(max_grad_rel_error(inputs, build) < 1e-4);
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
    Tensor p = Tensor::vec({1.0, -2.0});
    Tensor g = Tensor::zeros({2});
    AdamState state = AdamState::init({&p});
    adam_step({&p}, {&g}, state);
    CHECK(p.data == std::vector<double>{1.0, -2.0});
    CHECK(state.step == 1);
}

TEST_CASE("adam single step matches the closed form") {
    AdamConfig cfg;
    cfg.step_size = 0.01;
    Tensor p = Tensor::vec({1.0, -1.0, 0.5});
    Tensor g = Tensor::vec({0.3, -0.2, 0.001});
    AdamState state = AdamState::init({&p}, cfg);
    adam_step({&p}, {&g}, state);
    // Fresh state, one step: m_hat = g, v_hat = g^2, so the update is
    // -lr * g / (|g| + eps): a signed step of nearly the full step size.
    for (int i = 0; i < 3; ++i) {
        const double expect =
            (i == 0 ? 1.0 : i == 1 ? -1.0 : 0.5) -
            cfg.step_size * g(i) / (std::abs(g(i)) + cfg.epsilon);
        CHECK(p(i) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("adam treats identical parameters identically") {
    Tensor p1 = Tensor::vec({0.7});
    Tensor p2 = Tensor::vec({0.7});
    Tensor g = Tensor::vec({-0.4});
    AdamState state = AdamState::init({&p1, &p2});
    for (int step = 0; step < 5; ++step) adam_step({&p1, &p2}, {&g, &g}, state);
    CHECK(p1.data == p2.data);
}

TEST_CASE("adam rejects mismatched shapes") {
    Tensor p = Tensor::vec({1.0, 2.0});
    Tensor g = Tensor::vec({1.0});
    AdamState state = AdamState::init({&p});
    CHECK_THROWS_AS(adam_step({&p}, {&g}, state), std::invalid_argument);
}

TEST_CASE("gradient accumulation over fan-out: y = x + x") {
    Tape tape;
    NodeId x = tape.leaf(Tensor::vec({3.0}));
    tape.backward(tape.sum(tape.add(x, x)));
    CHECK(tape.grad(x)(0) == 2.0);
}

TEST_CASE("gradient check across primitive compositions") {
    RandomSource rng(2024);
    int instances = 0;
    double worst = 0.0;
    for (int rep = 0; rep < 25; ++rep) {
        // affine + tanh + square
        {
            std::vector<Tensor> in = {random_tensor({3, 4}, rng), random_tensor({3}, rng),
                                      random_tensor({4}, rng)};
            worst = std::max(worst, max_grad_rel_error(in, [](Tape& t, const std::vector<NodeId>& v) {
                                 return t.sum(t.square(t.tanh_(t.affine(v[0], v[1], v[2]))));
                             }));
            ++instances;
        }
        // softmax + pick + log with clamp floor
        {
            std::vector<Tensor> in = {random_tensor({5}, rng)};
            worst = std::max(worst, max_grad_rel_error(in, [](Tape& t, const std::vector<NodeId>& v) {
                                 NodeId p = t.pick(t.softmax(v[0]), 2);
                                 return t.scale(t.log_(t.clamp_min(p, 1e-12)), -1.0);
                             }));
            ++instances;
        }
        // exp / log / mul / sub / mean chain (positive inputs for log)
        {
            Tensor a = random_tensor({4}, rng);
            Tensor b = random_tensor({4}, rng);
            for (double& v : a.data) v = 0.5 + std::abs(v);
            std::vector<Tensor> in = {a, b};
            worst = std::max(worst, max_grad_rel_error(in, [](Tape& t, const std::vector<NodeId>& v) {
                                 NodeId lg = t.log_(v[0]);
                                 NodeId e = t.exp_(t.scale(v[1], 0.3));
                                 return t.mean(t.mul(t.sub(lg, e), t.add_scalar(v[1], 2.0)));
                             }));
            ++instances;
        }
        // relu away from the kink, concat, row
        {
            Tensor x = random_tensor({4}, rng);
            for (double& v : x.data)
                if (std::abs(v) < 1e-2) v = v < 0 ? v - 1e-2 : v + 1e-2;
            std::vector<Tensor> in = {x, random_tensor({2, 3}, rng)};
            worst = std::max(worst, max_grad_rel_error(in, [](Tape& t, const std::vector<NodeId>& v) {
                                 NodeId r = t.relu(v[0]);
                                 NodeId joined = t.concat(r, t.row(v[1], 1));
                                 return t.sum(t.square(joined));
                             }));
            ++instances;
        }
    }
    CHECK(instances == 100);
    CHECK(worst < 1e-4);
}

TEST_CASE("straight-through replace_value copies gradients to source") {
    Tape tape;
    NodeId z = tape.leaf(Tensor::vec({0.4, -0.6}));
    Tensor snapped = Tensor::vec({1.0, 0.0});
    NodeId c = tape.replace_value(z, snapped);
    NodeId w = tape.constant(Tensor::vec({2.0, 5.0}));
    tape.backward(tape.sum(tape.mul(c, w)));
    CHECK(tape.value(c).data == snapped.data);
    CHECK(tape.grad(z).data == std::vector<double>{2.0, 5.0});
}

TEST_CASE("stop_gradient blocks the backward path") {
    Tape tape;
    NodeId x = tape.leaf(Tensor::vec({1.5}));
    NodeId y = tape.mul(x, tape.stop_gradient(x));
    tape.backward(tape.sum(y));
    // d/dx [x * sg(x)] treats sg(x) as constant.
    CHECK(tape.grad(x)(0) == 1.5);
}

TEST_CASE("fixed seed gives bit-identical forward, backward and update") {
    auto run = [] {
        RandomSource rng(31337);
        Tensor w = random_tensor({4, 3}, rng);
        Tensor b = random_tensor({4}, rng);
        AdamState state = AdamState::init({&w, &b});
        std::vector<double> out;
        for (int step = 0; step < 3; ++step) {
            Tape tape;
            NodeId wid = tape.leaf(w);
            NodeId bid = tape.leaf(b);
            NodeId x = tape.constant(random_tensor({3}, rng));
            NodeId loss = tape.sum(tape.square(tape.tanh_(tape.affine(wid, bid, x))));
            tape.backward(loss);
            adam_step({&w, &b}, {&tape.grad(wid), &tape.grad(bid)}, state);
            out.push_back(tape.value(loss)(0));
        }
        out.insert(out.end(), w.data.begin(), w.data.end());
        return out;
    };
    const auto a = run();
    const auto b = run();
    REQUIRE(a.size() == b.size());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}
