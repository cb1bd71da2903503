#include <cmath>

#include "ccdr/neural.hpp"

#include "doctest.h"

using namespace ccdr;
using namespace ccdr::neural;

namespace {

DenseNet make_net(const std::vector<int>& dims, std::uint64_t seed) {
    Rng rng(seed);
    return DenseNet(dims, rng);
}

// Loss closure for gradient checking a dense net against a fixed MSE target.
struct DenseProbe {
    DenseNet& net;
    Vec input;
    Vec target;

    double loss() const {
        const Vec out = net.forward(input);
        return mse_loss(out, target).loss;
    }
    DenseGrads analytic() const {
        DenseCache cache;
        const Vec out = net.forward(input, &cache);
        return net.backward(cache, mse_loss(out, target).grad);
    }
};

}  // namespace

TEST_CASE("dense forward matches hand computations") {
    SUBCASE("identity weights, zero bias") {
        DenseNet net = make_net({2, 2}, 1);
        net.layers[0].w.at(0, 0) = 1.0;
        net.layers[0].w.at(0, 1) = 0.0;
        net.layers[0].w.at(1, 0) = 0.0;
        net.layers[0].w.at(1, 1) = 1.0;
        net.layers[0].b = {0.0, 0.0};
        const Vec out = net.forward({1.0, 2.0});
        CHECK(out[0] == doctest::Approx(1.0));
        CHECK(out[1] == doctest::Approx(2.0));
    }
    SUBCASE("zero weights return the bias") {
        DenseNet net = make_net({3, 2}, 1);
        for (double& v : net.layers[0].w.a) v = 0.0;
        net.layers[0].b = {0.25, -0.75};
        const Vec out = net.forward({5.0, 6.0, 7.0});
        CHECK(out[0] == doctest::Approx(0.25));
        CHECK(out[1] == doctest::Approx(-0.75));
    }
    SUBCASE("fixed 2x2 weights reproduce the hand matrix multiply") {
        // W = [[1,2],[3,4]], b = [0.5,-1], x = [1,-1] -> [-0.5, -2]
        DenseNet net = make_net({2, 2}, 1);
        net.layers[0].w.at(0, 0) = 1.0;
        net.layers[0].w.at(0, 1) = 2.0;
        net.layers[0].w.at(1, 0) = 3.0;
        net.layers[0].w.at(1, 1) = 4.0;
        net.layers[0].b = {0.5, -1.0};
        const Vec out = net.forward({1.0, -1.0});
        CHECK(out[0] == doctest::Approx(-0.5));
        CHECK(out[1] == doctest::Approx(-2.0));
    }
    SUBCASE("dimension mismatch throws") {
        DenseNet net = make_net({4, 2}, 1);
        CHECK_THROWS_AS(net.forward({1.0, 2.0}), ShapeError);
    }
}

TEST_CASE("dense backward") {
    SUBCASE("zero loss gradient gives zero parameter gradients") {
        DenseNet net = make_net({3, 4, 2}, 2);
        DenseCache cache;
        net.forward({0.3, -0.2, 0.9}, &cache);
        DenseGrads g = net.backward(cache, {0.0, 0.0});
        for (const auto& m : g.w)
            for (double v : m.a) CHECK(v == 0.0);
        for (const auto& b : g.b)
            for (double v : b) CHECK(v == 0.0);
    }
    SUBCASE("one-parameter linear net has gradient 2*(pred-target)*x") {
        DenseNet net = make_net({1, 1}, 3);
        net.layers[0].w.at(0, 0) = 0.8;
        net.layers[0].b = {0.0};
        const double x = 1.7, target = 2.0;
        DenseCache cache;
        const Vec out = net.forward({x}, &cache);
        const LossResult loss = mse_loss(out, {target});
        DenseGrads g = net.backward(cache, loss.grad);
        CHECK(g.w[0].at(0, 0) == doctest::Approx(2.0 * (0.8 * x - target) * x).epsilon(1e-12));
    }
    SUBCASE("analytic gradients agree with finite differences") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            DenseNet net = make_net({4, 8, 2}, 100 + seed);
            Rng rng(seed);
            Vec x(4), t(2);
            for (double& v : x) v = rng.normal();
            for (double& v : t) v = rng.normal();
            DenseProbe probe{net, x, t};
            DenseGrads analytic = probe.analytic();
            GradCheckReport rep = grad_check([&] { return probe.loss(); }, net.parameter_blobs(),
                                             DenseNet::grad_blobs(analytic));
            CHECK(rep.max_rel_err < 1e-4);
        }
    }
}

TEST_CASE("lstm step") {
    SUBCASE("all-zero parameters and state give zero outputs") {
        Rng rng(5);
        LstmCell cell(3, 4, rng);
        for (double& v : cell.wx.a) v = 0.0;
        for (double& v : cell.wh.a) v = 0.0;
        for (double& v : cell.b) v = 0.0;
        Vec h(4, 0.0), c(4, 0.0), h2, c2;
        lstm_step(cell, {0.9, -2.0, 0.4}, h, c, h2, c2);
        for (double v : c2) CHECK(v == doctest::Approx(0.0));
        for (double v : h2) CHECK(v == doctest::Approx(0.0));
    }
    SUBCASE("saturated forget gate preserves the cell state") {
        Rng rng(6);
        LstmCell cell(2, 3, rng);
        for (double& v : cell.wx.a) v = 0.0;
        for (double& v : cell.wh.a) v = 0.0;
        for (double& v : cell.b) v = 0.0;
        for (int k = 0; k < 3; ++k) {
            cell.b[k] = -50.0;      // input gate shut
            cell.b[3 + k] = 50.0;   // forget gate open
        }
        Vec h(3, 0.0), c = {0.7, -1.2, 0.05}, h2, c2;
        lstm_step(cell, {1.0, -1.0}, h, c, h2, c2);
        for (int k = 0; k < 3; ++k) CHECK(c2[k] == doctest::Approx(c[k]).epsilon(1e-6));
    }
    SUBCASE("one-unit cell matches the scalar hand computation") {
        // x=0.7, h=0.3, c=-0.2; wx=(0.5,-0.3,0.8,0.2), wh=(0.1,0.4,-0.2,0.6),
        // b=(0.05,-0.1,0.2,0) in gate order i,f,g,o
        Rng rng(7);
        LstmCell cell(1, 1, rng);
        cell.wx.a = {0.5, -0.3, 0.8, 0.2};
        cell.wh.a = {0.1, 0.4, -0.2, 0.6};
        cell.b = {0.05, -0.1, 0.2, 0.0};
        Vec h = {0.3}, c = {-0.2}, h2, c2;
        lstm_step(cell, {0.7}, h, c, h2, c2);
        CHECK(c2[0] == doctest::Approx(0.2756420458).epsilon(1e-6));
        CHECK(h2[0] == doctest::Approx(0.1557611259).epsilon(1e-6));
    }
    SUBCASE("dimension mismatch throws") {
        Rng rng(8);
        LstmCell cell(3, 4, rng);
        Vec h(4, 0.0), c(4, 0.0), h2, c2;
        CHECK_THROWS_AS(lstm_step(cell, {1.0}, h, c, h2, c2), ShapeError);
    }
}

TEST_CASE("lstm gradients agree with finite differences") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(200 + seed);
        LstmCell cell(3, 5, rng);
        Vec x(3), h0(5, 0.0), c0(5, 0.0), target(5);
        for (double& v : x) v = rng.normal();
        for (double& v : target) v = rng.normal();

        auto loss_only = [&]() {
            Vec h2, c2;
            lstm_step(cell, x, h0, c0, h2, c2);
            return mse_loss(h2, target).loss;
        };
        LstmStepCache cache;
        Vec h2, c2;
        lstm_step(cell, x, h0, c0, h2, c2, &cache);
        LstmGrads grads(cell);
        Vec dh_prev, dc_prev;
        lstm_step_backward(cell, cache, mse_loss(h2, target).grad, Vec(5, 0.0), grads, dh_prev,
                           dc_prev);
        GradCheckReport rep = grad_check(loss_only, cell.parameter_blobs(), grads.blobs());
        CHECK(rep.max_rel_err < 1e-4);
    }
}

TEST_CASE("grad_check stays finite on a degenerate zero model") {
    DenseNet net = make_net({2, 2}, 9);
    for (auto& layer : net.layers)
        for (double& v : layer.w.a) v = 0.0;
    DenseProbe probe{net, {0.0, 0.0}, {0.0, 0.0}};
    DenseGrads analytic = probe.analytic();
    GradCheckReport rep = grad_check([&] { return probe.loss(); }, net.parameter_blobs(),
                                     DenseNet::grad_blobs(analytic));
    CHECK(std::isfinite(rep.max_rel_err));
    CHECK(rep.max_rel_err < 1e-8);
}

TEST_CASE("adam") {
    AdamParams opt;
    opt.lr = 0.01;
    SUBCASE("zero gradients leave parameters unchanged") {
        Vec params = {1.0, -2.0, 3.0};
        Vec grads = {0.0, 0.0, 0.0};
        AdamState st;
        adam_update(params, grads, st, opt);
        CHECK(params[0] == 1.0);
        CHECK(params[1] == -2.0);
        CHECK(params[2] == 3.0);
        CHECK(st.step == 1);
    }
    SUBCASE("first step moves by about lr in the gradient direction") {
        Vec params = {1.0};
        Vec grads = {0.5};
        AdamState st;
        adam_update(params, grads, st, opt);
        CHECK(params[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
        params = {1.0};
        grads = {-3.0};
        AdamState st2;
        adam_update(params, grads, st2, opt);
        CHECK(params[0] == doctest::Approx(1.0 + 0.01).epsilon(1e-6));
    }
    SUBCASE("identical calls produce identical results") {
        Vec p1 = {0.4, 0.6}, p2 = {0.4, 0.6};
        Vec g = {0.1, -0.2};
        AdamState s1, s2;
        for (int k = 0; k < 5; ++k) {
            adam_update(p1, g, s1, opt);
            adam_update(p2, g, s2, opt);
        }
        CHECK(p1[0] == p2[0]);
        CHECK(p1[1] == p2[1]);
    }
    SUBCASE("zero learning rate freezes parameters") {
        AdamParams frozen;
        frozen.lr = 0.0;
        Vec params = {2.5};
        Vec grads = {7.0};
        AdamState st;
        for (int k = 0; k < 3; ++k) adam_update(params, grads, st, frozen);
        CHECK(params[0] == 2.5);
    }
    SUBCASE("size mismatch throws") {
        Vec params = {1.0};
        Vec grads = {1.0, 2.0};
        AdamState st;
        CHECK_THROWS_AS(adam_update(params, grads, st, opt), ShapeError);
    }
}

TEST_CASE("huber loss") {
    SUBCASE("zero error") {
        LossResult r = huber_loss({1.0, 2.0}, {1.0, 2.0}, 1.0);
        CHECK(r.loss == 0.0);
        CHECK(r.grad[0] == 0.0);
        CHECK(r.grad[1] == 0.0);
    }
    SUBCASE("quadratic region: e=0.5, delta=1") {
        LossResult r = huber_loss({0.5}, {0.0}, 1.0);
        CHECK(r.loss == doctest::Approx(0.125).epsilon(1e-12));
        CHECK(r.grad[0] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("linear region: e=3, delta=1") {
        LossResult r = huber_loss({3.0}, {0.0}, 1.0);
        CHECK(r.loss == doctest::Approx(2.5).epsilon(1e-12));
        CHECK(r.grad[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("loss and gradient are continuous at |e| = delta") {
        const double delta = 1.0, eps = 1e-10;
        LossResult lo = huber_loss({delta - eps}, {0.0}, delta);
        LossResult hi = huber_loss({delta + eps}, {0.0}, delta);
        CHECK(std::abs(lo.loss - hi.loss) < 1e-9);
        CHECK(std::abs(lo.grad[0] - hi.grad[0]) < 1e-9);
        LossResult nlo = huber_loss({-delta + eps}, {0.0}, delta);
        LossResult nhi = huber_loss({-delta - eps}, {0.0}, delta);
        CHECK(std::abs(nlo.loss - nhi.loss) < 1e-9);
        CHECK(std::abs(nlo.grad[0] - nhi.grad[0]) < 1e-9);
    }
    SUBCASE("mean over elements") {
        LossResult r = huber_loss({0.5, 3.0}, {0.0, 0.0}, 1.0);
        CHECK(r.loss == doctest::Approx((0.125 + 2.5) / 2.0));
        CHECK(r.grad[0] == doctest::Approx(0.25));
        CHECK(r.grad[1] == doctest::Approx(0.5));
    }
}

TEST_CASE("checkpoints round trip bitwise") {
    SUBCASE("dense") {
        DenseNet net = make_net({5, 7, 3}, 77);
        nlohmann::json j = dense_to_json(net);
        DenseNet back = dense_from_json(j);
        REQUIRE(back.layers.size() == net.layers.size());
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            CHECK(back.layers[l].relu == net.layers[l].relu);
            for (std::size_t i = 0; i < net.layers[l].w.a.size(); ++i)
                CHECK(back.layers[l].w.a[i] == net.layers[l].w.a[i]);
            for (std::size_t i = 0; i < net.layers[l].b.size(); ++i)
                CHECK(back.layers[l].b[i] == net.layers[l].b[i]);
        }
    }
    SUBCASE("lstm") {
        Rng rng(78);
        LstmCell cell(4, 6, rng);
        LstmCell back = lstm_from_json(lstm_to_json(cell));
        CHECK(back.input_dim == 4);
        CHECK(back.hidden_dim == 6);
        for (std::size_t i = 0; i < cell.wx.a.size(); ++i) CHECK(back.wx.a[i] == cell.wx.a[i]);
        for (std::size_t i = 0; i < cell.wh.a.size(); ++i) CHECK(back.wh.a[i] == cell.wh.a[i]);
        for (std::size_t i = 0; i < cell.b.size(); ++i) CHECK(back.b[i] == cell.b[i]);
    }
}

TEST_CASE("forward passes are deterministic") {
    DenseNet net = make_net({6, 12, 4}, 55);
    Rng rng(3);
    Vec x(6);
    for (double& v : x) v = rng.normal();
    const Vec a = net.forward(x);
    const Vec b = net.forward(x);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
