#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "lightpath/autodiff.hpp"
#include "lightpath/rng.hpp"
#include "support/fd_check.hpp"

using namespace lightpath;
using testsupport::check_gradients;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t({r, c});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

} // namespace

TEST_CASE("matmul examples") {
    ad::Tape tape;
    ad::ValueId eye = tape.constant(Tensor({2, 2}, {1, 0, 0, 1}));
    ad::ValueId m = tape.constant(Tensor({2, 2}, {1, 2, 3, 4}));
    const Tensor& prod = tape.value(tape.matmul(eye, m));
    CHECK(prod.raw() == std::vector<double>{1, 2, 3, 4});

    ad::ValueId a = tape.constant(Tensor({1, 2}, {1, 2}));
    ad::ValueId b = tape.constant(Tensor({2, 1}, {3, 4}));
    CHECK(tape.value(tape.matmul(a, b))[0] == 11.0);

    CHECK_THROWS_AS(tape.matmul(a, a), std::invalid_argument);
}

TEST_CASE("grad of squared frobenius norm of AB matches finite differences within 1e-6") {
    Rng rng(3);
    Tensor a = random_tensor(3, 4, rng);
    Tensor b = random_tensor(4, 2, rng);

    auto loss = [&](const std::vector<Tensor>& p) {
        ad::Tape t;
        ad::ValueId av = t.leaf(p[0], true);
        ad::ValueId bv = t.constant(b);
        ad::ValueId prod = t.matmul(av, bv);
        return t.value(t.sum(t.mul(prod, prod)))[0];
    };

    ad::Tape t;
    ad::ValueId av = t.leaf(a, true);
    ad::ValueId prod = t.matmul(av, t.constant(b));
    t.backward(t.sum(t.mul(prod, prod)));
    auto res = check_gradients(loss, {a}, {t.grad(av)});
    CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("softmax examples and row-sum invariant") {
    ad::Tape tape;
    auto out = [&](std::vector<double> v) {
        return tape.value(tape.softmax(tape.constant(Tensor::row(std::move(v))))).raw();
    };
    auto r1 = out({0, 0});
    CHECK(r1[0] == doctest::Approx(0.5).epsilon(1e-15));
    auto r2 = out({1000, 1000});
    CHECK(r2[0] == doctest::Approx(0.5).epsilon(1e-15));
    auto r3 = out({0.0, std::log(3.0)});
    CHECK(r3[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(r3[1] == doctest::Approx(0.75).epsilon(1e-12));

    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        Tensor x = random_tensor(4, 7, rng, -1e3, 1e3);
        const Tensor& y = tape.value(tape.softmax(tape.constant(x)));
        for (std::size_t i = 0; i < 4; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < 7; ++j) s += y.at(i, j);
            CHECK(std::abs(s - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("layer_norm examples") {
    ad::Tape tape;
    ad::ValueId gain = tape.constant(Tensor::row({1, 1, 1}));
    ad::ValueId bias = tape.constant(Tensor::row({0, 0, 0}));
    const Tensor& y =
        tape.value(tape.layer_norm(tape.constant(Tensor::row({5, 5, 5})), gain, bias, 1e-5));
    for (std::size_t i = 0; i < 3; ++i) CHECK(y[i] == doctest::Approx(0.0).epsilon(1e-12));

    ad::ValueId g2 = tape.constant(Tensor::row({1, 1}));
    ad::ValueId b2 = tape.constant(Tensor::row({0, 0}));
    const Tensor& z =
        tape.value(tape.layer_norm(tape.constant(Tensor::row({1, 3})), g2, b2, 1e-12));
    CHECK(z[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(z[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("backward basics") {
    // loss = x^2 at x = 3 -> grad 6
    {
        ad::Tape tape;
        ad::ValueId x = tape.leaf(Tensor::scalar(3.0), true);
        ad::ValueId loss = tape.mul(x, x);
        tape.backward(loss);
        CHECK(tape.grad(x)[0] == doctest::Approx(6.0).epsilon(1e-14));
    }
    // loss = sum softmax(x) == 1 identically -> zero gradient
    {
        ad::Tape tape;
        ad::ValueId x = tape.leaf(Tensor::row({0.3, -1.2, 2.0}), true);
        tape.backward(tape.sum(tape.softmax(x)));
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(tape.grad(x)[i]) < 1e-15);
    }
    // non-scalar loss rejected
    {
        ad::Tape tape;
        ad::ValueId x = tape.leaf(Tensor::row({1, 2}), true);
        CHECK_THROWS_AS(tape.backward(x), std::invalid_argument);
    }
    // unreachable parameter gets a zero gradient
    {
        ad::Tape tape;
        ad::ValueId used = tape.leaf(Tensor::scalar(2.0), true);
        ad::ValueId unused = tape.leaf(Tensor::row({1, 2, 3}), true);
        tape.backward(tape.mul(used, used));
        for (std::size_t i = 0; i < 3; ++i) CHECK(tape.grad(unused)[i] == 0.0);
    }
}

TEST_CASE("non-finite forward values are rejected") {
    ad::Tape tape;
    ad::ValueId big = tape.constant(Tensor::scalar(1e300));
    CHECK_THROWS_AS(tape.mul(big, big), std::domain_error);
    ad::ValueId zero = tape.constant(Tensor::scalar(0.0));
    ad::ValueId one = tape.constant(Tensor::scalar(1.0));
    CHECK_THROWS_AS(tape.div(one, zero), std::domain_error);
}

TEST_CASE("forward evaluation is deterministic") {
    Rng rng(5);
    Tensor a = random_tensor(3, 3, rng);
    Tensor b = random_tensor(3, 3, rng);
    auto run = [&]() {
        ad::Tape tape;
        ad::ValueId x = tape.constant(a);
        ad::ValueId y = tape.constant(b);
        ad::ValueId z = tape.softmax(tape.matmul(x, y));
        return tape.value(z).raw();
    };
    CHECK(run() == run());
}

TEST_CASE("every differentiable primitive matches central finite differences") {
    Rng rng(17);
    const double tol = 1e-4;
    Tensor w34 = random_tensor(3, 4, rng);
    Tensor w14 = random_tensor(1, 4, rng);
    Tensor w31 = random_tensor(3, 1, rng);
    Tensor w33 = random_tensor(3, 3, rng);
    Tensor w64 = random_tensor(6, 4, rng);
    Tensor w38 = random_tensor(3, 8, rng);

    struct Case {
        const char* name;
        std::vector<Tensor> params;
        std::function<ad::ValueId(ad::Tape&, const std::vector<ad::ValueId>&)> build;
        const Tensor* proj;
    };

    Tensor x34 = random_tensor(3, 4, rng);
    Tensor y34 = random_tensor(3, 4, rng, 0.5, 1.5); // away from zero for div
    Tensor row4 = random_tensor(1, 4, rng, 0.5, 1.5);
    Tensor x33 = random_tensor(3, 3, rng);
    Tensor y43 = random_tensor(4, 3, rng);
    Tensor relu_in = random_tensor(3, 4, rng, 0.2, 1.0); // away from the kink
    Tensor relu_neg = random_tensor(3, 4, rng, -1.0, -0.2);
    for (std::size_t i = 0; i < relu_in.size(); i += 2) relu_in[i] = relu_neg[i];
    Tensor probs = random_tensor(3, 4, rng, 0.05, 0.95);
    Tensor targets = random_tensor(3, 4, rng, 0.0, 1.0);
    Tensor gain = random_tensor(1, 4, rng, 0.5, 1.5);
    Tensor bias = random_tensor(1, 4, rng);

    std::vector<Case> cases;
    cases.push_back({"add broadcast", {x34, row4},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.add(p[0], p[1]);
                     },
                     &w34});
    cases.push_back({"sub", {x34, y34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.sub(p[0], p[1]);
                     },
                     &w34});
    cases.push_back({"mul broadcast", {x34, w31},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.mul(p[0], p[1]);
                     },
                     &w34});
    cases.push_back({"div", {x34, y34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.div(p[0], p[1]);
                     },
                     &w34});
    cases.push_back({"exp", {x34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) { return t.exp(p[0]); },
                     &w34});
    cases.push_back({"relu", {relu_in},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) { return t.relu(p[0]); },
                     &w34});
    cases.push_back({"sigmoid", {x34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.sigmoid(p[0]);
                     },
                     &w34});
    cases.push_back({"matmul", {x34, y43},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.matmul(p[0], p[1]);
                     },
                     &w33});
    cases.push_back({"transpose", {x34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.transpose(p[0]);
                     },
                     nullptr});
    cases.push_back({"concat rows", {x34, y34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.concat_rows({p[0], p[1]});
                     },
                     &w64});
    cases.push_back({"concat cols", {x34, y34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.concat_cols({p[0], p[1]});
                     },
                     &w38});
    cases.push_back({"slice rows", {x34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.slice_rows(p[0], 1, 3);
                     },
                     nullptr});
    cases.push_back({"gather rows", {x34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.gather_rows(p[0], {2, 0, 2, 1});
                     },
                     nullptr});
    cases.push_back({"softmax rows", {x34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.softmax(p[0], 1);
                     },
                     &w34});
    cases.push_back({"softmax cols", {x34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.softmax(p[0], 0);
                     },
                     &w34});
    cases.push_back({"layer_norm", {x34, gain, bias},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.layer_norm(p[0], p[1], p[2], 1e-5);
                     },
                     &w34});
    cases.push_back({"mean", {x34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) { return t.mean(p[0]); },
                     nullptr});
    cases.push_back({"sum", {x34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) { return t.sum(p[0]); },
                     nullptr});
    cases.push_back({"mse", {x34, y34},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.mse(p[0], p[1]);
                     },
                     nullptr});
    cases.push_back({"bce", {probs, targets},
                     [](ad::Tape& t, const std::vector<ad::ValueId>& p) {
                         return t.bce(p[0], p[1]);
                     },
                     &w34});

    for (const Case& c : cases) {
        CAPTURE(c.name);
        auto build_loss = [&](ad::Tape& t, const std::vector<ad::ValueId>& ids) {
            ad::ValueId out = c.build(t, ids);
            if (t.value(out).is_scalar()) return out;
            return c.proj ? t.sum(t.mul(out, t.constant(*c.proj))) : t.sum(out);
        };
        auto loss_value = [&](const std::vector<Tensor>& ps) {
            ad::Tape t;
            std::vector<ad::ValueId> ids;
            for (const Tensor& p : ps) ids.push_back(t.leaf(p, true));
            return t.value(build_loss(t, ids))[0];
        };

        ad::Tape t;
        std::vector<ad::ValueId> ids;
        for (const Tensor& p : c.params) ids.push_back(t.leaf(p, true));
        t.backward(build_loss(t, ids));
        std::vector<Tensor> analytic;
        for (ad::ValueId id : ids) analytic.push_back(t.grad(id));

        auto res = check_gradients(loss_value, c.params, analytic);
        CHECK_MESSAGE(res.max_rel_err < tol, c.name, " rel err ", res.max_rel_err);
    }
}
