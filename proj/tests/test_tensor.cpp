#include "doctest.h"

#include <stdexcept>

#include "lightpath/rng.hpp"
#include "lightpath/tensor.hpp"

using namespace lightpath;

TEST_CASE("tensor shape/data consistency") {
    Tensor t({2, 3});
    CHECK(t.size() == 6);
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 3);
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0}), std::invalid_argument);
    Tensor s = Tensor::scalar(4.5);
    CHECK(s.is_scalar());
    CHECK(s[0] == 4.5);
}

TEST_CASE("gemm transpose variants agree with the naive product") {
    Rng rng(11);
    const std::size_t m = 4, k = 5, n = 3;
    std::vector<double> a(m * k), b(k * n);
    for (auto& v : a) v = rng.uniform(-1, 1);
    for (auto& v : b) v = rng.uniform(-1, 1);

    std::vector<double> want(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t j = 0; j < n; ++j) want[i * n + j] += a[i * k + p] * b[p * n + j];

    std::vector<double> got(m * n);
    detail::gemm(false, false, m, n, k, a.data(), b.data(), got.data(), false);
    for (std::size_t i = 0; i < m * n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));

    // a stored transposed (k x m)
    std::vector<double> at(k * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) at[p * m + i] = a[i * k + p];
    detail::gemm(true, false, m, n, k, at.data(), b.data(), got.data(), false);
    for (std::size_t i = 0; i < m * n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));

    // b stored transposed (n x k)
    std::vector<double> bt(n * k);
    for (std::size_t p = 0; p < k; ++p)
        for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
    detail::gemm(false, true, m, n, k, a.data(), bt.data(), got.data(), false);
    for (std::size_t i = 0; i < m * n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));

    detail::gemm(true, true, m, n, k, at.data(), bt.data(), got.data(), false);
    for (std::size_t i = 0; i < m * n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("rng forks are independent and deterministic") {
    Rng a(42);
    Rng b(42);
    CHECK(a.u64() == b.u64());
    Rng c = Rng(42).fork("x");
    Rng d = Rng(42).fork("x");
    Rng e = Rng(42).fork("y");
    CHECK(c.u64() == d.u64());
    CHECK(c.u64() != e.u64());
    Rng f(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = f.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}
