#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include <reluforge/algebra.hpp>

using namespace reluforge;

namespace {

Network dense_net(std::mt19937_64& rng, std::size_t in, std::vector<std::size_t> widths, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<AffineLayer> layers;
    std::size_t prev = in;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        std::vector<double> w(widths[i] * prev), b(widths[i]);
        for (auto& v : w) v = u(rng);
        for (auto& v : b) v = u(rng);
        layers.push_back({Matrix::from_dense(widths[i], prev, w), b, i + 1 == widths.size() ? Activation::identity : Activation::relu});
        prev = widths[i];
    }
    return Network(in, std::move(layers));
}

Network scalar_affine(double a, double b) { return affine_map(Matrix::from_dense(1, 1, std::vector<double>{a}), {b}); }

std::vector<double> random_point(std::mt19937_64& rng, std::size_t d, double r = 1.0) {
    std::uniform_real_distribution<double> u(-r, r);
    std::vector<double> x(d);
    for (auto& v : x) v = u(rng);
    return x;
}

}  // namespace

TEST(ComposeSerial, IdentityIsNeutral) {
    std::mt19937_64 rng(1);
    auto f = dense_net(rng, 2, {5, 3, 1});
    auto id = affine_map(Matrix::identity(2), {0.0, 0.0});
    auto g = compose_serial(id, f);
    for (int t = 0; t < 100; ++t) {
        auto x = random_point(rng, 2);
        EXPECT_NEAR(evaluate_scalar(g, x), evaluate_scalar(f, x), 1e-12);
    }
}

TEST(ComposeSerial, AffineExample) {
    auto g = compose_serial(scalar_affine(2.0, 0.0), scalar_affine(1.0, 1.0));
    EXPECT_DOUBLE_EQ(evaluate_scalar(g, 3.0), 7.0);
}

TEST(ComposeSerial, DepthBookkeeping) {
    std::mt19937_64 rng(2);
    auto a = dense_net(rng, 1, {3, 3, 2});
    auto b = dense_net(rng, 2, {4, 4, 4, 1});
    auto c = compose_serial(a, b);
    EXPECT_EQ(c.depth(), 6u);
    for (int t = 0; t < 100; ++t) {
        auto x = random_point(rng, 1);
        EXPECT_NEAR(evaluate_scalar(c, x), evaluate_scalar(b, evaluate(a, x)), 1e-12);
    }
}

TEST(ComposeSerial, DimensionMismatch) {
    std::mt19937_64 rng(3);
    EXPECT_THROW(compose_serial(dense_net(rng, 1, {2}), dense_net(rng, 3, {1})), dimension_error);
    EXPECT_THROW(compose(dense_net(rng, 1, {2}), dense_net(rng, 3, {1})), dimension_error);
}

TEST(ComposeSerial, Associative) {
    std::mt19937_64 rng(4);
    auto a = dense_net(rng, 2, {3, 2});
    auto b = dense_net(rng, 2, {4, 2});
    auto c = dense_net(rng, 2, {3, 1});
    auto l = compose_serial(compose_serial(a, b), c);
    auto r = compose_serial(a, compose_serial(b, c));
    for (int t = 0; t < 100; ++t) {
        auto x = random_point(rng, 2);
        EXPECT_NEAR(evaluate_scalar(l, x), evaluate_scalar(r, x), 1e-12);
    }
}

TEST(Compose, LiftsWhenMergeWouldInflateParameters) {
    auto a = scalar_affine(40.0, 0.0);
    auto b = scalar_affine(40.0, 1.0);
    auto c = compose(a, b);
    EXPECT_DOUBLE_EQ(evaluate_scalar(c, 0.5), 801.0);
    EXPECT_DOUBLE_EQ(evaluate_scalar(c, -0.5), -799.0);
    EXPECT_LE(profile(c).param_sup, 40.0);
    EXPECT_EQ(compose_serial(a, b).depth(), 1u);
    EXPECT_DOUBLE_EQ(profile(compose_serial(a, b)).param_sup, 1600.0);
}

TEST(ComposeParallel, SingleOperand) {
    std::mt19937_64 rng(5);
    auto f = dense_net(rng, 2, {3, 1});
    auto p = compose_parallel({f});
    for (int t = 0; t < 20; ++t) {
        auto x = random_point(rng, 2);
        EXPECT_DOUBLE_EQ(evaluate_scalar(p, x), evaluate_scalar(f, x));
    }
}

TEST(ComposeParallel, Concatenates) {
    auto p = compose_parallel({scalar_affine(1.0, 0.0), scalar_affine(-1.0, 0.0)});
    double x[] = {2.0};
    EXPECT_EQ(evaluate(p, x), (std::vector<double>{2.0, -2.0}));
}

TEST(ComposeParallel, PaddingPreservesValues) {
    std::mt19937_64 rng(6);
    auto shallow = dense_net(rng, 1, {1}, 3.0);
    auto deep = dense_net(rng, 1, {2, 2, 1});
    auto p = compose_parallel({shallow, deep});
    EXPECT_EQ(p.depth(), 3u);
    for (int t = 0; t < 100; ++t) {
        auto x = random_point(rng, 1, 5.0);
        auto y = evaluate(p, x);
        EXPECT_NEAR(y[0], evaluate_scalar(shallow, x), 1e-12);
        EXPECT_NEAR(y[1], evaluate_scalar(deep, x), 1e-12);
    }
    EXPECT_LE(profile(p).param_sup, std::max({profile(shallow).param_sup, profile(deep).param_sup, 1.0}));
}

TEST(ComposeParallel, Errors) {
    std::mt19937_64 rng(7);
    EXPECT_THROW(compose_parallel({}), precondition_error);
    EXPECT_THROW(compose_parallel({dense_net(rng, 1, {1}), dense_net(rng, 2, {1})}), dimension_error);
}

TEST(LinearCombination, SingleOperand) {
    std::mt19937_64 rng(8);
    auto f = dense_net(rng, 2, {4, 1});
    auto g = linear_combination({f}, {1.0}, 0.0);
    for (int t = 0; t < 50; ++t) {
        auto x = random_point(rng, 2);
        EXPECT_NEAR(evaluate_scalar(g, x), evaluate_scalar(f, x), 1e-12);
    }
}

TEST(LinearCombination, Cancellation) {
    std::mt19937_64 rng(9);
    auto f = dense_net(rng, 2, {4, 1});
    auto g = linear_combination({f, f}, {1.0, -1.0}, 0.0);
    for (int t = 0; t < 100; ++t) EXPECT_NEAR(evaluate_scalar(g, random_point(rng, 2)), 0.0, 1e-12);
}

TEST(LinearCombination, MatchesScalarOracle) {
    std::mt19937_64 rng(10);
    auto f = dense_net(rng, 1, {3, 1});
    auto h = dense_net(rng, 1, {2, 2, 1});
    auto g = linear_combination({f, h}, {2.0, 3.0}, -1.0);
    for (int t = 0; t < 100; ++t) {
        auto x = random_point(rng, 1);
        EXPECT_NEAR(evaluate_scalar(g, x), 2.0 * evaluate_scalar(f, x) + 3.0 * evaluate_scalar(h, x) - 1.0, 1e-12);
    }
}

TEST(LinearCombination, LengthMismatch) {
    EXPECT_THROW(linear_combination({scalar_affine(1, 0)}, {1.0, 2.0}, 0.0), dimension_error);
}

TEST(IdentityChannel, Values) {
    auto id = identity_channel(1, 3);
    EXPECT_DOUBLE_EQ(evaluate_scalar(id, -2.5), -2.5);
    EXPECT_EQ(id.depth(), 3u);
    EXPECT_EQ(profile(id).param_sup, 1.0);
    EXPECT_EQ(profile(id).width, 2u);
    std::mt19937_64 rng(11);
    auto id3 = identity_channel(3, 4);
    for (int t = 0; t < 100; ++t) {
        auto x = random_point(rng, 3, 10.0);
        auto y = evaluate(id3, x);
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(y[j], x[j], 1e-12);
    }
}

TEST(MinMaxMid, Examples) {
    std::vector<double> a{-1.0, 3.0}, b{1.0, 2.0, 3.0};
    EXPECT_DOUBLE_EQ(evaluate_scalar(max2(), a), 3.0);
    EXPECT_DOUBLE_EQ(evaluate_scalar(min2(), a), -1.0);
    EXPECT_DOUBLE_EQ(evaluate_scalar(mid3(), b), 2.0);
    EXPECT_LE(profile(mid3()).param_sup, 1.0);
    EXPECT_LE(profile(max2()).param_sup, 1.0);
}

TEST(MinMaxMid, AgainstSortOracle) {
    std::mt19937_64 rng(12);
    auto mx = max3(), mn = min3(), md = mid3();
    for (int t = 0; t < 1000; ++t) {
        auto x = random_point(rng, 3, 5.0);
        auto s = x;
        std::sort(s.begin(), s.end());
        EXPECT_NEAR(evaluate_scalar(md, x), s[1], 1e-12);
        EXPECT_NEAR(evaluate_scalar(mx, x), s[2], 1e-12);
        EXPECT_NEAR(evaluate_scalar(mn, x), s[0], 1e-12);
    }
    std::vector<double> tie{0.7, 0.7, 0.7};
    EXPECT_DOUBLE_EQ(evaluate_scalar(md, tie), 0.7);
}

TEST(WidenToDeep, Degenerate) {
    std::mt19937_64 rng(13);
    auto s = dense_net(rng, 1, {1, 1, 1});
    auto d = widen_to_deep(s, 1, 1);
    for (int t = 0; t < 100; ++t) {
        auto x = random_point(rng, 1);
        EXPECT_NEAR(evaluate_scalar(d, x), evaluate_scalar(s, x), 1e-12);
    }
}

TEST(WidenToDeep, PointwiseEqualAndProfile) {
    std::mt19937_64 rng(14);
    for (std::size_t N = 1; N <= 4; ++N)
        for (std::size_t L = 1; L <= 4; ++L) {
            auto s = dense_net(rng, 2, {N, N * L, 1});
            auto d = widen_to_deep(s, N, L);
            auto ps = profile(s), pd = profile(d);
            EXPECT_EQ(pd.depth, L + 2);
            EXPECT_LE(pd.width, 2 * N + 2);
            EXPECT_LE(pd.param_sup, std::max(ps.param_sup, 1.0));
            double tol = 1e-9 * (1.0 + ps.param_sup * ps.param_sup * static_cast<double>(pd.width));
            for (int t = 0; t < 1000; ++t) {
                auto x = random_point(rng, 2);
                EXPECT_NEAR(evaluate_scalar(d, x), evaluate_scalar(s, x), tol);
            }
        }
}

TEST(WidenToDeep, WidthPrecondition) {
    std::mt19937_64 rng(15);
    EXPECT_THROW(widen_to_deep(dense_net(rng, 1, {2, 3, 1}), 2, 2), precondition_error);
    EXPECT_THROW(widen_to_deep(dense_net(rng, 1, {2, 1}), 2, 1), precondition_error);
}

TEST(Algebra, NeverInflatesParameters) {
    std::mt19937_64 rng(16);
    auto f = dense_net(rng, 2, {3, 1}, 2.5);
    auto g = dense_net(rng, 2, {3, 3, 1}, 1.5);
    double cap = std::max({profile(f).param_sup, profile(g).param_sup, 1.0});
    EXPECT_LE(profile(compose_parallel({f, g})).param_sup, cap);
    EXPECT_LE(profile(linear_combination({f, g}, {0.5, -2.0}, 0.25)).param_sup, std::max(cap, 2.0));
    EXPECT_LE(profile(compose(f, scalar_affine(2.0, 0.0))).param_sup, std::max(cap, 2.0));
}
