#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <reluforge/primitives.hpp>

using namespace reluforge;

namespace {

double step_oracle(double x, std::size_t K, double delta, bool& defined) {
    auto k = static_cast<std::size_t>(std::floor(x * static_cast<double>(K)));
    if (k >= K) k = K - 1;
    double right = static_cast<double>(k + 1) / static_cast<double>(K);
    defined = k + 1 == K || x <= right - delta;
    return static_cast<double>(k);
}

std::vector<std::uint8_t> random_bits(std::mt19937_64& rng, std::size_t n) {
    std::vector<std::uint8_t> b(n);
    for (auto& v : b) v = static_cast<std::uint8_t>(rng() & 1u);
    return b;
}

double square_error(const Network& n) {
    double e = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        double x = i / 10000.0;
        e = std::max(e, std::abs(evaluate_scalar(n, x) - x * x));
    }
    return e;
}

}  // namespace

TEST(Step, SmallExample) {
    StepSpec s{1, 2, 1, 1};
    ASSERT_EQ(s.K(), 4u);
    ASSERT_DOUBLE_EQ(s.delta(), 0.125);
    auto n = build_step_function(s);
    EXPECT_NEAR(evaluate_scalar(n, 0.1), 0.0, 1e-9);
    EXPECT_NEAR(evaluate_scalar(n, 0.30), 1.0, 1e-9);
    EXPECT_NEAR(evaluate_scalar(n, 0.0), 0.0, 1e-12);
}

TEST(Step, PlateausExactAndFlat) {
    for (std::size_t d : {1u, 2u, 3u})
        for (std::size_t N = 1; N <= 3; ++N)
            for (std::size_t L = 1; L <= 3; ++L)
                for (std::size_t c : {1u, 2u}) {
                    StepSpec s{d, N, L, c};
                    auto n = build_step_function(s);
                    const std::size_t K = s.K();
                    for (std::size_t k = 0; k < K; ++k) {
                        double lo = static_cast<double>(k) / K, hi = static_cast<double>(k + 1) / K - (k + 2 <= K ? s.delta() : 0.0);
                        double first = evaluate_scalar(n, lo);
                        for (int i = 0; i < 64; ++i) {
                            double x = lo + (hi - lo) * i / 63.0;
                            bool defined = false;
                            double expect = step_oracle(x, K, s.delta(), defined);
                            ASSERT_TRUE(defined);
                            double v = evaluate_scalar(n, x);
                            EXPECT_NEAR(v, expect, 1e-8) << "d=" << d << " N=" << N << " L=" << L << " x=" << x;
                            EXPECT_NEAR(v, first, 1e-9);
                        }
                    }
                }
}

TEST(Step, ShallowAndDeepAgree) {
    StepSpec s{1, 3, 2, 2};
    auto deep = build_step_function(s), shallow = build_step_function(s, false);
    for (int i = 0; i <= 500; ++i) EXPECT_NEAR(evaluate_scalar(deep, i / 500.0), evaluate_scalar(shallow, i / 500.0), 1e-9);
    EXPECT_GT(deep.depth(), shallow.depth());
}

TEST(Step, DeltaAdmissibility) {
    auto s = StepSpec::from_delta(1, 2, 1, 1.0 / 12.0);
    EXPECT_EQ(s.c, 2u);
    EXPECT_THROW(StepSpec::from_delta(1, 2, 1, 0.1), precondition_error);
    EXPECT_THROW(StepSpec::from_delta(1, 2, 1, 0.25), precondition_error);
    EXPECT_THROW(StepSpec::from_delta(1, 2, 1, -1.0), precondition_error);
}

TEST(Step, KFormula) {
    EXPECT_EQ((StepSpec{1, 3, 2, 1}.K()), 36u);
    EXPECT_EQ((StepSpec{2, 4, 2, 1}.K()), 8u);
    EXPECT_EQ((StepSpec{3, 8, 3, 1}.K()), 8u);
}

TEST(Pow2, Examples) {
    EXPECT_DOUBLE_EQ(evaluate_scalar(build_pow2_multiplier(3), 0.25), 2.0);
    EXPECT_DOUBLE_EQ(evaluate_scalar(build_pow2_multiplier(1), -1.0), -2.0);
    for (std::size_t L = 1; L <= 10; ++L) {
        auto n = build_pow2_multiplier(L);
        auto p = profile(n);
        EXPECT_EQ(p.param_sup, 2.0);
        EXPECT_EQ(p.width, 2u);
        EXPECT_EQ(p.depth, L + 1);
        EXPECT_DOUBLE_EQ(evaluate_scalar(n, -0.375), -0.375 * std::ldexp(1.0, static_cast<int>(L)));
    }
}

TEST(BitSum, RowExample) {
    BitMatrix bits{4, 4, std::vector<std::uint8_t>(16, 0)};
    bits.bits[0] = 1;
    bits.bits[2] = 1;
    bits.bits[3] = 1;
    auto n = build_bit_sum(bits, 1, 4);
    std::vector<double> in{0.0, 2.0};
    EXPECT_NEAR(evaluate_scalar(n, in), 2.0, 1e-6);
}

TEST(BitSum, AllZeroAndAllOne) {
    const std::size_t N = 2, L = 4, M = N * N * L;
    auto zero = build_bit_sum(BitMatrix{M, L, std::vector<std::uint8_t>(M * L, 0)}, N, L);
    auto one = build_bit_sum(BitMatrix{M, L, std::vector<std::uint8_t>(M * L, 1)}, N, L);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t l = 0; l < L; ++l) {
            std::vector<double> in{static_cast<double>(m), static_cast<double>(l)};
            EXPECT_NEAR(evaluate_scalar(zero, in), 0.0, 1e-6);
            EXPECT_NEAR(evaluate_scalar(one, in), static_cast<double>(l + 1), 1e-6);
        }
}

TEST(BitSum, ExhaustiveAndParameterAudit) {
    std::mt19937_64 rng(1);
    for (std::size_t N = 1; N <= 4; ++N)
        for (std::size_t L = 1; L <= 4; ++L) {
            const std::size_t M = N * N * L;
            BitMatrix bits{M, L, random_bits(rng, M * L)};
            auto n = build_bit_sum(bits, N, L);
            for (std::size_t m = 0; m < M; ++m) {
                int sum = 0;
                for (std::size_t l = 0; l < L; ++l) {
                    sum += bits(m, l);
                    std::vector<double> in{static_cast<double>(m), static_cast<double>(l)};
                    double v = evaluate_scalar(n, in);
                    EXPECT_NEAR(v, sum, 1e-6);
                    EXPECT_EQ(std::lround(v), sum);
                }
            }
            EXPECT_LE(profile(n).param_sup, std::max(2.0, static_cast<double>(N * N * L)));
        }
}

TEST(BitSum, DepthQuadraticParametersLinear) {
    std::mt19937_64 rng(2);
    const std::size_t N = 2, L = 20, M = N * N * L;
    auto n = build_bit_sum(BitMatrix{M, L, random_bits(rng, M * L)}, N, L);
    auto p = profile(n);
    EXPECT_LT(p.param_sup, std::ldexp(1.0, 20));
    EXPECT_LE(p.param_sup, static_cast<double>(N * N * L));
    EXPECT_LE(p.depth, 2 * L * L);
}

TEST(BitSum, DirectScalingShowsExponentialParameters) {
    std::mt19937_64 rng(3);
    const std::size_t N = 1, L = 12, M = N * N * L;
    BitMatrix bits{M, L, random_bits(rng, M * L)};
    auto direct = detail::bit_sum_impl(bits, N, L, detail::BitScaling::direct);
    auto chained = build_bit_sum(bits, N, L);
    EXPECT_GE(profile(direct).param_sup, std::ldexp(1.0, static_cast<int>(L)));
    EXPECT_LT(profile(chained).param_sup, 64.0);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t l = 0; l < L; ++l) {
            std::vector<double> in{static_cast<double>(m), static_cast<double>(l)};
            EXPECT_NEAR(evaluate_scalar(direct, in), evaluate_scalar(chained, in), 1e-6);
        }
}

TEST(BitSum, BitCountMismatch) {
    EXPECT_THROW(build_bit_sum(BitMatrix{4, 2, std::vector<std::uint8_t>(7, 0)}, 1, 2), precondition_error);
}

TEST(BitLookup, SingleOne) {
    std::vector<std::uint8_t> theta(16, 0);
    theta[5] = 1;
    auto n = build_bit_lookup(theta, 2, 2);
    for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(evaluate_scalar(n, static_cast<double>(i)), i == 5 ? 1.0 : 0.0, 1e-6);
}

TEST(BitLookup, AllZeros) {
    auto n = build_bit_lookup(std::vector<std::uint8_t>(16, 0), 2, 2);
    for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(evaluate_scalar(n, static_cast<double>(i)), 0.0, 1e-6);
}

TEST(BitLookup, Exhaustive) {
    std::mt19937_64 rng(4);
    for (std::size_t N = 1; N <= 4; ++N)
        for (std::size_t L = 1; L <= 4; ++L) {
            auto theta = random_bits(rng, N * N * L * L);
            auto n = build_bit_lookup(theta, N, L);
            for (std::size_t i = 0; i < theta.size(); ++i) EXPECT_NEAR(evaluate_scalar(n, static_cast<double>(i)), theta[i], 1e-6);
        }
}

TEST(BitLookup, BlockIndex) {
    for (std::size_t N = 1; N <= 3; ++N)
        for (std::size_t L = 1; L <= 4; ++L) {
            auto psi = build_block_index(N, L);
            for (std::size_t i = 0; i < N * N * L * L; ++i) EXPECT_NEAR(evaluate_scalar(psi, static_cast<double>(i)), static_cast<double>(i / L), 1e-9);
        }
}

TEST(BitLookup, LengthMismatch) { EXPECT_THROW(build_bit_lookup(std::vector<std::uint8_t>(15, 0), 2, 2), precondition_error); }

TEST(PointFitter, ZeroAndOne) {
    auto zero = build_point_fitter(std::vector<double>(16, 0.0), 2, 2, 1);
    auto one = build_point_fitter(std::vector<double>(16, 1.0), 2, 2, 1);
    const std::size_t J = point_fitter_bits(2, 2, 1);
    for (std::size_t i = 0; i < 16; ++i) {
        EXPECT_NEAR(evaluate_scalar(zero, static_cast<double>(i)), 0.0, 1e-9);
        double v = evaluate_scalar(one, static_cast<double>(i));
        EXPECT_GE(v, 1.0 - std::ldexp(1.0, -static_cast<int>(J)) - 1e-9);
        EXPECT_LE(v, 1.0);
        EXPECT_LE(1.0 - v, 1.0 / 16.0);
    }
}

TEST(PointFitter, RandomWithinBoundAndClamped) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> xi(16);
    for (auto& v : xi) v = u(rng);
    auto n = build_point_fitter(xi, 2, 2, 1);
    for (std::size_t i = 0; i < 16; ++i) EXPECT_LE(std::abs(evaluate_scalar(n, static_cast<double>(i)) - xi[i]), 1.0 / 16.0);
    std::uniform_real_distribution<double> wide(-50.0, 80.0);
    for (int t = 0; t < 100000; ++t) {
        double v = evaluate_scalar(n, wide(rng));
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
    }
}

TEST(PointFitter, HigherOrder) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> xi(9);
    for (auto& v : xi) v = u(rng);
    auto n = build_point_fitter(xi, 3, 1, 2);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_LE(std::abs(evaluate_scalar(n, static_cast<double>(i)) - xi[i]), std::pow(3.0, -4.0));
}

TEST(PointFitter, Guards) {
    EXPECT_THROW(build_point_fitter(std::vector<double>(16, 1.5), 2, 2, 1), precondition_error);
    EXPECT_THROW(build_point_fitter(std::vector<double>(15, 0.5), 2, 2, 1), precondition_error);
    EXPECT_GT(point_fitter_bits(8, 8, 5), max_point_fitter_bits);
    EXPECT_THROW(build_point_fitter(std::vector<double>(64 * 64, 0.5), 8, 8, 5), precondition_error);
}

TEST(Square, Sawtooth) {
    EXPECT_DOUBLE_EQ(sawtooth(1, 0.5), 1.0);
    EXPECT_DOUBLE_EQ(sawtooth(2, 0.25), 1.0);
    EXPECT_DOUBLE_EQ(sawtooth(2, 0.5), 0.0);
    EXPECT_DOUBLE_EQ(sawtooth(3, 0.375), 1.0);
    EXPECT_DOUBLE_EQ(sawtooth(3, 0.0625), 0.5);
}

TEST(Square, TeethPerLayer) {
    EXPECT_EQ(square_teeth_per_layer(1), 1u);
    EXPECT_EQ(square_teeth_per_layer(2), 1u);
    EXPECT_EQ(square_teeth_per_layer(3), 2u);
    EXPECT_EQ(square_teeth_per_layer(8), 2u);
    EXPECT_EQ(square_teeth_per_layer(9), 3u);
    EXPECT_EQ(square_teeth_per_layer(24), 3u);
}

TEST(Square, EndpointsAndMidpoint) {
    auto n = build_square(2, 3);
    EXPECT_EQ(evaluate_scalar(n, 0.0), 0.0);
    EXPECT_NEAR(evaluate_scalar(n, 1.0), 1.0, 1e-15);
    EXPECT_LE(std::abs(evaluate_scalar(n, 0.5) - 0.25), 0.125);
    auto p = profile(n);
    EXPECT_LE(p.width, 6u);
    EXPECT_LE(p.depth, 4u);
}

TEST(Square, ErrorBoundAndShape) {
    for (std::size_t N = 1; N <= 8; ++N)
        for (std::size_t L = 1; L <= 4; ++L) {
            auto n = build_square(N, L);
            auto p = profile(n);
            EXPECT_LE(square_error(n), std::pow(static_cast<double>(N), -static_cast<double>(L)) + 1e-15) << N << ' ' << L;
            EXPECT_LE(p.width, 3 * N);
            EXPECT_LE(p.depth, L + 1);
            EXPECT_LE(p.param_sup, 4.0 * static_cast<double>(N));
        }
}

TEST(Square, ExactSumOfTeeth) {
    // x - sum_{i <= Lk} 4^-i T_i(x) computed directly
    const std::size_t N = 5, L = 2, k = square_teeth_per_layer(N);
    auto n = build_square(N, L);
    for (int t = 0; t <= 1000; ++t) {
        double x = t / 1000.0, s = x;
        for (std::size_t i = 1; i <= L * k; ++i) s -= std::ldexp(sawtooth(i, x), -2 * static_cast<int>(i));
        EXPECT_NEAR(evaluate_scalar(n, x), s, 1e-12);
    }
}

TEST(Product, ZeroFactorAndPolarization) {
    auto sq = build_square(2, 4);
    double eps = square_error(sq);
    auto n = build_product_unit(2, 4);
    for (int i = 0; i <= 20; ++i) {
        std::vector<double> a{0.0, i / 20.0}, b{i / 20.0, 0.0};
        EXPECT_LE(std::abs(evaluate_scalar(n, a)), 6.0 * eps);
        EXPECT_LE(std::abs(evaluate_scalar(n, b)), 6.0 * eps);
    }
    double err = 0.0;
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
            std::vector<double> x{i / 100.0, j / 100.0};
            err = std::max(err, std::abs(evaluate_scalar(n, x) - x[0] * x[1]));
        }
    EXPECT_LE(err, 6.0 * eps);
    EXPECT_LE(err, 6.0 * std::pow(2.0, -4.0));
}

TEST(Product, GeneralInterval) {
    for (auto [a, b] : {std::pair{-1.0, 1.0}, std::pair{-3.0, 2.0}, std::pair{0.5, 4.0}}) {
        auto n = build_product_general(3, 3, a, b);
        double eps = square_error(build_square(3, 3));
        double err = 0.0;
        for (int i = 0; i <= 60; ++i)
            for (int j = 0; j <= 60; ++j) {
                std::vector<double> x{a + (b - a) * i / 60.0, a + (b - a) * j / 60.0};
                err = std::max(err, std::abs(evaluate_scalar(n, x) - x[0] * x[1]));
            }
        EXPECT_LE(err, 6.0 * eps * (b - a) * (b - a) + 1e-12) << a << ' ' << b;
        EXPECT_LE(profile(n).param_sup, std::max({4.0 * 3.0, a * a + 2.0 * std::abs(a) * std::abs(a), (b - a) * (b - a)}));
    }
    EXPECT_THROW(build_product_general(2, 2, 1.0, 1.0), precondition_error);
}

TEST(MultiProduct, SpecialInputsAndGrid) {
    auto n = build_multi_product(3, 2, 2);
    double eps = square_error(build_square(2, 2));
    const double bound = 2.0 * 6.0 * eps;
    std::vector<double> ones{1.0, 1.0, 1.0}, zero{0.4, 0.0, 0.9};
    EXPECT_NEAR(evaluate_scalar(n, ones), 1.0, bound);
    EXPECT_NEAR(evaluate_scalar(n, zero), 0.0, bound);
    double err = 0.0;
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j <= 20; ++j)
            for (int l = 0; l <= 20; ++l) {
                std::vector<double> x{i / 20.0, j / 20.0, l / 20.0};
                err = std::max(err, std::abs(evaluate_scalar(n, x) - x[0] * x[1] * x[2]));
            }
    EXPECT_LE(err, bound);
}

TEST(MultiProduct, ErrorDecreasesWithDepth) {
    double prev = 1e9;
    for (std::size_t L = 1; L <= 4; ++L) {
        auto n = build_multi_product(4, 2, L);
        double err = 0.0;
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int t = 0; t < 2000; ++t) {
            std::vector<double> x{u(rng), u(rng), u(rng), u(rng)};
            err = std::max(err, std::abs(evaluate_scalar(n, x) - x[0] * x[1] * x[2] * x[3]));
        }
        EXPECT_LT(err, prev);
        prev = err;
        EXPECT_LE(profile(n).param_sup, 4.0);
    }
    EXPECT_THROW(build_multi_product(1, 2, 2), precondition_error);
}

TEST(Monomial, Examples) {
    auto id = build_monomial({1}, 2, 3);
    double eps = square_error(build_square(2, 3));
    for (int i = 0; i <= 10; ++i) EXPECT_NEAR(evaluate_scalar(id, i / 10.0), i / 10.0, 6.0 * eps);
    auto m21 = build_monomial({2, 1}, 2, 3);
    std::vector<double> x{0.5, 0.5};
    EXPECT_NEAR(evaluate_scalar(m21, x), 0.125, 2.0 * 6.0 * eps);
    auto one = build_monomial({0, 0, 0}, 2, 3);
    std::vector<double> y{0.3, 0.2, 0.9};
    EXPECT_EQ(evaluate_scalar(one, y), 1.0);
}

TEST(Monomial, ReplicationEntriesAreOne) {
    auto n = build_monomial({1, 2, 0}, 3, 2);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double eps = square_error(build_square(3, 2));
    for (int t = 0; t < 500; ++t) {
        std::vector<double> x{u(rng), u(rng), u(rng)};
        EXPECT_NEAR(evaluate_scalar(n, x), x[0] * x[1] * x[1], 2.0 * 6.0 * eps);
    }
    EXPECT_LE(profile(n).param_sup, 4.0 * 3.0);
}
