#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <reluforge/assembly.hpp>
#include <reluforge/harness.hpp>
#include <reluforge/interp.hpp>
#include <reluforge/mhaskar.hpp>
#include <reluforge/primitives.hpp>
#include <reluforge/serialize.hpp>

using namespace reluforge;

namespace {

enum Exit { exit_ok = 0, exit_fail = 1, exit_usage = 2 };

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Params {
    std::string construction;
    std::string out;
    std::string csv;
    std::string target = "square";
    std::string act = "gaussian";
    std::string grid = "equi";
    std::string config;
    std::size_t d = 1, N = 2, L = 2, c = 1, s = 1, k = 3, q = 1, m = 1, inner = 1, count = 4;
    double R = 4.0, x0 = 0.0, delta = 0.0, a = 0.0, b = 1.0, constant = 0.5;
    std::vector<double> targets;
    std::vector<int> bits;
    std::vector<std::size_t> alpha, n_list, l_list, m_list;
    std::uint64_t seed = 0;
    std::size_t threads = 1, resolution = 2001;
    bool timing = false;
    double growth_slack = 1.0, rate_slack = 0.5;
};

int finish(int code) {
    std::cout << "STATUS=" << (code == exit_ok ? "ok" : code == exit_fail ? "fail" : "usage") << std::endl;
    return code;
}

std::mt19937_64 make_rng(const Params& p) { return std::mt19937_64(p.seed); }

std::vector<double> random_unit(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

std::vector<std::uint8_t> bits_or_random(const Params& p, std::size_t n, std::mt19937_64& rng) {
    std::vector<std::uint8_t> out(n);
    if (!p.bits.empty()) {
        if (p.bits.size() != n) throw usage_error("--bits needs " + std::to_string(n) + " entries");
        for (std::size_t i = 0; i < n; ++i) {
            if (p.bits[i] != 0 && p.bits[i] != 1) throw usage_error("--bits entries must be 0 or 1");
            out[i] = static_cast<std::uint8_t>(p.bits[i]);
        }
        return out;
    }
    std::bernoulli_distribution coin(0.5);
    for (auto& v : out) v = coin(rng) ? 1 : 0;
    return out;
}

std::vector<double> targets_or_random(const Params& p, std::size_t n, std::mt19937_64& rng) {
    if (p.targets.empty()) return random_unit(n, rng);
    if (p.targets.size() != n) throw usage_error("--targets needs " + std::to_string(n) + " entries");
    return p.targets;
}

StepSpec step_spec(const Params& p) {
    if (p.delta != 0.0) return StepSpec::from_delta(p.d, p.N, p.L, p.delta);
    return StepSpec{p.d, p.N, p.L, p.c};
}

InequiGrid inequi_grid(const Params& p) {
    if ((p.m * (p.inner + 1)) % 2 != 0) throw usage_error("m(inner+1) must be even");
    return InequiGrid{p.R, p.m * (p.inner + 1) / 2, p.c, p.m, p.inner};
}

// Random shallow net with hidden widths N and N*L.
Network random_shallow(std::size_t d, std::size_t N, std::size_t L, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto dense = [&](std::size_t r, std::size_t c) {
        std::vector<double> v(r * c);
        for (auto& x : v) x = u(rng);
        return Matrix::from_dense(r, c, v);
    };
    auto vec = [&](std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = u(rng);
        return v;
    };
    return Network(d, {{dense(N, d), vec(N), Activation::relu},
                       {dense(N * L, N), vec(N * L), Activation::relu},
                       {dense(1, N * L), vec(1), Activation::identity}});
}

// Constant 1/2 except on the strip (1/2 - delta, 1/2), where it dips by 0.3.
Network planted_strip_net(double delta) {
    const double lo = 0.5 - delta, mid = 0.5 - delta / 2.0, hi = 0.5, s = 0.3 / (delta / 2.0);
    std::vector<Triplet> t{{0, 0, 1.0}, {1, 0, 1.0}, {2, 0, 1.0}};
    auto w2 = Matrix::from_dense(1, 3, std::vector<double>{-s, 2.0 * s, -s});
    return Network(1, {{Matrix::from_triplets(3, 1, std::move(t)), {-lo, -mid, -hi}, Activation::relu}, {w2, {0.5}, Activation::identity}});
}

Network construct(const Params& p, std::ostream& info) {
    auto rng = make_rng(p);
    const auto& c = p.construction;
    if (c == "interp-equi") {
        EquiGrid g{p.R, p.count, p.x0};
        info << "points=" << p.count + 1 << '\n';
        return build_equi_interp(g, targets_or_random(p, p.count + 1, rng));
    }
    if (c == "interp-inequi") {
        auto g = inequi_grid(p);
        return build_inequi_interp(g, targets_or_random(p, 2 * p.m + 1, rng));
    }
    if (c == "interp-two-layer") {
        if (p.grid == "equi") {
            EquiGrid g{p.R, p.m * (p.inner + 1), p.x0};
            return build_two_layer_interp(g, p.m, p.inner, targets_or_random(p, g.count + 1, rng));
        }
        if (p.grid != "inequi") throw usage_error("--grid must be equi or inequi");
        auto g = inequi_grid(p);
        return build_two_layer_interp(g, targets_or_random(p, g.point_count(), rng));
    }
    if (c == "step") {
        auto s = step_spec(p);
        info << "K=" << s.K() << " plateaus\n"
             << "delta=" << s.delta() << '\n';
        return build_step_function(s);
    }
    if (c == "pow2") return build_pow2_multiplier(p.L);
    if (c == "bit-sum") {
        const std::size_t M = p.N * p.N * p.L;
        return build_bit_sum(BitMatrix{M, p.L, bits_or_random(p, M * p.L, rng)}, p.N, p.L);
    }
    if (c == "bit-lookup") return build_bit_lookup(bits_or_random(p, p.N * p.N * p.L * p.L, rng), p.N, p.L);
    if (c == "point-fitter") {
        info << "J=" << point_fitter_bits(p.N, p.L, p.s) << '\n';
        return build_point_fitter(targets_or_random(p, p.N * p.N * p.L * p.L, rng), p.N, p.L, p.s);
    }
    if (c == "square") return build_square(p.N, p.L);
    if (c == "product") {
        if (p.a == 0.0 && p.b == 1.0) return build_product_unit(p.N, p.L);
        return build_product_general(p.N, p.L, p.a, p.b);
    }
    if (c == "multi-product") return build_multi_product(p.k, p.N, p.L);
    if (c == "monomial") {
        if (p.alpha.empty()) throw usage_error("--alpha is required");
        return build_monomial(p.alpha, p.N, p.L);
    }
    if (c == "approximator") {
        auto f = make_oracle(p.target, p.d, p.q, p.constant);
        auto a = build_full_approximator(f, p.N, p.L);
        info << "R=" << a.info.R << " c=" << a.info.c << " delta=" << a.info.delta << " s=" << a.info.s << " J=" << a.info.J
             << " product_depth=" << a.info.product_depth << '\n';
        return a.net;
    }
    if (c == "widen") return widen_to_deep(random_shallow(p.d, p.N, p.L, rng), p.N, p.L);
    if (c == "extend") return extend_from_trifling(planted_strip_net(p.delta > 0 ? p.delta : 0.05), 1, p.delta > 0 ? p.delta : 0.05);
    throw usage_error("unknown construction '" + c + "'");
}

const char* construction_list =
    "interp-equi interp-inequi interp-two-layer step pow2 bit-sum bit-lookup point-fitter square product multi-product monomial "
    "approximator widen extend mhaskar";

void print_profile(const Network& net) {
    auto p = profile(net);
    std::cout << "width=" << p.width << " depth=" << p.depth << " param_sup=" << p.param_sup << " nonzero_weights=" << p.nonzero_weights
              << '\n';
}

SmoothActivation parse_activation(const std::string& name) {
    if (name == "gaussian") return SmoothActivation::gaussian();
    if (name == "logistic") return SmoothActivation::logistic();
    throw usage_error("--act must be gaussian or logistic");
}

void write_csv_output(const Params& p, const std::function<void(std::ostream&)>& emit);

int cmd_build_mhaskar(const Params& p) {
    if (p.m < 1 || 2 * p.m > max_derivative_order) throw usage_error("--m must lie in [1, 30]");
    auto b = build_mhaskar(special_fstar, p.m, parse_activation(p.act));
    write_csv_output(p, [&](std::ostream& os) { b.write_ledger_csv(os); });
    std::cout << "construction=mhaskar act=" << b.act.name() << " b=" << b.act.b << " m=" << b.m << '\n'
              << "width=" << b.net.width() << " param_sup=" << b.net.param_sup() << " log10_max_coefficient=" << b.log10_max_coefficient()
              << '\n';
    return exit_ok;
}

int cmd_build(const Params& p) {
    if (p.construction == "mhaskar") return cmd_build_mhaskar(p);
    std::ostringstream info;
    Network net = construct(p, info);
    if (p.out.empty()) {
        write_network(std::cout, net);
    } else {
        std::ofstream os(p.out);
        if (!os) throw std::runtime_error("cannot open " + p.out);
        write_network(os, net);
        std::cout << "written=" << p.out << '\n';
    }
    std::cout << "construction=" << p.construction << '\n' << info.str();
    print_profile(net);
    return exit_ok;
}

struct Checks {
    int failed = 0;
    void operator()(const std::string& name, bool ok, const std::string& detail = "") {
        std::cout << (ok ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : " (" + detail + ")") << '\n';
        if (!ok) ++failed;
    }
};

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

int cmd_verify(const Params& p) {
    auto rng = make_rng(p);
    Checks check;
    const auto& c = p.construction;
    auto scalar = [](const Network& n, double x) { return evaluate_scalar(n, x); };
    if (c == "interp-equi" || c == "interp-two-layer" || c == "interp-inequi") {
        std::ostringstream info;
        Params q = p;
        std::vector<double> y, x;
        if (c == "interp-equi") {
            y = targets_or_random(p, p.count + 1, rng);
            for (std::size_t i = 0; i <= p.count; ++i) x.push_back(EquiGrid{p.R, p.count, p.x0}.point(i));
        } else if (c == "interp-inequi") {
            auto g = inequi_grid(p);
            y = targets_or_random(p, 2 * p.m + 1, rng);
            for (std::size_t j = 0; j <= 2 * p.m; ++j) x.push_back(g.designated(j));
        } else if (p.grid == "equi") {
            EquiGrid g{p.R, p.m * (p.inner + 1), p.x0};
            y = targets_or_random(p, g.count + 1, rng);
            for (std::size_t i = 0; i <= g.count; ++i) x.push_back(g.point(i));
        } else {
            auto g = inequi_grid(p);
            y = targets_or_random(p, g.point_count(), rng);
            for (std::size_t i = 0; i < g.point_count(); ++i) x.push_back(g.point(i));
        }
        q.targets = y;
        Network net = construct(q, info);
        double err = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(scalar(net, x[i]) - y[i]));
        check("exactness", err <= 1e-8, "max error " + num(err));
        if (c == "interp-equi") {
            double second = std::abs(y[1] - y[0]);
            for (std::size_t i = 1; i + 1 < y.size(); ++i) second = std::max(second, std::abs(y[i + 1] - 2 * y[i] + y[i - 1]));
            double bound = std::max({1.0, std::abs(x.front()), std::abs(x[x.size() - 2]), std::abs(y[0]), p.R * second});
            check("param_sup bound", profile(net).param_sup <= bound * (1 + 1e-12), num(profile(net).param_sup) + " <= " + num(bound));
        }
        if (c == "interp-two-layer")
            check("hidden widths 2m and 2n+1", net.layer(0).out_dim() == 2 * p.m && net.layer(1).out_dim() == 2 * p.inner + 1);
    } else if (c == "step") {
        auto s = step_spec(p);
        auto net = build_step_function(s);
        const std::size_t K = s.K();
        double err = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            double lo = static_cast<double>(k) / K, hi = static_cast<double>(k + 1) / K - (k + 2 <= K ? s.delta() : 0.0);
            for (int i = 0; i < 64; ++i) err = std::max(err, std::abs(scalar(net, lo + (hi - lo) * i / 63.0) - static_cast<double>(k)));
        }
        check("plateaus exact", err <= 1e-8, "K=" + std::to_string(K) + ", max error " + num(err));
    } else if (c == "pow2") {
        auto net = build_pow2_multiplier(p.L);
        double err = 0.0;
        for (double x : {-1.0, -0.3, 0.0, 0.25, 0.7, 3.0}) err = std::max(err, std::abs(scalar(net, x) - std::ldexp(x, static_cast<int>(p.L))));
        check("x -> 2^L x", err == 0.0, num(err));
        auto pr = profile(net);
        check("width 2, param_sup 2", pr.width == 2 && pr.param_sup == 2.0);
    } else if (c == "bit-sum") {
        const std::size_t M = p.N * p.N * p.L;
        BitMatrix bits{M, p.L, bits_or_random(p, M * p.L, rng)};
        auto net = build_bit_sum(bits, p.N, p.L);
        double err = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            double sum = 0.0;
            for (std::size_t l = 0; l < p.L; ++l) {
                sum += bits(m, l);
                double in[2] = {static_cast<double>(m), static_cast<double>(l)};
                err = std::max(err, std::abs(evaluate_scalar(net, in) - sum));
            }
        }
        check("exhaustive prefix sums", err <= 1e-6, "max error " + num(err));
        double ps = profile(net).param_sup;
        const double bound = std::max(2.0, static_cast<double>(p.N * p.N * p.L));
        check("param_sup <= max(N^2 L, 2)", ps <= bound, num(ps) + " <= " + num(bound));
    } else if (c == "bit-lookup") {
        auto theta = bits_or_random(p, p.N * p.N * p.L * p.L, rng);
        auto net = build_bit_lookup(theta, p.N, p.L);
        double err = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) err = std::max(err, std::abs(scalar(net, static_cast<double>(i)) - theta[i]));
        check("exhaustive lookup", err <= 1e-6, "max error " + num(err));
    } else if (c == "point-fitter") {
        auto xi = targets_or_random(p, p.N * p.N * p.L * p.L, rng);
        auto net = build_point_fitter(xi, p.N, p.L, p.s);
        double err = 0.0, tol = std::pow(static_cast<double>(p.N * p.L), -2.0 * static_cast<double>(p.s));
        for (std::size_t i = 0; i < xi.size(); ++i) err = std::max(err, std::abs(scalar(net, static_cast<double>(i)) - xi[i]));
        check("fit within (NL)^(-2s)", err <= tol, num(err) + " <= " + num(tol));
        std::uniform_real_distribution<double> u(-static_cast<double>(xi.size()), 2.0 * static_cast<double>(xi.size()));
        bool in = true;
        for (int i = 0; i < 10000; ++i) {
            double v = scalar(net, u(rng));
            in = in && v >= 0.0 && v <= 1.0;
        }
        check("output within [0,1]", in);
    } else if (c == "square" || c == "product" || c == "multi-product" || c == "monomial") {
        auto sq = build_square(p.N, p.L);
        double eps = 0.0;
        for (int i = 0; i <= 10000; ++i) {
            double x = i / 10000.0;
            eps = std::max(eps, std::abs(scalar(sq, x) - x * x));
        }
        if (c == "square") {
            check("endpoints exact", scalar(sq, 0.0) == 0.0 && std::abs(scalar(sq, 1.0) - 1.0) <= 1e-12);
            double bound = std::pow(static_cast<double>(p.N), -static_cast<double>(p.L));
            check("sup error <= N^-L", eps <= bound, num(eps) + " <= " + num(bound));
            auto pr = profile(sq);
            check("width <= 3N", pr.width <= 3 * p.N, std::to_string(pr.width));
        } else if (c == "product") {
            auto net = build_product_unit(p.N, p.L);
            double err = 0.0;
            for (int i = 0; i <= 100; ++i)
                for (int j = 0; j <= 100; ++j) {
                    double in[2] = {i / 100.0, j / 100.0};
                    err = std::max(err, std::abs(evaluate_scalar(net, in) - in[0] * in[1]));
                }
            check("error <= 6 sup|psi - x^2|", err <= 6.0 * eps + 1e-12, num(err) + " <= " + num(6.0 * eps));
        } else {
            Network net = c == "monomial" ? build_monomial(p.alpha, p.N, p.L) : build_multi_product(p.k, p.N, p.L);
            std::size_t dim = net.input_dim();
            std::size_t deg = c == "monomial" ? norm1(p.alpha) : p.k;
            std::vector<double> ones(dim, 1.0), zeros(dim, 0.0);
            double tol = 6.0 * eps * static_cast<double>(std::max<std::size_t>(deg, 2) - 1) * 2.0 + 1e-12;
            check("all ones -> 1", std::abs(evaluate_scalar(net, ones) - 1.0) <= tol, num(evaluate_scalar(net, ones)));
            check("zero input -> 0", deg == 0 || std::abs(evaluate_scalar(net, zeros)) <= tol, num(evaluate_scalar(net, zeros)));
        }
    } else if (c == "approximator") {
        auto f = make_oracle(p.target, p.d, p.q, p.constant);
        auto local = build_local_approximator(f, p.N, p.L, select_c(f, p.N, p.L));
        auto full = extend_from_trifling(local.net, f.d, local.info.delta);
        TriflingRegion omega{f.d, local.info.R, local.info.delta};
        std::size_t res = f.d == 1 ? p.resolution : std::min<std::size_t>(p.resolution, 101);
        auto outside = sup_error(local.net, f.value, f.d, res, omega, p.threads);
        auto everywhere = sup_error(full, f.value, f.d, res, std::nullopt, p.threads);
        double bound = outside.sup + static_cast<double>(f.d) * f.lipschitz * local.info.delta;
        check("full-domain error <= local error + d L~ delta", everywhere.sup <= bound * (1 + 1e-9),
              num(everywhere.sup) + " <= " + num(bound));
        check("param_sup <= max(local, 1)", profile(full).param_sup <= std::max(profile(local.net).param_sup, 1.0));
    } else if (c == "widen") {
        auto shallow = random_shallow(p.d, p.N, p.L, rng);
        auto deep = widen_to_deep(shallow, p.N, p.L);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double err = 0.0;
        for (int i = 0; i < 1000; ++i) {
            std::vector<double> x(p.d);
            for (auto& v : x) v = u(rng);
            err = std::max(err, std::abs(evaluate_scalar(deep, x) - evaluate_scalar(shallow, x)));
        }
        check("pointwise equal", err <= 1e-9, num(err));
    } else if (c == "extend") {
        double delta = p.delta > 0 ? p.delta : 0.05;
        auto bad = planted_strip_net(delta);
        auto fixed = extend_from_trifling(bad, 1, delta);
        double err = 0.0;
        for (int i = 0; i <= 1000; ++i) {
            double x = i / 1000.0;
            err = std::max(err, std::abs(scalar(fixed, x) - 0.5));
        }
        check("strip repaired", err <= 1e-12, num(err));
        check("param_sup <= max(input, 1)", profile(fixed).param_sup <= std::max(profile(bad).param_sup, 1.0));
    } else {
        throw usage_error("unknown construction '" + c + "'");
    }
    return check.failed == 0 ? exit_ok : exit_fail;
}

void write_csv_output(const Params& p, const std::function<void(std::ostream&)>& emit) {
    if (p.csv.empty()) {
        emit(std::cout);
        return;
    }
    std::ofstream os(p.csv);
    if (!os) throw std::runtime_error("cannot open " + p.csv);
    emit(os);
    std::cout << "written=" << p.csv << '\n';
}

int cmd_study(const Params& p) {
    Checks check;
    const auto& kind = p.construction;
    if (kind == "deep-growth" || kind == "deep-rate") {
        bool rate = kind == "deep-rate";
        std::vector<std::size_t> ns = p.n_list, ls = p.l_list;
        if (ns.empty()) throw usage_error("empty N list");
        if (ls.empty()) throw usage_error("empty L list");
        std::string target = p.target;
        auto f = make_oracle(target, p.d, p.q, p.constant);
        SweepSpec spec;
        spec.target = target;
        spec.resolution = f.d == 1 ? p.resolution : std::min<std::size_t>(p.resolution, 101);
        spec.threads = p.threads;
        spec.seed = p.seed;
        for (auto n : ns)
            for (auto l : ls) spec.NL.emplace_back(n, l);
        auto rep = run_growth_study([&](std::size_t N, std::size_t L) { return build_full_approximator(f, N, L).net; }, f, spec);
        write_csv_output(p, [&](std::ostream& os) { rep.write_csv(os, p.timing); });
        const double dd = static_cast<double>(p.d), qq = static_cast<double>(p.q);
        if (!rate) {
            const double expo = (6.0 * qq - 3.0) / dd;
            if (!rep.param_vs_N) {
                check("param_sup fit vs N", false, "need at least three rows at fixed L");
            } else {
                std::cout << "param_sup slope vs N = " << rep.param_vs_N->slope << " (R^2 " << rep.param_vs_N->r2 << ")\n";
                check("slope <= (6q-3)/d + slack", rep.param_vs_N->slope <= expo + p.growth_slack,
                      num(rep.param_vs_N->slope) + " <= " + num(expo + p.growth_slack));
                check("R^2 >= 0.9", rep.param_vs_N->r2 >= 0.9, num(rep.param_vs_N->r2));
            }
            for (const auto& r : rep.rows)
                for (const auto& r2 : rep.rows)
                    if (r2.L == r.L && r2.N == 2 * r.N)
                        check("P(" + std::to_string(r2.N) + ")/P(" + std::to_string(r.N) + ") <= 2^((6q-3)/d+1)",
                              r2.param_sup / r.param_sup <= std::pow(2.0, expo + 1.0), num(r2.param_sup / r.param_sup));
        } else {
            bool decreasing = true;
            for (std::size_t i = 1; i < rep.rows.size(); ++i)
                if (rep.rows[i].L == rep.rows[i - 1].L) decreasing = decreasing && rep.rows[i].sup_error < rep.rows[i - 1].sup_error;
            check("error strictly decreasing in N", decreasing);
            if (!rep.error_vs_N) {
                check("error fit vs N", false, "need at least three rows with positive error");
            } else {
                std::cout << "error slope vs N = " << rep.error_vs_N->slope << " (R^2 " << rep.error_vs_N->r2 << ")\n";
                check("slope <= -2q/d + slack", rep.error_vs_N->slope <= -2.0 * qq / dd + p.rate_slack,
                      num(rep.error_vs_N->slope) + " <= " + num(-2.0 * qq / dd + p.rate_slack));
            }
        }
    } else if (kind == "mhaskar-growth") {
        if (p.m_list.empty()) throw usage_error("empty m list");
        SmoothActivation act = parse_activation(p.act);
        auto rep = measure_growth_Im(special_fstar, act, p.m_list);
        write_csv_output(p, [&](std::ostream& os) { rep.write_csv(os); });
        std::cout << "ln I_m slope vs m = " << rep.slope << " (R^2 " << rep.r2 << "), min ratio " << rep.min_ratio << '\n';
        check("slope > 0", rep.slope > 0.0, num(rep.slope));
        check("R^2 >= 0.9", rep.r2 >= 0.9, num(rep.r2));
        check("min I_{m+1}/I_m >= 1.5", rep.min_ratio >= 1.5, num(rep.min_ratio));
        for (const auto& r : rep.rows)
            check("I_" + std::to_string(r.m) + " >= c~^m m^-3 / 8", r.log10_Im >= r.log10_bound_ctilde);
    } else {
        throw usage_error("unknown study '" + kind + "' (deep-growth, deep-rate, mhaskar-growth)");
    }
    return check.failed == 0 ? exit_ok : exit_fail;
}

int cmd_eval(const Params& p) {
    std::ifstream is(p.construction);
    if (!is) throw usage_error("cannot open network file " + p.construction);
    Network net = read_network(is);
    std::string line;
    std::cout.precision(17);
    while (std::getline(std::cin, line)) {
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ls(line);
        std::vector<double> x;
        double v;
        while (ls >> v) x.push_back(v);
        if (!ls.eof()) throw usage_error("malformed input line: " + line);
        if (x.empty()) continue;
        auto y = evaluate(net, x);
        for (std::size_t i = 0; i < y.size(); ++i) std::cout << (i ? " " : "") << y[i];
        std::cout << '\n';
    }
    return exit_ok;
}

void add_options(CLI::App* sub, Params& p, bool study) {
    sub->add_option("--config", p.config, "JSON config file; flags win");
    sub->add_option("--seed", p.seed, "random seed (RELUFORGE_SEED overrides the config file)");
    sub->add_option("--threads", p.threads, "worker threads for grid sweeps");
    sub->add_option("--d", p.d, "input dimension");
    sub->add_option("--n", p.N, "width budget N");
    sub->add_option("--l", p.L, "depth budget L");
    sub->add_option("--q", p.q, "smoothness order");
    sub->add_option("--target", p.target, "target function: constant linear square sine product");
    sub->add_option("--constant", p.constant, "value of the constant target");
    sub->add_option("--resolution", p.resolution, "grid points per axis");
    sub->add_option("--act", p.act, "smooth activation: gaussian or logistic");
    sub->add_option("--csv", p.csv, "CSV report path (stdout if absent)");
    if (study) {
        sub->add_option("--n-list", p.n_list, "N values")->delimiter(',');
        sub->add_option("--l-list", p.l_list, "L values")->delimiter(',');
        sub->add_option("--m-list", p.m_list, "m values")->delimiter(',');
        sub->add_flag("--timing", p.timing, "write measured runtimes instead of NA");
        sub->add_option("--growth-slack", p.growth_slack, "allowance on growth exponents");
        sub->add_option("--rate-slack", p.rate_slack, "allowance on error rates");
        return;
    }
    sub->add_option("--c", p.c, "trifling parameter c, delta = 1/((c+1)K)");
    sub->add_option("--delta", p.delta, "trifling width; must equal 1/((c+1)K)");
    sub->add_option("--s", p.s, "point-fitter order");
    sub->add_option("--k", p.k, "number of factors");
    sub->add_option("--m", p.m, "number of blocks");
    sub->add_option("--inner", p.inner, "interior points per block");
    sub->add_option("--count", p.count, "intervals of an equidistant grid");
    sub->add_option("--r", p.R, "grid density R");
    sub->add_option("--x0", p.x0, "first grid point");
    sub->add_option("--grid", p.grid, "equi or inequi");
    sub->add_option("--a", p.a, "lower end of the product domain");
    sub->add_option("--b", p.b, "upper end of the product domain");
    sub->add_option("--targets", p.targets, "interpolation targets or fitted values")->delimiter(',');
    sub->add_option("--bits", p.bits, "bit matrix, row major")->delimiter(',');
    sub->add_option("--alpha", p.alpha, "multi-index")->delimiter(',');
    sub->add_option("--out", p.out, "network output path");
}

// Fills options not given on the command line from the JSON config; unknown keys are rejected.
void apply_config(CLI::App* sub, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw usage_error("cannot open config " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw usage_error(std::string("malformed config: ") + e.what());
    }
    if (!j.is_object()) throw usage_error("config must be a JSON object");
    std::set<std::string> known;
    for (auto* opt : sub->get_options()) {
        std::string name = opt->get_single_name();
        known.insert(name);
        if (!j.contains(name) || opt->count() > 0 || name == "config") continue;
        std::vector<std::string> vals;
        auto text = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        if (j[name].is_array())
            for (const auto& v : j[name]) vals.push_back(text(v));
        else
            vals.push_back(text(j[name]));
        opt->add_result(vals);
        opt->run_callback();
    }
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw usage_error("unknown config key '" + key + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explicit ReLU network constructions, verification and growth studies"};
    app.require_subcommand(1);
    Params p;
    auto* build = app.add_subcommand("build", "build a construction and write the network");
    build->add_option("construction", p.construction, construction_list)->required();
    add_options(build, p, false);
    auto* verify = app.add_subcommand("verify", "check the stated properties of a construction");
    verify->add_option("construction", p.construction, construction_list)->required();
    add_options(verify, p, false);
    auto* study = app.add_subcommand("study", "growth and rate studies");
    study->add_option("kind", p.construction, "deep-growth deep-rate mhaskar-growth")->required();
    add_options(study, p, true);
    auto* eval = app.add_subcommand("eval", "evaluate a serialized network on points read from stdin");
    eval->add_option("network", p.construction, "network JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return finish(exit_ok);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return finish(exit_usage);
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (sub != eval) {
            auto* seed_opt = sub->get_option("--seed");
            bool seed_flag = seed_opt->count() > 0;
            if (!p.config.empty()) apply_config(sub, p.config);
            if (const char* env = std::getenv("RELUFORGE_SEED"); env && !seed_flag) {
                try {
                    p.seed = std::stoull(env);
                } catch (const std::exception&) {
                    throw usage_error("RELUFORGE_SEED must be a natural number");
                }
            }
        }
        if (sub == build) return finish(cmd_build(p));
        if (sub == verify) return finish(cmd_verify(p));
        if (sub == study) return finish(cmd_study(p));
        return finish(cmd_eval(p));
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << '\n' << app.help();
        return finish(exit_usage);
    } catch (const precondition_error& e) {
        std::cerr << "invalid parameters: " << e.what() << '\n';
        return finish(exit_usage);
    } catch (const dimension_error& e) {
        std::cerr << "invalid parameters: " << e.what() << '\n';
        return finish(exit_usage);
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return finish(exit_fail);
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return finish(exit_fail);
    }
}
