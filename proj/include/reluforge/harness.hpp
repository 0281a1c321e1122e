#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "assembly.hpp"
#include "fit.hpp"
#include "network.hpp"

namespace reluforge {

struct SweepSpec {
    std::string target = "square";
    std::size_t resolution = 10001;  // points per axis, endpoints included
    bool exclude_trifling = false;
    std::vector<std::pair<std::size_t, std::size_t>> NL;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    void validate() const {
        require(resolution >= 2, "SweepSpec: resolution must be at least 2");
        require(threads >= 1, "SweepSpec: threads must be positive");
    }
};

// Uniform lattice point number idx of [0,1]^d with res points per axis; first coordinate fastest.
inline void lattice_point(std::size_t idx, std::size_t d, std::size_t res, std::vector<double>& x) {
    x.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        x[j] = static_cast<double>(idx % res) / static_cast<double>(res - 1);
        idx /= res;
    }
}

inline std::size_t lattice_size(std::size_t d, std::size_t res) {
    std::size_t n = 1;
    for (std::size_t j = 0; j < d; ++j) n *= res;
    return n;
}

struct SupErrorResult {
    double sup = 0.0;
    std::size_t evaluated = 0;
    std::size_t excluded = 0;
    std::vector<double> argmax;
};

// max |net(x) - f(x)| over the lattice, optionally skipping the open trifling strips.
// Chunks are reduced in index order with ties kept at the lowest index, so the result is thread-count invariant.
inline SupErrorResult sup_error(const Network& net, const std::function<double(std::span<const double>)>& f, std::size_t d,
                                std::size_t resolution, const std::optional<TriflingRegion>& exclude = std::nullopt,
                                std::size_t threads = 1) {
    require(resolution >= 2, "sup_error: resolution must be at least 2");
    if (net.input_dim() != d || net.output_dim() != 1)
        throw dimension_error("sup_error: network must map R^" + std::to_string(d) + " to R");
    const std::size_t total = lattice_size(d, resolution);
    threads = std::max<std::size_t>(1, std::min(threads, total));
    struct Part {
        double sup = -1.0;
        std::size_t arg = 0, evaluated = 0, excluded = 0;
    };
    std::vector<Part> parts(threads);
    auto work = [&](std::size_t t) {
        std::size_t lo = total * t / threads, hi = total * (t + 1) / threads;
        std::vector<double> x;
        Part& p = parts[t];
        for (std::size_t i = lo; i < hi; ++i) {
            lattice_point(i, d, resolution, x);
            if (exclude && exclude->contains(x)) {
                ++p.excluded;
                continue;
            }
            ++p.evaluated;
            double e = std::abs(evaluate_scalar(net, x) - f(x));
            if (std::isnan(e)) e = std::numeric_limits<double>::infinity();
            if (e > p.sup) {
                p.sup = e;
                p.arg = i;
            }
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    SupErrorResult r;
    Part best;
    for (const auto& p : parts) {
        r.evaluated += p.evaluated;
        r.excluded += p.excluded;
        if (p.sup > best.sup) best = p;
    }
    r.sup = std::max(best.sup, 0.0);
    if (r.evaluated > 0) lattice_point(best.arg, d, resolution, r.argmax);
    return r;
}

inline SupErrorResult sup_error(const Network& net, const FunctionOracle& f, const SweepSpec& spec,
                                const std::optional<TriflingRegion>& region = std::nullopt) {
    spec.validate();
    if (spec.exclude_trifling && !region) throw precondition_error("sup_error: exclusion requested without a trifling region");
    return sup_error(net, f.value, f.d, spec.resolution, spec.exclude_trifling ? region : std::nullopt, spec.threads);
}

struct GrowthRow {
    std::size_t N = 0;
    std::size_t L = 0;
    std::size_t width = 0;
    std::size_t depth = 0;
    double param_sup = 0.0;
    double sup_error = 0.0;
    double runtime = 0.0;  // seconds
};

struct GrowthReport {
    std::vector<GrowthRow> rows;
    std::optional<LinearFit> param_vs_N;  // ln param_sup against ln N at the most populated fixed L
    std::optional<LinearFit> param_vs_L;  // ln param_sup against ln L at the most populated fixed N
    std::optional<LinearFit> error_vs_N;  // ln sup_error against ln N at the most populated fixed L
    std::optional<LinearFit> error_vs_NL; // ln sup_error against ln(N L) over all rows
    std::size_t fixed_L = 0;
    std::size_t fixed_N = 0;

    // Runtime is written as NA unless requested, keeping reports byte-identical across runs.
    void write_csv(std::ostream& os, bool with_runtime = false) const {
        os << "N,L,width,depth,param_sup,sup_error,runtime\n";
        char buf[64];
        auto num = [&](double v) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        for (const auto& r : rows)
            os << r.N << ',' << r.L << ',' << r.width << ',' << r.depth << ',' << num(r.param_sup) << ',' << num(r.sup_error) << ','
               << (with_runtime ? num(r.runtime) : std::string("NA")) << '\n';
    }
};

namespace detail {

inline std::optional<LinearFit> try_fit(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<std::pair<double, double>> ok;
    for (const auto& p : pairs)
        if (p.second > 0.0 && std::isfinite(p.second)) ok.push_back(p);
    std::map<double, int> distinct;
    for (const auto& p : ok) distinct[p.first]++;
    if (ok.size() < 3 || distinct.size() < 2) return std::nullopt;
    return fit_loglog(ok);
}

}  // namespace detail

inline void fit_growth(GrowthReport& rep) {
    std::map<std::size_t, int> byL, byN;
    for (const auto& r : rep.rows) {
        byL[r.L]++;
        byN[r.N]++;
    }
    auto most = [](const std::map<std::size_t, int>& m) {
        std::size_t key = 0;
        int best = 0;
        for (const auto& [k, c] : m)
            if (c > best) {
                best = c;
                key = k;
            }
        return key;
    };
    rep.fixed_L = most(byL);
    rep.fixed_N = most(byN);
    std::vector<std::pair<double, double>> pn, pl, en, enl;
    for (const auto& r : rep.rows) {
        if (r.L == rep.fixed_L) {
            pn.emplace_back(static_cast<double>(r.N), r.param_sup);
            en.emplace_back(static_cast<double>(r.N), r.sup_error);
        }
        if (r.N == rep.fixed_N) pl.emplace_back(static_cast<double>(r.L), r.param_sup);
        enl.emplace_back(static_cast<double>(r.N * r.L), r.sup_error);
    }
    rep.param_vs_N = detail::try_fit(pn);
    rep.param_vs_L = detail::try_fit(pl);
    rep.error_vs_N = detail::try_fit(en);
    rep.error_vs_NL = detail::try_fit(enl);
}

// Builds, profiles and sweeps each (N, L); rows sorted by (N, L).
inline GrowthReport run_growth_study(const std::function<Network(std::size_t, std::size_t)>& family, const FunctionOracle& f,
                                     const SweepSpec& spec) {
    spec.validate();
    require(!spec.NL.empty(), "run_growth_study: empty (N, L) list");
    auto list = spec.NL;
    std::sort(list.begin(), list.end());
    GrowthReport rep;
    for (const auto& [N, L] : list) {
        auto t0 = std::chrono::steady_clock::now();
        Network net = family(N, L);
        auto p = profile(net);
        auto err = sup_error(net, f.value, f.d, spec.resolution, std::nullopt, spec.threads);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rep.rows.push_back({N, L, p.width, p.depth, p.param_sup, err.sup, secs});
    }
    fit_growth(rep);
    return rep;
}

}  // namespace reluforge
