#pragma once

#include <cmath>
#include <cstdio>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "errors.hpp"
#include "fit.hpp"

namespace reluforge {

using Real = boost::multiprecision::cpp_bin_float_100;

// tau_{k,p}: T_k(y) = sum_p tau_{k,p} y^p with T_k(2 cos t) = cos(k t).
struct ChebTable {
    std::size_t max_k = 0;
    std::vector<std::vector<double>> tau;  // tau[k][p], p <= k

    double operator()(std::size_t k, std::size_t p) const { return p <= k ? tau.at(k).at(p) : 0.0; }

    double eval(std::size_t k, double y) const {
        double v = 0.0;
        for (std::size_t p = k + 1; p-- > 0;) v = v * y + tau[k][p];
        return v;
    }
};

// T_0 = 1, T_1 = y/2, T_{k+1} = y T_k - T_{k-1}.
inline ChebTable chebyshev_coeffs(std::size_t max_k) {
    ChebTable t;
    t.max_k = max_k;
    t.tau.push_back({1.0});
    if (max_k >= 1) t.tau.push_back({0.0, 0.5});
    for (std::size_t k = 1; k < max_k; ++k) {
        std::vector<double> next(k + 2, 0.0);
        for (std::size_t p = 0; p <= k; ++p) next[p + 1] += t.tau[k][p];
        for (std::size_t p = 0; p + 1 <= k; ++p) next[p] -= t.tau[k - 1][p];
        t.tau.push_back(std::move(next));
    }
    return t;
}

// pi^2/4 - arccos(t/2)^2 on [0, 2], zero on [-2, 0).
inline double special_f(double t) {
    require(t >= -2.0 && t <= 2.0, "special_f: argument outside [-2, 2]");
    if (t < 0.0) return 0.0;
    double a = std::acos(t / 2.0);
    return std::numbers::pi * std::numbers::pi / 4.0 - a * a;
}

// 2 pi periodic; pi^2/4 - t^2 on [-pi/2, pi/2], zero elsewhere in [-pi, pi].
inline double special_fstar(double t) {
    constexpr double pi = std::numbers::pi;
    double u = std::remainder(t, 2.0 * pi);
    if (std::abs(u) > pi / 2.0) return 0.0;
    return pi * pi / 4.0 - u * u;
}

// (1/2pi) int_{-pi}^{pi} fstar(t) exp(-ikt) dt, adaptive Gauss-Kronrod split at +-pi/2 and 0.
inline std::complex<double> fourier_coeff(const std::function<double(double)>& fstar, std::size_t k,
                                          double tolerance = 1e-10) {
    using boost::math::quadrature::gauss_kronrod;
    constexpr double pi = std::numbers::pi;
    const double kk = static_cast<double>(k);
    const double cuts[] = {-pi, -pi / 2.0, 0.0, pi / 2.0, pi};
    double re = 0.0, im = 0.0, err = 0.0;
    for (int i = 0; i < 4; ++i) {
        double e1 = 0.0, e2 = 0.0;
        re += gauss_kronrod<double, 61>::integrate([&](double t) { return fstar(t) * std::cos(kk * t); }, cuts[i], cuts[i + 1],
                                                   15, 1e-12, &e1);
        im -= gauss_kronrod<double, 61>::integrate([&](double t) { return fstar(t) * std::sin(kk * t); }, cuts[i], cuts[i + 1],
                                                   15, 1e-12, &e2);
        err += std::abs(e1) + std::abs(e2);
    }
    if (err / (2.0 * pi) > tolerance)
        throw numeric_error("fourier_coeff: quadrature did not reach tolerance for k = " + std::to_string(k));
    return {re / (2.0 * pi), im / (2.0 * pi)};
}

struct VkTable {
    std::size_t m = 0;
    std::vector<std::complex<double>> fhat;  // k = 0..2m
    std::vector<double> V;                   // k = 0..2m

    double min_abs() const {
        double v = std::numeric_limits<double>::infinity();
        for (double x : V) v = std::min(v, std::abs(x));
        return v;
    }
};

// Delayed-mean weights: fhat(0); 2 fhat(k) for k <= m; 2 (2m-k+1)/(m+1) fhat(k) for k > m.
inline double vk_weight(std::size_t k, std::size_t m) {
    if (k == 0) return 1.0;
    if (k <= m) return 2.0;
    return 2.0 * static_cast<double>(2 * m - k + 1) / static_cast<double>(m + 1);
}

inline VkTable vk_coeffs(const std::function<double(double)>& fstar, std::size_t m) {
    require(m >= 1, "vk_coeffs: m must be positive");
    VkTable t;
    t.m = m;
    for (std::size_t k = 0; k <= 2 * m; ++k) {
        t.fhat.push_back(fourier_coeff(fstar, k));
        t.V.push_back(vk_weight(k, m) * t.fhat.back().real());
    }
    return t;
}

enum class ActivationKind { gaussian, logistic };
enum class SignConvention {
    classical,  // logistic phi' = phi - phi^2
    negated     // logistic P_1(y) = y^2 - y
};

struct SmoothActivation {
    ActivationKind kind = ActivationKind::gaussian;
    double b = 0.41;
    double delta_smooth = 1.0;
    SignConvention sign = SignConvention::classical;

    static SmoothActivation gaussian() { return {ActivationKind::gaussian, 0.41, 1.0, SignConvention::classical}; }
    static SmoothActivation logistic() { return {ActivationKind::logistic, 0.5, 1.0, SignConvention::classical}; }
    std::string name() const { return kind == ActivationKind::gaussian ? "gaussian" : "logistic"; }
};

inline constexpr std::size_t max_derivative_order = 60;

namespace detail {

using Poly = std::vector<Real>;  // ascending coefficients

inline Real poly_eval(const Poly& c, const Real& x) {
    Real v = 0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
    return v;
}

inline Poly poly_derivative(const Poly& c) {
    Poly d(c.size() > 1 ? c.size() - 1 : 1, Real(0));
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<int>(i);
    return d;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, Real(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

// H_0 = 1, H_1 = 2x, H_{p+1} = 2x H_p - 2p H_{p-1}
inline std::vector<Poly> hermite_polys(std::size_t pmax) {
    std::vector<Poly> h{{Real(1)}};
    if (pmax >= 1) h.push_back({Real(0), Real(2)});
    for (std::size_t p = 1; p < pmax; ++p) {
        Poly next(p + 2, Real(0));
        for (std::size_t i = 0; i < h[p].size(); ++i) next[i + 1] += 2 * h[p][i];
        for (std::size_t i = 0; i < h[p - 1].size(); ++i) next[i] -= 2 * static_cast<int>(p) * h[p - 1][i];
        h.push_back(std::move(next));
    }
    return h;
}

// phi^(p) = P_p(phi), P_0(y) = y, P_1 = y - y^2 (classical) or y^2 - y, P_{p+1} = P_p' P_1
inline std::vector<Poly> logistic_polys(std::size_t pmax, SignConvention sign) {
    const int s = sign == SignConvention::classical ? 1 : -1;
    std::vector<Poly> P{{Real(0), Real(1)}};
    Poly p1{Real(0), Real(s), Real(-s)};
    if (pmax >= 1) P.push_back(p1);
    for (std::size_t p = 1; p < pmax; ++p) P.push_back(poly_mul(poly_derivative(P[p]), p1));
    return P;
}

inline Real activation_value(ActivationKind kind, const Real& x) {
    using boost::multiprecision::exp;
    return kind == ActivationKind::gaussian ? Real(exp(-x * x)) : Real(1 / (1 + exp(-x)));
}

}  // namespace detail

// phi^(p)(x) for p = 0..pmax.
inline std::vector<Real> activation_derivatives_mp(const SmoothActivation& act, std::size_t pmax, const Real& x) {
    if (pmax > max_derivative_order) throw precondition_error("activation_derivative: order exceeds guard of 60");
    Real phi = detail::activation_value(act.kind, x);
    std::vector<Real> out;
    if (act.kind == ActivationKind::gaussian) {
        auto H = detail::hermite_polys(pmax);
        for (std::size_t p = 0; p <= pmax; ++p) {
            Real v = detail::poly_eval(H[p], x) * phi;
            out.push_back(p % 2 == 1 ? Real(-v) : v);
        }
    } else {
        for (const auto& P : detail::logistic_polys(pmax, act.sign)) out.push_back(detail::poly_eval(P, phi));
    }
    return out;
}

inline Real activation_derivative_mp(const SmoothActivation& act, std::size_t p, const Real& x) {
    return activation_derivatives_mp(act, p, x).back();
}

inline double activation_derivative(const SmoothActivation& act, std::size_t p, double x) {
    return static_cast<double>(activation_derivative_mp(act, p, Real(x)));
}

// Shifts b by +0.007 until |phi^(p)(b)| > threshold for all p <= pmax.
inline SmoothActivation validated_activation(SmoothActivation act, std::size_t pmax, double threshold = 1e-300,
                                             int max_steps = 1000) {
    for (int step = 0; step < max_steps; ++step) {
        bool ok = true;
        for (const auto& v : activation_derivatives_mp(act, pmax, Real(act.b))) ok = ok && boost::multiprecision::abs(v) > threshold;
        if (ok) return act;
        act.b += 0.007;
    }
    throw numeric_error("validated_activation: no admissible b found");
}

struct DerivativeBoundRow {
    std::size_t p = 0;
    double grid_max = 0.0;
    double tail_bound = 0.0;
    double bound = 0.0;
    bool ok = false;
};

struct DerivativeAudit {
    ActivationKind kind = ActivationKind::gaussian;
    std::vector<DerivativeBoundRow> rows;          // gaussian: ||phi^(p)|| <= p!; logistic: alpha_{2m,0} rows
    std::vector<std::vector<double>> alpha;        // logistic: alpha[n][k] = sup_[0,1] |P_n^(k)|
    bool recursion_ok = true;                      // alpha_{n,k} <= 1/4 alpha_{n-1,k+1} + k alpha_{n-1,k} + k(k-1) alpha_{n-1,k-1}
    bool claim_ok = true;                          // alpha_{n,k} <= n!(n+1)!/(n-k+1)! 2^{k-n-1}
    double worst_recursion_slack = 0.0;

    bool ok() const {
        for (const auto& r : rows)
            if (!r.ok) return false;
        return recursion_ok && claim_ok;
    }
};

inline double factorial_d(std::size_t n) { return std::tgamma(static_cast<double>(n) + 1.0); }

// Gaussian: rows p = 0..p_max. Logistic: alpha table for n <= p_max, rows for even n = 2m.
inline DerivativeAudit derivative_bound_audit(const SmoothActivation& act, std::size_t p_max, std::size_t grid = 20001) {
    require(p_max <= 20, "derivative_bound_audit: p_max must be at most 20");
    DerivativeAudit a;
    a.kind = act.kind;
    if (act.kind == ActivationKind::gaussian) {
        auto H = detail::hermite_polys(p_max);
        for (std::size_t p = 0; p <= p_max; ++p) {
            std::vector<double> c;
            for (const auto& v : H[p]) c.push_back(static_cast<double>(v));
            const double X = 6.0 + std::sqrt(2.0 * static_cast<double>(p) + 1.0);
            DerivativeBoundRow r;
            r.p = p;
            for (std::size_t i = 0; i < grid; ++i) {
                double x = -X + 2.0 * X * static_cast<double>(i) / static_cast<double>(grid - 1);
                double h = 0.0;
                for (std::size_t j = c.size(); j-- > 0;) h = h * x + c[j];
                r.grid_max = std::max(r.grid_max, std::abs(h) * std::exp(-x * x));
            }
            // |x|^j e^{-x^2} decreases for |x| >= X since X^2 >= j/2
            for (std::size_t j = 0; j < c.size(); ++j) r.tail_bound += std::abs(c[j]) * std::pow(X, static_cast<double>(j));
            r.tail_bound *= std::exp(-X * X);
            r.bound = factorial_d(p);
            r.ok = r.grid_max <= r.bound && r.tail_bound <= r.bound;
            a.rows.push_back(r);
        }
        return a;
    }
    auto P = detail::logistic_polys(p_max, SignConvention::negated);
    auto sup01 = [grid](const detail::Poly& poly) {
        std::vector<double> c;
        for (const auto& v : poly) c.push_back(static_cast<double>(v));
        double m = 0.0;
        for (std::size_t i = 0; i < grid; ++i) {
            double x = static_cast<double>(i) / static_cast<double>(grid - 1), v = 0.0;
            for (std::size_t j = c.size(); j-- > 0;) v = v * x + c[j];
            m = std::max(m, std::abs(v));
        }
        return m;
    };
    // alpha[0][k] = delta_{k1}
    a.alpha.assign(p_max + 1, std::vector<double>(p_max + 3, 0.0));
    a.alpha[0][1] = 1.0;
    for (std::size_t n = 1; n <= p_max; ++n) {
        detail::Poly d = P[n];
        for (std::size_t k = 0; k <= n + 1; ++k) {
            a.alpha[n][k] = sup01(d);
            d = detail::poly_derivative(d);
        }
    }
    for (std::size_t n = 1; n <= p_max; ++n)
        for (std::size_t k = 0; k <= n + 1; ++k) {
            const double kk = static_cast<double>(k);
            double rhs = 0.25 * a.alpha[n - 1][k + 1] + kk * a.alpha[n - 1][k] + (k >= 1 ? kk * (kk - 1.0) * a.alpha[n - 1][k - 1] : 0.0);
            double tol = 1e-9 * std::max(1.0, rhs);
            if (a.alpha[n][k] > rhs + tol) a.recursion_ok = false;
            a.worst_recursion_slack = std::min(a.worst_recursion_slack, rhs - a.alpha[n][k]);
            double claim = factorial_d(n) * factorial_d(n + 1) / factorial_d(n - k + 1) * std::ldexp(1.0, static_cast<int>(k) - static_cast<int>(n) - 1);
            if (a.alpha[n][k] > claim * (1.0 + 1e-12)) a.claim_ok = false;
        }
    for (std::size_t n = 2; n <= p_max; n += 2) {
        DerivativeBoundRow r;
        r.p = n;
        r.grid_max = a.alpha[n][0];
        r.bound = factorial_d(n) / std::ldexp(1.0, static_cast<int>(n) + 1);
        r.ok = r.grid_max <= r.bound;
        a.rows.push_back(r);
    }
    return a;
}

struct LedgerEntry {
    std::size_t k = 0, p = 0, r = 0;
    Real coef;  // V_k tau_{k,p} (phi^(p)(b))^-1 h^-p (-1)^r binom(p, r)
    double log10_abs = 0.0;
    int sign = 0;
};

// x -> sum_j a_j phi(h j x + b), j = -2m..2m.
struct ShallowNet {
    SmoothActivation act;
    Real b;
    Real h;
    std::vector<int> inner;  // j
    std::vector<Real> outer;

    std::size_t width() const { return inner.size(); }

    Real evaluate_mp(const Real& x) const {
        Real s = 0;
        for (std::size_t i = 0; i < inner.size(); ++i) s += outer[i] * detail::activation_value(act.kind, h * inner[i] * x + b);
        return s;
    }
    double evaluate(double x) const { return static_cast<double>(evaluate_mp(Real(x))); }

    // max over |outer|, |h j|, |b|
    double param_sup() const {
        Real s = boost::multiprecision::abs(b);
        for (std::size_t i = 0; i < inner.size(); ++i) {
            s = std::max<Real>(s, boost::multiprecision::abs(outer[i]));
            s = std::max<Real>(s, boost::multiprecision::abs(h * inner[i]));
        }
        return static_cast<double>(s);
    }
};

struct MhaskarBuild {
    std::size_t m = 0;
    VkTable V;
    SmoothActivation act;  // after validation of b
    Real h;
    std::vector<LedgerEntry> ledger;
    ShallowNet net;

    double log10_max_coefficient() const {
        double v = -std::numeric_limits<double>::infinity();
        for (const auto& e : ledger) v = std::max(v, e.log10_abs);
        return v;
    }

    // triple sum evaluated term by term
    Real evaluate_ledger(const Real& x) const {
        const int K = static_cast<int>(2 * m);
        std::vector<Real> phi(static_cast<std::size_t>(2 * K + 1));
        for (int j = -K; j <= K; ++j) phi[static_cast<std::size_t>(j + K)] = detail::activation_value(act.kind, h * j * x + net.b);
        Real s = 0;
        for (const auto& e : ledger) s += e.coef * phi[static_cast<std::size_t>(2 * static_cast<int>(e.r) - static_cast<int>(e.p) + K)];
        return s;
    }

    void write_ledger_csv(std::ostream& os) const {
        os << "m,k,p,r,log10_abs_coef,sign\n";
        char buf[32];
        for (const auto& e : ledger) {
            std::snprintf(buf, sizeof buf, "%.17g", e.log10_abs);
            os << m << ',' << e.k << ',' << e.p << ',' << e.r << ',' << buf << ',' << e.sign << '\n';
        }
    }
};

inline double binom(std::size_t n, std::size_t k) {
    return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

// h = delta/(3m); ledger over 0 <= r <= p <= k <= 2m, merged by inner weight h(2r - p).
inline MhaskarBuild build_mhaskar(const VkTable& V, const SmoothActivation& activation) {
    const std::size_t m = V.m, K = 2 * m;
    require(m >= 1, "build_mhaskar: m must be positive");
    MhaskarBuild out;
    out.m = m;
    out.V = V;
    out.act = validated_activation(activation, K);
    out.h = Real(out.act.delta_smooth) / (3 * static_cast<int>(m));
    const Real b(out.act.b);
    auto tau = chebyshev_coeffs(K);
    auto dphi = activation_derivatives_mp(out.act, K, b);
    std::vector<Real> hp(K + 1);
    for (std::size_t p = 0; p <= K; ++p) hp[p] = boost::multiprecision::pow(out.h, -static_cast<int>(p));
    out.net.act = out.act;
    out.net.b = b;
    out.net.h = out.h;
    for (int j = -static_cast<int>(K); j <= static_cast<int>(K); ++j) {
        out.net.inner.push_back(j);
        out.net.outer.push_back(Real(0));
    }
    for (std::size_t k = 0; k <= K; ++k)
        for (std::size_t p = 0; p <= k; ++p)
            for (std::size_t r = 0; r <= p; ++r) {
                LedgerEntry e{k, p, r, Real(0), -std::numeric_limits<double>::infinity(), 0};
                Real c = Real(V.V[k]) * Real(tau(k, p)) / dphi[p] * hp[p] * Real(binom(p, r));
                if (r % 2 == 1) c = -c;
                e.coef = c;
                if (c != 0) {
                    e.log10_abs = static_cast<double>(boost::multiprecision::log10(boost::multiprecision::abs(c)));
                    e.sign = c > 0 ? 1 : -1;
                }
                out.ledger.push_back(e);
                out.net.outer[static_cast<std::size_t>(2 * static_cast<int>(r) - static_cast<int>(p) + static_cast<int>(K))] += c;
            }
    return out;
}

inline MhaskarBuild build_mhaskar(const std::function<double(double)>& fstar, std::size_t m, const SmoothActivation& act) {
    return build_mhaskar(vk_coeffs(fstar, m), act);
}

// log10 I_m by a direct scan of |V_k tau_{k,p} / phi^(p)(b)| h^-p binom(p, r); -inf when every V_k vanishes.
inline double log10_Im(const VkTable& V, const SmoothActivation& activation) {
    const std::size_t m = V.m, K = 2 * m;
    auto act = validated_activation(activation, K);
    const double log10h = std::log10(act.delta_smooth / (3.0 * static_cast<double>(m)));
    auto tau = chebyshev_coeffs(K);
    auto dphi = activation_derivatives_mp(act, K, Real(act.b));
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p <= K; ++p) {
        double ld = static_cast<double>(boost::multiprecision::log10(boost::multiprecision::abs(dphi[p])));
        for (std::size_t k = p; k <= K; ++k) {
            if (V.V[k] == 0.0 || tau(k, p) == 0.0) continue;
            for (std::size_t r = 0; r <= p; ++r) {
                double lb = (std::lgamma(p + 1.0) - std::lgamma(r + 1.0) - std::lgamma(p - r + 1.0)) / std::log(10.0);
                double v = std::log10(std::abs(V.V[k])) + std::log10(std::abs(tau(k, p))) - ld - static_cast<double>(p) * log10h + lb;
                best = std::max(best, v);
            }
        }
    }
    return best;
}

// c~ with (3m/delta)^{2m} / max_p |phi^(p)(b)| = Omega(m^{-1/2} c~^m).
inline double c_tilde(const SmoothActivation& act) {
    const double base = act.kind == ActivationKind::gaussian ? 3.0 * std::numbers::e / (2.0 * act.delta_smooth)
                                                             : 3.0 * std::numbers::e / act.delta_smooth;
    return base * base;
}

struct ImRow {
    std::size_t m = 0;
    double log10_Im = 0.0;
    double log10_bound_min_vk = 0.0;  // (1/2)(3m/delta)^{2m} (max_p |phi^(p)(b)|)^{-1} min_k |V_k|
    double log10_bound_ctilde = 0.0;  // (1/8) c~^m m^{-3}
    double min_abs_vk = 0.0;
};

struct ImReport {
    SmoothActivation act;
    std::vector<ImRow> rows;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double min_ratio = 0.0;  // min I_{m+1}/I_m

    void write_csv(std::ostream& os) const {
        os << "m,log10_Im,log10_lower_bound\n";
        for (const auto& r : rows) os << r.m << ',' << r.log10_Im << ',' << r.log10_bound_ctilde << '\n';
    }
};

inline ImRow im_row(const VkTable& V, const SmoothActivation& activation) {
    const std::size_t m = V.m, K = 2 * m;
    auto act = validated_activation(activation, K);
    ImRow row;
    row.m = m;
    row.log10_Im = log10_Im(V, act);
    row.min_abs_vk = V.min_abs();
    Real maxd = 0;
    for (const auto& v : activation_derivatives_mp(act, K, Real(act.b))) maxd = std::max<Real>(maxd, boost::multiprecision::abs(v));
    const double md = static_cast<double>(m);
    row.log10_bound_min_vk = std::log10(0.5) + 2.0 * md * std::log10(3.0 * md / act.delta_smooth) -
                             static_cast<double>(boost::multiprecision::log10(maxd)) + std::log10(row.min_abs_vk);
    row.log10_bound_ctilde = std::log10(1.0 / 8.0) + md * std::log10(c_tilde(act)) - 3.0 * std::log10(md);
    return row;
}

// I_m over m_range; fit of ln I_m against m, geometric ratio audit. Zero-coefficient rows are dropped.
inline ImReport measure_growth_Im(const std::function<double(double)>& fstar, const SmoothActivation& act,
                                  const std::vector<std::size_t>& m_range) {
    ImReport rep;
    rep.act = act;
    for (std::size_t m : m_range) {
        require(2 * m <= max_derivative_order, "measure_growth_Im: m beyond derivative guard");
        auto row = im_row(vk_coeffs(fstar, m), act);
        if (std::isfinite(row.log10_Im)) rep.rows.push_back(row);
    }
    if (rep.rows.size() >= 2) {
        std::vector<double> x, y;
        for (const auto& r : rep.rows) {
            x.push_back(static_cast<double>(r.m));
            y.push_back(r.log10_Im * std::log(10.0));
        }
        auto f = fit_linear(x, y);
        rep.slope = f.slope;
        rep.intercept = f.intercept;
        rep.r2 = f.r2;
        rep.min_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < rep.rows.size(); ++i)
            rep.min_ratio = std::min(rep.min_ratio, std::pow(10.0, rep.rows[i].log10_Im - rep.rows[i - 1].log10_Im));
    }
    return rep;
}

}  // namespace reluforge
