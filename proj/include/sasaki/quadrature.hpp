#pragma once

#include "sasaki/polytope.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace sasaki {

/// Number of worker threads: the SASAKI_CONE_THREADS environment variable,
/// else 1. Reductions are always performed in a fixed order, so results are
/// byte-identical for any thread count.
inline unsigned worker_threads() {
    if (const char* env = std::getenv("SASAKI_CONE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return 1;
}

/// Runs fn(i) for i in [0, n) on worker threads; fn must only write to its
/// own index-addressed slots.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned threads = std::min<std::size_t>(worker_threads(), n ? n : 1);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Chart simplex with double coordinates, for the numerical paths.
struct SimplexD {
    std::vector<std::vector<double>> vertices;

    std::size_t dim() const { return vertices.empty() ? 0 : vertices.size() - 1; }

    double volume() const {
        const std::size_t d = dim();
        if (d == 0) return 1.0;
        std::vector<std::vector<double>> m(d, std::vector<double>(d));
        for (std::size_t j = 1; j <= d; ++j)
            for (std::size_t i = 0; i < d; ++i) m[j - 1][i] = vertices[j][i] - vertices[0][i];
        double det = 1.0, sign = 1.0;
        for (std::size_t c = 0; c < d; ++c) {
            std::size_t p = c;
            for (std::size_t i = c + 1; i < d; ++i)
                if (std::fabs(m[i][c]) > std::fabs(m[p][c])) p = i;
            if (m[p][c] == 0.0) return 0.0;
            if (p != c) { std::swap(m[p], m[c]); sign = -sign; }
            det *= m[c][c];
            for (std::size_t i = c + 1; i < d; ++i) {
                const double f = m[i][c] / m[c][c];
                for (std::size_t j = c; j < d; ++j) m[i][j] -= f * m[c][j];
            }
        }
        double fact = 1.0;
        for (std::size_t k = 2; k <= d; ++k) fact *= static_cast<double>(k);
        return std::fabs(det * sign) / fact;
    }
};

inline SimplexD to_double_simplex(const Simplex& s) {
    SimplexD d;
    d.vertices.reserve(s.vertices.size());
    for (const auto& v : s.vertices) {
        std::vector<double> p(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) p[i] = to_double(v[i]);
        d.vertices.push_back(std::move(p));
    }
    return d;
}

/// Grundmann-Moller simplex rule of index s: exact for polynomials of
/// degree 2s+1, with rational weights evaluated here in double precision.
struct SimplexRule {
    std::vector<std::vector<double>> barycentric;
    std::vector<double> weights; // relative to the simplex volume
    unsigned exact_degree = 1;
};

namespace detail {

inline void enumerate_compositions(unsigned total, std::size_t slots, std::vector<unsigned>& current,
                                   const std::function<void(const std::vector<unsigned>&)>& fn) {
    if (current.size() + 1 == slots) {
        current.push_back(total);
        fn(current);
        current.pop_back();
        return;
    }
    for (unsigned v = 0; v <= total; ++v) {
        current.push_back(v);
        enumerate_compositions(total - v, slots, current, fn);
        current.pop_back();
    }
}

} // namespace detail

inline SimplexRule grundmann_moller_rule(std::size_t dim, unsigned index) {
    SimplexRule rule;
    rule.exact_degree = 2 * index + 1;
    const unsigned d = static_cast<unsigned>(dim);
    for (unsigned i = 0; i <= index; ++i) {
        const unsigned denom = 2 * index + d + 1 - 2 * i; // odd, positive
        Rational w = rational_pow(Rational(denom), 2 * index + 1);
        Rational f(1);
        for (unsigned k = 2; k <= i; ++k) f *= k;
        Integer g(1);
        for (unsigned k = 2; k <= 2 * index + d + 1 - i; ++k) g *= k;
        w /= f * Rational(g);
        w /= rational_pow(Rational(2), 2 * index);
        if (i % 2 == 1) w = -w;
        Integer dfact(1);
        for (unsigned k = 2; k <= d; ++k) dfact *= k;
        w *= Rational(dfact);
        const double wd = to_double(w);
        std::vector<unsigned> scratch;
        detail::enumerate_compositions(index - i, dim + 1, scratch, [&](const std::vector<unsigned>& k) {
            std::vector<double> bary(dim + 1);
            for (std::size_t j = 0; j <= dim; ++j)
                bary[j] = static_cast<double>(2 * k[j] + 1) / static_cast<double>(denom);
            rule.barycentric.push_back(std::move(bary));
            rule.weights.push_back(wd);
        });
    }
    return rule;
}

inline double apply_rule(const SimplexRule& rule, const SimplexD& s,
                         const std::function<double(const std::vector<double>&)>& f) {
    const std::size_t d = s.dim();
    const double vol = s.volume();
    double acc = 0.0;
    std::vector<double> point(d);
    for (std::size_t q = 0; q < rule.barycentric.size(); ++q) {
        for (std::size_t i = 0; i < d; ++i) {
            double x = 0.0;
            for (std::size_t j = 0; j <= d; ++j) x += rule.barycentric[q][j] * s.vertices[j][i];
            point[i] = x;
        }
        acc += rule.weights[q] * f(point);
    }
    return acc * vol;
}

struct QuadratureResult {
    double value = 0.0;
    double error_bound = 0.0;
    bool converged = true;
    std::size_t evaluations = 0;
};

/// Optional edge metric for adaptive subdivision: defaults to Euclidean
/// length; exponential weights pass the exponent range along the edge so
/// the splits chase the peak.
using EdgeMetric = std::function<double(const std::vector<double>&, const std::vector<double>&)>;

namespace detail {

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
    double len = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double t = a[c] - b[c];
        len += t * t;
    }
    return std::sqrt(len);
}

inline void split_widest_edge(const SimplexD& s, const EdgeMetric& metric, SimplexD& a, SimplexD& b) {
    const std::size_t d = s.dim();
    std::size_t bi = 0, bj = 1;
    double best = -1.0;
    for (std::size_t i = 0; i <= d; ++i)
        for (std::size_t j = i + 1; j <= d; ++j) {
            const double len = metric ? metric(s.vertices[i], s.vertices[j])
                                      : euclid(s.vertices[i], s.vertices[j]);
            if (len > best) { best = len; bi = i; bj = j; }
        }
    std::vector<double> mid(d);
    for (std::size_t c = 0; c < d; ++c) mid[c] = 0.5 * (s.vertices[bi][c] + s.vertices[bj][c]);
    a = s;
    b = s;
    a.vertices[bj] = mid;
    b.vertices[bi] = mid;
}

} // namespace detail

/// Adaptive integration over a simplicial cover: a fixed-order symmetric
/// rule pair with dyadic longest-edge subdivision; the error estimate is
/// the order comparison. Deterministic for any thread count.
inline QuadratureResult integrate_adaptive(const std::vector<Simplex>& cover,
                                           const std::function<double(const std::vector<double>&)>& f,
                                           unsigned rule_index, double rel_tol, unsigned max_depth,
                                           const EdgeMetric& metric = nullptr) {
    QuadratureResult total;
    if (cover.empty()) return total;
    const std::size_t dim = cover[0].dim();
    const SimplexRule hi = grundmann_moller_rule(dim, rule_index);
    const SimplexRule lo = grundmann_moller_rule(dim, rule_index > 0 ? rule_index - 1 : 0);

    std::vector<SimplexD> cells;
    cells.reserve(cover.size());
    double scale = 0.0, vol_total = 0.0;
    for (const auto& s : cover) cells.push_back(to_double_simplex(s));
    for (const auto& c : cells) {
        scale += std::fabs(apply_rule(hi, c, f));
        vol_total += c.volume();
    }
    if (scale == 0.0) scale = 1.0;
    if (vol_total == 0.0) vol_total = 1.0;

    std::vector<QuadratureResult> partial(cells.size());
    parallel_for(cells.size(), [&](std::size_t i) {
        const double budget = rel_tol * scale * (cells[i].volume() / vol_total);
        detail::adaptive_recurse(hi, lo, cells[i], f, metric, std::max(budget, 1e-300), 0, max_depth,
                                 partial[i]);
    });
    for (const auto& p : partial) {
        total.value += p.value;
        total.error_bound += p.error_bound;
        total.converged = total.converged && p.converged;
        total.evaluations += p.evaluations;
    }
    return total;
}

/// Radical-inverse Halton sequence, one prime base per dimension.
inline double radical_inverse(unsigned base, unsigned long long index) {
    double result = 0.0, f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= base;
    }
    return result;
}

struct McEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    unsigned long long samples = 0;
};

/// Quasi-random estimate of an integral over a simplicial cover, stratified
/// by exact simplex volume. Uniform simplex points come from exponential
/// spacings of Halton coordinates.
inline McEstimate mc_integrate(const std::vector<Simplex>& cover,
                               const std::function<double(const std::vector<double>&)>& f,
                               unsigned long long samples) {
    static const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    McEstimate est;
    if (cover.empty() || samples == 0) return est;
    const std::size_t d = cover[0].dim();
    std::vector<SimplexD> cells;
    std::vector<double> vols;
    double vol_total = 0.0;
    for (const auto& s : cover) {
        cells.push_back(to_double_simplex(s));
        vols.push_back(cells.back().volume());
        vol_total += vols.back();
    }
    // largest-remainder allocation proportional to volume
    std::vector<unsigned long long> alloc(cells.size(), 0);
    {
        std::vector<std::pair<double, std::size_t>> rema;
        unsigned long long assigned = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const double share = static_cast<double>(samples) * vols[i] / vol_total;
            alloc[i] = static_cast<unsigned long long>(share);
            assigned += alloc[i];
            rema.push_back({share - static_cast<double>(alloc[i]), i});
        }
        std::sort(rema.begin(), rema.end(), [](auto& a, auto& b) { return a.first > b.first; });
        for (std::size_t j = 0; assigned < samples && j < rema.size(); ++j, ++assigned) ++alloc[rema[j].second];
    }

    struct Stratum { double mean = 0.0, m2 = 0.0; unsigned long long n = 0; };
    std::vector<Stratum> strata(cells.size());
    unsigned long long offset = 0;
    std::vector<unsigned long long> offsets(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) { offsets[i] = offset; offset += alloc[i]; }

    parallel_for(cells.size(), [&](std::size_t i) {
        Stratum st;
        std::vector<double> point(d), expo(d + 1);
        for (unsigned long long k = 0; k < alloc[i]; ++k) {
            const unsigned long long index = offsets[i] + k + 1;
            double sum = 0.0;
            for (std::size_t j = 0; j <= d; ++j) {
                const double u = std::min(std::max(radical_inverse(primes[j % 12], index), 1e-16), 1.0 - 1e-16);
                expo[j] = -std::log(u);
                sum += expo[j];
            }
            for (std::size_t c = 0; c < d; ++c) {
                double x = 0.0;
                for (std::size_t j = 0; j <= d; ++j) x += (expo[j] / sum) * cells[i].vertices[j][c];
                point[c] = x;
            }
            const double fx = f(point);
            ++st.n;
            const double delta = fx - st.mean;
            st.mean += delta / static_cast<double>(st.n);
            st.m2 += delta * (fx - st.mean);
        }
        strata[i] = st;
    });

    double var = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (strata[i].n == 0) continue;
        est.value += vols[i] * strata[i].mean;
        est.samples += strata[i].n;
        if (strata[i].n > 1) {
            const double sample_var = strata[i].m2 / static_cast<double>(strata[i].n - 1);
            var += vols[i] * vols[i] * sample_var / static_cast<double>(strata[i].n);
        }
    }
    est.standard_error = std::sqrt(var);
    return est;
}

} // namespace sasaki
