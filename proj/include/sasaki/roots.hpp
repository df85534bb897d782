#pragma once

#include "sasaki/linalg.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sasaki {

/// Weyl group element: exact matrix acting on covectors (coordinates of
/// a^*) plus its induced action on vectors (inverse transpose).
struct WeylElement {
    Mat on_dual;   // action on a^*
    Mat on_space;  // action on a
};

/// The algebraic input: root data, Weyl group, center/semisimple split,
/// lattice and scalar product. Immutable once built.
struct GroupDatum {
    std::size_t rank = 0;              // r + 1
    std::vector<Vec> positive_roots;   // in a^*
    std::vector<Vec> simple_roots;     // subset of positive_roots
    Vec sigma;                         // half sum of positive roots
    std::vector<Vec> fundamental_weights; // one per simple root, in span of simple roots
    std::vector<WeylElement> weyl;
    std::vector<Vec> center_basis;     // a_z, vectors in a
    std::vector<Vec> semisimple_basis; // a_ss, vectors in a
    std::vector<Vec> lattice_basis;    // basis of N in a
    Mat gram;                          // scalar product on a^*
    Mat gram_inv;
    long n = 0;                        // complex dimension of G is n+1

    Rational pair_dual(const Vec& y, const Vec& z) const { return dot(y, mat_vec(gram, z)); }

    /// Gram-sharp: covector to vector.
    Vec sharp(const Vec& y) const { return mat_vec(gram, y); }

    std::size_t num_positive_roots() const { return positive_roots.size(); }
};

namespace detail {

inline Mat reflection_matrix(const Vec& alpha, const Mat& gram) {
    const std::size_t n = alpha.size();
    const Vec g_alpha = mat_vec(gram, alpha);
    const Rational norm2 = dot(alpha, g_alpha);
    if (norm2 == 0) throw Error("reflection through a Gram-null root");
    Mat m = identity_mat(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m[i][j] -= 2 * alpha[i] * g_alpha[j] / norm2;
    return m;
}

} // namespace detail

/// Closure of the simple reflections under composition. The size cap (10!)
/// turns non-root-system input into an error instead of a hang.
inline std::vector<Mat> generate_weyl(const std::vector<Vec>& simple_roots, const Mat& gram) {
    constexpr std::size_t kSizeCap = 3628800; // 10!
    std::vector<Mat> gens;
    gens.reserve(simple_roots.size());
    for (const auto& alpha : simple_roots) {
        if (is_zero(alpha)) throw Error("zero simple root");
        gens.push_back(detail::reflection_matrix(alpha, gram));
    }
    {
        Mat span;
        for (const auto& a : simple_roots) span.push_back(a);
        if (rank(span) != simple_roots.size())
            throw Error("simple roots are linearly dependent");
    }
    const std::size_t n = gram.size();
    std::set<Mat> seen;
    seen.insert(identity_mat(n));
    std::vector<Mat> queue{identity_mat(n)};
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const Mat current = queue[head];
        for (const auto& g : gens) {
            Mat next = mat_mul(g, current);
            if (seen.insert(next).second) {
                queue.push_back(std::move(next));
                if (seen.size() > kSizeCap)
                    throw Error("Weyl closure exceeded 10! elements; input is not a root system");
            }
        }
    }
    std::vector<Mat> out(seen.begin(), seen.end());
    return out;
}

/// pi(v) = prod over positive roots of <alpha, v>^2. Vanishes exactly on
/// the Weyl walls.
inline Rational weight_pi(const Vec& v, const GroupDatum& datum) {
    Rational p(1);
    for (const auto& alpha : datum.positive_roots) {
        const Rational t = datum.pair_dual(alpha, v);
        p *= t * t;
    }
    return p;
}

struct XiMembership {
    bool in_relative_interior = false;
    Vec coeffs;           // coordinates over the simple roots
    Vec residual;         // v minus its projection to span(simple roots)
    Rational residual_norm2{0};
    Rational margin{0};   // min coefficient (0 when no simple roots)
};

/// Decomposes v over the simple roots plus a Gram-orthogonal residual and
/// decides membership in Xi, the relative interior of the cone spanned by
/// the positive roots. With an empty root system Xi degenerates to {0}.
inline XiMembership xi_membership(const Vec& v, const GroupDatum& datum) {
    XiMembership result;
    const auto& simple = datum.simple_roots;
    if (simple.empty()) {
        result.residual = v;
        result.residual_norm2 = datum.pair_dual(v, v);
        result.in_relative_interior = is_zero(v);
        return result;
    }
    const std::size_t k = simple.size();
    Mat a = zero_mat(k, k);
    Vec b = zero_vec(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) a[i][j] = datum.pair_dual(simple[i], simple[j]);
        b[i] = datum.pair_dual(simple[i], v);
    }
    const auto coeffs = solve(a, b);
    if (!coeffs) throw Error("xi_membership: Gram matrix of simple roots is singular");
    result.coeffs = *coeffs;
    Vec proj = zero_vec(v.size());
    for (std::size_t i = 0; i < k; ++i) proj = add(proj, scale(result.coeffs[i], simple[i]));
    result.residual = sub(v, proj);
    result.residual_norm2 = datum.pair_dual(result.residual, result.residual);
    bool positive = true;
    result.margin = result.coeffs[0];
    for (const auto& c : result.coeffs) {
        positive = positive && c > 0;
        result.margin = std::min(result.margin, c);
    }
    result.in_relative_interior = positive && is_zero(result.residual);
    return result;
}

struct GroupDatumInput {
    std::size_t rank = 0;
    std::vector<Vec> positive_roots;
    std::vector<Vec> center_basis;
    std::optional<std::vector<Vec>> lattice_basis; // defaults to the standard basis
    std::optional<Mat> gram;                       // defaults to the identity
};

/// Builds and validates the full algebraic datum: simple roots, sigma,
/// fundamental weights, Weyl group and the center/semisimple split.
/// Cartan-integrality failures are errors, not warnings.
inline GroupDatum build_group_datum(const GroupDatumInput& input) {
    GroupDatum d;
    d.rank = input.rank;
    if (d.rank == 0) throw Error("group.rank must be positive");
    d.gram = input.gram.value_or(identity_mat(d.rank));
    if (d.gram.size() != d.rank) throw Error("group.gram has wrong dimension");
    for (std::size_t i = 0; i < d.rank; ++i)
        for (std::size_t j = 0; j < d.rank; ++j)
            if (d.gram[i][j] != d.gram[j][i]) throw Error("group.gram is not symmetric");
    { // positive-definiteness via leading minors
        for (std::size_t k = 1; k <= d.rank; ++k) {
            Mat minor = zero_mat(k, k);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) minor[i][j] = d.gram[i][j];
            if (det(minor) <= 0) throw Error("group.gram is not positive-definite");
        }
    }
    d.gram_inv = *inverse(d.gram);

    d.positive_roots = input.positive_roots;
    for (const auto& alpha : d.positive_roots) {
        if (alpha.size() != d.rank) throw Error("root has wrong dimension");
        if (is_zero(alpha)) throw Error("zero vector listed as a positive root");
    }
    // Cartan integrality over all root pairs (both signs give the same set)
    for (const auto& a : d.positive_roots)
        for (const auto& b : d.positive_roots) {
            const Rational c = 2 * d.pair_dual(a, b) / d.pair_dual(b, b);
            if (denominator(c) != 1)
                throw Error("Cartan pairing 2<a,b>/<b,b> is not an integer for the given roots");
        }

    // simple roots: positive roots not a sum of two positive roots
    for (const auto& alpha : d.positive_roots) {
        bool decomposable = false;
        for (const auto& b : d.positive_roots)
            for (const auto& c : d.positive_roots)
                if (add(b, c) == alpha) decomposable = true;
        if (!decomposable) d.simple_roots.push_back(alpha);
    }
    // every positive root must be a nonnegative integer combination of the
    // simple ones; a cheap necessary check: membership in their span
    {
        Mat span;
        for (const auto& a : d.simple_roots) span.push_back(a);
        for (const auto& alpha : d.positive_roots) {
            Mat test = span;
            test.push_back(alpha);
            if (rank(test) != rank(span)) throw Error("positive root outside the span of simple roots");
        }
    }

    d.sigma = zero_vec(d.rank);
    for (const auto& alpha : d.positive_roots) d.sigma = add(d.sigma, alpha);
    d.sigma = scale(Rational(1, 2), d.sigma);

    // fundamental weights inside span(simple roots): 2<w_i,a_j>/|a_j|^2 = delta_ij
    const std::size_t k = d.simple_roots.size();
    if (k > 0) {
        Mat cartan = zero_mat(k, k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                cartan[i][j] = 2 * d.pair_dual(d.simple_roots[i], d.simple_roots[j]) /
                               d.pair_dual(d.simple_roots[j], d.simple_roots[j]);
        for (std::size_t i = 0; i < k; ++i) {
            Vec rhs = zero_vec(k);
            rhs[i] = 1;
            const auto coeff = solve(transpose(cartan), rhs);
            if (!coeff) throw Error("Cartan matrix is singular");
            Vec w = zero_vec(d.rank);
            for (std::size_t j = 0; j < k; ++j) w = add(w, scale((*coeff)[j], d.simple_roots[j]));
            d.fundamental_weights.push_back(std::move(w));
        }
    }

    const auto weyl_mats = generate_weyl(d.simple_roots, d.gram);
    d.weyl.reserve(weyl_mats.size());
    for (const auto& m : weyl_mats) {
        const auto inv = inverse(m);
        if (!inv) throw Error("singular Weyl matrix");
        d.weyl.push_back(WeylElement{m, transpose(*inv)});
    }
    // each Weyl element must permute the roots up to sign
    for (const auto& w : d.weyl)
        for (const auto& alpha : d.positive_roots) {
            const Vec image = mat_vec(w.on_dual, alpha);
            bool hit = false;
            for (const auto& beta : d.positive_roots)
                if (image == beta || image == scale(Rational(-1), beta)) hit = true;
            if (!hit) throw Error("Weyl group does not permute the given positive roots up to sign");
        }

    d.center_basis = input.center_basis;
    for (const auto& z : d.center_basis) {
        if (z.size() != d.rank) throw Error("center basis vector has wrong dimension");
        for (const auto& alpha : d.positive_roots)
            if (dot(alpha, z) != 0) throw Error("center basis vector is not annihilated by all roots");
    }
    {
        Mat span;
        for (const auto& z : d.center_basis) span.push_back(z);
        if (rank(span) != d.center_basis.size()) throw Error("center basis is linearly dependent");
        if (d.center_basis.size() + k != d.rank)
            throw Error("dim(center) + #simple roots must equal the rank");
    }
    // a_ss = span of the sharps of the simple roots; orthogonal to a_z by
    // construction since alpha(z) = 0
    for (const auto& alpha : d.simple_roots) d.semisimple_basis.push_back(d.sharp(alpha));

    d.lattice_basis = input.lattice_basis.value_or([&] {
        std::vector<Vec> std_basis;
        for (std::size_t i = 0; i < d.rank; ++i) {
            Vec e = zero_vec(d.rank);
            e[i] = 1;
            std_basis.push_back(std::move(e));
        }
        return std_basis;
    }());
    {
        Mat lat;
        for (const auto& v : d.lattice_basis) lat.push_back(v);
        if (lat.size() != d.rank || rank(lat) != d.rank)
            throw Error("lattice basis must be a basis of a");
    }

    d.n = static_cast<long>(d.rank + 2 * d.positive_roots.size()) - 1;
    return d;
}

/// Coordinates of a vector x in the lattice basis.
inline Vec lattice_coordinates(const GroupDatum& datum, const Vec& x) {
    Mat basis_cols = transpose([&] {
        Mat rows;
        for (const auto& b : datum.lattice_basis) rows.push_back(b);
        return rows;
    }());
    const auto sol = solve(basis_cols, x);
    if (!sol) throw Error("vector outside the lattice span");
    return *sol;
}

} // namespace sasaki
