#include "sasaki/roots.hpp"
#include "sasaki/smith.hpp"

#include "doctest.h"

#include <random>

using namespace sasaki;

namespace {

Vec qv(std::initializer_list<long> xs) {
    Vec v;
    for (long x : xs) v.push_back(Rational(x));
    return v;
}

GroupDatum gl2_datum() {
    GroupDatumInput in;
    in.rank = 2;
    in.positive_roots = {qv({1, -1})};
    in.center_basis = {qv({1, 1})};
    return build_group_datum(in);
}

GroupDatum psl2xc2_datum() {
    GroupDatumInput in;
    in.rank = 3;
    in.positive_roots = {qv({1, 0, 0})};
    in.center_basis = {qv({0, 1, 0}), qv({0, 0, 1})};
    return build_group_datum(in);
}

// independent closure oracle: saturate under pairwise products
std::size_t closure_size(const std::vector<Mat>& gens, std::size_t dim) {
    std::set<Mat> all;
    all.insert(identity_mat(dim));
    for (const auto& g : gens) all.insert(g);
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<Mat> snapshot(all.begin(), all.end());
        for (const auto& a : snapshot)
            for (const auto& b : snapshot)
                if (all.insert(mat_mul(a, b)).second) grew = true;
    }
    return all.size();
}

} // namespace

TEST_CASE("weyl closure of A1 is the two-element group") {
    const auto w = generate_weyl({qv({1, -1})}, identity_mat(2));
    CHECK(w.size() == 2);
}

TEST_CASE("weyl closure sizes match the brute-force closure oracle") {
    // A2
    const std::vector<Vec> a2 = {qv({1, -1, 0}), qv({0, 1, -1})};
    const auto w_a2 = generate_weyl(a2, identity_mat(3));
    CHECK(w_a2.size() == 6);
    std::vector<Mat> gens_a2;
    for (const auto& alpha : a2) gens_a2.push_back(detail::reflection_matrix(alpha, identity_mat(3)));
    const std::size_t oracle_a2 = closure_size(gens_a2, 3);
    CHECK(oracle_a2 == w_a2.size());
    CHECK(oracle_a2 % w_a2.size() == 0);

    // A1 x A1
    const std::vector<Vec> a1a1 = {qv({1, -1, 0, 0}), qv({0, 0, 1, -1})};
    const auto w_a1a1 = generate_weyl(a1a1, identity_mat(4));
    CHECK(w_a1a1.size() == 4);
}

TEST_CASE("weyl elements form a group and act orthogonally") {
    const auto datum = gl2_datum();
    std::set<Mat> members;
    for (const auto& w : datum.weyl) members.insert(w.on_dual);
    for (const auto& a : datum.weyl) {
        // inverses present
        CHECK(members.count(transpose(a.on_space)) == 1);
        for (const auto& b : datum.weyl) CHECK(members.count(mat_mul(a.on_dual, b.on_dual)) == 1);
        // Gram-orthogonality: <wy, wz> = <y, z>
        const Mat g = datum.gram;
        CHECK(mat_mul(transpose(a.on_dual), mat_mul(g, a.on_dual)) == g);
    }
}

TEST_CASE("weight_pi values and wall vanishing") {
    const auto gl2 = gl2_datum();
    CHECK(weight_pi(qv({1, 0}), gl2) == Rational(1));
    CHECK(weight_pi(qv({1, 1}), gl2) == Rational(0)); // Weyl wall

    const auto big = psl2xc2_datum();
    CHECK(weight_pi(qv({2, 1, 1}), big) == Rational(4));
}

TEST_CASE("weight_pi is Weyl invariant") {
    const auto datum = psl2xc2_datum();
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> num(-9, 9);
    for (int trial = 0; trial < 30; ++trial) {
        Vec v = {Rational(num(rng), 3), Rational(num(rng), 2), Rational(num(rng), 5)};
        const Rational base = weight_pi(v, datum);
        for (const auto& w : datum.weyl) CHECK(weight_pi(mat_vec(w.on_dual, v), datum) == base);
    }
}

TEST_CASE("sigma pairs positively with simple roots; fundamental weights are dual") {
    for (const auto& datum : {gl2_datum(), psl2xc2_datum()}) {
        for (const auto& alpha : datum.simple_roots) CHECK(datum.pair_dual(datum.sigma, alpha) > 0);
        for (std::size_t i = 0; i < datum.fundamental_weights.size(); ++i)
            for (std::size_t j = 0; j < datum.simple_roots.size(); ++j) {
                const Rational val = 2 * datum.pair_dual(datum.fundamental_weights[i], datum.simple_roots[j]) /
                                     datum.pair_dual(datum.simple_roots[j], datum.simple_roots[j]);
                CHECK(val == (i == j ? Rational(1) : Rational(0)));
            }
    }
}

TEST_CASE("group dimension bookkeeping") {
    CHECK(gl2_datum().n == 3);
    CHECK(psl2xc2_datum().n == 4);
}

TEST_CASE("cartan integrality failures are errors") {
    GroupDatumInput in;
    in.rank = 2;
    in.positive_roots = {qv({1, 0}), Vec{Rational(1), Rational(1, 3)}};
    in.center_basis = {};
    CHECK_THROWS_AS(build_group_datum(in), Error);
}

TEST_CASE("smith normal form examples") {
    {
        const auto s = smith_normal_form({{1, 0}, {0, 1}});
        CHECK(s.divisors == std::vector<Integer>{1, 1});
    }
    {
        const auto s = smith_normal_form({{1, 1}, {0, 2}});
        CHECK(s.divisors == std::vector<Integer>{1, 2});
    }
    {
        // the full normal matrix of the rank-3 example cone: its row span is
        // the even-coordinate-sum sublattice, index 2
        const auto s = smith_normal_form({{0, -1, 1}, {0, 1, 1}, {-1, -1, 2}, {1, -1, 2}});
        CHECK(s.divisors == std::vector<Integer>{1, 1, 2});
    }
    {
        // the face pairs of the same cone are all unimodular
        for (const IntMat m : {IntMat{{0, -1, 1}, {-1, -1, 2}}, IntMat{{0, -1, 1}, {1, -1, 2}},
                               IntMat{{0, 1, 1}, {-1, -1, 2}}, IntMat{{0, 1, 1}, {1, -1, 2}}}) {
            const auto s = smith_normal_form(m);
            CHECK(s.divisors == std::vector<Integer>{1, 1});
        }
    }
}

TEST_CASE("smith normal form reconstructs exactly with unimodular transforms") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> entry(-6, 6);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t rows = 2 + trial % 3, cols = 2 + (trial / 3) % 3;
        IntMat m(rows, std::vector<Integer>(cols));
        for (auto& row : m)
            for (auto& x : row) x = entry(rng);
        const auto s = smith_normal_form(m);
        // U M V = D
        IntMat um(rows, std::vector<Integer>(cols, 0));
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                for (std::size_t k = 0; k < rows; ++k) um[i][j] += s.u[i][k] * m[k][j];
        IntMat umv(rows, std::vector<Integer>(cols, 0));
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                for (std::size_t k = 0; k < cols; ++k) umv[i][j] += um[i][k] * s.v[k][j];
        CHECK(umv == s.d);
        for (std::size_t i = 0; i + 1 < s.divisors.size(); ++i)
            CHECK(s.divisors[i + 1] % s.divisors[i] == 0);
        // unimodularity via rational determinants
        auto to_rat = [](const IntMat& im) {
            Mat r;
            for (const auto& row : im) {
                Vec v;
                for (const auto& x : row) v.push_back(Rational(x));
                r.push_back(v);
            }
            return r;
        };
        CHECK(rational_abs(det(to_rat(s.u))) == Rational(1));
        CHECK(rational_abs(det(to_rat(s.v))) == Rational(1));
    }
}

TEST_CASE("xi membership decomposition") {
    const auto gl2 = gl2_datum();
    {
        const auto m = xi_membership(Vec{Rational(1, 8), Rational(-1, 8)}, gl2);
        CHECK(m.in_relative_interior);
        CHECK(m.coeffs == Vec{Rational(1, 8)});
        CHECK(m.margin == Rational(1, 8));
    }
    {
        const auto m = xi_membership(qv({0, 0}), gl2);
        CHECK_FALSE(m.in_relative_interior); // apex excluded
    }
    {
        const auto m = xi_membership(qv({1, 1}), gl2);
        CHECK_FALSE(m.in_relative_interior);
        CHECK(m.residual_norm2 > 0);
    }
}

TEST_CASE("xi membership is invariant under positive Gram scaling") {
    GroupDatumInput in;
    in.rank = 2;
    in.positive_roots = {qv({1, -1})};
    in.center_basis = {qv({1, 1})};
    Mat gram = identity_mat(2);
    for (auto& row : gram)
        for (auto& x : row) x *= Rational(7, 3);
    GroupDatumInput scaled = in;
    scaled.gram = gram;
    const auto d1 = build_group_datum(in);
    const auto d2 = build_group_datum(scaled);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> num(-5, 5);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec v = {Rational(num(rng), 2), Rational(num(rng), 3)};
        const auto m1 = xi_membership(v, d1);
        const auto m2 = xi_membership(v, d2);
        CHECK(m1.in_relative_interior == m2.in_relative_interior);
        CHECK(m1.coeffs == m2.coeffs);
    }
}

TEST_CASE("toric xi membership degenerates to the zero test") {
    GroupDatumInput in;
    in.rank = 2;
    in.positive_roots = {};
    in.center_basis = {qv({1, 0}), qv({0, 1})};
    const auto datum = build_group_datum(in);
    CHECK(xi_membership(qv({0, 0}), datum).in_relative_interior);
    CHECK_FALSE(xi_membership(qv({1, 0}), datum).in_relative_interior);
}
