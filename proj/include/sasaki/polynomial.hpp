#pragma once

#include "sasaki/linalg.hpp"

#include <map>
#include <vector>

namespace sasaki {

/// Sparse multivariate polynomial with exact rational coefficients and a
/// canonical (lexicographic) monomial order.
class Polynomial {
public:
    using Exponents = std::vector<unsigned>;

    explicit Polynomial(std::size_t nvars = 0) : nvars_(nvars) {}

    static Polynomial constant(std::size_t nvars, const Rational& c) {
        Polynomial p(nvars);
        if (c != 0) p.terms_[Exponents(nvars, 0)] = c;
        return p;
    }

    static Polynomial variable(std::size_t nvars, std::size_t i) {
        Polynomial p(nvars);
        Exponents e(nvars, 0);
        e[i] = 1;
        p.terms_[e] = 1;
        return p;
    }

    /// c0 + sum_i coeff[i] * x_i
    static Polynomial affine(const Vec& coeff, const Rational& c0) {
        Polynomial p(coeff.size());
        if (c0 != 0) p.terms_[Exponents(coeff.size(), 0)] = c0;
        for (std::size_t i = 0; i < coeff.size(); ++i) {
            if (coeff[i] == 0) continue;
            Exponents e(coeff.size(), 0);
            e[i] = 1;
            p.terms_[e] = coeff[i];
        }
        return p;
    }

    std::size_t nvars() const { return nvars_; }
    bool is_zero() const { return terms_.empty(); }

    unsigned degree() const {
        unsigned d = 0;
        for (const auto& [e, c] : terms_) {
            unsigned t = 0;
            for (auto x : e) t += x;
            d = std::max(d, t);
        }
        return d;
    }

    Polynomial& operator+=(const Polynomial& o) {
        check(o);
        for (const auto& [e, c] : o.terms_) {
            auto it = terms_.find(e);
            if (it == terms_.end()) {
                terms_[e] = c;
            } else {
                it->second += c;
                if (it->second == 0) terms_.erase(it);
            }
        }
        return *this;
    }

    Polynomial operator+(const Polynomial& o) const { Polynomial r = *this; r += o; return r; }

    Polynomial operator*(const Polynomial& o) const {
        check(o);
        Polynomial r(nvars_);
        for (const auto& [e1, c1] : terms_)
            for (const auto& [e2, c2] : o.terms_) {
                Exponents e(nvars_);
                for (std::size_t i = 0; i < nvars_; ++i) e[i] = e1[i] + e2[i];
                auto it = r.terms_.find(e);
                if (it == r.terms_.end()) {
                    Rational c = c1 * c2;
                    if (c != 0) r.terms_[e] = c;
                } else {
                    it->second += c1 * c2;
                    if (it->second == 0) r.terms_.erase(it);
                }
            }
        return r;
    }

    Polynomial operator*(const Rational& c) const {
        Polynomial r(nvars_);
        if (c == 0) return r;
        for (const auto& [e, coeff] : terms_) r.terms_[e] = coeff * c;
        return r;
    }

    Rational eval(const Vec& x) const {
        Rational s(0);
        for (const auto& [e, c] : terms_) {
            Rational t = c;
            for (std::size_t i = 0; i < nvars_; ++i)
                for (unsigned k = 0; k < e[i]; ++k) t *= x[i];
            s += t;
        }
        return s;
    }

    double eval_double(const std::vector<double>& x) const {
        double s = 0;
        for (const auto& [e, c] : terms_) {
            double t = to_double(c);
            for (std::size_t i = 0; i < nvars_; ++i)
                for (unsigned k = 0; k < e[i]; ++k) t *= x[i];
            s += t;
        }
        return s;
    }

    /// Substitutes x_i -> subs[i] (polynomials in a new variable set).
    Polynomial substitute(const std::vector<Polynomial>& subs) const {
        if (subs.size() != nvars_) throw Error("substitute: wrong count");
        const std::size_t new_nvars = subs.empty() ? 0 : subs[0].nvars();
        Polynomial r(new_nvars);
        for (const auto& [e, c] : terms_) {
            Polynomial term = Polynomial::constant(new_nvars, c);
            for (std::size_t i = 0; i < nvars_; ++i)
                for (unsigned k = 0; k < e[i]; ++k) term = term * subs[i];
            r += term;
        }
        return r;
    }

    const std::map<Exponents, Rational>& terms() const { return terms_; }

private:
    void check(const Polynomial& o) const {
        if (o.nvars_ != nvars_) throw Error("polynomial arity mismatch");
    }

    std::size_t nvars_;
    std::map<Exponents, Rational> terms_;
};

} // namespace sasaki
