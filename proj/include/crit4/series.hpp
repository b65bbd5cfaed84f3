#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace crit4::series {

// Polynomial in X whose coefficients are polynomials in one symbol c.
// Key is (power of X, power of c).
class BiPoly {
  public:
    using Key = std::pair<int, int>;

    BiPoly() = default;
    explicit BiPoly(const mpq_class& constant);
    static BiPoly monomial(const mpq_class& coef, int xpow, int cpow);

    const std::map<Key, mpq_class>& coeffs() const { return coeffs_; }
    mpq_class coeff(int xpow, int cpow) const;
    void add_term(const mpq_class& coef, int xpow, int cpow);

    bool is_zero() const { return coeffs_.empty(); }
    int degree_x() const;  // -1 for the zero polynomial
    // coefficient of X^i as a polynomial in c (X-power 0)
    BiPoly x_coeff(int i) const;

    BiPoly derivative() const;  // d/dX
    BiPoly operator+(const BiPoly& o) const;
    BiPoly operator-(const BiPoly& o) const;
    BiPoly operator*(const BiPoly& o) const;
    BiPoly operator*(const mpq_class& s) const;
    BiPoly operator-() const;
    bool operator==(const BiPoly& o) const { return coeffs_ == o.coeffs_; }

    std::string str() const;

  private:
    std::map<Key, mpq_class> coeffs_;
};

enum class Kind { P, Q };

struct SeriesFamily {
    Kind kind;
    std::vector<BiPoly> polys;  // polys[0] is index 1

    const BiPoly& at(int n) const { return polys.at(n - 1); }
    int size() const { return static_cast<int>(polys.size()); }
};

SeriesFamily gen_P(int n_max);
SeriesFamily gen_Q(int n_max);

// R_n = Q'_{n-1} - (n-1) Q_{n-1}, returned for n = 2..size+1 (front is R_2)
std::vector<BiPoly> derived_R(const SeriesFamily& q);

// exact evaluation: doubles converted to rationals, result rounded once
double eval_bipoly(const BiPoly& p, double X, double c);
// fast double Horner, for hot loops
double eval_bipoly_fast(const BiPoly& p, double X, double c);

// Formal series sum_n a_n(log x) x^{-n}; terms[n] is the coefficient of x^{-n}.
struct LogSeries {
    std::vector<BiPoly> terms;

    static LogSeries from_family(const SeriesFamily& f);
    LogSeries derivative() const;  // d/dx
    LogSeries operator+(const LogSeries& o) const;
    LogSeries operator*(const LogSeries& o) const;
    LogSeries operator*(const mpq_class& s) const;
};

// Residual of h''-2h'-h^2 (P) or g''+2g'-g^2 (Q) for the truncated family.
// Returns the highest k such that every order x^{-j}, j <= k, cancels exactly.
int consistent_order(const SeriesFamily& f);

std::string dump(const SeriesFamily& f);

}  // namespace crit4::series
