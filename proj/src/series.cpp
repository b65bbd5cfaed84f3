#include "crit4/series.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace crit4::series {

BiPoly::BiPoly(const mpq_class& constant) { add_term(constant, 0, 0); }

BiPoly BiPoly::monomial(const mpq_class& coef, int xpow, int cpow) {
    BiPoly p;
    p.add_term(coef, xpow, cpow);
    return p;
}

mpq_class BiPoly::coeff(int xpow, int cpow) const {
    auto it = coeffs_.find({xpow, cpow});
    return it == coeffs_.end() ? mpq_class(0) : it->second;
}

void BiPoly::add_term(const mpq_class& coef, int xpow, int cpow) {
    if (coef == 0) return;
    auto [it, inserted] = coeffs_.try_emplace({xpow, cpow}, coef);
    if (!inserted) {
        it->second += coef;
        if (it->second == 0) coeffs_.erase(it);
    }
}

int BiPoly::degree_x() const {
    int d = -1;
    for (const auto& [k, v] : coeffs_) d = std::max(d, k.first);
    return d;
}

BiPoly BiPoly::x_coeff(int i) const {
    BiPoly r;
    for (const auto& [k, v] : coeffs_)
        if (k.first == i) r.add_term(v, 0, k.second);
    return r;
}

BiPoly BiPoly::derivative() const {
    BiPoly r;
    for (const auto& [k, v] : coeffs_)
        if (k.first > 0) r.add_term(v * k.first, k.first - 1, k.second);
    return r;
}

BiPoly BiPoly::operator+(const BiPoly& o) const {
    BiPoly r = *this;
    for (const auto& [k, v] : o.coeffs_) r.add_term(v, k.first, k.second);
    return r;
}

BiPoly BiPoly::operator-(const BiPoly& o) const { return *this + (-o); }

BiPoly BiPoly::operator-() const {
    BiPoly r;
    for (const auto& [k, v] : coeffs_) r.coeffs_.emplace(k, -v);
    return r;
}

BiPoly BiPoly::operator*(const BiPoly& o) const {
    BiPoly r;
    for (const auto& [ka, va] : coeffs_)
        for (const auto& [kb, vb] : o.coeffs_)
            r.add_term(va * vb, ka.first + kb.first, ka.second + kb.second);
    return r;
}

BiPoly BiPoly::operator*(const mpq_class& s) const {
    BiPoly r;
    if (s == 0) return r;
    for (const auto& [k, v] : coeffs_) r.coeffs_.emplace(k, v * s);
    return r;
}

std::string BiPoly::str() const {
    if (coeffs_.empty()) return "0";
    std::vector<std::pair<Key, mpq_class>> terms(coeffs_.begin(), coeffs_.end());
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
        if (a.first.first != b.first.first) return a.first.first > b.first.first;
        return a.first.second > b.first.second;
    });
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, v] : terms) {
        if (!first) os << " + ";
        first = false;
        os << "(" << v.get_str() << ")";
        if (k.second > 0) os << "·c^" << k.second;
        if (k.first > 0) os << "·X^" << k.first;
    }
    return os.str();
}

namespace {

// Solve (2n-4) p - 2 p' = rhs for p, top X-degree down.
BiPoly solve_triangular(int n, const BiPoly& rhs) {
    const mpq_class diag(2 * n - 4);
    const int deg = rhs.degree_x();
    BiPoly p;
    BiPoly above;  // coefficient of X^{i+1} in p
    for (int i = deg; i >= 0; --i) {
        BiPoly ai = (rhs.x_coeff(i) + above * mpq_class(2 * (i + 1))) * (mpq_class(1) / diag);
        for (const auto& [k, v] : ai.coeffs()) p.add_term(v, i, k.second);
        above = ai;
    }
    return p;
}

SeriesFamily generate(Kind kind, int n_max) {
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    SeriesFamily f{kind, {}};
    const mpq_class sgn = kind == Kind::P ? 1 : -1;
    f.polys.push_back(BiPoly(mpq_class(2) * sgn));
    if (n_max >= 2) {
        BiPoly p2 = BiPoly::monomial(2, 1, 0);
        p2.add_term(1, 0, 1);
        f.polys.push_back(p2);
    }
    for (int n = 3; n <= n_max; ++n) {
        const BiPoly& prev = f.at(n - 1);
        BiPoly lin = prev.derivative().derivative() * mpq_class(-1) +
                     prev.derivative() * mpq_class(2 * n - 1) +
                     prev * mpq_class(-(n - 1) * n);
        BiPoly conv;
        for (int k = 2; k <= n - 1; ++k) conv = conv + f.at(k) * f.at(n + 1 - k);
        // Q recurrence is the P recurrence with every sign flipped
        BiPoly rhs = (lin + conv) * sgn;
        f.polys.push_back(solve_triangular(n, rhs));
    }
    return f;
}

}  // namespace

SeriesFamily gen_P(int n_max) { return generate(Kind::P, n_max); }
SeriesFamily gen_Q(int n_max) { return generate(Kind::Q, n_max); }

std::vector<BiPoly> derived_R(const SeriesFamily& q) {
    std::vector<BiPoly> r;
    for (int n = 2; n <= q.size() + 1; ++n) {
        const BiPoly& prev = q.at(n - 1);
        r.push_back(prev.derivative() - prev * mpq_class(n - 1));
    }
    return r;
}

double eval_bipoly(const BiPoly& p, double X, double c) {
    const mpq_class xq(X), cq(c);
    int dx = p.degree_x();
    if (dx < 0) return 0.0;
    mpq_class acc(0);
    for (int i = dx; i >= 0; --i) {
        BiPoly ci = p.x_coeff(i);
        int dc = 0;
        for (const auto& [k, v] : ci.coeffs()) dc = std::max(dc, k.second);
        mpq_class inner(0);
        for (int j = dc; j >= 0; --j) inner = inner * cq + ci.coeff(0, j);
        acc = acc * xq + inner;
    }
    return acc.get_d();
}

double eval_bipoly_fast(const BiPoly& p, double X, double c) {
    double s = 0.0;
    for (const auto& [k, v] : p.coeffs())
        s += v.get_d() * std::pow(X, k.first) * std::pow(c, k.second);
    return s;
}

LogSeries LogSeries::from_family(const SeriesFamily& f) {
    LogSeries s;
    s.terms.resize(f.size() + 1);
    for (int n = 1; n <= f.size(); ++n) s.terms[n] = f.at(n);
    return s;
}

LogSeries LogSeries::derivative() const {
    // d/dx [a(log x) x^{-n}] = (a' - n a) x^{-n-1}
    LogSeries r;
    r.terms.resize(terms.size() + 1);
    for (size_t n = 0; n < terms.size(); ++n)
        r.terms[n + 1] = terms[n].derivative() - terms[n] * mpq_class(static_cast<long>(n));
    return r;
}

LogSeries LogSeries::operator+(const LogSeries& o) const {
    LogSeries r;
    r.terms.resize(std::max(terms.size(), o.terms.size()));
    for (size_t n = 0; n < r.terms.size(); ++n) {
        if (n < terms.size()) r.terms[n] = r.terms[n] + terms[n];
        if (n < o.terms.size()) r.terms[n] = r.terms[n] + o.terms[n];
    }
    return r;
}

LogSeries LogSeries::operator*(const LogSeries& o) const {
    LogSeries r;
    if (terms.empty() || o.terms.empty()) return r;
    r.terms.resize(terms.size() + o.terms.size() - 1);
    for (size_t a = 0; a < terms.size(); ++a) {
        if (terms[a].is_zero()) continue;
        for (size_t b = 0; b < o.terms.size(); ++b)
            if (!o.terms[b].is_zero()) r.terms[a + b] = r.terms[a + b] + terms[a] * o.terms[b];
    }
    return r;
}

LogSeries LogSeries::operator*(const mpq_class& s) const {
    LogSeries r;
    for (const auto& t : terms) r.terms.push_back(t * s);
    return r;
}

int consistent_order(const SeriesFamily& f) {
    LogSeries u = LogSeries::from_family(f);
    LogSeries d1 = u.derivative();
    LogSeries d2 = d1.derivative();
    const mpq_class two = f.kind == Kind::P ? -2 : 2;
    LogSeries res = d2 + d1 * two + (u * u) * mpq_class(-1);
    int k = 0;
    while (k + 1 < static_cast<int>(res.terms.size()) && res.terms[k + 1].is_zero()) ++k;
    return k;
}

std::string dump(const SeriesFamily& f) {
    std::ostringstream os;
    const char* name = f.kind == Kind::P ? "P" : "Q";
    for (int n = 1; n <= f.size(); ++n) os << name << n << " = " << f.at(n).str() << "\n";
    return os.str();
}

}  // namespace crit4::series
