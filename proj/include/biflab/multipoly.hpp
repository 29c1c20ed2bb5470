#pragma once

// Sparse polynomial maps C^D -> C with D <= kMaxParams. These describe how
// the z-coefficients and the marked critical points of a family depend on
// the parameter. Partial derivatives are formed symbolically once, at
// family construction.

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace biflab {

inline constexpr int kMaxParams = 4;

class MultiPoly {
 public:
  struct Term {
    std::complex<double> coef;
    std::array<std::uint8_t, kMaxParams> exp{};
  };

  MultiPoly() = default;
  static MultiPoly constant(std::complex<double> c) {
    MultiPoly p;
    if (c != 0.0) p.terms_.push_back({c, {}});
    return p;
  }
  static MultiPoly variable(int index, std::complex<double> scale = 1.0) {
    MultiPoly p;
    Term t{scale, {}};
    t.exp[std::size_t(index)] = 1;
    p.terms_.push_back(t);
    return p;
  }

  bool is_zero() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

  std::complex<double> eval(std::span<const std::complex<double>> lam) const {
    std::complex<double> s = 0.0;
    for (const Term& t : terms_) {
      std::complex<double> m = t.coef;
      for (std::size_t v = 0; v < lam.size(); ++v)
        for (int e = 0; e < t.exp[v]; ++e) m *= lam[v];
      s += m;
    }
    return s;
  }

  MultiPoly partial(int var) const {
    MultiPoly d;
    for (const Term& t : terms_) {
      if (t.exp[std::size_t(var)] == 0) continue;
      Term s = t;
      s.coef *= double(t.exp[std::size_t(var)]);
      s.exp[std::size_t(var)] -= 1;
      d.terms_.push_back(s);
    }
    return d;
  }

  /// Highest total degree in the given variable, -1 if absent.
  int degree_in(int var) const {
    int d = -1;
    for (const Term& t : terms_) d = std::max(d, int(t.exp[std::size_t(var)]));
    return terms_.empty() ? -1 : d;
  }

  friend MultiPoly operator+(const MultiPoly& a, const MultiPoly& b) {
    MultiPoly s = a;
    for (const Term& t : b.terms_) s.add_term(t);
    return s;
  }
  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
    MultiPoly p;
    for (const Term& ta : a.terms_)
      for (const Term& tb : b.terms_) {
        Term t;
        t.coef = ta.coef * tb.coef;
        for (int v = 0; v < kMaxParams; ++v)
          t.exp[std::size_t(v)] =
              std::uint8_t(ta.exp[std::size_t(v)] + tb.exp[std::size_t(v)]);
        p.add_term(t);
      }
    return p;
  }
  friend MultiPoly operator*(std::complex<double> s, const MultiPoly& p) {
    return MultiPoly::constant(s) * p;
  }
  friend MultiPoly operator-(const MultiPoly& a, const MultiPoly& b) {
    return a + (std::complex<double>(-1.0) * b);
  }

 private:
  void add_term(const Term& t) {
    for (Term& u : terms_) {
      if (u.exp == t.exp) {
        u.coef += t.coef;
        if (u.coef == 0.0) {
          u = terms_.back();
          terms_.pop_back();
        }
        return;
      }
    }
    if (t.coef != 0.0) terms_.push_back(t);
  }
  std::vector<Term> terms_;
};

}  // namespace biflab
