#include "dpl/expr.hpp"

#include <algorithm>
#include <stdexcept>

namespace dpl {

Expr::Expr(const Rational& c) {
  if (c != 0) terms_[{}] = c;
  normalize();
}

Expr Expr::var(const std::string& name) {
  Expr e;
  e.terms_[{name}] = 1;
  e.normalize();
  return e;
}

void Expr::normalize() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (it->second == 0)
      it = terms_.erase(it);
    else
      ++it;
  }
  ground_ = true;
  for (auto& [m, c] : terms_)
    if (!m.empty()) ground_ = false;
  const_ = constant_term();
}

bool Expr::is_constant() const { return ground_; }

const Rational& Expr::constant() const {
  if (!ground_) throw std::logic_error("threshold '" + str() + "' is not ground");
  return const_;
}

Rational Expr::constant_term() const {
  auto it = terms_.find({});
  return it == terms_.end() ? Rational(0) : it->second;
}

int Expr::degree() const {
  int d = 0;
  for (auto& [m, c] : terms_) d = std::max<int>(d, static_cast<int>(m.size()));
  return d;
}

std::set<std::string> Expr::vars() const {
  std::set<std::string> out;
  for (auto& [m, c] : terms_) out.insert(m.begin(), m.end());
  return out;
}

bool Expr::mentions(const std::string& v) const {
  for (auto& [m, c] : terms_)
    if (std::find(m.begin(), m.end(), v) != m.end()) return true;
  return false;
}

Rational Expr::coeff(const std::string& v) const {
  auto it = terms_.find({v});
  return it == terms_.end() ? Rational(0) : it->second;
}

Expr operator+(const Expr& a, const Expr& b) {
  Expr r = a;
  for (auto& [m, c] : b.terms_) r.terms_[m] += c;
  r.normalize();
  return r;
}

Expr operator-(const Expr& a) {
  Expr r = a;
  for (auto& [m, c] : r.terms_) c = -c;
  r.normalize();
  return r;
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  Expr r;
  for (auto& [ma, ca] : a.terms_)
    for (auto& [mb, cb] : b.terms_) {
      Expr::Monomial m = ma;
      m.insert(m.end(), mb.begin(), mb.end());
      std::sort(m.begin(), m.end());
      r.terms_[m] += ca * cb;
    }
  r.normalize();
  return r;
}

Expr Expr::substitute(const std::map<std::string, Expr>& s) const {
  if (ground_ || s.empty()) return *this;
  Expr out;
  for (auto& [m, c] : terms_) {
    Expr t(c);
    for (auto& v : m) {
      auto it = s.find(v);
      t = t * (it == s.end() ? Expr::var(v) : it->second);
    }
    out = out + t;
  }
  return out;
}

std::optional<Rational> Expr::eval(const std::map<std::string, Rational>& env) const {
  Rational sum = 0;
  for (auto& [m, c] : terms_) {
    Rational t = c;
    for (auto& v : m) {
      auto it = env.find(v);
      if (it == env.end()) return std::nullopt;
      t *= it->second;
    }
    sum += t;
  }
  return sum;
}

std::string Expr::str() const {
  if (terms_.empty()) return "0";
  // constant first, then monomials by degree and name
  std::vector<std::pair<Monomial, Rational>> order(terms_.begin(), terms_.end());
  std::stable_sort(order.begin(), order.end(),
                   [](auto& x, auto& y) { return x.first.size() < y.first.size(); });
  std::string out;
  bool first = true;
  for (auto& [m, c] : order) {
    Rational mag = abs(c);
    if (first) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    first = false;
    std::string body;
    if (m.empty()) {
      body = to_string(mag);
    } else {
      if (mag != 1) body = to_string(mag) + "*";
      for (std::size_t i = 0; i < m.size(); ++i) body += (i ? "*" : "") + m[i];
    }
    out += body;
  }
  return out;
}

}  // namespace dpl
