#include "imk/error.hpp"
#include "imk/nform.hpp"

namespace imk {

namespace {

// Reduced row echelon form in place; returns pivot columns.
std::vector<int> rref(ExprMatrix& a, int cols, Expr* det = nullptr) {
  const int rows = static_cast<int>(a.size());
  std::vector<int> pivots;
  Expr d(1);
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int p = -1;
    for (int i = r; i < rows; ++i)
      if (!a[i][c].is_zero()) {
        p = i;
        break;
      }
    if (p < 0) {
      d = Expr(0);
      continue;
    }
    if (p != r) {
      std::swap(a[p], a[r]);
      d = -d;
    }
    const Expr piv = a[r][c];
    d = d * piv;
    for (auto& v : a[r]) v = v / piv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || a[i][c].is_zero()) continue;
      const Expr f = a[i][c];
      for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] = a[i][j] - f * a[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  if (r < std::min(rows, cols)) d = Expr(0);
  if (det) *det = d;
  return pivots;
}

}  // namespace

std::optional<ExprMatrix> inverse(const ExprMatrix& m) {
  const int n = static_cast<int>(m.size());
  ExprMatrix a(n, std::vector<Expr>(2 * n));
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(m[i].size()) != n) throw InvalidInput("inverse needs a square matrix");
    for (int j = 0; j < n; ++j) a[i][j] = m[i][j];
    a[i][n + i] = Expr(1);
  }
  if (static_cast<int>(rref(a, n).size()) < n) return std::nullopt;
  ExprMatrix out(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i][j] = a[i][n + j];
  return out;
}

Expr determinant(const ExprMatrix& m) {
  const int n = static_cast<int>(m.size());
  if (n == 0) return Expr(1);
  ExprMatrix a = m;
  Expr d;
  rref(a, n, &d);
  return d;
}

ExprMatrix left_nullspace(const ExprMatrix& m) {
  // w M = 0  <=>  M^T w^T = 0.
  const int n = static_cast<int>(m.size());
  const int k = n ? static_cast<int>(m[0].size()) : 0;
  ExprMatrix t(k, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) t[j][i] = m[i][j];
  const std::vector<int> piv = rref(t, n);
  std::vector<bool> is_pivot(n, false);
  for (int c : piv) is_pivot[c] = true;
  ExprMatrix basis;
  for (int f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Expr> v(n);
    v[f] = Expr(1);
    for (std::size_t r = 0; r < piv.size(); ++r) v[piv[r]] = -t[r][f];
    basis.push_back(normalize_row(std::move(v)));
  }
  return basis;
}

std::vector<Expr> normalize_row(std::vector<Expr> row) {
  bool rational = true;
  for (const auto& e : row)
    if (!e.as_rational()) rational = false;
  if (rational) {
    mpz_class l = 1, g = 0;
    for (const auto& e : row) {
      const Rational q = *e.as_rational();
      if (q == 0) continue;
      mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
    }
    std::vector<mpz_class> ints;
    for (const auto& e : row) {
      const Rational q = *e.as_rational() * Rational(l);
      ints.push_back(q.get_num());
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), ints.back().get_mpz_t());
    }
    if (g == 0) return row;
    int sign = 1;
    for (const auto& v : ints)
      if (v != 0) {
        sign = v < 0 ? -1 : 1;
        break;
      }
    for (std::size_t i = 0; i < row.size(); ++i)
      row[i] = Expr(Rational(mpz_class(ints[i] / g * sign)));
    return row;
  }
  for (const auto& e : row)
    if (!e.is_zero()) {
      const Expr lead = e;
      for (auto& v : row) v = v / lead;
      break;
    }
  return row;
}

}  // namespace imk
