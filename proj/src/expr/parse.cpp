#include <cctype>
#include <climits>

#include "imk/error.hpp"
#include "imk/expr.hpp"

namespace imk {

namespace {

bool is_reserved(std::string_view id) {
  return id == "exp" || id == "ln" || id == "sin" || id == "cos";
}

class Parser {
 public:
  Parser(std::string_view text, int n, const std::vector<std::string>& params, char prefix)
      : text_(text), n_(n), params_(params), prefix_(prefix) {}

  Expr run() {
    Expr e = expression();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) { throw ParseError(msg, at); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr acc = term();
    for (;;) {
      if (accept('+')) acc = acc + term();
      else if (accept('-')) acc = acc - term();
      else return acc;
    }
  }

  Expr term() {
    Expr acc = unary();
    for (;;) {
      if (accept('*')) {
        acc = acc * unary();
      } else {
        skip_ws();
        const std::size_t at = pos_;
        if (!accept('/')) return acc;
        Expr d = unary();
        if (d.is_zero()) fail_at("division by zero", at);
        acc = acc / d;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    skip_ws();
    const std::size_t at = pos_;
    bool neg = false;
    if (accept('-')) neg = true;
    else accept('+');
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer exponent");
    const std::string digits(text_.substr(start, pos_ - start));
    if (digits.size() > 6) fail_at("exponent too large", at);
    int k = std::stoi(digits);
    if (neg && base.is_zero()) fail_at("division by zero", at);
    return pow(base, neg ? -k : k);
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      std::size_t dstart = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (dstart == pos_) pos_ = save;
    }
    try {
      return Expr(parse_rational(text_.substr(start, pos_ - start)));
    } catch (const InvalidInput& e) {
      fail_at(e.what(), start);
    }
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::islower(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::islower(static_cast<unsigned char>(text_[pos_])) ||
            std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string id(text_.substr(start, pos_ - start));
    if (is_reserved(id)) {
      if (!accept('(')) fail("expected '(' after " + id);
      Expr arg = expression();
      if (!accept(')')) fail("expected ')'");
      if (id == "exp") return exp(arg);
      if (id == "ln") return ln(arg);
      if (id == "sin") return sin(arg);
      return cos(arg);
    }
    if (id.size() > 1 && id[0] == prefix_ &&
        id.find_first_not_of("0123456789", 1) == std::string::npos) {
      if (id.size() > 9) fail_at("variable index too large in '" + id + "'", start);
      const int index = std::stoi(id.substr(1));
      if (index < 1 || index > n_)
        fail_at("variable '" + id + "' outside state dimension " + std::to_string(n_), start);
      return Expr::variable(index);
    }
    for (const auto& p : params_)
      if (p == id) return Expr::parameter(id);
    fail_at("unknown identifier '" + id + "' (not a state variable or declared parameter)",
            start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int n_;
  const std::vector<std::string>& params_;
  char prefix_;
};

}  // namespace

Expr parse(std::string_view text, int n, const std::vector<std::string>& params,
           char var_prefix) {
  for (const auto& p : params) {
    bool ok = !p.empty() && std::islower(static_cast<unsigned char>(p[0])) && !is_reserved(p);
    for (char ch : p)
      ok = ok && (std::islower(static_cast<unsigned char>(ch)) ||
                  std::isdigit(static_cast<unsigned char>(ch)) || ch == '_');
    if (ok && p.size() > 1 && p[0] == var_prefix &&
        p.find_first_not_of("0123456789", 1) == std::string::npos)
      ok = false;
    if (!ok) throw InvalidInput("invalid parameter name '" + p + "'");
  }
  return Parser(text, n, params, var_prefix).run();
}

}  // namespace imk
