#include "tma/expr.hpp"

#include <cctype>
#include <cmath>

namespace tma {

namespace {

using Poly = Expression::Poly;

constexpr int kMaxDegree = 64;

void trim(Poly& p)
{
    for (auto it = p.begin(); it != p.end();)
        it = (it->second == cplx(0, 0)) ? p.erase(it) : std::next(it);
}

Poly constant(cplx c)
{
    Poly p;
    if (c != cplx(0, 0)) p[{0, 0}] = c;
    return p;
}

Poly add(Poly a, const Poly& b, double sign)
{
    for (const auto& [k, c] : b) a[k] += sign * c;
    trim(a);
    return a;
}

int degree_of(const Poly& p)
{
    int d = 0;
    for (const auto& [k, c] : p) d = std::max(d, k.first + k.second);
    return d;
}

Poly mul(const Poly& a, const Poly& b)
{
    Poly r;
    for (const auto& [ka, ca] : a)
        for (const auto& [kb, cb] : b) r[{ka.first + kb.first, ka.second + kb.second}] += ca * cb;
    trim(r);
    return r;
}

Poly conj(Poly p)
{
    for (auto& [k, c] : p) c = std::conj(c);
    return p;
}

bool is_constant(const Poly& p) { return p.empty() || (p.size() == 1 && p.begin()->first == std::pair{0, 0}); }

cplx constant_value(const Poly& p) { return p.empty() ? cplx(0, 0) : p.begin()->second; }

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    Poly parse()
    {
        Poly p = sum();
        skip();
        if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
        return p;
    }

private:
    [[noreturn]] void error(const std::string& msg) const
    {
        throw Error(Errc::BadExpression, msg + " at column " + std::to_string(pos_ + 1) + " of '" + s_ + "'");
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    bool eat_word(const std::string& w)
    {
        skip();
        if (s_.compare(pos_, w.size(), w) != 0) return false;
        std::size_t end = pos_ + w.size();
        if (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) return false;
        pos_ = end;
        return true;
    }

    Poly sum()
    {
        Poly p = product();
        for (;;) {
            if (eat('+')) p = add(std::move(p), product(), 1);
            else if (eat('-')) p = add(std::move(p), product(), -1);
            else return p;
        }
    }

    Poly product()
    {
        Poly p = unary();
        for (;;) {
            if (eat('*')) {
                p = mul(p, unary());
            } else if (eat('/')) {
                Poly q = unary();
                if (!is_constant(q) || constant_value(q) == cplx(0, 0)) error("division by a non-constant or zero");
                p = mul(p, constant(1.0 / constant_value(q)));
            } else {
                break;
            }
            if (degree_of(p) > kMaxDegree) error("degree above " + std::to_string(kMaxDegree));
        }
        return p;
    }

    Poly unary()
    {
        if (eat('-')) return mul(constant(-1), unary());
        if (eat('+')) return unary();
        return power();
    }

    int exponent()
    {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) error("expected a non-negative integer exponent");
        int k = std::stoi(s_.substr(start, pos_ - start));
        if (k > kMaxDegree) error("exponent above " + std::to_string(kMaxDegree));
        return k;
    }

    Poly raise(const Poly& p, int k)
    {
        if (degree_of(p) * k > kMaxDegree) error("degree above " + std::to_string(kMaxDegree));
        Poly r = constant(1);
        for (int i = 0; i < k; ++i) r = mul(r, p);
        return r;
    }

    Poly power()
    {
        skip();
        if (eat('|')) {
            Poly inner = sum();
            if (!eat('|')) error("expected '|'");
            if (!eat('^')) error("|.| must be raised to an even power");
            int k = exponent();
            if (k % 2) error("|.| must be raised to an even power");
            return raise(mul(inner, conj(inner)), k / 2);
        }
        Poly p = primary();
        if (eat('^')) p = raise(p, exponent());
        return p;
    }

    Poly primary()
    {
        skip();
        if (pos_ >= s_.size()) error("unexpected end of expression");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = 0;
            try {
                v = std::stod(s_.substr(pos_), &used);
            } catch (const std::exception&) {
                error("bad number");
            }
            pos_ += used;
            return constant(v);
        }
        if (eat('(')) {
            Poly p = sum();
            if (!eat(')')) error("expected ')'");
            return p;
        }
        for (const char* f : {"Re", "Im"}) {
            if (eat_word(f)) {
                if (!eat('(')) error(std::string("expected '(' after ") + f);
                Poly p = sum();
                if (!eat(')')) error("expected ')'");
                bool re = f[1] == 'e';
                for (auto& [k, cf] : p) cf = re ? cplx(cf.real(), 0) : cplx(cf.imag(), 0);
                trim(p);
                return p;
            }
        }
        if (eat_word("x")) return Poly{{{1, 0}, 1.0}};
        if (eat_word("y")) return Poly{{{0, 1}, 1.0}};
        if (eat_word("w")) return Poly{{{1, 0}, 1.0}, {{0, 1}, cplx(0, 1)}};
        if (eat_word("i")) return constant(cplx(0, 1));
        error("unknown symbol");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

} // namespace

Expression Expression::parse(const std::string& text)
{
    Expression e;
    e.text_ = text;
    e.p_ = Parser(text).parse();
    for (const auto& [k, c] : e.p_)
        if (c.imag() != 0) throw Error(Errc::BadExpression, "'" + text + "' is not real; wrap it in Re() or Im()");
    return e;
}

double Expression::operator()(cplx w) const
{
    double s = 0;
    for (const auto& [k, c] : p_) s += c.real() * std::pow(w.real(), k.first) * std::pow(w.imag(), k.second);
    return s;
}

cplx Expression::gradient(cplx w) const
{
    double gx = 0, gy = 0;
    for (const auto& [k, c] : p_) {
        if (k.first > 0) gx += c.real() * k.first * std::pow(w.real(), k.first - 1) * std::pow(w.imag(), k.second);
        if (k.second > 0) gy += c.real() * k.second * std::pow(w.real(), k.first) * std::pow(w.imag(), k.second - 1);
    }
    return {gx, gy};
}

int Expression::degree() const { return degree_of(p_); }

} // namespace tma
