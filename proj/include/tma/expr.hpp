#pragma once

#include "tma/common.hpp"

#include <map>
#include <string>
#include <utility>

namespace tma {

// Real polynomial in x, y written with x, y, w = x + iy, i, Re(.), Im(.),
// |.|^2k, + - * ^ and division by constants. Throws BadExpression.
class Expression {
public:
    using Poly = std::map<std::pair<int, int>, cplx>;   // (deg x, deg y) -> coefficient

    static Expression parse(const std::string& text);

    double operator()(cplx w) const;
    // f_x + i f_y
    cplx gradient(cplx w) const;
    int degree() const;
    const std::string& text() const { return text_; }
    const Poly& poly() const { return p_; }

private:
    std::string text_;
    Poly p_;
};

} // namespace tma
