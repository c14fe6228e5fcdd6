#pragma once

#include "tma/common.hpp"

#include <memory>
#include <string>

namespace tma {

struct Box {
    double x0 = -1, y0 = -1, x1 = 1, y1 = 1;
    bool contains(cplx w, double tol = 0) const
    {
        return w.real() >= x0 - tol && w.real() <= x1 + tol && w.imag() >= y0 - tol && w.imag() <= y1 + tol;
    }
};

class ConvexPotential {
public:
    virtual ~ConvexPotential() = default;
    virtual double phi(cplx w) const = 0;
    // psi = 2 d/dwbar phi = phi_x + i phi_y
    virtual cplx psi(cplx w) const = 0;
    virtual Mat2 hessian(cplx w) const = 0;
    virtual std::string tag() const = 0;
    virtual bool analytic() const { return true; }
    // -2 d/dwbar det D^2 phi, by central differences of the Hessian unless overridden
    virtual cplx dbar_det(cplx w) const;

    Box domain{-10, -10, 10, 10};
    void require_inside(cplx w) const;
};

class QuadraticPotential : public ConvexPotential {
public:
    QuadraticPotential(double a = 0.5, double b = 0.5) : a_(a), b_(b) {}
    double phi(cplx w) const override { return a_ * w.real() * w.real() + b_ * w.imag() * w.imag(); }
    cplx psi(cplx w) const override { return {2 * a_ * w.real(), 2 * b_ * w.imag()}; }
    Mat2 hessian(cplx) const override { return {2 * a_, 0, 2 * b_}; }
    cplx dbar_det(cplx) const override { return 0; }
    std::string tag() const override;

private:
    double a_, b_;
};

// 1/2 |w|^2 + eps e^x
class ExpShearPotential : public ConvexPotential {
public:
    explicit ExpShearPotential(double eps) : eps_(eps) {}
    double phi(cplx w) const override { return 0.5 * std::norm(w) + eps_ * std::exp(w.real()); }
    cplx psi(cplx w) const override { return {w.real() + eps_ * std::exp(w.real()), w.imag()}; }
    Mat2 hessian(cplx w) const override { return {1 + eps_ * std::exp(w.real()), 0, 1}; }
    std::string tag() const override;

private:
    double eps_;
};

// Values on a regular grid; derivatives by differences at scale `step`.
class SampledPotential : public ConvexPotential {
public:
    SampledPotential(Box grid, int nx, int ny, std::vector<double> values, double step);
    double phi(cplx w) const override;
    cplx psi(cplx w) const override;
    Mat2 hessian(cplx w) const override;
    std::string tag() const override { return "file"; }
    bool analytic() const override { return false; }

private:
    Box grid_;
    int nx_, ny_;
    std::vector<double> v_;
    double step_;
};

// quad | aniso:a,b (phi = a x^2 + b y^2) | expshear:eps | file:path
std::unique_ptr<ConvexPotential> make_potential(const std::string& spec);

} // namespace tma
