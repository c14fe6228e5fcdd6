#include "tma/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace tma {

namespace {

constexpr int kBlock = 2048;

double block_sum(const double* a, const double* b, int lo, int hi)
{
    double s = 0;
    for (int i = lo; i < hi; ++i) s += a[i] * b[i];
    return s;
}

} // namespace

void spmv_serial(const Csr& a, const double* x, double* y)
{
    for (int i = 0; i < a.n; ++i) {
        double s = 0;
        for (int k = a.ptr[i]; k < a.ptr[i + 1]; ++k) s += a.val[k] * x[a.col[k]];
        y[i] = s;
    }
}

void spmv_omp(const Csr& a, const double* x, double* y)
{
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.n; ++i) {
        double s = 0;
        for (int k = a.ptr[i]; k < a.ptr[i + 1]; ++k) s += a.val[k] * x[a.col[k]];
        y[i] = s;
    }
}

double dot_serial(const double* a, const double* b, int n)
{
    double s = 0;
    for (int lo = 0; lo < n; lo += kBlock) s += block_sum(a, b, lo, std::min(n, lo + kBlock));
    return s;
}

double dot_omp(const double* a, const double* b, int n)
{
    const int nb = (n + kBlock - 1) / kBlock;
    std::vector<double> part(nb);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < nb; ++k) part[k] = block_sum(a, b, k * kBlock, std::min(n, (k + 1) * kBlock));
    double s = 0;
    for (double p : part) s += p;
    return s;
}

CgResult cg_solve(const Csr& a, const std::vector<double>& b, std::vector<double>& x, const CgOptions& opt)
{
    const int n = a.n;
    CgResult res;
    x.resize(n, 0.0);
    if (n == 0) {
        res.converged = true;
        return res;
    }
    auto spmv = opt.parallel ? spmv_omp : spmv_serial;
    auto dot = opt.parallel ? dot_omp : dot_serial;
    const int cap = opt.max_iter >= 0 ? opt.max_iter
                                      : std::max(200, 2 * n);

    std::vector<double> dinv(n, 1.0), r(n), z(n), p(n), q(n);
    for (int i = 0; i < n; ++i)
        for (int k = a.ptr[i]; k < a.ptr[i + 1]; ++k)
            if (a.col[k] == i && a.val[k] != 0) dinv[i] = 1.0 / a.val[k];

    const double bnorm = std::sqrt(dot(b.data(), b.data(), n));
    if (bnorm == 0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }
    spmv(a, x.data(), q.data());
    for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];
    for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
    p = z;
    double rz = dot(r.data(), z.data(), n);
    double rnorm = std::sqrt(dot(r.data(), r.data(), n));
    int it = 0;
    while (rnorm > opt.tol * bnorm && it < cap) {
        spmv(a, p.data(), q.data());
        const double alpha = rz / dot(p.data(), q.data(), n);
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        // refresh the true residual now and then to avoid drift
        if ((it + 1) % 200 == 0) {
            spmv(a, x.data(), q.data());
            for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];
        }
        for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
        const double rz_new = dot(r.data(), z.data(), n);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rnorm = std::sqrt(dot(r.data(), r.data(), n));
        ++it;
    }
    spmv(a, x.data(), q.data());
    for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];
    res.iterations = it;
    res.rel_residual = std::sqrt(dot(r.data(), r.data(), n)) / bnorm;
    res.converged = rnorm <= opt.tol * bnorm;
    return res;
}

} // namespace tma
