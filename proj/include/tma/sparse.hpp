#pragma once

#include <vector>

namespace tma {

struct Csr {
    int n = 0;
    std::vector<int> ptr, col;
    std::vector<double> val;
};

// Row-wise kernels. The _omp variants split rows or fixed blocks across
// threads and give results bitwise equal to the serial reference.
void spmv_serial(const Csr& a, const double* x, double* y);
void spmv_omp(const Csr& a, const double* x, double* y);
double dot_serial(const double* a, const double* b, int n);
double dot_omp(const double* a, const double* b, int n);

struct CgOptions {
    double tol = 1e-10;      // on ||r|| / ||b||
    int max_iter = -1;       // -1: max(200, 2n)
    bool parallel = true;
};

struct CgResult {
    int iterations = 0;
    double rel_residual = 0;
    bool converged = false;
};

// Jacobi-preconditioned conjugate gradients; x holds the initial guess.
CgResult cg_solve(const Csr& a, const std::vector<double>& b, std::vector<double>& x,
                  const CgOptions& opt = {});

} // namespace tma
