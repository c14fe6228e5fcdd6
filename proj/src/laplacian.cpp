#include "tma/laplacian.hpp"

#include <queue>

namespace tma {

ReducedSystem reduced_laplacian(const PlanarMap& m, const std::vector<char>& unknown)
{
    ReducedSystem s;
    s.index.assign(m.n_vertices, -1);
    for (int v = 0; v < m.n_vertices; ++v)
        if (unknown[v]) {
            s.index[v] = static_cast<int>(s.vertex.size());
            s.vertex.push_back(v);
        }
    const int n = static_cast<int>(s.vertex.size());
    s.a.n = n;
    s.a.ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
        int v = s.vertex[i];
        int cnt = 1;
        for (int k = m.out_ptr[v]; k < m.out_ptr[v + 1]; ++k)
            if (s.index[m.target(m.out_he[k])] >= 0) ++cnt;
        s.a.ptr[i + 1] = s.a.ptr[i] + cnt;
    }
    s.a.col.resize(s.a.ptr[n]);
    s.a.val.resize(s.a.ptr[n]);
    for (int i = 0; i < n; ++i) {
        int v = s.vertex[i];
        int pos = s.a.ptr[i];
        double diag = 0;
        const int dpos = pos++;
        for (int k = m.out_ptr[v]; k < m.out_ptr[v + 1]; ++k) {
            int h = m.out_he[k];
            double c = m.conductance(h);
            diag += c;
            int j = s.index[m.target(h)];
            if (j >= 0) {
                s.a.col[pos] = j;
                s.a.val[pos] = -c;
                ++pos;
            }
        }
        s.a.col[dpos] = i;
        s.a.val[dpos] = diag;
    }
    return s;
}

std::vector<double> reduced_rhs(const PlanarMap& m, const ReducedSystem& s, const std::vector<double>& vals)
{
    std::vector<double> b(s.vertex.size(), 0.0);
    for (std::size_t i = 0; i < s.vertex.size(); ++i) {
        int v = s.vertex[i];
        for (int k = m.out_ptr[v]; k < m.out_ptr[v + 1]; ++k) {
            int h = m.out_he[k];
            int t = m.target(h);
            if (s.index[t] < 0) b[i] += m.conductance(h) * vals[t];
        }
    }
    return b;
}

bool anchored(const PlanarMap& m, const ReducedSystem& s)
{
    const int n = static_cast<int>(s.vertex.size());
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    for (int i = 0; i < n; ++i) {
        int v = s.vertex[i];
        for (int k = m.out_ptr[v]; k < m.out_ptr[v + 1]; ++k)
            if (s.index[m.target(m.out_he[k])] < 0) {
                seen[i] = 1;
                q.push(i);
                break;
            }
    }
    while (!q.empty()) {
        int i = q.front();
        q.pop();
        int v = s.vertex[i];
        for (int k = m.out_ptr[v]; k < m.out_ptr[v + 1]; ++k) {
            int j = s.index[m.target(m.out_he[k])];
            if (j >= 0 && !seen[j]) {
                seen[j] = 1;
                q.push(j);
            }
        }
    }
    for (char c : seen)
        if (!c) return false;
    return true;
}

double flux_sum(const PlanarMap& m, const std::vector<double>& f, int v)
{
    double s = 0;
    for (int k = m.out_ptr[v]; k < m.out_ptr[v + 1]; ++k) {
        int h = m.out_he[k];
        s += m.conductance(h) * (f[m.target(h)] - f[v]);
    }
    return s;
}

cplx flux_sum(const PlanarMap& m, const std::vector<cplx>& f, int v)
{
    cplx s = 0;
    for (int k = m.out_ptr[v]; k < m.out_ptr[v + 1]; ++k) {
        int h = m.out_he[k];
        s += m.conductance(h) * (f[m.target(h)] - f[v]);
    }
    return s;
}

} // namespace tma
