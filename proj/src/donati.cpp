#include "cellhom/donati.hpp"

#include <cmath>

#include "cellhom/parallel.hpp"

namespace cellhom {

GradientFit donati_project_periodic(const SymGradOp& op, const SymField& tau, double tol) {
    GradientFit fit;
    fit.phi = fit_gradient(op, tau, tol, &fit.stats);
    fit.gradient = op.sym_gradient(fit.phi);
    fit.residual = tau;
    const double* pg = fit.gradient.s.data();
    double* pr = fit.residual.s.data();
    par::for_each(fit.residual.s.size(), [pg, pr](std::size_t i) { pr[i] -= pg[i]; });
    return fit;
}

LPFit donati_project_lp(const SymGradOp& op, const SymField& tau, double tol) {
    LPFit fit;
    const MandelVec6 A = cell_average(tau);
    // constants are W-orthogonal to gradients of periodic fields, so the
    // fluctuation fit is unchanged by removing the mean first
    SymField fluct = tau;
    for (std::size_t q = 0; q < fluct.samples(); ++q)
        Eigen::Map<MandelVec6>(fluct.at(q)) -= A;
    fit.field.A = A;
    fit.field.phi = fit_gradient(op, fluct, tol, &fit.stats);
    fit.gradient = op.sym_gradient(fit.field);
    fit.residual = tau;
    const double* pg = fit.gradient.s.data();
    double* pr = fit.residual.s.data();
    par::for_each(fit.residual.s.size(), [pg, pr](std::size_t i) { pr[i] -= pg[i]; });
    return fit;
}

HillMandel hill_mandel(const SymGradOp& op, const LPField& v, const SymField& sigma,
                       double precond_tol) {
    require_same(op.grid(), sigma.grid, "hill_mandel");
    HillMandel out;
    const double scale = op.gather_scale(sigma);
    const double divnorm = par::norm2(op.weak_divergence(sigma).flat());
    out.div_rel = scale > 0.0 ? divnorm / scale : 0.0;
    if (out.div_rel > precond_tol)
        throw PreconditionError("stress is not divergence-free: relative weak divergence " +
                                std::to_string(out.div_rel) + " exceeds " +
                                std::to_string(precond_tol));

    SymField ev = op.sym_gradient(v);
    out.mean_of_product = inner(sigma, ev) / op.lattice().volume;
    out.product_of_means = cell_average(sigma).dot(cell_average(ev));
    return out;
}

// --- nodal difference machinery ----------------------------------------------

int NodalSymField::comp(int i, int j) {
    static constexpr int map[3][3] = {{0, 5, 4}, {5, 1, 3}, {4, 3, 2}};
    return map[i][j];
}

double NodalMatField::max_abs() const {
    double mx = 0.0;
    for (double x : m) mx = std::max(mx, std::abs(x));
    return mx;
}

double Curvature::max_abs() const {
    double mx = 0.0;
    for (double x : r) mx = std::max(mx, std::abs(x));
    return mx;
}

namespace {

// central difference along lattice direction d of a multi-component nodal
// array (ncomp doubles per node), scaled by the lattice extent (the step in
// yhat is 1/n_d)
std::vector<double> lattice_diff(const Grid& g, const std::vector<double>& f, int ncomp, int d) {
    std::vector<double> out(f.size());
    const double scale = 0.5 * g.extent(d);
    par::for_each(g.node_count(), [&](std::size_t nid) {
        const auto [i, j, k] = g.node_coords(nid);
        int up[3] = {i, j, k}, dn[3] = {i, j, k};
        up[d] += 1;
        dn[d] -= 1;
        const std::size_t u = g.node_id(up[0], up[1], up[2]);
        const std::size_t w = g.node_id(dn[0], dn[1], dn[2]);
        for (int c = 0; c < ncomp; ++c)
            out[ncomp * nid + c] = scale * (f[ncomp * u + c] - f[ncomp * w + c]);
    });
    return out;
}

// physical first derivatives d/dy_a for a = 0,1,2 from the three lattice
// differences: d/dy_a = sum_d (G^-T)_{a d} Dhat_d
std::array<std::vector<double>, 3> physical_diffs(const Grid& g, const Lattice& lat,
                                                  const std::vector<double>& f, int ncomp) {
    std::array<std::vector<double>, 3> hat;
    for (int d = 0; d < 3; ++d) hat[d] = lattice_diff(g, f, ncomp, d);
    std::array<std::vector<double>, 3> out;
    for (int a = 0; a < 3; ++a) {
        out[a].assign(f.size(), 0.0);
        for (int d = 0; d < 3; ++d) {
            const double c = lat.GinvT(a, d);
            if (c == 0.0) continue;
            const double* ph = hat[d].data();
            double* po = out[a].data();
            par::for_each(f.size(), [c, ph, po](std::size_t i) { po[i] += c * ph[i]; });
        }
    }
    return out;
}

constexpr double eps_lc(int i, int j, int k) {
    return static_cast<double>((i - j) * (j - k) * (k - i)) / 2.0;
}

} // namespace

Curvature saint_venant_residual(const NodalSymField& e) {
    const Grid& g = e.grid;
    // second derivatives: d_a d_b applied as repeated first differences
    const auto d1 = physical_diffs(g, e.lattice, e.s, 6);
    std::array<std::array<std::vector<double>, 3>, 3> d2;
    for (int a = 0; a < 3; ++a) d2[a] = physical_diffs(g, e.lattice, d1[a], 6);

    Curvature R;
    R.grid = g;
    R.lattice = e.lattice;
    R.r.assign(81 * g.node_count(), 0.0);
    auto dd = [&](int a, int b, std::size_t node, int i, int j) {
        return d2[a][b][6 * node + NodalSymField::comp(i, j)];
    };
    par::for_each(g.node_count(), [&](std::size_t n) {
        double* out = R.r.data() + 81 * n;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    for (int l = 0; l < 3; ++l)
                        out[27 * i + 9 * j + 3 * k + l] =
                            dd(l, j, n, i, k) + dd(k, i, n, j, l) -
                            dd(l, i, n, j, k) - dd(k, j, n, i, l);
    });
    return R;
}

namespace {

// shared curl kernel: in has ncomp=9 or 6 with accessor; out_ij = eps_ilk d_l in_jk
NodalMatField curl_impl(const Grid& g, const Lattice& lat, const std::vector<double>& f,
                        int ncomp, int (*slot)(int, int)) {
    const auto d1 = physical_diffs(g, lat, f, ncomp);
    NodalMatField out(g, lat);
    par::for_each(g.node_count(), [&](std::size_t n) {
        double* o = out.at(n);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int l = 0; l < 3; ++l)
                    for (int k = 0; k < 3; ++k) {
                        const double eps = eps_lc(i, l, k);
                        if (eps != 0.0) s += eps * d1[l][ncomp * n + slot(j, k)];
                    }
                o[3 * i + j] = s;
            }
    });
    return out;
}

int slot_sym(int j, int k) { return NodalSymField::comp(j, k); }
int slot_mat(int j, int k) { return 3 * j + k; }

} // namespace

NodalMatField curl(const NodalSymField& e) {
    return curl_impl(e.grid, e.lattice, e.s, 6, slot_sym);
}

NodalMatField curl(const NodalMatField& m) {
    return curl_impl(m.grid, m.lattice, m.m, 9, slot_mat);
}

NodalMatField curl_curl(const NodalSymField& e) { return curl(curl(e)); }

NodalMatField curvature_contraction(const Curvature& R) {
    NodalMatField out(R.grid, R.lattice);
    par::for_each(R.grid.node_count(), [&](std::size_t n) {
        double* o = out.m.data() + 9 * n;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int l = 0; l < 3; ++l)
                    for (int k = 0; k < 3; ++k) {
                        const double ei = eps_lc(i, l, k);
                        if (ei == 0.0) continue;
                        for (int p = 0; p < 3; ++p)
                            for (int q = 0; q < 3; ++q) {
                                const double ej = eps_lc(j, p, q);
                                if (ej != 0.0) s += ei * ej * R.at(n, l, k, p, q);
                            }
                    }
                o[3 * i + j] = 0.25 * s;
            }
    });
    return out;
}

} // namespace cellhom
