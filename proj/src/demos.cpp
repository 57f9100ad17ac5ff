#include <cmath>

#include "cellhom/analysis.hpp"
#include "cellhom/element.hpp"
#include "cellhom/parallel.hpp"

namespace cellhom {

namespace {

// composite 2-point Gauss rule on [0,1]
struct Rule1D {
    std::vector<double> x, w;
};

Rule1D composite_gauss(int cells) {
    Rule1D r;
    const double g = 0.5 / std::sqrt(3.0);
    r.x.reserve(2 * cells);
    r.w.reserve(2 * cells);
    const double h = 1.0 / cells;
    for (int c = 0; c < cells; ++c) {
        r.x.push_back((c + 0.5 - g) * h);
        r.x.push_back((c + 0.5 + g) * h);
        r.w.push_back(0.5 * h);
        r.w.push_back(0.5 * h);
    }
    return r;
}

bool all_equal(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] != v[0]) return false;
    return true;
}

// integral over [0,1]; a constant integrand integrates to itself exactly
double integrate_1d(const std::vector<double>& vals, const Rule1D& r) {
    if (!vals.empty() && all_equal(vals)) return vals[0];
    double s = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) s += r.w[i] * vals[i];
    return s;
}

// translate average (1/n) sum_k phi((y+k)/n); for a constant factor every
// translate is bitwise identical and the average is returned exactly
double translate_average(const std::function<double(double)>& phi, double y, int n) {
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) t[static_cast<std::size_t>(k)] = phi((y + k) / n);
    if (all_equal(t)) return t[0];
    double s = 0.0;
    for (double v : t) s += v;
    return s / n;
}

} // namespace

std::vector<OscillationRecord> oscillation_demo(const PeriodicTestFn& f,
                                                const SeparableWindow& phi,
                                                const std::vector<int>& ns) {
    // resolution driven by the frequencies of f and of the window; the
    // translate count n never enters (Phi_n only gets smoother with n)
    std::array<Rule1D, 3> rule;
    for (int d = 0; d < 3; ++d)
        rule[d] = composite_gauss(12 * (f.max_freq[d] + phi.max_freq[d] + 1));

    // the window's plain integral, per axis
    std::array<double, 3> ell;
    std::array<std::vector<double>, 3> phi_vals;
    for (int d = 0; d < 3; ++d) {
        phi_vals[d].resize(rule[d].x.size());
        for (std::size_t i = 0; i < rule[d].x.size(); ++i)
            phi_vals[d][i] = phi.factor[d](rule[d].x[i]);
        ell[d] = integrate_1d(phi_vals[d], rule[d]);
    }
    const double L = ell[0] * ell[1] * ell[2];

    // mean of f over the cell (reused by every record)
    const std::size_t n0 = rule[0].x.size(), n1 = rule[1].x.size(), n2 = rule[2].x.size();
    auto sweep = [&](auto&& weight_at) {
        return par::sum(n0 * n1 * n2, [&](std::size_t idx) {
            const std::size_t i = idx % n0;
            const std::size_t j = (idx / n0) % n1;
            const std::size_t k = idx / (n0 * n1);
            const Vec3 y(rule[0].x[i], rule[1].x[j], rule[2].x[k]);
            const double w = rule[0].w[i] * rule[1].w[j] * rule[2].w[k];
            return w * f.f(y) * weight_at(i, j, k);
        });
    };
    const double mean_f = sweep([](std::size_t, std::size_t, std::size_t) { return 1.0; });

    std::vector<OscillationRecord> out;
    for (int n : ns) {
        if (n < 1) throw ConfigError("translate count must be >= 1");
        // per-axis translate averages at the quadrature abscissae
        std::array<std::vector<double>, 3> Phi;
        for (int d = 0; d < 3; ++d) {
            Phi[d].resize(rule[d].x.size());
            for (std::size_t i = 0; i < rule[d].x.size(); ++i)
                Phi[d][i] = translate_average(phi.factor[d], rule[d].x[i], n);
        }
        OscillationRecord rec;
        rec.n = n;
        // one difference integral, so quadrature noise scales with the error
        // itself and a constant window yields an exact zero
        rec.error = sweep([&](std::size_t i, std::size_t j, std::size_t k) {
            return Phi[0][i] * Phi[1][j] * Phi[2][k] - L;
        });
        rec.limit = mean_f * L;
        rec.value = rec.limit + rec.error;
        out.push_back(rec);
    }
    return out;
}

std::vector<OscillationRecord> div_curl_demo(const SymGradOp& op, const SymField& sigma,
                                             const LPField& v, int row,
                                             const SeparableWindow& phi,
                                             const std::vector<int>& ns, double precond_tol) {
    require_same(op.grid(), sigma.grid, "div_curl_demo");
    if (row < 0 || row > 2) throw ConfigError("row index outside 0..2");
    if ((op.lattice().G - Mat3::Identity()).cwiseAbs().maxCoeff() > 0.0)
        throw ConfigError("div_curl_demo is defined on the unit-cube lattice");

    // same admission test as hill_mandel: rows of sigma must be (weakly)
    // divergence-free for the product-of-means limit to hold
    const double scale = op.gather_scale(sigma);
    const double div_rel =
        scale > 0.0 ? par::norm2(op.weak_divergence(sigma).flat()) / scale : 0.0;
    if (div_rel > precond_tol)
        throw PreconditionError("div_curl_demo: stress is not divergence-free (relative " +
                                std::to_string(div_rel) + ")");

    const GradField grad = op.full_gradient(v);
    const Grid& g = op.grid();
    const auto& tab = detail::element_tables();

    // product of the limits: <avg sigma row, avg grad row>
    const Mat3 avg_sigma = from_mandel(cell_average(sigma));
    Vec3 avg_grad_row = Vec3::Zero();
    {
        const double count = static_cast<double>(grad.samples());
        for (int l = 0; l < 3; ++l) {
            const double* base = grad.g.data() + 3 * row + l;
            avg_grad_row[l] =
                par::sum(grad.samples(), [base](std::size_t q) { return base[9 * q]; }) / count;
        }
    }
    const double product_of_means = avg_sigma.row(row).dot(avg_grad_row);

    // window integral via a frequency-matched 1-D rule
    std::array<double, 3> ell;
    for (int d = 0; d < 3; ++d) {
        Rule1D r = composite_gauss(32 * (phi.max_freq[d] + 1));
        std::vector<double> vals(r.x.size());
        for (std::size_t i = 0; i < r.x.size(); ++i) vals[i] = phi.factor[d](r.x[i]);
        ell[d] = integrate_1d(vals, r);
    }
    const double L = ell[0] * ell[1] * ell[2];

    // pointwise products a . b at the native quadrature points
    std::vector<double> ab(sigma.samples());
    par::for_each(g.element_count(), [&](std::size_t el) {
        for (int q = 0; q < 8; ++q) {
            const std::size_t s = 8 * el + q;
            const Mat3 sm = from_mandel(sigma.mandel(s));
            const double* h = grad.at(s);
            ab[s] = sm(row, 0) * h[3 * row + 0] + sm(row, 1) * h[3 * row + 1] +
                    sm(row, 2) * h[3 * row + 2];
        }
    });
    const double w = sigma.weight();

    std::vector<OscillationRecord> out;
    for (int n : ns) {
        if (n < 1) throw ConfigError("translate count must be >= 1");
        // translate averages at the 2*n_d distinct Gauss coordinates per axis
        std::array<std::vector<double>, 3> Phi;
        for (int d = 0; d < 3; ++d) {
            const int nd = g.extent(d);
            Phi[d].resize(2 * static_cast<std::size_t>(nd));
            for (int cell = 0; cell < nd; ++cell)
                for (int loc = 0; loc < 2; ++loc) {
                    const double y = (cell + tab.xi[loc][0]) / nd;
                    Phi[d][2 * cell + loc] = translate_average(phi.factor[d], y, n);
                }
        }
        OscillationRecord rec;
        rec.n = n;
        rec.value = w * par::sum(sigma.samples(), [&](std::size_t s) {
            const std::size_t el = s / 8;
            const int q = static_cast<int>(s % 8);
            const auto c = g.node_coords(el);
            const int qx = q & 1, qy = (q >> 1) & 1, qz = (q >> 2) & 1;
            return ab[s] * Phi[0][2 * c[0] + qx] * Phi[1][2 * c[1] + qy] *
                   Phi[2][2 * c[2] + qz];
        });
        rec.limit = product_of_means * L;
        rec.error = rec.value - rec.limit;
        out.push_back(rec);
    }
    return out;
}

} // namespace cellhom
