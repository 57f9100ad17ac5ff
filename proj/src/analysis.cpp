#include "cellhom/analysis.hpp"

#include <cmath>
#include <numbers>

#include "cellhom/parallel.hpp"
#include "cellhom/random_fields.hpp"

namespace cellhom {

// --- inequality constants ------------------------------------------------------

VecField transverse_sine(const Grid& g) {
    VecField v(g);
    for (int k = 0; k < g.n3; ++k)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i)
                v.at(g.node_id(i, j, k))[0] =
                    std::sin(2.0 * std::numbers::pi * static_cast<double>(j) / g.n2);
    return v;
}

double gradient_quotient(const SymGradOp& op, const VecField& v) {
    LPField u;
    u.phi = v;
    const GradField full = op.full_gradient(u);
    const SymField sym = op.sym_gradient(v);
    const double den = inner(sym, sym);
    if (!(den > 0.0)) throw PreconditionError("gradient_quotient of a rigid field");
    return inner(full, full) / den;
}

namespace {

struct PencilOps {
    // quadratic forms and operator applications for the three pencils
    const SymGradOp& op;
    MaterialMap unit;
    VecField diag_sym;  // Jacobi diagonal of the sym-grad stiffness
    double mass_diag;   // mass-matrix diagonal (same value at every node)

    explicit PencilOps(const SymGradOp& o)
        : op(o),
          unit(make_homogeneous(o.grid(), Phase::anisotropic(MandelMat66::Identity()),
                                o.lattice())),
          diag_sym(o.stiffness_diagonal(unit)) {
        double d = 0.0;
        for (int q = 0; q < 8; ++q)
            for (int c = 0; c < 8; ++c)
                // diagonal of the element mass matrix, summed over the 8
                // elements sharing a node = over all corners c
                d += o.shape_value(q, c) * o.shape_value(q, c);
        mass_diag = d * o.quad_weight();
    }

    NodalCovector apply_grad(const VecField& v) const {
        GradField h = op.full_gradient(v);
        NodalCovector r = op.weak_divergence_full(h);
        for (auto& x : r.v) x = -x;
        return r;
    }
    NodalCovector apply_sym(const VecField& v) const { return op.apply_stiffness(unit, v); }
};

// largest eigenvalue of the pencil A x = lambda B x on the zero-mean
// subspace: power iteration x <- B^{-1} A x with CG inner solves
struct PowerResult {
    double value = 0.0;
    int steps = 0;
    int inner_iterations = 0;
};

PowerResult pencil_power(
    const std::function<void(const VecField&, NodalCovector&)>& applyA,
    const std::function<void(const VecField&, NodalCovector&)>& applyB,
    std::span<const double> jacobiB, const Grid& g, std::uint64_t seed, double quotient_tol,
    int max_steps) {
    VecField x = random_periodic(g, seed);
    VecField bx(g);
    NodalCovector cov(g);
    PowerResult res;

    auto applyB_flat = [&](std::span<const double> in, std::span<double> out) {
        VecField shell(g);
        std::copy(in.begin(), in.end(), shell.v.begin());
        NodalCovector r(g);
        applyB(shell, r);
        std::copy(r.v.begin(), r.v.end(), out.begin());
    };

    double prev = 0.0;
    for (int s = 1; s <= max_steps; ++s) {
        // Rayleigh quotient of the pencil at x
        applyA(x, cov);
        const double num = pair(cov, x);
        applyB(x, cov);
        const double den = pair(cov, x);
        const double rq = num / den;
        res.value = rq;
        res.steps = s;
        if (s > 1 && std::abs(rq - prev) <= quotient_tol * std::abs(rq)) break;
        prev = rq;

        // x <- B^{-1} A x, normalized
        applyA(x, cov);
        SolveStats st = pcg(applyB_flat, cov.flat(), bx.flat(), jacobiB, 1e-10,
                            default_max_iter(cov.v.size()));
        res.inner_iterations += st.iterations;
        const double nrm = par::norm2(bx.flat());
        if (!(nrm > 0.0)) break;
        for (auto& t : bx.v) t /= nrm;
        x = bx;
    }
    return res;
}

} // namespace

KornReport korn_ratios(const SymGradOp& op, std::uint64_t seed, double quotient_tol,
                       int max_steps) {
    const Grid& g = op.grid();
    PencilOps P(op);
    KornReport rep;

    // pencil 1: |grad|^2 vs |sym grad|^2
    {
        auto A = [&](const VecField& v, NodalCovector& r) { r = P.apply_grad(v); };
        auto B = [&](const VecField& v, NodalCovector& r) { r = P.apply_sym(v); };
        PowerResult pr = pencil_power(A, B, P.diag_sym.flat(), g, seed, quotient_tol, max_steps);
        rep.lambda_grad_power = pr.value;
        rep.power_steps += pr.steps;
        rep.inner_iterations += pr.inner_iterations;
    }
    rep.candidate_quotient = gradient_quotient(op, transverse_sine(g));
    rep.lambda_grad = std::max(rep.lambda_grad_power, rep.candidate_quotient);

    // Jacobi diagonal for the shifted pencils (mass + stiffness)
    VecField diag_full = P.diag_sym;
    for (auto& d : diag_full.v) d += P.mass_diag;

    // pencil 2: (|v|^2 + |grad v|^2) vs (|v|^2 + |sym grad v|^2)
    {
        auto A = [&](const VecField& v, NodalCovector& r) {
            r = P.apply_grad(v);
            NodalCovector mv = op.apply_mass(v);
            for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] += mv.v[i];
        };
        auto B = [&](const VecField& v, NodalCovector& r) {
            r = P.apply_sym(v);
            NodalCovector mv = op.apply_mass(v);
            for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] += mv.v[i];
        };
        PowerResult pr =
            pencil_power(A, B, diag_full.flat(), g, seed + 1, quotient_tol, max_steps);
        rep.korn_constant = std::sqrt(pr.value);
        rep.power_steps += pr.steps;
        rep.inner_iterations += pr.inner_iterations;
    }

    // pencil 3: (|v|^2 + |grad v|^2) vs |sym grad v|^2
    {
        auto A = [&](const VecField& v, NodalCovector& r) {
            r = P.apply_grad(v);
            NodalCovector mv = op.apply_mass(v);
            for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] += mv.v[i];
        };
        auto B = [&](const VecField& v, NodalCovector& r) { r = P.apply_sym(v); };
        PowerResult pr =
            pencil_power(A, B, P.diag_sym.flat(), g, seed + 2, quotient_tol, max_steps);
        rep.equiv_constant = std::sqrt(pr.value);
        rep.power_steps += pr.steps;
        rep.inner_iterations += pr.inner_iterations;
    }
    return rep;
}

// --- trace audits ---------------------------------------------------------------

namespace {

void face_axes(int direction, int& a, int& b) {
    a = (direction + 1) % 3;
    b = (direction + 2) % 3;
}

} // namespace

std::vector<Vec3> face_samples(const LPField& u, const Lattice& lat, int direction, int side) {
    const Grid& g = u.phi.grid;
    int a, b;
    face_axes(direction, a, b);
    const int na = g.extent(a), nb = g.extent(b);
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(na) * nb);
    for (int jb = 0; jb < nb; ++jb)
        for (int ja = 0; ja < na; ++ja) {
            Vec3 yhat = Vec3::Zero();
            yhat[direction] = side == 0 ? 0.0 : 1.0;
            yhat[a] = static_cast<double>(ja) / na;
            yhat[b] = static_cast<double>(jb) / nb;
            out.push_back(eval_lp(u, lat, yhat));
        }
    return out;
}

TraceReport compare_face_samples(int direction, const std::vector<Vec3>& lo,
                                 const std::vector<Vec3>& hi, const Vec3& expected_jump) {
    if (lo.size() != hi.size()) throw DimensionError("face sample arrays differ in size");
    TraceReport rep;
    rep.direction = direction;
    rep.mismatch.resize(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const double m = (hi[i] - lo[i] - expected_jump).cwiseAbs().maxCoeff();
        rep.mismatch[i] = m;
        rep.max_mismatch = std::max(rep.max_mismatch, m);
    }
    return rep;
}

std::array<TraceReport, 3> trace_audit_h1(const LPField& u, const Lattice& lat) {
    std::array<TraceReport, 3> out;
    const Mat3 A = from_mandel(u.A);
    for (int d = 0; d < 3; ++d) {
        const Vec3 jump = A * lat.vector(d);
        out[d] = compare_face_samples(d, face_samples(u, lat, d, 0),
                                      face_samples(u, lat, d, 1), jump);
    }
    return out;
}

TraceReport trace_audit_hdiv(const SymGradOp& op, const SymField& sigma, int direction) {
    require_same(op.grid(), sigma.grid, "trace_audit_hdiv");
    const Grid& g = op.grid();
    int a, b;
    face_axes(direction, a, b);
    // area of one face cell: |g_a x g_b| / (n_a n_b)
    const Vec3 ga = op.lattice().vector(a), gb = op.lattice().vector(b);
    const double face_mass =
        ga.cross(gb).norm() / (static_cast<double>(g.extent(a)) * g.extent(b));

    const NodalCovector div = op.weak_divergence(sigma);
    TraceReport rep;
    rep.direction = direction;
    rep.mismatch.assign(g.extent(direction), 0.0);
    for (std::size_t n = 0; n < g.node_count(); ++n) {
        const auto c = g.node_coords(n);
        const double* d = div.at(n);
        const double m =
            std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / face_mass;
        auto& slot = rep.mismatch[static_cast<std::size_t>(c[direction])];
        slot = std::max(slot, m);
    }
    rep.max_mismatch = rep.mismatch[0];
    return rep;
}

// --- split / join ----------------------------------------------------------------

std::size_t H1Half::layer_nodes() const {
    int a, b;
    face_axes(dir, a, b);
    return static_cast<std::size_t>(grid.extent(a)) * grid.extent(b);
}

namespace {

// node id within a layer-major half array
std::size_t half_index(const Grid& g, int dir, int layer_offset, int ja, int jb) {
    int a, b;
    face_axes(dir, a, b);
    return (static_cast<std::size_t>(layer_offset) * g.extent(b) + jb) * g.extent(a) + ja;
}

std::size_t full_node(const Grid& g, int dir, int layer, int ja, int jb) {
    int a, b;
    face_axes(dir, a, b);
    int c[3];
    c[dir] = layer;
    c[a] = ja;
    c[b] = jb;
    return g.node_id(c[0], c[1], c[2]);
}

} // namespace

std::pair<H1Half, H1Half> split_h1(const VecField& u, int dir) {
    const Grid& g = u.grid;
    const int n = g.extent(dir);
    const int mid = n / 2;
    int a, b;
    face_axes(dir, a, b);

    auto take = [&](int lo, int hi) {
        H1Half h;
        h.grid = g;
        h.dir = dir;
        h.lo = lo;
        h.hi = hi;
        h.v.resize(3 * static_cast<std::size_t>(hi - lo + 1) * h.layer_nodes());
        for (int l = lo; l <= hi; ++l)
            for (int jb = 0; jb < g.extent(b); ++jb)
                for (int ja = 0; ja < g.extent(a); ++ja) {
                    const std::size_t src = full_node(g, dir, l, ja, jb); // wraps at l == n
                    const std::size_t dst = half_index(g, dir, l - lo, ja, jb);
                    for (int comp = 0; comp < 3; ++comp)
                        h.v[3 * dst + comp] = u.v[3 * src + comp];
                }
        return h;
    };
    return {take(0, mid), take(mid, n)};
}

JoinReport join_h1(const H1Half& a, const H1Half& b, double tol, VecField* out) {
    if (!(a.grid == b.grid) || a.dir != b.dir)
        throw DimensionError("halves come from different grids");
    if (a.hi != b.lo || b.hi % a.grid.extent(a.dir) != a.lo)
        throw DimensionError("halves do not abut");
    const Grid& g = a.grid;
    const int dir = a.dir;
    int ax, bx;
    face_axes(dir, ax, bx);
    const std::size_t ln = a.layer_nodes();

    JoinReport rep;
    rep.interface_mismatch.assign(ln, 0.0);
    auto plane_diff = [&](const H1Half& h1, int l1, const H1Half& h2, int l2,
                          std::vector<double>* per_node) {
        double mx = 0.0;
        for (int jb = 0; jb < g.extent(bx); ++jb)
            for (int ja = 0; ja < g.extent(ax); ++ja) {
                const std::size_t i1 = half_index(g, dir, l1 - h1.lo, ja, jb);
                const std::size_t i2 = half_index(g, dir, l2 - h2.lo, ja, jb);
                double m = 0.0;
                for (int comp = 0; comp < 3; ++comp)
                    m = std::max(m, std::abs(h1.v[3 * i1 + comp] - h2.v[3 * i2 + comp]));
                if (per_node) (*per_node)[half_index(g, dir, 0, ja, jb)] = m;
                mx = std::max(mx, m);
            }
        return mx;
    };
    rep.interface_defect = plane_diff(a, a.hi, b, b.lo, &rep.interface_mismatch);
    rep.wrap_defect = plane_diff(b, b.hi, a, a.lo, nullptr);
    rep.ok = rep.interface_defect <= tol && rep.wrap_defect <= tol;
    if (rep.ok && out) {
        *out = VecField(g);
        for (int l = 0; l < g.extent(dir); ++l) {
            const H1Half& h = l <= a.hi ? a : b;
            for (int jb = 0; jb < g.extent(bx); ++jb)
                for (int ja = 0; ja < g.extent(ax); ++ja) {
                    const std::size_t src = half_index(g, dir, l - h.lo, ja, jb);
                    const std::size_t dst = full_node(g, dir, l, ja, jb);
                    for (int comp = 0; comp < 3; ++comp)
                        out->v[3 * dst + comp] = h.v[3 * src + comp];
                }
        }
    }
    return rep;
}

std::pair<HdivHalf, HdivHalf> split_hdiv(const SymField& sigma, int dir) {
    const Grid& g = sigma.grid;
    const int n = g.extent(dir);
    const int mid = n / 2;
    int a, b;
    face_axes(dir, a, b);
    auto take = [&](int lo, int count) {
        HdivHalf h;
        h.grid = g;
        h.lattice = sigma.lattice;
        h.dir = dir;
        h.lo = lo;
        h.count = count;
        h.s.resize(48 * static_cast<std::size_t>(count) * g.extent(a) * g.extent(b));
        std::size_t dst = 0;
        for (int l = lo; l < lo + count; ++l)
            for (int jb = 0; jb < g.extent(b); ++jb)
                for (int ja = 0; ja < g.extent(a); ++ja) {
                    const std::size_t el = full_node(g, dir, l, ja, jb);
                    for (int t = 0; t < 48; ++t) h.s[dst++] = sigma.s[48 * el + t];
                }
        return h;
    };
    return {take(0, mid), take(mid, n - mid)};
}

JoinReport join_hdiv(const SymGradOp& op, const HdivHalf& a, const HdivHalf& b, double tol,
                     SymField* out) {
    if (!(a.grid == b.grid) || a.dir != b.dir)
        throw DimensionError("halves come from different grids");
    const Grid& g = a.grid;
    const int n = g.extent(a.dir);
    if (a.lo != 0 || b.lo != a.count || a.count + b.count != n)
        throw DimensionError("halves do not cover the grid");
    int ax, bx;
    face_axes(a.dir, ax, bx);

    SymField merged(g, a.lattice);
    auto scatter = [&](const HdivHalf& h) {
        std::size_t src = 0;
        for (int l = h.lo; l < h.lo + h.count; ++l)
            for (int jb = 0; jb < g.extent(bx); ++jb)
                for (int ja = 0; ja < g.extent(ax); ++ja) {
                    const std::size_t el = full_node(g, a.dir, l, ja, jb);
                    for (int t = 0; t < 48; ++t) merged.s[48 * el + t] = h.s[src++];
                }
    };
    scatter(a);
    scatter(b);

    const TraceReport flux = trace_audit_hdiv(op, merged, a.dir);
    JoinReport rep;
    rep.interface_defect = flux.mismatch[static_cast<std::size_t>(b.lo)];
    rep.wrap_defect = flux.mismatch[0];
    rep.interface_mismatch = flux.mismatch;
    rep.ok = rep.interface_defect <= tol && rep.wrap_defect <= tol;
    if (rep.ok && out) *out = std::move(merged);
    return rep;
}

// --- decay fit -------------------------------------------------------------------

double fitted_decay_exponent(const std::vector<OscillationRecord>& records) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (const auto& r : records) {
        if (r.error == 0.0 || r.n < 1) continue;
        const double x = std::log(static_cast<double>(r.n));
        const double y = std::log(std::abs(r.error));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) throw PreconditionError("need at least two nonzero errors to fit a slope");
    const double denom = m * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0)) throw PreconditionError("degenerate abscissae in decay fit");
    return (m * sxy - sx * sy) / denom;
}

} // namespace cellhom
