#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "cellhom/donati.hpp"
#include "cellhom/solver.hpp"

namespace cellhom {

// --- inequality constants ------------------------------------------------------

// Suprema of gradient/symmetric-gradient quotients over zero-mean periodic
// fields, estimated by generalized power iteration on the operator pencils
// (inner solves by deflated CG). lambda_grad also rates the explicit
// transverse-sine candidate, whose quotient is exactly 2 on every grid; the
// reported value is the larger of the two lower bounds (the discrete
// supremum itself is 2).
struct KornReport {
    double lambda_grad = 0.0;       // sup |grad v|^2 / |sym grad v|^2
    double lambda_grad_power = 0.0; // raw power-iteration estimate
    double candidate_quotient = 0.0;
    double korn_constant = 0.0;  // sqrt sup (|v|^2+|grad v|^2)/(|v|^2+|sym grad v|^2)
    double equiv_constant = 0.0; // sqrt sup (|v|^2+|grad v|^2)/|sym grad v|^2
    int power_steps = 0;
    int inner_iterations = 0;
};
KornReport korn_ratios(const SymGradOp& op, std::uint64_t seed, double quotient_tol = 1e-8,
                       int max_steps = 200);

// quotient |grad v|^2_W / |sym grad v|^2_W of one field
double gradient_quotient(const SymGradOp& op, const VecField& v);

// nodal interpolant of (sin(2 pi yhat_2), 0, 0)
VecField transverse_sine(const Grid& g);

// --- trace audits ---------------------------------------------------------------

struct TraceReport {
    int direction = 0;
    double max_mismatch = 0.0;
    std::vector<double> mismatch; // one entry per face node (or per plane, see op)
};

// samples of u on the yhat_d = 0 plane (side 0) or the yhat_d = 1 plane
// (side 1, evaluated through the periodic wrap)
std::vector<Vec3> face_samples(const LPField& u, const Lattice& lat, int direction, int side);

// detector core: |hi - lo - expected_jump| per face node
TraceReport compare_face_samples(int direction, const std::vector<Vec3>& lo,
                                 const std::vector<Vec3>& hi, const Vec3& expected_jump);

// all three directions; for u = A y + phi the expected jump across face d is
// A g_d. The periodic part wraps structurally, so a well-formed field
// reports exactly zero; the detector exists for data that bypassed the wrap.
std::array<TraceReport, 3> trace_audit_h1(const LPField& u, const Lattice& lat);

// Normal-flux continuity across the yhat_d = 0 face: per face node, the
// weak-divergence functional of the straddling hat function, normalized by
// the face-cell area. Zero to roundoff for constant fields, <= solver
// tolerance for make_divfree outputs, O(1) localized at the seam for fields
// with a genuine flux jump. mismatch holds per-plane maxima over all n_d
// planes (entry p: plane yhat_d = p/n_d), max_mismatch the face-0 value.
TraceReport trace_audit_hdiv(const SymGradOp& op, const SymField& sigma, int direction);

// --- split / join round trip ----------------------------------------------------

// Half of a nodal field along `dir`: layers lo..hi inclusive, boundary
// planes duplicated (hi - lo + 1 layers of nodes).
struct H1Half {
    Grid grid; // full grid
    int dir = 0;
    int lo = 0, hi = 0;
    std::vector<double> v; // 3 per node, layer-major
    std::size_t layer_nodes() const;
};

std::pair<H1Half, H1Half> split_h1(const VecField& u, int dir);

struct JoinReport {
    bool ok = false;
    double interface_defect = 0.0; // max mismatch on the shared inner plane
    double wrap_defect = 0.0;      // max mismatch on the outer (periodic) plane
    std::vector<double> interface_mismatch; // per node on the seam plane
};

// validates the duplicated planes agree within tol, then merges
JoinReport join_h1(const H1Half& a, const H1Half& b, double tol, VecField* out);

// element layers [lo, lo+count) along dir
struct HdivHalf {
    Grid grid;
    Lattice lattice;
    int dir = 0;
    int lo = 0, count = 0;
    std::vector<double> s; // 48 per element, layer-major
};

std::pair<HdivHalf, HdivHalf> split_hdiv(const SymField& sigma, int dir);

// merges and rates normal-flux continuity on the two seam planes (tent
// functionals as in trace_audit_hdiv); ok if both defects are within tol
JoinReport join_hdiv(const SymGradOp& op, const HdivHalf& a, const HdivHalf& b, double tol,
                     SymField* out);

// --- oscillating-integral demos -------------------------------------------------

// f periodic on the unit cube in lattice coordinates; max_freq bounds the
// trig frequency per axis (sets quadrature resolution)
struct PeriodicTestFn {
    std::function<double(const Vec3&)> f;
    std::array<int, 3> max_freq{1, 1, 1};
    std::string name;
};

// separable window phi(x) = p0(x0) p1(x1) p2(x2) on the unit cube
struct SeparableWindow {
    std::array<std::function<double(double)>, 3> factor;
    std::array<int, 3> max_freq{1, 1, 1};
    std::string name;
};

struct OscillationRecord {
    int n = 1;
    double value = 0.0; // integral of f(n x) phi(x) over the unit cube
    double limit = 0.0; // mean(f) * integral(phi)
    double error = 0.0; // value - limit, computed as one difference integral
};

// Evaluated through the exact substitution
//   integral f(n x) phi(x) dx = integral f(y) Phi_n(y) dy,
//   Phi_n(y) = n^-3 sum_k phi((y + k)/n),
// so the cost is set by the frequency of f, not by n. A constant window
// factor makes Phi_n - integral(phi) vanish identically, hence error == 0.
std::vector<OscillationRecord> oscillation_demo(const PeriodicTestFn& f,
                                                const SeparableWindow& phi,
                                                const std::vector<int>& ns);

// Row `row` of sigma against row `row` of grad(v), both oscillating: each
// record holds integral sigma_row(n y) . grad_row(n y) phi(y) over the unit
// cube, its div-curl limit <avg sigma_row, avg grad_row> integral(phi), and
// the difference. sigma must be weakly divergence-free (checked as in
// hill_mandel). Unit-cube lattice only.
std::vector<OscillationRecord> div_curl_demo(const SymGradOp& op, const SymField& sigma,
                                             const LPField& v, int row,
                                             const SeparableWindow& phi,
                                             const std::vector<int>& ns,
                                             double precond_tol = 1e-8);

// least-squares slope of log|error| against log n (entries with error != 0)
double fitted_decay_exponent(const std::vector<OscillationRecord>& records);

} // namespace cellhom
