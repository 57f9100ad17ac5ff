#pragma once

#include "cellhom/discrete.hpp"

// Plain single-threaded reference kernels, written for obviousness rather
// than speed: element-by-element loops with scatter assembly, no tables
// beyond the shared shape functions. The parallel kernels in SymGradOp are
// tested against these, and benchmarks/bench_kernels.cpp times the two side
// by side.
namespace cellhom::ref {

SymField sym_gradient(const SymGradOp& op, const MandelVec6& A, const VecField& phi);
NodalCovector weak_divergence(const SymGradOp& op, const SymField& sigma);
NodalCovector apply_stiffness(const SymGradOp& op, const MaterialMap& m, const VecField& v);

MandelVec6 cell_average(const SymField& e);
double inner(const SymField& a, const SymField& b);

} // namespace cellhom::ref
