#include "reduce.hpp"

#include <algorithm>
#include <cmath>

#include "slowman/fourier.hpp"

namespace slowman::detail {

namespace {

FourierSeries extract(const FourierSeries& s, std::size_t c) {
  FourierSeries out(1, s.size(), s.period());
  std::copy(s.component(c).begin(), s.component(c).end(), out.component(0).begin());
  return out;
}

void insert(FourierSeries& s, std::size_t c, const FourierSeries& part) {
  std::copy(part.component(0).begin(), part.component(0).end(), s.component(c).begin());
}

}  // namespace

ReduceResult reduce_solve(const Frame& bundle, const Frame& adjoint, const RealGrid& rhs, ReduceKind kind,
                          std::size_t n, double lambda_s, double small_divisor_tol) {
  const std::size_t d = bundle.dimension();
  const auto D = static_cast<Eigen::Index>(d);
  const std::size_t N = rhs.points();
  const std::size_t M = bundle.points();
  if (rhs.arity() != d || rhs.period() != 1) throw InvalidArgument("reduce_solve: rhs must be a period-1 grid of arity d");
  if (M != N * static_cast<std::size_t>(bundle.period) || adjoint.points() != M) {
    throw InvalidArgument("reduce_solve: frame grid does not match the right-hand side");
  }
  const bool manifold = kind == ReduceKind::manifold;

  // coordinates of the inhomogeneity in the frame: Q^T rhs, or -F^T rhs
  ComplexGrid proj(d, M, bundle.period);
  for (std::size_t g = 0; g < M; ++g) {
    Eigen::VectorXcd r(D);
    for (std::size_t c = 0; c < d; ++c) r(static_cast<Eigen::Index>(c)) = rhs(c, g % N);
    const Eigen::VectorXcd a = manifold ? Eigen::VectorXcd(adjoint.values[g].transpose() * r)
                                        : Eigen::VectorXcd(-(bundle.values[g].transpose() * r));
    for (std::size_t c = 0; c < d; ++c) proj(c, g) = a(static_cast<Eigen::Index>(c));
  }
  const FourierSeries coeffs = FourierSeries::analyze(proj);

  const double nd = static_cast<double>(n);
  const double base = manifold ? nd * lambda_s : (kind == ReduceKind::phase ? nd : nd - 1.0) * lambda_s;
  const double sign = manifold ? -1.0 : 1.0;
  const int order = static_cast<int>(n);
  const double T = bundle.T;

  ReduceResult res;
  res.min_divisor = INFINITY;
  FourierSeries sol(d, M, bundle.period);
  const bool free_mode = kind == ReduceKind::amplitude && n == 1;

  std::size_t j = 0;
  while (j < d) {
    const auto J = static_cast<Eigen::Index>(j);
    const bool pair = bundle.representation == Representation::real &&
                      bundle.classes[j] == FloquetClass::complex_pair_lead;
    if (pair) {
      const double alpha = bundle.generator(J, J).real();
      const double beta = bundle.generator(J, J + 1).real();
      const BlockSolveResult b = block_solve_2x2(extract(coeffs, j), extract(coeffs, j + 1), T, sign * alpha, beta,
                                                 base, small_divisor_tol, order);
      insert(sol, j, b.first);
      insert(sol, j + 1, b.second);
      res.min_divisor = std::min(res.min_divisor, b.min_divisor);
      j += 2;
      continue;
    }
    const cplx shift = cplx(base) + sign * bundle.generator(J, J);
    DiagonalSolveOptions opt;
    opt.small_divisor_tol = small_divisor_tol;
    opt.order = order;
    if (free_mode && j == 0) opt.free_modes.emplace_back(0, 0);
    DiagonalSolveResult r;
    try {
      r = solve_diagonal(extract(coeffs, j), T, std::span<const cplx>(&shift, 1), opt);
    } catch (const SmallDivisorError& e) {
      throw SmallDivisorError(e.k(), j, order, e.magnitude());
    }
    if (!r.free_residuals.empty()) res.free_residual = r.free_residuals.front();
    insert(sol, j, r.solution);
    res.min_divisor = std::min(res.min_divisor, r.min_divisor);
    ++j;
  }

  const ComplexGrid u = sol.synthesize();
  const Frame& map = manifold ? bundle : adjoint;
  ComplexGrid full(d, M, bundle.period);
  for (std::size_t g = 0; g < M; ++g) {
    Eigen::VectorXcd ug(D);
    for (std::size_t c = 0; c < d; ++c) ug(static_cast<Eigen::Index>(c)) = u(c, g);
    const Eigen::VectorXcd x = map.values[g] * ug;
    for (std::size_t c = 0; c < d; ++c) full(c, g) = x(static_cast<Eigen::Index>(c));
  }
  res.solution = RealGrid(d, N);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t g = 0; g < N; ++g) {
      res.solution(c, g) = full(c, g).real();
      res.imag_drift = std::max(res.imag_drift, std::abs(full(c, g).imag()));
    }
    for (std::size_t g = N; g < M; ++g) {
      res.period_mismatch = std::max(res.period_mismatch, std::abs(full(c, g) - full(c, g - N)));
    }
  }
  return res;
}

}  // namespace slowman::detail
