#include "slowman/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace slowman {
namespace {

// FFTW's planner is not thread-safe, execution is. Plans are created once per
// (size, direction) with FFTW_ESTIMATE so the arithmetic does not depend on
// timing measurements, and run through the new-array interface on buffers from
// fftw_malloc (same alignment as the planning buffers).
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE);
    fftw_free(buf);
    if (p == nullptr) throw NumericalError("FFTW could not create a plan of length " + std::to_string(n));
    plans_.emplace(key, p);
    return p;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

struct FftwFree {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};

void transform(std::span<cplx> data, int sign) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw InvalidArgument("FFT length must be a power of two");
  fftw_plan plan = PlanCache::instance().get(n, sign);
  std::unique_ptr<fftw_complex, FftwFree> buf(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
  std::copy(data.begin(), data.end(), reinterpret_cast<cplx*>(buf.get()));
  fftw_execute_dft(plan, buf.get(), buf.get());
  std::copy_n(reinterpret_cast<const cplx*>(buf.get()), n, data.begin());
}

template <class T>
FourierSeries analyze_impl(const Grid<T>& grid) {
  FourierSeries s(grid.arity(), grid.points(), grid.period());
  for (std::size_t c = 0; c < grid.arity(); ++c) {
    auto src = grid.component(c);
    auto dst = s.component(c);
    std::copy(src.begin(), src.end(), dst.begin());
    fft_forward(dst);
  }
  return s;
}

}  // namespace

bool is_power_of_two(std::size_t n) noexcept { return n >= 2 && (n & (n - 1)) == 0; }

void fft_forward(std::span<cplx> data) {
  transform(data, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (cplx& z : data) z *= scale;
}

void fft_inverse(std::span<cplx> data) { transform(data, FFTW_BACKWARD); }

FourierSeries::FourierSeries(std::size_t arity, std::size_t size, int period)
    : arity_(arity), size_(size), period_(period), coeffs_(arity * size) {
  if (!is_power_of_two(size)) throw InvalidArgument("Fourier size must be a power of two >= 2");
  if (period != 1 && period != 2) throw InvalidArgument("Fourier period must be 1 or 2");
}

FourierSeries FourierSeries::analyze(const RealGrid& grid) { return analyze_impl(grid); }
FourierSeries FourierSeries::analyze(const ComplexGrid& grid) { return analyze_impl(grid); }

ComplexGrid FourierSeries::synthesize() const {
  ComplexGrid g(arity_, size_, period_);
  for (std::size_t c = 0; c < arity_; ++c) {
    auto src = component(c);
    auto dst = g.component(c);
    std::copy(src.begin(), src.end(), dst.begin());
    fft_inverse(dst);
  }
  return g;
}

RealGrid FourierSeries::synthesize_real() const { return real_part(synthesize()); }

std::size_t FourierSeries::index(long k, std::size_t size) noexcept {
  const long n = static_cast<long>(size);
  return static_cast<std::size_t>(((k % n) + n) % n);
}

long FourierSeries::wavenumber(std::size_t index, std::size_t size) noexcept {
  const long i = static_cast<long>(index);
  const long n = static_cast<long>(size);
  return i < n / 2 ? i : i - n;
}

cplx FourierSeries::evaluate(std::size_t c, double theta) const {
  const double w = 2.0 * std::numbers::pi * theta / period_;
  cplx sum{0.0, 0.0};
  auto coeffs = component(c);
  for (std::size_t i = 0; i < size_; ++i) {
    const double kw = static_cast<double>(wavenumber(i, size_)) * w;
    sum += coeffs[i] * cplx(std::cos(kw), std::sin(kw));
  }
  return sum;
}

std::vector<cplx> FourierSeries::evaluate(double theta) const {
  std::vector<cplx> v(arity_);
  for (std::size_t c = 0; c < arity_; ++c) v[c] = evaluate(c, theta);
  return v;
}

bool FourierSeries::is_conjugate_symmetric(double tol) const {
  const long half = static_cast<long>(size_ / 2);
  for (std::size_t c = 0; c < arity_; ++c) {
    if (std::abs(coeff(c, 0).imag()) > tol || std::abs(coeff(c, -half).imag()) > tol) return false;
    for (long k = 1; k < half; ++k) {
      if (std::abs(coeff(c, k) - std::conj(coeff(c, -k))) > tol) return false;
    }
  }
  return true;
}

double FourierSeries::max_abs_coeff() const {
  double m = 0.0;
  for (const cplx& z : coeffs_) m = std::max(m, std::abs(z));
  return m;
}

TrigInterpolant::TrigInterpolant(const RealGrid& samples, double floor)
    : arity_(samples.arity()), period_(samples.period()) {
  const FourierSeries s = FourierSeries::analyze(samples);
  const std::size_t half = samples.points() / 2;
  const double cut = floor * s.max_abs_coeff();
  for (std::size_t c = 0; c < arity_; ++c) {
    for (std::size_t k = 1; k < half; ++k) {
      const long kk = static_cast<long>(k);
      if (std::abs(s.coeff(c, kk)) > cut || std::abs(s.coeff(c, -kk)) > cut) kmax_ = std::max(kmax_, k);
    }
  }
  coeffs_.resize(arity_ * (kmax_ + 1));
  for (std::size_t c = 0; c < arity_; ++c) {
    for (std::size_t k = 0; k <= kmax_; ++k) coeffs_[c * (kmax_ + 1) + k] = s.coeff(c, static_cast<long>(k));
  }
}

void TrigInterpolant::powers(double theta, std::vector<cplx>& zk) const {
  const double w = 2.0 * std::numbers::pi * theta / period_;
  zk.resize(kmax_ + 1);
  zk[0] = 1.0;
  if (kmax_ >= 1) zk[1] = std::polar(1.0, w);
  for (std::size_t k = 2; k <= kmax_; ++k) {
    // recompute exactly every 32 powers to bound the drift of the recurrence
    zk[k] = (k % 32 == 0) ? std::polar(1.0, w * static_cast<double>(k)) : zk[k - 1] * zk[1];
  }
}

void TrigInterpolant::evaluate(double theta, std::span<double> value) const {
  if (value.size() != arity_) throw InvalidArgument("interpolant output has wrong size");
  std::vector<cplx> zk;
  powers(theta, zk);
  // real data: u = c_0 + 2 Re sum_{k>0} c_k z^k
  for (std::size_t c = 0; c < arity_; ++c) {
    const cplx* cc = coeffs_.data() + c * (kmax_ + 1);
    double acc = 0.0;
    for (std::size_t k = kmax_; k >= 1; --k) acc += (cc[k] * zk[k]).real();
    value[c] = cc[0].real() + 2.0 * acc;
  }
}

void TrigInterpolant::evaluate(double theta, std::span<double> value, std::span<double> derivative) const {
  if (value.size() != arity_ || derivative.size() != arity_) throw InvalidArgument("interpolant output has wrong size");
  std::vector<cplx> zk;
  powers(theta, zk);
  const double w = 2.0 * std::numbers::pi / period_;
  for (std::size_t c = 0; c < arity_; ++c) {
    const cplx* cc = coeffs_.data() + c * (kmax_ + 1);
    double acc = 0.0, dacc = 0.0;
    for (std::size_t k = kmax_; k >= 1; --k) {
      const cplx t = cc[k] * zk[k];
      acc += t.real();
      dacc -= static_cast<double>(k) * t.imag();
    }
    value[c] = cc[0].real() + 2.0 * acc;
    derivative[c] = 2.0 * w * dacc;
  }
}

FourierSeries differentiate(const FourierSeries& series) {
  FourierSeries d = series;
  const std::size_t n = series.size();
  const double w = 2.0 * std::numbers::pi / series.period();
  for (std::size_t c = 0; c < series.arity(); ++c) {
    auto coeffs = d.component(c);
    for (std::size_t i = 0; i < n; ++i) {
      const long k = FourierSeries::wavenumber(i, n);
      coeffs[i] = (k == -static_cast<long>(n / 2)) ? cplx{} : coeffs[i] * cplx(0.0, w * static_cast<double>(k));
    }
  }
  return d;
}

RealGrid spectral_derivative(const RealGrid& grid) {
  return differentiate(FourierSeries::analyze(grid)).synthesize_real();
}

ComplexGrid spectral_derivative(const ComplexGrid& grid) {
  return differentiate(FourierSeries::analyze(grid)).synthesize();
}

RealGrid low_pass(const RealGrid& grid, std::size_t kmax) {
  FourierSeries s = FourierSeries::analyze(grid);
  const std::size_t n = s.size();
  for (std::size_t c = 0; c < s.arity(); ++c) {
    auto coeffs = s.component(c);
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<std::size_t>(std::abs(FourierSeries::wavenumber(i, n))) > kmax) coeffs[i] = {};
    }
  }
  return s.synthesize_real();
}

namespace {
double pointwise_max(const RealGrid& r) {
  double m = 0.0;
  for (std::size_t g = 0; g < r.points(); ++g) {
    double s = 0.0;
    for (std::size_t c = 0; c < r.arity(); ++c) s += r(c, g) * r(c, g);
    m = std::max(m, std::sqrt(s));
  }
  return m;
}
}  // namespace

SpectralResidual measure_residual(const RealGrid& r, double scale) {
  SpectralResidual out;
  out.absolute = pointwise_max(low_pass(r, r.points() / 4));
  const double full = pointwise_max(r);
  const double s = scale > 0.0 ? scale : 1.0;
  out.relative = out.absolute / s;
  out.full_band = full / s;
  return out;
}

DiagonalSolveResult solve_diagonal(const FourierSeries& rhs, double period_T,
                                   std::span<const cplx> shift, const DiagonalSolveOptions& options) {
  if (shift.size() != rhs.arity()) throw InvalidArgument("solve_diagonal: one shift per component required");
  if (!(period_T > 0.0)) throw InvalidArgument("solve_diagonal: period must be positive");
  const std::size_t n = rhs.size();
  const long nyquist = -static_cast<long>(n / 2);
  const double w = 2.0 * std::numbers::pi / (rhs.period() * period_T);

  DiagonalSolveResult out;
  out.solution = FourierSeries(rhs.arity(), n, rhs.period());
  out.min_divisor = INFINITY;
  out.free_residuals.assign(options.free_modes.size(), 0.0);

  for (std::size_t c = 0; c < rhs.arity(); ++c) {
    auto src = rhs.component(c);
    auto dst = out.solution.component(c);
    for (std::size_t i = 0; i < n; ++i) {
      const long k = FourierSeries::wavenumber(i, n);
      if (k == nyquist) {
        dst[i] = {};
        continue;
      }
      auto free = std::find(options.free_modes.begin(), options.free_modes.end(), std::make_pair(k, c));
      if (free != options.free_modes.end()) {
        out.free_residuals[static_cast<std::size_t>(free - options.free_modes.begin())] = std::abs(src[i]);
        dst[i] = {};
        continue;
      }
      const cplx divisor = cplx(0.0, w * static_cast<double>(k)) + shift[c];
      const double mag = std::abs(divisor);
      out.min_divisor = std::min(out.min_divisor, mag);
      if (mag < options.small_divisor_tol) throw SmallDivisorError(k, c, options.order, mag);
      dst[i] = src[i] / divisor;
    }
  }
  return out;
}

BlockSolveResult block_solve_2x2(const FourierSeries& rhs_a, const FourierSeries& rhs_b, double period_T,
                                 double alpha, double beta, cplx shift, double small_divisor_tol, int order) {
  if (rhs_a.arity() != 1 || rhs_b.arity() != 1 || rhs_a.size() != rhs_b.size() ||
      rhs_a.period() != rhs_b.period()) {
    throw InvalidArgument("block_solve_2x2 expects two scalar series on the same grid");
  }
  if (!(period_T > 0.0)) throw InvalidArgument("block_solve_2x2: period must be positive");
  const std::size_t n = rhs_a.size();
  const long nyquist = -static_cast<long>(n / 2);
  const double w = 2.0 * std::numbers::pi / (rhs_a.period() * period_T);

  BlockSolveResult out;
  out.first = FourierSeries(1, n, rhs_a.period());
  out.second = FourierSeries(1, n, rhs_a.period());
  out.min_divisor = INFINITY;
  auto ra = rhs_a.component(0);
  auto rb = rhs_b.component(0);
  auto ua = out.first.component(0);
  auto ub = out.second.component(0);
  const cplx ib(0.0, beta);
  for (std::size_t i = 0; i < n; ++i) {
    const long k = FourierSeries::wavenumber(i, n);
    if (k == nyquist) continue;
    const cplx d = cplx(0.0, w * static_cast<double>(k)) + alpha + shift;
    const double mag = std::min(std::abs(d + ib), std::abs(d - ib));
    out.min_divisor = std::min(out.min_divisor, mag);
    if (mag < small_divisor_tol) throw SmallDivisorError(k, 0, order, mag);
    const cplx det = d * d + beta * beta;
    ua[i] = (d * ra[i] + beta * rb[i]) / det;
    ub[i] = (d * rb[i] - beta * ra[i]) / det;
  }
  return out;
}

FourierTaylor::FourierTaylor(FourierSeries order0) { coeffs_.push_back(std::move(order0)); }

void FourierTaylor::push_back(FourierSeries coeff) {
  if (!coeffs_.empty() && (coeff.arity() != arity() || coeff.size() != size() || coeff.period() != period())) {
    throw InvalidArgument("Fourier-Taylor coefficients must share arity, size and period");
  }
  coeffs_.push_back(std::move(coeff));
}

FourierTaylor FourierTaylor::truncated(std::size_t n) const {
  FourierTaylor out;
  for (std::size_t i = 0; i <= n && i < coeffs_.size(); ++i) out.coeffs_.push_back(coeffs_[i]);
  return out;
}

}  // namespace slowman
