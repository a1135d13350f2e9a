#include "echolab/correlators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>

#include "echolab/error.hpp"

namespace echolab {

TimeGrid::TimeGrid(std::vector<double> times, bool allow_offset) : times_(std::move(times)) {
  if (times_.empty()) throw InvalidArgument("TimeGrid: empty grid");
  if (!allow_offset && times_.front() != 0.0)
    throw InvalidArgument("TimeGrid: grid must start at t = 0");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || times_[i] < 0.0)
      throw InvalidArgument("TimeGrid: times must be finite and nonnegative");
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw InvalidArgument("TimeGrid: times must be strictly ascending");
  }
}

TimeGrid TimeGrid::uniform(double t_max, int n_points) {
  if (n_points < 2) throw InvalidArgument("TimeGrid::uniform: need at least 2 points");
  if (!(t_max > 0.0) || !std::isfinite(t_max))
    throw InvalidArgument("TimeGrid::uniform: t_max must be positive and finite");
  std::vector<double> t(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) t[i] = t_max * i / (n_points - 1);
  return TimeGrid(std::move(t));
}

void DecayCurve::validate() const {
  const std::size_t n = grid.size();
  if (mean.size() != n || std_error.size() != n || raw_mean.size() != n)
    throw InvalidArgument("DecayCurve: sequence lengths differ from the grid");
  for (double s : std_error)
    if (!(s >= 0.0)) throw InvalidArgument("DecayCurve: negative or NaN standard error");
  if (normalized && std::abs(mean.front() - 1.0) > 1e-10)
    throw InvalidArgument("DecayCurve: normalized curve does not start at 1");
  if (n_realizations < 1) throw InvalidArgument("DecayCurve: n_realizations must be positive");
}

DecayCurve DecayCurve::complement() const {
  DecayCurve out = *this;
  for (auto& v : out.mean) v = 1.0 - v;
  out.raw_mean = out.mean;
  out.normalization = 1.0;
  out.normalized = false;
  return out;
}

DecayCurve normalize_curve(DecayCurve curve) {
  const double f0 = curve.mean.front();
  if (f0 == 0.0 || !std::isfinite(f0))
    throw InvalidArgument("normalize: curve has zero or non-finite value at t = 0");
  for (auto& v : curve.mean) v /= f0;
  for (auto& s : curve.std_error) s /= std::abs(f0);
  curve.mean.front() = 1.0;
  curve.normalization *= f0;
  curve.normalized = true;
  return curve;
}

DecayCurve average_curves(const std::vector<DecayCurve>& curves, const std::string& label) {
  if (curves.empty()) throw InvalidArgument("average_curves: no curves");
  const std::size_t n_t = curves.front().grid.size();
  const double n = static_cast<double>(curves.size());
  DecayCurve out;
  out.grid = curves.front().grid;
  out.label = label;
  out.n_realizations = static_cast<int>(curves.size());
  out.mean.assign(n_t, 0.0);
  out.raw_mean.assign(n_t, 0.0);
  out.std_error.assign(n_t, 0.0);
  out.normalized = true;
  for (const auto& c : curves) {
    if (c.mean.size() != n_t) throw InvalidArgument("average_curves: grid lengths differ");
    for (std::size_t i = 0; i < n_t; ++i) {
      out.mean[i] += c.mean[i];
      out.raw_mean[i] += c.raw_mean[i];
    }
    out.normalized = out.normalized && c.normalized;
    out.max_imag_residue = std::max(out.max_imag_residue, c.max_imag_residue);
  }
  for (std::size_t i = 0; i < n_t; ++i) {
    out.mean[i] /= n;
    out.raw_mean[i] /= n;
  }
  if (curves.size() > 1) {
    for (std::size_t i = 0; i < n_t; ++i) {
      double ss = 0.0;
      for (const auto& c : curves) ss += (c.mean[i] - out.mean[i]) * (c.mean[i] - out.mean[i]);
      out.std_error[i] = std::sqrt(ss / (n - 1.0) / n);
    }
  }
  out.normalization = 1.0;
  if (out.normalized) {
    out.mean.front() = 1.0;
    double norm = 0.0;
    for (const auto& c : curves) norm += c.normalization;
    out.normalization = norm / n;
  }
  return out;
}

namespace {

void require_dims(const EigenDecomposition& hdec, const ComplexMatrix& m, const char* what) {
  if (m.rows() != hdec.dim() || m.cols() != hdec.dim()) {
    std::ostringstream os;
    os << what << ": operator is " << m.rows() << "x" << m.cols() << ", Hamiltonian has dimension "
       << hdec.dim();
    throw InvalidArgument(os.str());
  }
}

bool is_hermitian_exact(const ComplexMatrix& m) {
  return max_asymmetry(m) <= 1e-14 * std::max(1.0, max_abs(m));
}

double checked_real(Complex v, double& max_residue, const char* what) {
  const double im = std::abs(v.imag());
  max_residue = std::max(max_residue, im);
  if (im > kImagResidueTolerance * std::max(1.0, std::abs(v.real()))) {
    std::ostringstream os;
    os << what << ": imaginary residue " << im << " exceeds tolerance " << kImagResidueTolerance;
    throw NumericalError(os.str());
  }
  return v.real();
}

DecayCurve make_curve(const TimeGrid& grid, std::vector<double> values, const std::string& label,
                      double max_residue, bool normalize) {
  DecayCurve c;
  c.grid = grid;
  c.raw_mean = values;
  c.mean = std::move(values);
  c.std_error.assign(grid.size(), 0.0);
  c.label = label;
  c.max_imag_residue = max_residue;
  if (normalize) {
    if (grid[0] != 0.0) throw InvalidArgument("normalization requires a grid starting at t = 0");
    c = normalize_curve(std::move(c));
  }
  return c;
}

// e^{i E t} for real t.
ComplexVector forward_phases(const RealVector& e, double t) {
  return propagator_phases(e, Complex(-t, 0.0));
}

// OTOC trace values for operators already in the Hamiltonian eigenbasis.
std::vector<Complex> otoc_series(const RealVector& energies, const ComplexMatrix& at,
                                 const ComplexMatrix& bt, double beta, const TimeGrid& grid,
                                 const OtocOptions& options, const ComplexVector& phi) {
  std::vector<Complex> out;
  out.reserve(grid.size());
  switch (options.regularization) {
    case Regularization::ThermalCircle: {
      const RealVector y = thermal_weight_diagonal(energies, beta, 0.25);
      const bool hermitian = is_hermitian_exact(at) && is_hermitian_exact(bt);
      for (double t : grid.times()) {
        const ComplexVector left = y.cast<Complex>().cwiseProduct(forward_phases(energies, t));
        const ComplexVector right = left.conjugate();
        // y A(t) y in the eigenbasis.
        const ComplexMatrix x = left.asDiagonal() * at * right.asDiagonal();
        const ComplexMatrix p = x * bt;
        if (hermitian) {
          out.push_back(trace_product(p, p));
        } else {
          const ComplexMatrix q = bt * x;
          out.push_back(hs_inner(q, p));
        }
      }
      break;
    }
    case Regularization::Unregularized: {
      const RealVector rho = thermal_weight_diagonal(energies, beta, 1.0);
      for (double t : grid.times()) {
        const ComplexVector ph = forward_phases(energies, t);
        const ComplexMatrix x = ph.asDiagonal() * at * ph.conjugate().asDiagonal();
        const ComplexMatrix r = x * bt;
        const ComplexMatrix l = bt * x;
        // Tr[rho (B X)^dagger (X B)].
        const ComplexVector cols = (l.conjugate().cwiseProduct(r)).colwise().sum().transpose();
        out.push_back(cols.dot(rho.cast<Complex>()));
      }
      break;
    }
    case Regularization::PureState: {
      const Complex b0 = phi.dot(bt * phi);
      for (double t : grid.times()) {
        const ComplexVector v = forward_phases(energies, t).conjugate().cwiseProduct(phi);
        const Complex a_t = v.dot(at * v);
        out.push_back(std::norm(a_t) * std::norm(b0));
      }
      break;
    }
  }
  return out;
}

ComplexVector checked_state(const EigenDecomposition& hdec, const OtocOptions& options) {
  if (options.regularization != Regularization::PureState) return {};
  if (options.state.size() != hdec.dim())
    throw InvalidArgument("pure-state OTOC: state length does not match the Hamiltonian");
  if (std::abs(options.state.squaredNorm() - 1.0) > 1e-8)
    throw InvalidArgument("pure-state OTOC: state is not normalized");
  return hdec.eigenvectors().adjoint() * options.state;
}

}  // namespace

DecayCurve otoc_regularized(const EigenDecomposition& hdec, const ComplexMatrix& a,
                            const ComplexMatrix& b, double beta, const TimeGrid& grid,
                            const OtocOptions& options) {
  require_dims(hdec, a, "otoc_regularized");
  require_dims(hdec, b, "otoc_regularized");
  const ComplexVector phi = checked_state(hdec, options);
  const std::vector<Complex> series =
      otoc_series(hdec.eigenvalues(), hdec.to_eigenbasis(a), hdec.to_eigenbasis(b), beta, grid,
                  options, phi);
  // The value is provably real only on the thermal circle with Hermitian operators
  // and for the pure-state product. Otherwise Re F is reported and the imaginary
  // part is recorded, not rejected.
  const bool real_by_construction =
      options.regularization == Regularization::PureState ||
      (options.regularization == Regularization::ThermalCircle && is_hermitian_exact(a) &&
       is_hermitian_exact(b));
  double residue = 0.0;
  std::vector<double> values;
  for (const Complex& v : series) {
    if (real_by_construction) {
      values.push_back(checked_real(v, residue, "otoc_regularized"));
    } else {
      residue = std::max(residue, std::abs(v.imag()));
      values.push_back(v.real());
    }
  }
  return make_curve(grid, std::move(values), "otoc", residue, options.normalize);
}

DecayCurve otoc_regularized(const EigenDecomposition& hdec, const ComplexMatrix& a,
                            const ComplexMatrix& b, double beta, const TimeGrid& grid,
                            bool normalize) {
  OtocOptions options;
  options.normalize = normalize;
  return otoc_regularized(hdec, a, b, beta, grid, options);
}

DecayCurve otoc_haar_exact_A(const EigenDecomposition& hdec, const ComplexMatrix& b_local,
                             const BipartitePartition& part, double beta, const TimeGrid& grid,
                             bool normalize) {
  if (hdec.dim() != part.dim())
    throw InvalidArgument("otoc_haar_exact_A: Hamiltonian dimension does not match partition");
  const ComplexMatrix b = embed(b_local, part, Subsystem::B);
  const ComplexMatrix b_dag = b.adjoint();
  const RealVector y = thermal_weight_diagonal(hdec.eigenvalues(), beta, 0.25);
  const ComplexMatrix& u = hdec.eigenvectors();
  double residue = 0.0;
  std::vector<double> values;
  for (double t : grid.times()) {
    const ComplexVector d =
        propagator_phases(hdec.eigenvalues(), Complex(t, 0.0)).cwiseProduct(y.cast<Complex>());
    const ComplexMatrix w = (u * d.asDiagonal()) * u.adjoint();  // e^{-iHt} y
    const ComplexMatrix x = partial_trace(w * b_dag * w.adjoint(), part, Subsystem::A);
    const ComplexMatrix z = partial_trace(w * b * w.adjoint(), part, Subsystem::A);
    const Complex f = trace_product(x, z) / static_cast<double>(part.d_a);
    values.push_back(checked_real(f, residue, "otoc_haar_exact_A"));
  }
  return make_curve(grid, std::move(values), "otoc_haar_A", residue, normalize);
}

Complex otoc_haar_average_at(const EigenDecomposition& hdec, const BipartitePartition& part,
                             double beta, Complex z) {
  if (hdec.dim() != part.dim())
    throw InvalidArgument("otoc_haar_average: Hamiltonian dimension does not match partition");
  const Index da = part.d_a, db = part.d_b;
  const ComplexVector y = thermal_weight_diagonal(hdec.eigenvalues(), beta, 0.25).cast<Complex>();
  const ComplexMatrix& u = hdec.eigenvectors();
  // W = e^{-iHz} y and W~ = y e^{iHz}; for real z, W~ = W^dagger.
  const ComplexVector dw = propagator_phases(hdec.eigenvalues(), z).cwiseProduct(y);
  const ComplexVector dv = propagator_phases(hdec.eigenvalues(), -z).cwiseProduct(y);
  const ComplexMatrix w = (u * dw.asDiagonal()) * u.adjoint();
  const ComplexMatrix wt = (u * dv.asDiagonal()) * u.adjoint();
  // T(a, c, c', a') = Tr(W~_{a c} W_{c' a'}) over d_B blocks.
  const Index n4 = da * da * da * da;
  std::vector<Complex> tr(static_cast<std::size_t>(n4));
  auto idx = [da](Index a, Index c, Index cp, Index ap) {
    return static_cast<std::size_t>(((a * da + c) * da + cp) * da + ap);
  };
  for (Index a = 0; a < da; ++a)
    for (Index c = 0; c < da; ++c)
      for (Index cp = 0; cp < da; ++cp)
        for (Index ap = 0; ap < da; ++ap)
          tr[idx(a, c, cp, ap)] = (wt.block(a * db, c * db, db, db)
                                       .cwiseProduct(w.block(cp * db, ap * db, db, db).transpose()))
                                      .sum();
  Complex f = 0.0;
  for (Index a = 0; a < da; ++a)
    for (Index c = 0; c < da; ++c)
      for (Index cp = 0; cp < da; ++cp)
        for (Index ap = 0; ap < da; ++ap) f += tr[idx(a, c, cp, ap)] * tr[idx(ap, cp, c, a)];
  return f / static_cast<double>(da * db);
}

DecayCurve otoc_haar_average(const EigenDecomposition& hdec, const BipartitePartition& part,
                             double beta, const TimeGrid& grid, bool normalize) {
  double residue = 0.0;
  std::vector<double> values;
  for (double t : grid.times())
    values.push_back(checked_real(otoc_haar_average_at(hdec, part, beta, Complex(t, 0.0)), residue,
                                  "otoc_haar_average"));
  return make_curve(grid, std::move(values), "otoc_haar", residue, normalize);
}

DecayCurve otoc_haar_mc(const EigenDecomposition& hdec, const BipartitePartition& part,
                        double beta, const TimeGrid& grid, int n_samples, RngStream& rng,
                        const OtocOptions& options) {
  if (n_samples < 1) throw InvalidArgument("otoc_haar_mc: n_samples must be positive");
  if (hdec.dim() != part.dim())
    throw InvalidArgument("otoc_haar_mc: Hamiltonian dimension does not match partition");
  const ComplexVector phi = checked_state(hdec, options);
  const std::size_t n_t = grid.size();
  RealMatrix samples(n_samples, static_cast<Index>(n_t));
  double residue = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const ComplexMatrix a = embed(sample_haar_unitary(part.d_a, rng), part, Subsystem::A);
    const ComplexMatrix b = embed(sample_haar_unitary(part.d_b, rng), part, Subsystem::B);
    const std::vector<Complex> series = otoc_series(
        hdec.eigenvalues(), hdec.to_eigenbasis(a), hdec.to_eigenbasis(b), beta, grid, options, phi);
    // A single draw is complex in general. Its real part is the average of the
    // draws (A, B) and (A^dagger, B^dagger), which have equal Haar weight.
    for (std::size_t i = 0; i < n_t; ++i) {
      samples(s, static_cast<Index>(i)) = series[i].real();
      residue = std::max(residue, std::abs(series[i].imag()));
    }
  }
  const double n = static_cast<double>(n_samples);
  const RealVector mean = samples.colwise().mean().transpose();
  const RealMatrix centered = samples.rowwise() - mean.transpose();
  DecayCurve c;
  c.grid = grid;
  c.label = "otoc_haar_mc";
  c.n_realizations = n_samples;
  c.max_imag_residue = residue;
  c.raw_mean.assign(mean.data(), mean.data() + mean.size());
  c.std_error.assign(n_t, 0.0);
  if (!options.normalize) {
    c.mean = c.raw_mean;
    if (n_samples > 1)
      for (std::size_t i = 0; i < n_t; ++i)
        c.std_error[i] = std::sqrt(centered.col(static_cast<Index>(i)).squaredNorm() / (n - 1.0) / n);
    return c;
  }
  if (grid[0] != 0.0) throw InvalidArgument("normalization requires a grid starting at t = 0");
  const double m0 = mean[0];
  if (m0 == 0.0) throw InvalidArgument("otoc_haar_mc: zero mean at t = 0");
  c.mean.resize(n_t);
  const double var0 = n_samples > 1 ? centered.col(0).squaredNorm() / (n - 1.0) : 0.0;
  for (std::size_t i = 0; i < n_t; ++i) {
    const Index ii = static_cast<Index>(i);
    const double r = mean[ii] / m0;
    c.mean[i] = r;
    if (n_samples > 1) {
      const double var_t = centered.col(ii).squaredNorm() / (n - 1.0);
      const double cov = centered.col(ii).dot(centered.col(0)) / (n - 1.0);
      const double var_r = (var_t - 2.0 * r * cov + r * r * var0) / (m0 * m0 * n);
      c.std_error[i] = std::sqrt(std::max(0.0, var_r));
    }
  }
  c.mean.front() = 1.0;
  c.normalization = m0;
  c.normalized = true;
  return c;
}

namespace {

// Tr(rho U1^dagger U2) = sum_mn e^{i E1_m t} K_mn e^{-i E2_n t}.
struct EchoKernel {
  RealVector e1;
  RealVector e2;
  ComplexMatrix k;

  Complex at(double t) const {
    const ComplexVector p1 = forward_phases(e1, t);
    const ComplexVector p2 = propagator_phases(e2, Complex(t, 0.0));
    return p1.transpose() * (k * p2);
  }
};

EchoKernel make_echo_kernel(const EigenDecomposition& d1, const EigenDecomposition& d2,
                            const ComplexMatrix* rho) {
  const ComplexMatrix o = d1.eigenvectors().adjoint() * d2.eigenvectors();
  EchoKernel kernel{d1.eigenvalues(), d2.eigenvalues(), {}};
  if (rho == nullptr) {
    kernel.k = o.cwiseProduct(o.conjugate()) / static_cast<double>(o.rows());
  } else {
    const ComplexMatrix r = d2.eigenvectors().adjoint() * (*rho) * d1.eigenvectors();
    kernel.k = o.cwiseProduct(r.transpose());
  }
  return kernel;
}

std::vector<double> echo_values(const EchoKernel& kernel, const TimeGrid& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid.times()) out.push_back(std::norm(kernel.at(t)));
  return out;
}

std::uint64_t sign_code(const std::vector<int>& signs) {
  std::uint64_t code = 0;
  for (std::size_t k = 0; k < signs.size(); ++k)
    if (signs[k] > 0) code |= std::uint64_t{1} << k;
  return code;
}

// Eigendecompositions of H + V for each sign vector and echo kernels for each
// ordered pair, computed on first use.
class EchoCache {
 public:
  EchoCache(const HermitianOperator& h, const std::vector<HermitianOperator>& couplings,
            double delta, double beta)
      : h_(h), couplings_(couplings), delta_(delta) {
    if (couplings.empty()) throw InvalidArgument("noise-averaged echo: no coupling channels");
    if (couplings.size() > 30) throw InvalidArgument("noise-averaged echo: too many channels");
    for (const auto& v : couplings)
      if (v.dim() != h.dim()) throw InvalidArgument("noise-averaged echo: dimension mismatch");
    if (!(beta >= 0.0)) throw InvalidArgument("noise-averaged echo: beta must be nonnegative");
    if (beta > 0.0) rho_ = thermal_weight(eig_hermitian(h), beta, 1.0);
  }

  const EchoKernel& kernel(const std::vector<int>& s1, const std::vector<int>& s2) {
    const std::uint64_t c1 = sign_code(s1), c2 = sign_code(s2);
    const auto key = std::make_pair(c1, c2);
    auto it = kernels_.find(key);
    if (it != kernels_.end()) return it->second;
    const EigenDecomposition& d1 = decomposition(c1, s1);
    const EigenDecomposition& d2 = decomposition(c2, s2);
    return kernels_.emplace(key, make_echo_kernel(d1, d2, rho_.size() ? &rho_ : nullptr))
        .first->second;
  }

 private:
  const EigenDecomposition& decomposition(std::uint64_t code, const std::vector<int>& signs) {
    auto it = decomps_.find(code);
    if (it != decomps_.end()) return it->second;
    const NoiseRealization v = noise_operator_from_signs(couplings_, delta_, signs);
    return decomps_.emplace(code, eig_hermitian(h_ + v.op)).first->second;
  }

  const HermitianOperator& h_;
  const std::vector<HermitianOperator>& couplings_;
  double delta_;
  ComplexMatrix rho_;
  std::map<std::uint64_t, EigenDecomposition> decomps_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, EchoKernel> kernels_;
};

DecayCurve curve_from_samples(const TimeGrid& grid, const std::vector<std::vector<double>>& rows,
                              const std::string& label) {
  std::vector<DecayCurve> curves;
  curves.reserve(rows.size());
  for (const auto& r : rows) {
    DecayCurve c;
    c.grid = grid;
    c.mean = r;
    c.raw_mean = r;
    c.std_error.assign(r.size(), 0.0);
    curves.push_back(std::move(c));
  }
  DecayCurve out = average_curves(curves, label);
  out.normalized = false;
  out.normalization = 1.0;
  return out;
}

}  // namespace

DecayCurve loschmidt_echo(const HermitianOperator& h, const HermitianOperator& v1,
                          const HermitianOperator& v2, double beta, const TimeGrid& grid) {
  if (v1.dim() != h.dim() || v2.dim() != h.dim())
    throw InvalidArgument("loschmidt_echo: dimension mismatch");
  if (!(beta >= 0.0)) throw InvalidArgument("loschmidt_echo: beta must be nonnegative");
  const EigenDecomposition d1 = eig_hermitian(h + v1);
  const EigenDecomposition d2 = eig_hermitian(h + v2);
  ComplexMatrix rho;
  if (beta > 0.0) rho = thermal_weight(eig_hermitian(h), beta, 1.0);
  const EchoKernel kernel = make_echo_kernel(d1, d2, beta > 0.0 ? &rho : nullptr);
  return make_curve(grid, echo_values(kernel, grid), "le", 0.0, false);
}

DecayCurve noise_averaged_le(const HermitianOperator& h_b,
                             const std::vector<HermitianOperator>& couplings_b, double delta,
                             double beta, const TimeGrid& grid, int n_pairs, RngStream& rng) {
  if (n_pairs < 1) throw InvalidArgument("noise_averaged_le: n_pairs must be positive");
  EchoCache cache(h_b, couplings_b, delta, beta);
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(n_pairs));
  for (int p = 0; p < n_pairs; ++p) {
    const NoiseRealization v1 = sample_noise_operator(couplings_b, delta, rng);
    const NoiseRealization v2 = sample_noise_operator(couplings_b, delta, rng);
    rows.push_back(echo_values(cache.kernel(v1.signs, v2.signs), grid));
  }
  return curve_from_samples(grid, rows, "le_noise_avg");
}

DecayCurve noise_averaged_le_exhaustive(const HermitianOperator& h_b,
                                        const std::vector<HermitianOperator>& couplings_b,
                                        double delta, double beta, const TimeGrid& grid) {
  EchoCache cache(h_b, couplings_b, delta, beta);
  const std::size_t k = couplings_b.size();
  if (k > 10) throw InvalidArgument("noise_averaged_le_exhaustive: too many channels to enumerate");
  const std::uint64_t n_patterns = std::uint64_t{1} << k;
  auto signs_of = [k](std::uint64_t code) {
    std::vector<int> s(k);
    for (std::size_t j = 0; j < k; ++j) s[j] = ((code >> j) & 1) ? 1 : -1;
    return s;
  };
  std::vector<std::vector<double>> rows;
  for (std::uint64_t c1 = 0; c1 < n_patterns; ++c1)
    for (std::uint64_t c2 = 0; c2 < n_patterns; ++c2)
      rows.push_back(echo_values(cache.kernel(signs_of(c1), signs_of(c2)), grid));
  return curve_from_samples(grid, rows, "le_noise_exhaustive");
}

DecayCurve coarse_grained_le(const HermitianOperator& h_b,
                             const std::vector<HermitianOperator>& couplings_b, double delta,
                             double beta, const TimeGrid& grid, RngStream& rng) {
  const NoiseRealization v1 = sample_noise_operator(couplings_b, delta, rng);
  const NoiseRealization v2 = sample_noise_operator(couplings_b, delta, rng);
  DecayCurve c = loschmidt_echo(h_b, v1.op, v2.op, beta, grid);
  c.label = "le_coarse";
  return c;
}

double le_thermal_prefactor(const EigenDecomposition& h_b, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw InvalidArgument("le_thermal_prefactor: beta must be finite and nonnegative");
  const RealVector& e = h_b.eigenvalues();
  const double e0 = e.minCoeff();
  auto shifted_z = [&](double b) { return (-(b * (e.array() - e0))).exp().mean(); };
  const double z_half = shifted_z(beta / 2.0);
  return z_half * z_half / shifted_z(beta);
}

double purity_reduced(const ComplexVector& state, const BipartitePartition& part) {
  if (state.size() != part.dim())
    throw InvalidArgument("purity_reduced: state length does not match partition");
  const double norm2 = state.squaredNorm();
  if (std::abs(norm2 - 1.0) > 1e-8) {
    std::ostringstream os;
    os << "purity_reduced: state is not normalized (|psi|^2 = " << norm2 << ")";
    throw InvalidArgument(os.str());
  }
  // psi_{a b} as a d_A x d_B matrix; rho_B is the conjugate of M^dagger M.
  const Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      m(state.data(), part.d_a, part.d_b);
  const ComplexMatrix g = m.adjoint() * m;
  return g.squaredNorm();
}

DecayCurve syk_otoc(const SykModel& model, const SykSpectrum& spectrum, double beta,
                    const TimeGrid& grid, bool normalize) {
  const int n = model.n_fermions();
  if (static_cast<int>(spectrum.energies.size()) != n + 1)
    throw InvalidArgument("syk_otoc: spectrum does not match the model");
  const auto [site_a, site_b] = model.probe_sites();
  const auto ca = annihilator_blocks(model.sectors(), site_a);
  const auto cb = annihilator_blocks(model.sectors(), site_b);

  // Probe blocks in the eigenbasis: sector s+1 -> s.
  std::vector<ComplexMatrix> xa(n), xb_up(n), xb_dn(n);
  for (int s = 0; s < n; ++s) {
    xa[s] = spectrum.vectors[s].adjoint() * ca[s] * spectrum.vectors[s + 1];
    xb_up[s] = spectrum.vectors[s].adjoint() * cb[s] * spectrum.vectors[s + 1];
    xb_dn[s] = xb_up[s].adjoint();
  }

  // Global thermal weights split back into sectors.
  const RealVector all_e = [&] {
    Index total = 0;
    for (const auto& e : spectrum.energies) total += e.size();
    RealVector v(total);
    Index pos = 0;
    for (const auto& e : spectrum.energies) v.segment(pos, e.size()) = e, pos += e.size();
    return v;
  }();
  const RealVector y_all = thermal_weight_diagonal(all_e, beta, 0.25);
  std::vector<RealVector> y(n + 1);
  for (int s = 0, pos = 0; s <= n; ++s) {
    const Index m = spectrum.energies[s].size();
    y[s] = y_all.segment(pos, m);
    pos += static_cast<int>(m);
  }

  double residue = 0.0;
  std::vector<double> values;
  std::vector<ComplexMatrix> t_up(n), t_dn(n);
  for (double t : grid.times()) {
    std::vector<ComplexVector> left(n + 1);
    for (int s = 0; s <= n; ++s)
      left[s] = y[s].cast<Complex>().cwiseProduct(forward_phases(spectrum.energies[s], t));
    for (int s = 0; s < n; ++s) {
      t_up[s] = left[s].asDiagonal() * xa[s] * left[s + 1].conjugate().asDiagonal();
      t_dn[s] = t_up[s].adjoint();
    }
    // P = (y X_a(t) y) X_b has blocks (s, s) and (s, s +- 2); F = Tr(P^2).
    Complex f = 0.0;
    for (int s = 0; s <= n; ++s) {
      const Index m = spectrum.energies[s].size();
      ComplexMatrix p = ComplexMatrix::Zero(m, m);
      if (s < n) p.noalias() += t_up[s] * xb_dn[s];
      if (s > 0) p.noalias() += t_dn[s - 1] * xb_up[s - 1];
      f += trace_product(p, p);
      if (s + 2 <= n) {
        const ComplexMatrix up = t_up[s] * xb_up[s + 1];
        const ComplexMatrix dn = t_dn[s + 1] * xb_dn[s];
        f += 2.0 * trace_product(up, dn);
      }
    }
    values.push_back(checked_real(f, residue, "syk_otoc"));
  }
  return make_curve(grid, std::move(values), "otoc", residue, normalize);
}

}  // namespace echolab
