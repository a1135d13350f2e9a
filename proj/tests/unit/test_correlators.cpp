#include <doctest.h>

#include "echolab/correlators.hpp"
#include "echolab/error.hpp"
#include "helpers.hpp"

using namespace echolab;
using namespace testing;

namespace {

ComplexMatrix matrix_power_quarter(const ComplexMatrix& h, double beta) {
  ComplexMatrix rho = (-beta * h).exp();
  rho /= rho.trace();
  // rho^{1/4} via its own eigenbasis: an independent route from the library's shifted weights.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).array().pow(0.25).matrix().cast<Complex>().asDiagonal() *
         es.eigenvectors().adjoint();
}

// Tr[y A^+(t) y B^+ y A(t) y B] with A(t) = e^{iHt} A e^{-iHt}.
Complex brute_otoc(const ComplexMatrix& h, const ComplexMatrix& a, const ComplexMatrix& b,
                   double beta, double t) {
  const ComplexMatrix y = matrix_power_quarter(h, beta);
  const ComplexMatrix u = expm_propagator(h, Complex(t, 0.0));
  const ComplexMatrix at = u.adjoint() * a * u;
  return (y * at.adjoint() * y * b.adjoint() * y * at * y * b).trace();
}

ComplexMatrix random_unitary(Index d, std::mt19937_64& gen) {
  const ComplexMatrix z = random_matrix(d, d, gen);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
  for (Index j = 0; j < d; ++j) q.col(j) *= qr.matrixQR()(j, j) / std::abs(qr.matrixQR()(j, j));
  return q;
}

TimeGrid small_grid() { return TimeGrid({0.0, 0.2, 0.5, 1.1, 2.3}); }

EigenDecomposition eig(const ComplexMatrix& h) { return eig_hermitian(HermitianOperator(h)); }

}  // namespace

TEST_SUITE("correlators") {
  TEST_CASE("time grid and curve invariants") {
    CHECK_THROWS_AS(TimeGrid({0.1, 0.2}), InvalidArgument);
    CHECK_NOTHROW(TimeGrid({0.1, 0.2}, true));
    CHECK_THROWS_AS(TimeGrid({0.0, 0.2, 0.2}), InvalidArgument);
    CHECK_THROWS_AS(TimeGrid::uniform(1.0, 1), InvalidArgument);
    const TimeGrid g = TimeGrid::uniform(2.0, 5);
    CHECK(g[4] == 2.0);
    CHECK(g[1] == 0.5);
    DecayCurve c;
    c.grid = g;
    c.mean = {1, 0.5, 0.3, 0.2, 0.1};
    c.raw_mean = c.mean;
    c.std_error = {0, 0, -1, 0, 0};
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
  }

  TEST_CASE("regularized OTOC matches the brute-force trace") {
    std::mt19937_64 gen(11);
    const BipartitePartition part(2, 4);
    const ComplexMatrix h = random_hermitian(8, gen);
    const EigenDecomposition d = eig(h);
    const ComplexMatrix a = embed(random_hermitian(2, gen), part, Subsystem::A);
    const ComplexMatrix b = embed(random_hermitian(4, gen), part, Subsystem::B);
    const ComplexMatrix ua = embed(random_unitary(2, gen), part, Subsystem::A);
    const ComplexMatrix ub = embed(random_unitary(4, gen), part, Subsystem::B);
    const TimeGrid grid = small_grid();
    for (double beta : {0.0, 0.8}) {
      const DecayCurve herm = otoc_regularized(d, a, b, beta, grid, false);
      const DecayCurve unit = otoc_regularized(d, ua, ub, beta, grid, false);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(herm.mean[i] == doctest::Approx(brute_otoc(h, a, b, beta, grid[i]).real()).epsilon(1e-9));
        CHECK(unit.mean[i] == doctest::Approx(brute_otoc(h, ua, ub, beta, grid[i]).real()).epsilon(1e-9));
      }
    }
    // Normalization divides by the t = 0 value and keeps it.
    const DecayCurve n = otoc_regularized(d, a, b, 0.3, grid, true);
    const DecayCurve r = otoc_regularized(d, a, b, 0.3, grid, false);
    CHECK(n.mean[0] == 1.0);
    CHECK(n.normalization == doctest::Approx(r.mean[0]));
    CHECK(n.mean[3] == doctest::Approx(r.mean[3] / r.mean[0]));
    CHECK(n.raw_mean[3] == doctest::Approx(r.mean[3]));
  }

  TEST_CASE("OTOC trivial limits") {
    std::mt19937_64 gen(12);
    const BipartitePartition part(2, 4);
    const ComplexMatrix ua = embed(random_unitary(2, gen), part, Subsystem::A);
    const ComplexMatrix ub = embed(random_unitary(4, gen), part, Subsystem::B);
    const EigenDecomposition d = eig(random_hermitian(8, gen));
    CHECK(otoc_regularized(d, ua, ub, 0.0, small_grid(), false).mean[0] == doctest::Approx(1.0));
    const DecayCurve still = otoc_regularized(eig(ComplexMatrix::Zero(8, 8)), ua, ub, 0.0, small_grid(), false);
    for (double v : still.mean) CHECK(v == doctest::Approx(1.0));
    CHECK_THROWS_AS(otoc_regularized(d, ComplexMatrix::Zero(8, 8), ub, 0.0, small_grid(), true),
                    InvalidArgument);
    CHECK_THROWS_AS(otoc_regularized(d, ComplexMatrix::Zero(4, 4), ub, 0.0, small_grid(), false),
                    InvalidArgument);
  }

  TEST_CASE("unregularized and pure-state variants match their definitions") {
    std::mt19937_64 gen(13);
    const BipartitePartition part(2, 4);
    const ComplexMatrix h = random_hermitian(8, gen);
    const EigenDecomposition d = eig(h);
    const ComplexMatrix a = embed(random_unitary(2, gen), part, Subsystem::A);
    const ComplexMatrix b = embed(random_unitary(4, gen), part, Subsystem::B);
    const double beta = 0.6;
    ComplexMatrix rho = (-beta * h).exp();
    rho /= rho.trace();
    const ComplexVector psi = random_state(8, gen);
    const ComplexMatrix proj = psi * psi.adjoint();
    OtocOptions un{Regularization::Unregularized, {}, false};
    OtocOptions pure{Regularization::PureState, psi, false};
    const TimeGrid grid = small_grid();
    const DecayCurve cu = otoc_regularized(d, a, b, beta, grid, un);
    const DecayCurve cp = otoc_regularized(d, a, b, beta, grid, pure);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const ComplexMatrix u = expm_propagator(h, Complex(grid[i], 0.0));
      const ComplexMatrix at = u.adjoint() * a * u;
      CHECK(cu.mean[i] == doctest::Approx((rho * at.adjoint() * b.adjoint() * at * b).trace().real()).epsilon(1e-9));
      CHECK(cp.mean[i] ==
            doctest::Approx((proj * at.adjoint() * proj * b.adjoint() * proj * at * proj * b).trace().real())
                .epsilon(1e-9));
    }
    OtocOptions bad{Regularization::PureState, 2.0 * psi, false};
    CHECK_THROWS_AS(otoc_regularized(d, a, b, beta, grid, bad), InvalidArgument);
  }

  TEST_CASE("A-exact Haar average matches a Monte Carlo average over A") {
    std::mt19937_64 gen(14);
    const BipartitePartition part(2, 8);
    const ComplexMatrix h = random_hermitian(16, gen);
    const EigenDecomposition d = eig(h);
    const ComplexMatrix b_local = random_unitary(8, gen);
    const ComplexMatrix b = embed(b_local, part, Subsystem::B);
    const TimeGrid grid({0.0, 0.3, 0.9, 2.0});
    const DecayCurve exact = otoc_haar_exact_A(d, b_local, part, 0.0, grid);
    CHECK(exact.mean[0] == doctest::Approx(1.0));
    std::vector<ComplexMatrix> u;
    for (double t : grid.times()) u.push_back(expm_propagator(h, Complex(t, 0.0)));
    const int n = 10000;
    std::vector<double> s(grid.size(), 0.0), s2(grid.size(), 0.0);
    for (int k = 0; k < n; ++k) {
      const ComplexMatrix a = embed(random_unitary(2, gen), part, Subsystem::A);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const ComplexMatrix at = u[i].adjoint() * a * u[i];
        const double f = (at.adjoint() * b.adjoint() * at * b).trace().real() / 16.0;
        s[i] += f;
        s2[i] += f * f;
      }
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double m = s[i] / n, se = std::sqrt((s2[i] / n - m * m) / n);
      CHECK(std::abs(m - exact.mean[i]) <= 2e-2);
      CHECK(std::abs(m - exact.mean[i]) <= 3.0 * se + 1e-12);
    }
    // Decoupled dynamics never moves B off its subsystem.
    const ComplexMatrix free = embed(random_hermitian(2, gen), part, Subsystem::A) +
                               embed(random_hermitian(8, gen), part, Subsystem::B);
    for (double v : otoc_haar_exact_A(eig(free), b_local, part, 0.0, grid).mean)
      CHECK(v == doctest::Approx(1.0));
  }

  TEST_CASE("full Haar average matches Monte Carlo over A and B at finite beta") {
    std::mt19937_64 gen(15);
    const BipartitePartition part(2, 4);
    const ComplexMatrix h = random_hermitian(8, gen);
    const EigenDecomposition d = eig(h);
    const double beta = 0.5;
    const TimeGrid grid({0.0, 0.4, 1.3});
    const DecayCurve exact = otoc_haar_average(d, part, beta, grid, false);
    const ComplexMatrix y = matrix_power_quarter(h, beta);
    std::vector<ComplexMatrix> u;
    for (double t : grid.times()) u.push_back(expm_propagator(h, Complex(t, 0.0)));
    const int n = 20000;
    std::vector<double> s(grid.size(), 0.0), s2(grid.size(), 0.0);
    for (int k = 0; k < n; ++k) {
      const ComplexMatrix a = embed(random_unitary(2, gen), part, Subsystem::A);
      const ComplexMatrix b = embed(random_unitary(4, gen), part, Subsystem::B);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const ComplexMatrix at = u[i].adjoint() * a * u[i];
        const double f = (y * at.adjoint() * y * b.adjoint() * y * at * y * b).trace().real();
        s[i] += f;
        s2[i] += f * f;
      }
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double m = s[i] / n, se = std::sqrt((s2[i] / n - m * m) / n);
      CHECK(std::abs(m - exact.mean[i]) <= 4.0 * se + 1e-12);
    }
    // The complex-time entry point agrees on the real axis.
    CHECK(otoc_haar_average_at(d, part, beta, Complex(0.4, 0.0)).real() == doctest::Approx(exact.mean[1]));
  }

  TEST_CASE("Monte Carlo Haar OTOC: trivial dynamics and error scaling") {
    const BipartitePartition part(2, 4);
    RngStream rng(16, 0);
    const TimeGrid grid = small_grid();
    const DecayCurve still = otoc_haar_mc(eig(ComplexMatrix::Zero(8, 8)), part, 0.0, grid, 50, rng);
    for (double v : still.mean) CHECK(v == doctest::Approx(1.0));
    std::mt19937_64 gen(16);
    const EigenDecomposition d = eig(random_hermitian(8, gen));
    OtocOptions raw{Regularization::ThermalCircle, {}, false};
    RngStream r1(16, 1), r2(16, 2);
    const DecayCurve few = otoc_haar_mc(d, part, 0.0, grid, 100, r1, raw);
    const DecayCurve many = otoc_haar_mc(d, part, 0.0, grid, 10000, r2, raw);
    const double ratio = few.std_error[3] / many.std_error[3];
    CHECK(ratio > 7.0);
    CHECK(ratio < 14.0);
    CHECK_THROWS_AS(otoc_haar_mc(d, part, 0.0, grid, 0, rng), InvalidArgument);
  }

  TEST_CASE("Loschmidt echo matches brute force and respects its bounds") {
    std::mt19937_64 gen(17);
    const ComplexMatrix h = random_hermitian(2, gen), v1 = random_hermitian(2, gen), v2 = random_hermitian(2, gen);
    std::vector<double> ts;
    for (int i = 0; i < 20; ++i) ts.push_back(0.25 * i);
    const TimeGrid grid(ts);
    const DecayCurve le = loschmidt_echo(HermitianOperator(h), HermitianOperator(v1), HermitianOperator(v2), 0.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const ComplexMatrix u1 = expm_propagator(h + v1, Complex(grid[i], 0.0));
      const ComplexMatrix u2 = expm_propagator(h + v2, Complex(grid[i], 0.0));
      CHECK(std::abs(le.mean[i] - std::norm((u1.adjoint() * u2).trace() / 2.0)) <= 1e-8);
    }
    // Finite beta: thermal state of H.
    const ComplexMatrix hb = random_hermitian(6, gen), w1 = random_hermitian(6, gen), w2 = random_hermitian(6, gen);
    ComplexMatrix rho = (-0.7 * hb).exp();
    rho /= rho.trace();
    const DecayCurve lt =
        loschmidt_echo(HermitianOperator(hb), HermitianOperator(w1), HermitianOperator(w2), 0.7, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const ComplexMatrix u1 = expm_propagator(hb + w1, Complex(grid[i], 0.0));
      const ComplexMatrix u2 = expm_propagator(hb + w2, Complex(grid[i], 0.0));
      CHECK(std::abs(lt.mean[i] - std::norm((rho * u1.adjoint() * u2).trace())) <= 1e-10);
      CHECK(lt.mean[i] >= -1e-10);
      CHECK(lt.mean[i] <= 1.0 + 1e-10);
    }
    CHECK(lt.mean[0] == doctest::Approx(1.0));
    for (double v : loschmidt_echo(HermitianOperator(hb), HermitianOperator(w1), HermitianOperator(w1), 0.7, grid).mean)
      CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(loschmidt_echo(HermitianOperator(hb), HermitianOperator(v1), HermitianOperator(w2), 0.0, grid),
                    InvalidArgument);
  }

  TEST_CASE("noise-averaged echo: single channel, zero coupling, exhaustive vs sampled") {
    std::mt19937_64 gen(18);
    const HermitianOperator h(random_hermitian(6, gen));
    const HermitianOperator v(random_hermitian(6, gen));
    const TimeGrid grid = TimeGrid::uniform(4.0, 21);
    const double delta = 0.4;
    // Sign pairs (+,+), (-,-) give 1; (+,-), (-,+) give M1.
    const DecayCurve single = noise_averaged_le_exhaustive(h, {v}, delta, 0.0, grid);
    const DecayCurve m1 = loschmidt_echo(h, v.scaled(delta), v.scaled(-delta), 0.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK(single.mean[i] == doctest::Approx(0.5 + 0.5 * m1.mean[i]).epsilon(1e-12));

    RngStream rng(18, 0);
    for (double x : noise_averaged_le(h, {v}, 0.0, 0.0, grid, 5, rng).mean) CHECK(x == doctest::Approx(1.0));
    for (double x : coarse_grained_le(h, {v}, 0.0, 0.0, grid, rng).mean) CHECK(x == doctest::Approx(1.0));

    const HermitianOperator v2(random_hermitian(6, gen));
    for (double beta : {0.0, 0.5}) {
      const DecayCurve exact = noise_averaged_le_exhaustive(h, {v, v2}, delta, beta, grid);
      const DecayCurve mc = noise_averaged_le(h, {v, v2}, delta, beta, grid, 10000, rng);
      for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(std::abs(exact.mean[i] - mc.mean[i]) <= 3.0 * mc.std_error[i] + 1e-12);
      // Exhaustive enumeration against direct echoes over the 16 pairs.
      std::vector<double> brute(grid.size(), 0.0);
      for (int s1 = 0; s1 < 4; ++s1)
        for (int s2 = 0; s2 < 4; ++s2) {
          auto op = [&](int code) {
            return v.scaled(delta * ((code & 1) ? 1.0 : -1.0)) + v2.scaled(delta * ((code & 2) ? 1.0 : -1.0));
          };
          const DecayCurve e = loschmidt_echo(h, op(s1), op(s2), beta, grid);
          for (std::size_t i = 0; i < grid.size(); ++i) brute[i] += e.mean[i] / 16.0;
        }
      for (std::size_t i = 0; i < grid.size(); ++i) CHECK(exact.mean[i] == doctest::Approx(brute[i]).epsilon(1e-10));
    }
  }

  TEST_CASE("coarse-grained echo is an unbiased estimate of the noise average") {
    // One random pair per realization, so agreement is statistical: the per-realization
    // difference must average to zero within its standard error.
    const int realizations = 20;
    const TimeGrid grid = TimeGrid::uniform(3.0, 31);
    std::vector<DecayCurve> diffs;
    for (int r = 0; r < realizations; ++r) {
      RngStream rng(19, static_cast<std::uint64_t>(r));
      const BipartiteModel m = build_bipartite(128, 0.1, rng);
      const EchoNoiseModel noise = echo_noise_model(m, NoiseChannels::Traceless);
      DecayCurve c = coarse_grained_le(noise.h_b, noise.couplings, 0.1, 0.0, grid, rng);
      const DecayCurve a = noise_averaged_le_exhaustive(noise.h_b, noise.couplings, 0.1, 0.0, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) c.mean[i] -= a.mean[i];
      diffs.push_back(c);
    }
    const DecayCurve d = average_curves(diffs, "diff");
    double worst = 0.0, worst_z = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      worst = std::max(worst, std::abs(d.mean[i]));
      worst_z = std::max(worst_z, std::abs(d.mean[i]) / d.std_error[i]);
    }
    MESSAGE("max |coarse - averaged| = " << worst << ", max z = " << worst_z);
    CHECK(worst_z <= 4.0);
  }

  TEST_CASE("thermal prefactor and reduced purity") {
    std::mt19937_64 gen(20);
    const ComplexMatrix h = random_hermitian(8, gen);
    const EigenDecomposition d = eig(h);
    CHECK(le_thermal_prefactor(d, 0.0) == doctest::Approx(1.0));
    const double beta = 0.9;
    const double z_half = (-0.5 * beta * h).exp().trace().real() / 8.0;
    const double z = (-beta * h).exp().trace().real() / 8.0;
    CHECK(le_thermal_prefactor(d, beta) == doctest::Approx(z_half * z_half / z).epsilon(1e-10));

    const BipartitePartition part(2, 4);
    const ComplexVector a = random_state(2, gen), b = random_state(4, gen);
    CHECK(purity_reduced(naive_kron(a, b), part) == doctest::Approx(1.0));
    ComplexVector bell = ComplexVector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    CHECK(purity_reduced(bell, BipartitePartition(2, 2)) == doctest::Approx(0.5));
    const ComplexVector psi = random_state(8, gen);
    const ComplexMatrix rho_b = naive_trace_a(psi * psi.adjoint(), 2, 4);
    const RealVector lam = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(rho_b).eigenvalues();
    CHECK(std::abs(purity_reduced(psi, part) - lam.squaredNorm()) <= 1e-10);
    CHECK_THROWS_AS(purity_reduced(2.0 * psi, part), InvalidArgument);
  }

  TEST_CASE("SYK OTOC from sector blocks equals the dense regularized OTOC") {
    RngStream rng(21, 0);
    const SykModel m = build_syk(6, 1.0, 0.6, {1, 4}, rng);
    const SykSpectrum spec = diagonalize(m);
    const EigenDecomposition dense = eig(m.dense_hamiltonian());
    auto [ca, cad] = jordan_wigner(6, 1);
    auto [cb, cbd] = jordan_wigner(6, 4);
    const TimeGrid grid = small_grid();
    for (double beta : {0.0, 0.7}) {
      const DecayCurve blocks = syk_otoc(m, spec, beta, grid, false);
      const DecayCurve ref = otoc_regularized(dense, ca + cad, cb + cbd, beta, grid, false);
      for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(std::abs(blocks.mean[i] - ref.mean[i]) <= 1e-8 * std::max(1.0, std::abs(ref.mean[i])));
    }
  }

  TEST_CASE("averaging keeps realization order and reports standard errors") {
    const TimeGrid grid({0.0, 1.0});
    auto curve = [&](double v) {
      DecayCurve c;
      c.grid = grid;
      c.mean = {1.0, v};
      c.raw_mean = c.mean;
      c.std_error = {0.0, 0.0};
      c.normalized = true;
      return c;
    };
    const DecayCurve avg = average_curves({curve(0.2), curve(0.4), curve(0.9)}, "x");
    CHECK(avg.mean[1] == doctest::Approx(0.5));
    const double sd = std::sqrt(((0.3 * 0.3) + (0.1 * 0.1) + (0.4 * 0.4)) / 2.0);
    CHECK(avg.std_error[1] == doctest::Approx(sd / std::sqrt(3.0)));
    CHECK(avg.n_realizations == 3);
  }
}
