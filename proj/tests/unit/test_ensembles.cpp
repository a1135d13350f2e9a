#include <doctest.h>

#include <array>
#include <numbers>

#include "echolab/ensembles.hpp"
#include "echolab/error.hpp"
#include "helpers.hpp"

using namespace echolab;
using namespace testing;

TEST_SUITE("ensembles") {
  TEST_CASE("identical seed and stream reproduce the draw sequence") {
    RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool differs_c = false, differs_d = false;
    for (int i = 0; i < 100; ++i) {
      const double x = a.normal();
      CHECK(x == b.normal());
      differs_c |= (x != c.normal());
      differs_d |= (x != d.normal());
    }
    CHECK(differs_c);
    CHECK(differs_d);
    CHECK(RngStream::kAlgorithm.find("mt19937_64") != std::string_view::npos);
  }

  TEST_CASE("normal draws have unit variance and signs are fair") {
    RngStream rng(1, 0);
    const int n = 200000;
    double s = 0, s2 = 0;
    int plus = 0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.normal();
      s += x;
      s2 += x * x;
      plus += rng.sign() > 0;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.01);
    CHECK(std::abs(plus / double(n) - 0.5) < 0.005);
  }

  TEST_CASE("GUE draws are Hermitian with unit-variance real parts off the diagonal") {
    RngStream rng(2, 0);
    const Index d = 64;
    double re2 = 0.0, diag2 = 0.0;
    long count = 0, dcount = 0;
    for (int k = 0; k < 500; ++k) {
      const HermitianOperator h = sample_gue(d, rng);
      CHECK(max_asymmetry(h.matrix()) == 0.0);
      for (Index i = 0; i < d; ++i) {
        diag2 += std::norm(h.matrix()(i, i));
        ++dcount;
        for (Index j = i + 1; j < d; ++j, ++count) re2 += h.matrix()(i, j).real() * h.matrix()(i, j).real();
      }
    }
    const double var_re = re2 / count;
    CHECK(var_re >= 0.9);
    CHECK(var_re <= 1.1);
    CHECK(diag2 / dcount == doctest::Approx(2.0).epsilon(0.05));
    CHECK_THROWS_AS(sample_gue(0, rng), InvalidArgument);
  }

  TEST_CASE("GUE spectral density follows the semicircle") {
    RngStream rng(3, 0);
    const Index d = 256;
    const double radius = 2.0 * std::sqrt(2.0 * d);
    const int bins = 40;
    std::array<double, bins> hist{};
    const int draws = 50;
    for (int k = 0; k < draws; ++k) {
      const RealVector e = eig_hermitian(sample_gue(d, rng)).eigenvalues();
      for (double x : e) {
        const int b = static_cast<int>((x + radius) / (2.0 * radius) * bins);
        if (b >= 0 && b < bins) hist[b] += 1.0;
      }
    }
    const double width = 2.0 * radius / bins;
    const double peak = 2.0 / (std::numbers::pi * radius);
    double worst = 0.0;
    for (int b = 0; b < bins; ++b) {
      // Bin-averaged semicircle from its antiderivative.
      auto cdf = [radius](double x) {
        x = std::clamp(x / radius, -1.0, 1.0);
        return (x * std::sqrt(1 - x * x) + std::asin(x)) / std::numbers::pi + 0.5;
      };
      const double lo = -radius + b * width;
      const double expected = (cdf(lo + width) - cdf(lo)) / width;
      const double observed = hist[b] / (draws * d * width);
      worst = std::max(worst, std::abs(observed - expected));
    }
    CHECK(worst <= 0.1 * peak);
  }

  TEST_CASE("Haar unitaries are unitary and average conjugations to the trace") {
    RngStream rng(4, 0);
    for (Index d : {1, 2, 5, 16}) {
      const ComplexMatrix u = sample_haar_unitary(d, rng);
      CHECK(max_diff(u.adjoint() * u, ComplexMatrix::Identity(d, d)) <= 1e-10);
    }
    const int n = 100000;
    ComplexMatrix sz(2, 2);
    sz << 1, 0, 0, -1;
    ComplexMatrix mean2 = ComplexMatrix::Zero(2, 2);
    ComplexMatrix o3 = ComplexMatrix::Zero(3, 3);
    o3.diagonal() << 1, 2, 3;
    ComplexMatrix mean3 = ComplexMatrix::Zero(3, 3);
    for (int k = 0; k < n; ++k) {
      const ComplexMatrix u2 = sample_haar_unitary(2, rng);
      mean2 += u2.adjoint() * sz * u2;
      const ComplexMatrix u3 = sample_haar_unitary(3, rng);
      mean3 += u3.adjoint() * o3 * u3;
    }
    CHECK((mean2 / n).cwiseAbs().maxCoeff() <= 0.02);
    CHECK(max_diff(mean3 / n, 2.0 * ComplexMatrix::Identity(3, 3)) <= 0.03);
  }

  TEST_CASE("Haar measure is left invariant in its first two trace moments") {
    RngStream rng(5, 0);
    std::mt19937_64 gen(5);
    const Index d = 3;
    // A fixed unitary from an independent QR.
    const ComplexMatrix w = Eigen::HouseholderQR<ComplexMatrix>(random_matrix(d, d, gen)).householderQ();
    const int n = 40000;
    Complex m1 = 0.0, m1w = 0.0;
    double m2 = 0.0, m2w = 0.0, v2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const ComplexMatrix u = sample_haar_unitary(d, rng);
      const Complex t = u.trace(), tw = (w * u).trace();
      m1 += t;
      m1w += tw;
      m2 += std::norm(t);
      m2w += std::norm(tw);
      v2 += std::norm(t) * std::norm(t);
    }
    m1 /= n;
    m1w /= n;
    m2 /= n;
    m2w /= n;
    const double se2 = std::sqrt((v2 / n - m2 * m2) / n);
    CHECK(std::abs(m1 - m1w) < 5.0 / std::sqrt(double(n)));
    CHECK(std::abs(m2 - m2w) < 5.0 * std::sqrt(2.0) * se2);
    CHECK(m2 == doctest::Approx(1.0).epsilon(5.0 * se2));
  }

  TEST_CASE("exact subsystem averages") {
    std::mt19937_64 gen(6);
    const BipartitePartition part(2, 3);
    CHECK(max_diff(haar_average_conjugation(ComplexMatrix::Identity(6, 6), part, Subsystem::A),
                   ComplexMatrix::Identity(6, 6)) < 1e-15);
    ComplexMatrix sz(2, 2);
    sz << 1, 0, 0, -1;
    const ComplexMatrix m = random_matrix(3, 3, gen);
    CHECK(haar_average_conjugation(naive_kron(sz, m), part, Subsystem::A).cwiseAbs().maxCoeff() < 1e-15);

    // Monte Carlo over A, written with explicit kron products.
    const ComplexMatrix o = random_matrix(6, 6, gen);
    RngStream rng(6, 0);
    ComplexMatrix acc = ComplexMatrix::Zero(6, 6);
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
      const ComplexMatrix u = naive_kron(sample_haar_unitary(2, rng), ComplexMatrix::Identity(3, 3));
      acc += u.adjoint() * o * u;
    }
    CHECK(max_diff(acc / n, haar_average_conjugation(o, part, Subsystem::A)) <= 0.02);
    // Over B the identity factor moves to the other side.
    const ComplexMatrix exact_b =
        naive_kron(naive_trace_b(o, 2, 3), ComplexMatrix::Identity(3, 3)) / 3.0;
    CHECK(max_diff(haar_average_conjugation(o, part, Subsystem::B), exact_b) < 1e-12);
    CHECK_THROWS_AS(haar_average_conjugation(random_matrix(5, 5, gen), part, Subsystem::A),
                    InvalidArgument);
  }

  TEST_CASE("noise operators reconstruct from their signs") {
    RngStream rng(7, 0);
    std::vector<HermitianOperator> v;
    for (int k = 0; k < 4; ++k) v.push_back(sample_gue(64, rng));
    const double delta = 0.1;
    const NoiseRealization r = sample_noise_operator(v, delta, rng);
    ComplexMatrix sum = ComplexMatrix::Zero(64, 64);
    for (int k = 0; k < 4; ++k) sum += double(r.signs[k]) * v[k].matrix();
    CHECK(max_diff(r.op.matrix(), delta * sum) <= 1e-12);
    CHECK(max_asymmetry(r.op.matrix()) == 0.0);
    // Off-diagonal entry variance: 4 delta^2 times the GUE value 2.
    double s = 0.0;
    long c = 0;
    for (Index i = 0; i < 64; ++i)
      for (Index j = 0; j < 64; ++j)
        if (i != j) s += std::norm(r.op.matrix()(i, j)), ++c;
    CHECK(s / c == doctest::Approx(4 * delta * delta * 2.0).epsilon(0.1));

    const NoiseRealization single = sample_noise_operator({v[0]}, 0.3, rng);
    CHECK(max_diff(single.op.matrix(), single.signs[0] * 0.3 * v[0].matrix()) <= 1e-12);

    std::array<int, 4> counts{};
    for (int k = 0; k < 10000; ++k) {
      const NoiseRealization p = sample_noise_operator({v[0], v[1]}, delta, rng);
      counts[(p.signs[0] > 0) * 2 + (p.signs[1] > 0)]++;
    }
    for (int c4 : counts) CHECK(std::abs(c4 / 10000.0 - 0.25) <= 0.02);

    CHECK_THROWS_AS(sample_noise_operator({}, delta, rng), InvalidArgument);
    CHECK_THROWS_AS(sample_noise_operator({v[0], sample_gue(3, rng)}, delta, rng), InvalidArgument);
  }

  TEST_CASE("random Hermitian operators have fixed scale and zero mean") {
    RngStream rng(8, 0);
    ComplexMatrix mean = ComplexMatrix::Zero(2, 2);
    for (int k = 0; k < 100; ++k) {
      const HermitianOperator a = sample_random_hermitian(2, rng);
      CHECK(hs_inner(a.matrix(), a.matrix()).real() / 2.0 == doctest::Approx(1.0).epsilon(1e-12));
      mean += a.matrix() / 100.0;
    }
    CHECK(mean.norm() <= 0.2);
  }
}
