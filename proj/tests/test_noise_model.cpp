#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mvdvc/noise_model.hpp"

using namespace mvdvc;

namespace {

double laplace_pdf(double mu, double alpha, double x) {
  return 0.5 * alpha * std::exp(-alpha * std::abs(x - mu));
}

double simpson(double mu, double alpha, double a, double b) {
  double m = 0.5 * (a + b);
  return (b - a) / 6.0 *
         (laplace_pdf(mu, alpha, a) + 4.0 * laplace_pdf(mu, alpha, m) + laplace_pdf(mu, alpha, b));
}

// relative-tolerance refinement keeps tiny tail masses accurate enough for
// log-ratio comparisons
double adaptive(double mu, double alpha, double a, double b, double whole, int depth) {
  double m = 0.5 * (a + b);
  double left = simpson(mu, alpha, a, m);
  double right = simpson(mu, alpha, m, b);
  double err = std::abs(left + right - whole);
  if (depth > 48 || err <= 1e-12 * (std::abs(left) + std::abs(right)))
    return left + right + (left + right - whole) / 15.0;
  return adaptive(mu, alpha, a, m, left, depth + 1) +
         adaptive(mu, alpha, m, b, right, depth + 1);
}

// numeric Laplacian mass, split at the density kink
double numeric_mass(double mu, double alpha, double a, double b) {
  auto piece = [&](double x0, double x1) {
    if (x1 <= x0) return 0.0;
    return adaptive(mu, alpha, x0, x1, simpson(mu, alpha, x0, x1), 0);
  };
  if (mu > a && mu < b) return piece(a, mu) + piece(mu, b);
  return piece(a, b);
}

// independent LLR computation by numeric integration over admissible bins
double numeric_llr(double si, double alpha, const BinModel& bins, uint32_t prefix, int plane) {
  int bp = bins.bitplanes();
  double m0 = 0, m1 = 0;
  for (int v = 0; v < bins.levels; v++) {
    uint32_t g = gray_encode(uint32_t(v));
    if ((g >> (bp - plane + 1)) != prefix) continue;
    double m = numeric_mass(si, alpha, bins.lo + v * bins.step, bins.lo + (v + 1) * bins.step);
    ((g >> (bp - plane)) & 1 ? m1 : m0) += m;
  }
  if (m0 <= 0 && m1 <= 0) return 0.0;
  if (m1 <= 0) return kLlrClamp;
  if (m0 <= 0) return -kLlrClamp;
  return std::log(m0 / m1);
}

}  // namespace

TEST_CASE("alpha formulas: residual path, spatial cap, sigma floor") {
  CHECK(alpha_from_sigma(2.0) == doctest::Approx(std::sqrt(2.0) / 2.0));
  CHECK(alpha_sec(1.0) == 0.5);       // sqrt(2)/1 capped
  CHECK(alpha_sec(10.0) == doctest::Approx(std::sqrt(2.0) / 10.0));
  CHECK(alpha_from_sigma(0.0) == doctest::Approx(2.0 * std::sqrt(2.0)));  // floored sigma
  CHECK(alpha_from_sigma(0.1) == doctest::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("noise field: residual sigma per WZ block from the KEY neighbourhood") {
  Frame cur(32, 32);
  std::fill(cur.luma.begin(), cur.luma.end(), uint8_t(100));
  ConcealContext ctx;
  ctx.current = &cur;
  ctx.pattern = InterleavePattern::for_frame(32, 32, 8, Parity::even);

  CandidateSI cand;
  cand.key_prediction = cur;
  cand.block_src.assign(16, 0);
  // compensated KEY pixels off by alternating +-2: residual sigma = 2
  for (int y = 0; y < 32; y++)
    for (int x = 0; x < 32; x++)
      if (ctx.pattern.is_key(y / 8, x / 8))
        cand.key_prediction.at(x, y) = uint8_t(100 + (((x + y) & 1) ? 2 : -2));

  NoiseField nf = estimate_noise_field(ctx, cand);
  for (int bi = 0; bi < 4; bi++)
    for (int bj = 0; bj < 4; bj++) {
      if (ctx.pattern.is_key(bi, bj)) continue;
      CHECK(nf.alpha[nf.idx(bi, bj)] == doctest::Approx(std::sqrt(2.0) / 2.0));
    }
}

TEST_CASE("noise field: spatial path uses neighbourhood variance with the 0.5 cap") {
  Frame cur(32, 32);
  for (int y = 0; y < 32; y++)
    for (int x = 0; x < 32; x++) cur.at(x, y) = uint8_t(((x + y) & 1) ? 110 : 90);  // sigma 10
  ConcealContext ctx;
  ctx.current = &cur;
  ctx.pattern = InterleavePattern::for_frame(32, 32, 8, Parity::even);

  CandidateSI cand;
  cand.key_prediction = cur;
  cand.block_src.assign(16, 2);  // every WZ block spatially concealed
  NoiseField nf = estimate_noise_field(ctx, cand);
  for (int bi = 0; bi < 4; bi++)
    for (int bj = 0; bj < 4; bj++) {
      if (ctx.pattern.is_key(bi, bj)) continue;
      CHECK(nf.alpha[nf.idx(bi, bj)] == doctest::Approx(std::sqrt(2.0) / 10.0));
    }

  // flat neighbourhood: unbounded alpha capped at 0.5
  std::fill(cur.luma.begin(), cur.luma.end(), uint8_t(100));
  NoiseField flat = estimate_noise_field(ctx, cand);
  for (int bi = 0; bi < 4; bi++)
    for (int bj = 0; bj < 4; bj++)
      if (!ctx.pattern.is_key(bi, bj)) CHECK(flat.alpha[flat.idx(bi, bj)] == 0.5);
}

TEST_CASE("laplace_mass: closed form matches numeric integration") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> mu_d(-100.0, 400.0), a_d(0.01, 2.0);
  for (int t = 0; t < 200; t++) {
    double mu = mu_d(rng), alpha = a_d(rng);
    double a = mu_d(rng), b = a + std::abs(mu_d(rng)) * 0.3;
    CHECK(laplace_mass(mu, alpha, a, b) == doctest::Approx(numeric_mass(mu, alpha, a, b)).epsilon(1e-9));
  }
  CHECK(laplace_mass(77.0, 0.3, -1e6, 1e6) == doctest::Approx(1.0));
  CHECK(laplace_mass(0.0, 0.5, -3.0, 0.0) == doctest::Approx(laplace_mass(0.0, 0.5, 0.0, 3.0)));
}

TEST_CASE("bit LLR: reference point at levels=4, plane 1, SI=100, alpha=0.1") {
  BinModel bins = QuantSpec{QuantDomain::pixel, 4, 1}.pixel_bins();
  double llr = hypothesis_llr(100.0, 0.1, bins, 0, 1);
  CHECK(llr > 0.0);  // SI sits in [0,128): bit 0 side
  CHECK(llr == doctest::Approx(numeric_llr(100.0, 0.1, bins, 0, 1)).epsilon(1e-6));
  // P(X1=0) is the Laplacian mass on [0,128) normalized over [0,256)
  double m0 = numeric_mass(100.0, 0.1, 0.0, 128.0);
  double m1 = numeric_mass(100.0, 0.1, 128.0, 256.0);
  CHECK(llr == doctest::Approx(std::log(m0 / m1)).epsilon(1e-6));
}

TEST_CASE("bit LLR: closed form tracks the numeric oracle across domains") {
  std::mt19937 rng(7);
  std::vector<BinModel> models = {
      QuantSpec{QuantDomain::pixel, 2, 1}.pixel_bins(),
      QuantSpec{QuantDomain::pixel, 4, 1}.pixel_bins(),
      QuantSpec{QuantDomain::pixel, 16, 1}.pixel_bins(),
      QuantSpec::band_bins(0, 32),   // DC, [0,1024)
      QuantSpec::band_bins(3, 8),    // AC, [-512,512)
  };
  for (const auto& bins : models) {
    int bp = bins.bitplanes();
    std::uniform_real_distribution<double> si_d(bins.lo - 20.0, bins.hi() + 20.0);
    std::uniform_real_distribution<double> a_d(0.02, 2.0);
    for (int t = 0; t < 60; t++) {
      double si = si_d(rng), alpha = a_d(rng);
      int plane = 1 + int(rng() % bp);
      uint32_t prefix = uint32_t(rng()) & ((1u << (plane - 1)) - 1);
      // compare within the decoder's working range; beyond the clamp only
      // the saturated value matters
      double got = std::clamp(hypothesis_llr(si, alpha, bins, prefix, plane), -kLlrClamp, kLlrClamp);
      double want = std::clamp(numeric_llr(si, alpha, bins, prefix, plane), -kLlrClamp, kLlrClamp);
      CHECK(got == doctest::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("bit LLR: per-hypothesis bin masses normalize to one") {
  BinModel bins = QuantSpec{QuantDomain::pixel, 8, 1}.pixel_bins();
  std::mt19937 rng(11);
  for (int t = 0; t < 50; t++) {
    double si = double(rng() % 2560) / 10.0;
    double alpha = 0.05 + double(rng() % 100) / 50.0;
    double total = 0.0;
    for (int v = 0; v < bins.levels; v++)
      total += laplace_mass(si, alpha, bins.lo + v * bins.step, bins.lo + (v + 1) * bins.step);
    double inside = laplace_mass(si, alpha, bins.lo, bins.hi());
    CHECK(total == doctest::Approx(inside).epsilon(1e-9));
    // normalized bit probabilities complement each other
    double m0 = 0, m1 = 0;
    for (int v = 0; v < bins.levels; v++) {
      double m = laplace_mass(si, alpha, bins.lo + v * bins.step, bins.lo + (v + 1) * bins.step);
      ((gray_encode(uint32_t(v)) >> (bins.bitplanes() - 1)) & 1 ? m1 : m0) += m;
    }
    if (m0 + m1 > 0) CHECK(m0 / (m0 + m1) + m1 / (m0 + m1) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("bit LLR: concentrated density saturates at the clamp with the right sign") {
  BinModel bins = QuantSpec{QuantDomain::pixel, 4, 1}.pixel_bins();
  // centre of bin 1 (Gray 01): plane 1 bit is 0, plane 2 bit is 1
  double llr1 = bit_llr({96.0}, {5.0}, bins, 0, 1);
  CHECK(llr1 == kLlrClamp);
  double llr2 = bit_llr({96.0}, {5.0}, bins, 0, 2);
  CHECK(llr2 == -kLlrClamp);
}

TEST_CASE("bit LLR: hypotheses combine by averaging, then clamp") {
  BinModel bins = QuantSpec{QuantDomain::pixel, 4, 1}.pixel_bins();
  std::mt19937 rng(13);
  for (int t = 0; t < 40; t++) {
    std::vector<double> si = {double(rng() % 256), double(rng() % 256)};
    std::vector<double> alpha = {0.05 + double(rng() % 50) / 100.0, 0.05 + double(rng() % 50) / 100.0};
    int plane = 1 + int(rng() % 2);
    uint32_t prefix = plane == 1 ? 0 : (rng() & 1);
    double h1 = hypothesis_llr(si[0], alpha[0], bins, prefix, plane);
    double h2 = hypothesis_llr(si[1], alpha[1], bins, prefix, plane);
    double want = std::clamp(0.5 * (h1 + h2), -kLlrClamp, kLlrClamp);
    CHECK(bit_llr(si, alpha, bins, prefix, plane) == doctest::Approx(want));
  }
  CHECK(0.5 * (4.0 + -2.0) == doctest::Approx(1.0));
}

TEST_CASE("bit LLR: total underflow yields zero information") {
  BinModel bins = QuantSpec{QuantDomain::pixel, 4, 1}.pixel_bins();
  CHECK(hypothesis_llr(-4000.0, 5.0, bins, 0, 1) == 0.0);
  CHECK(hypothesis_llr(5000.0, 5.0, bins, 0, 2) == 0.0);
}
