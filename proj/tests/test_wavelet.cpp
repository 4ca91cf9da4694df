#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "ecg/common.hpp"
#include "ecg/wavelet.hpp"

using namespace ecg;
using namespace ecg::wavelet;

namespace {

// ---------------------------------------------------------------------------
// Naive oracle: per-sample boundary reflection and direct
// convolution-and-downsample, one level at a time. Kept independent of the
// library's extension-buffer implementation.
// ---------------------------------------------------------------------------

double oracle_sample(const std::vector<double>& x, int64_t i) {
  const int64_t n = static_cast<int64_t>(x.size());
  while (i < 0 || i >= n) {
    if (i < 0) i = -1 - i;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return x[i];
}

void oracle_level(const std::vector<double>& x, const std::vector<double>& low,
                  const std::vector<double>& high, std::vector<double>& ca,
                  std::vector<double>& cd) {
  const int flen = static_cast<int>(low.size());
  const int n = static_cast<int>(x.size());
  const int out = (n + flen - 1) / 2;
  ca.assign(out, 0.0);
  cd.assign(out, 0.0);
  for (int k = 0; k < out; ++k) {
    const int i = 2 * k + 1;  // full-convolution index
    for (int j = 0; j < flen; ++j) {
      const double v = oracle_sample(x, i - j);
      ca[k] += low[j] * v;
      cd[k] += high[j] * v;
    }
  }
}

WaveletCoeffs oracle_decompose(const std::vector<double>& signal,
                               const WaveletSpec& spec) {
  const auto [low, high] = daubechies_filters(spec.order);
  WaveletCoeffs coeffs;
  coeffs.spec = spec;
  coeffs.original_length = static_cast<int>(signal.size());
  coeffs.details.resize(spec.levels);
  std::vector<double> current = signal;
  for (int level = 0; level < spec.levels; ++level) {
    std::vector<double> ca, cd;
    oracle_level(current, low, high, ca, cd);
    coeffs.details[spec.levels - 1 - level] = cd;
    current = ca;
  }
  coeffs.approx = current;
  return coeffs;
}

std::vector<double> random_signal(int n, Rng& rng) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

double max_abs_diff(const std::vector<double>& a,
                    const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("db1 is the Haar pair in closed form") {
  const auto [low, high] = daubechies_filters(1);
  const double s = 1.0 / std::sqrt(2.0);
  REQUIRE(low.size() == 2);
  CHECK(low[0] == doctest::Approx(s).epsilon(1e-15));
  CHECK(low[1] == doctest::Approx(s).epsilon(1e-15));
  CHECK(high[0] == doctest::Approx(s).epsilon(1e-15));
  CHECK(high[1] == doctest::Approx(-s).epsilon(1e-15));
}

TEST_CASE("all supported orders satisfy the admissibility and QMF relations") {
  for (int order = 1; order <= 8; ++order) {
    const auto [low, high] = daubechies_filters(order);
    CHECK(low.size() == static_cast<size_t>(2 * order));
    double sum = 0.0;
    for (double v : low) sum += v;
    CHECK(std::abs(sum - std::sqrt(2.0)) < 1e-12);
    const int flen = static_cast<int>(low.size());
    for (int k = 0; k < flen; ++k)
      CHECK(high[k] == (k % 2 == 0 ? 1.0 : -1.0) * low[flen - 1 - k]);
  }
  CHECK_THROWS_AS(daubechies_filters(9), ValidationError);
  CHECK_THROWS_AS(daubechies_filters(0), ValidationError);
}

TEST_CASE("db4 has 8 coefficients with unit squared sum") {
  const auto [low, high] = daubechies_filters(4);
  (void)high;
  REQUIRE(low.size() == 8);
  double sq = 0.0;
  for (double v : low) sq += v * v;
  CHECK(std::abs(sq - 1.0) < 1e-12);
}

TEST_CASE("constant signals have zero detail bands") {
  const std::vector<double> x(128, 3.7);
  for (int levels = 1; levels <= 4; ++levels) {
    const WaveletCoeffs c = dwt_decompose(x, {WaveletFamily::daubechies, 4, levels});
    for (const auto& band : c.details)
      for (double v : band) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("decomposition is linear") {
  Rng rng(11);
  const WaveletSpec spec{WaveletFamily::daubechies, 3, 3};
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_signal(200, rng);
    const auto y = random_signal(200, rng);
    const double a = rng.uniform(-2.0, 2.0);
    const double b = rng.uniform(-2.0, 2.0);
    std::vector<double> z(200);
    for (int i = 0; i < 200; ++i) z[i] = a * x[i] + b * y[i];
    const auto cx = dwt_decompose(x, spec);
    const auto cy = dwt_decompose(y, spec);
    const auto cz = dwt_decompose(z, spec);
    for (size_t i = 0; i < cz.approx.size(); ++i)
      CHECK(cz.approx[i] ==
            doctest::Approx(a * cx.approx[i] + b * cy.approx[i]).epsilon(1e-9));
    for (int l = 0; l < spec.levels; ++l)
      for (size_t i = 0; i < cz.details[l].size(); ++i)
        CHECK(cz.details[l][i] ==
              doctest::Approx(a * cx.details[l][i] + b * cy.details[l][i])
                  .epsilon(1e-9));
  }
}

TEST_CASE("decompose matches the naive convolution-and-downsample oracle") {
  Rng rng(21);
  const auto x = random_signal(1024, rng);
  const WaveletSpec spec{WaveletFamily::daubechies, 4, 4};
  const WaveletCoeffs got = dwt_decompose(x, spec);
  const WaveletCoeffs want = oracle_decompose(x, spec);

  // band lengths follow the halving cascade
  int len = 1024;
  const int flen = 8;
  for (int level = 1; level <= 4; ++level) {
    len = dwt_band_length(len, flen);
    CHECK(static_cast<int>(got.details[4 - level].size()) == len);
  }
  CHECK(static_cast<int>(got.approx.size()) == len);

  CHECK(max_abs_diff(got.approx, want.approx) < 1e-10);
  for (int l = 0; l < 4; ++l)
    CHECK(max_abs_diff(got.details[l], want.details[l]) < 1e-10);
}

TEST_CASE("perfect reconstruction across lengths, orders, and levels") {
  Rng rng(31);
  for (const int n : {37, 256, 600, 1024}) {
    const auto x = random_signal(n, rng);
    for (int order = 1; order <= 8; ++order) {
      for (int levels = 1; levels <= 4; ++levels) {
        const WaveletSpec spec{WaveletFamily::daubechies, order, levels};
        // skip inadmissible combinations (length below filter at some level)
        bool admissible = true;
        int len = n;
        for (int l = 0; l < levels; ++l) {
          if (len < 2 * order) admissible = false;
          len = dwt_band_length(len, 2 * order);
        }
        if (!admissible) continue;
        const auto rec = dwt_reconstruct(dwt_decompose(x, spec));
        CHECK(max_abs_diff(rec, x) < 1e-9);
      }
    }
  }
}

TEST_CASE("all-zero coefficients reconstruct to an all-zero signal") {
  const std::vector<double> x(300, 0.0);
  const WaveletSpec spec{WaveletFamily::daubechies, 4, 4};
  WaveletCoeffs c = dwt_decompose(x, spec);
  const auto rec = dwt_reconstruct(c);
  for (double v : rec) CHECK(v == 0.0);
}

TEST_CASE("zeroing every detail band of a constant signal is lossless") {
  const std::vector<double> x(256, -1.25);
  const auto out = denoise(x, {WaveletFamily::daubechies, 4, 4}, {1, 2, 3, 4});
  REQUIRE(out.size() == x.size());
  CHECK(max_abs_diff(out, x) < 1e-9);
}

TEST_CASE("denoise with an empty zero set is the identity") {
  Rng rng(41);
  const auto x = random_signal(600, rng);
  const auto out = denoise(x, {WaveletFamily::daubechies, 4, 4}, {});
  CHECK(max_abs_diff(out, x) < 1e-9);
}

TEST_CASE("denoise is idempotent away from the boundaries") {
  // The symmetric-extension transform keeps floor((n+F-1)/2) coefficients
  // per band, more than critical sampling, so re-analysis of a reconstruction
  // regenerates small values in the zeroed bands near the edges. Away from
  // the edges the finite transform coincides with the infinite one, where
  // zeroing is a projection.
  Rng rng(43);
  const WaveletSpec spec{WaveletFamily::daubechies, 4, 4};
  const int margin = 8 * 4;  // filter support times 2^(deepest zeroed level)
  const auto x = random_signal(600, rng);
  const auto once = denoise(x, spec, {1, 2});
  const auto twice = denoise(once, spec, {1, 2});
  double interior = 0.0;
  for (int i = margin; i < 600 - margin; ++i)
    interior = std::max(interior, std::abs(once[i] - twice[i]));
  CHECK(interior < 1e-8);

  // equivalent statement on the coefficients: the zeroed bands of a denoised
  // signal stay zero in the interior
  const WaveletCoeffs c = dwt_decompose(once, spec);
  for (int lvl : {1, 2}) {
    const auto& band = c.details[spec.levels - lvl];
    const int coeff_margin = 8;  // filter support at that band's scale
    for (int i = coeff_margin; i < static_cast<int>(band.size()) - coeff_margin;
         ++i)
      CHECK(std::abs(band[i]) < 1e-8);
  }
}

TEST_CASE("denoise raises the SNR of a noisy smooth beat") {
  // band-limited bump train plus white noise; SNR measured against the
  // known clean signal
  Rng rng(47);
  const int n = 600;
  std::vector<double> clean(n);
  for (int i = 0; i < n; ++i) {
    const double t = (i - n / 2) / 300.0;
    clean[i] = std::exp(-t * t / (2 * 0.02 * 0.02)) +
               0.3 * std::exp(-(t - 0.25) * (t - 0.25) / (2 * 0.06 * 0.06));
  }
  double p_sig = 0.0;
  for (double v : clean) p_sig += v * v;
  p_sig /= n;
  const double sigma = std::sqrt(p_sig / std::pow(10.0, 5.0 / 10.0));  // 5 dB

  int improved = 0;
  const int trials = 25;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<double> noisy(n);
    for (int i = 0; i < n; ++i) noisy[i] = clean[i] + rng.normal(0.0, sigma);
    const auto out = denoise(noisy, {WaveletFamily::daubechies, 4, 4}, {1, 2});
    double err_in = 0.0, err_out = 0.0;
    for (int i = 0; i < n; ++i) {
      err_in += (noisy[i] - clean[i]) * (noisy[i] - clean[i]);
      err_out += (out[i] - clean[i]) * (out[i] - clean[i]);
    }
    if (err_out < err_in) ++improved;
  }
  CHECK(improved == trials);
}

TEST_CASE("coefficient energy matches signal energy away from boundaries") {
  // Parseval for the orthonormal bank; margins of zeros make the symmetric
  // extension irrelevant.
  Rng rng(53);
  for (int order : {2, 4, 8}) {
    const int flen = 2 * order;
    const int margin = 8 * flen;
    const int n = 2 * margin + 256;
    std::vector<double> x(n, 0.0);
    for (int i = margin; i < n - margin; ++i) x[i] = rng.normal();
    double e_sig = 0.0;
    for (double v : x) e_sig += v * v;

    const WaveletCoeffs c =
        dwt_decompose(x, {WaveletFamily::daubechies, order, 3});
    double e_coef = 0.0;
    for (double v : c.approx) e_coef += v * v;
    for (const auto& band : c.details)
      for (double v : band) e_coef += v * v;
    CHECK(std::abs(e_coef - e_sig) / e_sig < 1e-8);
  }
}

TEST_CASE("errors: short signals, bad zero levels, inconsistent bands") {
  const std::vector<double> tiny(9, 1.0);
  CHECK_THROWS_WITH_AS(
      dwt_decompose(tiny, {WaveletFamily::daubechies, 8, 1}),
      doctest::Contains("signal too short"), ValidationError);

  const std::vector<double> x(64, 1.0);
  CHECK_THROWS_AS(denoise(x, {WaveletFamily::daubechies, 4, 4}, {5}),
                  ValidationError);

  WaveletCoeffs c = dwt_decompose(x, {WaveletFamily::daubechies, 2, 2});
  c.details[1].pop_back();
  CHECK_THROWS_WITH_AS(dwt_reconstruct(c),
                       doctest::Contains("inconsistent band lengths"),
                       ValidationError);
}
