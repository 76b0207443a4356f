// Copyright 2026 The ncmdoa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "ncmdoa/array_geometry.hpp"
#include "ncmdoa/beamformers.hpp"
#include "ncmdoa/error.hpp"
#include "ncmdoa/metrics.hpp"
#include "ncmdoa/sources.hpp"
#include "ncmdoa/stft.hpp"
#include "support.hpp"

using namespace ncmdoa;

namespace {

std::vector<double> noise(std::mt19937_64& rng, std::size_t n, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

std::vector<double> scaled(std::vector<double> x, double a) {
  for (auto& v : x) v *= a;
  return x;
}

MetricSignals random_signals(std::mt19937_64& rng) {
  MetricSignals s;
  s.desired = noise(rng, 3000);
  s.interferer_direct = noise(rng, 3000, 0.5);
  s.interferer = noise(rng, 3000, 0.7);
  s.noise = noise(rng, 3000, 0.9);
  return s;
}

// Sensor frames of a single plane wave: y[m,l,k] = a_m[k] s[l,k].
SpectralFrames plane_frames(const SpectralFrames& src, const SensorArray& array,
                            const Doa& dir) {
  SpectralFrames y(array.size(), src.windows(), src.config());
  for (std::size_t k = 0; k < src.bins(); ++k) {
    y.bin(k) = steering_vector(array, dir, k) * src.bin(k);
  }
  return y;
}

}  // namespace

TEST_CASE("identity filter leaves every ratio at 0 dB") {
  std::mt19937_64 rng(1);
  const MetricSignals s = random_signals(rng);
  const EnhancementReport r = enhancement_metrics(s, s, 128);
  CHECK(r.gsnr_db == doctest::Approx(0.0));
  CHECK(r.gsir_db == doctest::Approx(0.0));
  CHECK(r.isrf_db == doctest::Approx(0.0));
  CHECK(r.dsrf_db == doctest::Approx(0.0));
  CHECK_FALSE(r.infinite);
}

TEST_CASE("ratio metrics follow their definitions") {
  std::mt19937_64 rng(2);
  const MetricSignals s = random_signals(rng);
  MetricSignals f = s;
  f.desired = scaled(s.desired, 0.5);
  f.interferer_direct = scaled(s.interferer_direct, 0.1);
  f.interferer = scaled(s.interferer, 0.2);
  f.noise = scaled(s.noise, 0.25);
  const EnhancementReport r = enhancement_metrics(s, f, 0);
  CHECK(r.dsrf_db == doctest::Approx(20.0 * std::log10(2.0)));
  CHECK(r.isrf_db == doctest::Approx(20.0));
  CHECK(r.gsir_db == doctest::Approx(20.0 * std::log10(0.5 / 0.2)));
  CHECK(r.gsnr_db == doctest::Approx(20.0 * std::log10(0.5 / 0.25)));
  f.interferer_direct.assign(3000, 0.0);
  const EnhancementReport z = enhancement_metrics(s, f, 0);
  CHECK(z.infinite);
  CHECK(std::isinf(z.isrf_db));
  CHECK(clip_db(z.isrf_db) == kDbClip);
  CHECK(clip_db(-1e9) == -kDbClip);
}

TEST_CASE("ratio metrics ignore a global gain") {
  std::mt19937_64 rng(3);
  const MetricSignals s = random_signals(rng);
  MetricSignals f = random_signals(rng);
  const EnhancementReport a = enhancement_metrics(s, f, 64);
  MetricSignals s2 = s, f2 = f;
  for (auto* sig : {&s2, &f2}) {
    sig->desired = scaled(sig->desired, 7.5);
    sig->interferer_direct = scaled(sig->interferer_direct, 7.5);
    sig->interferer = scaled(sig->interferer, 7.5);
    sig->noise = scaled(sig->noise, 7.5);
  }
  const EnhancementReport b = enhancement_metrics(s2, f2, 64);
  CHECK(a.gsnr_db == doctest::Approx(b.gsnr_db).epsilon(1e-12));
  CHECK(a.gsir_db == doctest::Approx(b.gsir_db).epsilon(1e-12));
  CHECK(a.isrf_db == doctest::Approx(b.isrf_db).epsilon(1e-12));
  CHECK(a.dsrf_db == doctest::Approx(b.dsrf_db).epsilon(1e-12));
}

TEST_CASE("per-component filtering matches filtering the mixture") {
  const SensorArray array = testing::ura16();
  std::mt19937_64 rng(4);
  const StftConfig cfg(128);
  const SpectralFrames a = plane_frames(stft({noise(rng, 2000)}, cfg), array, {0.3, 0.0});
  const SpectralFrames b = plane_frames(stft({noise(rng, 2000)}, cfg), array, {2.0, 0.0});
  SpectralFrames mix = a;
  mix += b;
  std::vector<CVector> h;
  for (std::size_t k = 0; k < array.bin_count(); ++k) h.push_back(CVector::Random(16));
  const auto ya = istft(apply_weights(a, h)), yb = istft(apply_weights(b, h));
  const auto ym = istft(apply_weights(mix, h));
  double worst = 0.0;
  for (std::size_t i = 0; i < ym.size(); ++i) {
    worst = std::max(worst, std::abs(ya[i] + yb[i] - ym[i]));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("exact null on a plane-wave interferer") {
  const SensorArray array = testing::ura16();
  std::mt19937_64 rng(5);
  const StftConfig cfg(128);
  const Doa xd{0.0, 0.0}, xb{deg2rad(60.0), 0.0};
  const SpectralFrames sx = stft({noise(rng, 4000)}, cfg);
  const SpectralFrames sp = stft({noise(rng, 4000)}, cfg);
  const SpectralFrames yx = plane_frames(sx, array, xd);
  const SpectralFrames yp = plane_frames(sp, array, xb);
  ConstraintSet cs;
  BinMatrices ncm;
  for (std::size_t k = 0; k < array.bin_count(); ++k) {
    cs.desired.push_back(steering_vector(array, xd, k));
    cs.interferer.push_back(steering_vector(array, xb, k));
    ncm.push_back(isotropic_pseudocov(array, k).matrix +
                  1e-2 * CMatrix::Identity(16, 16));
  }
  const BeamformerOptions fb{CollisionPolicy::kFallbackToMvdr};
  const BeamformerWeights lv = lcmv(ncm, cs, fb);
  const BeamformerWeights mv = mvdr(ncm, cs.desired);
  const auto eval = [&](const BeamformerWeights& w) {
    MetricSignals ref, out;
    ref.desired = istft(sx);
    ref.interferer_direct = ref.interferer = ref.noise = istft(sp);
    out.desired = istft(apply_weights(yx, w.h));
    out.interferer_direct = out.interferer = out.noise =
        istft(apply_weights(yp, w.h));
    return enhancement_metrics(ref, out, 256);
  };
  const EnhancementReport rl = eval(lv), rm = eval(mv);
  CHECK(std::abs(rl.dsrf_db) < 0.01);
  CHECK(std::abs(rm.dsrf_db) < 0.01);
  CHECK(rl.isrf_db >= rm.isrf_db);
  // DC cannot separate the two directions and falls back to MVDR; every
  // nulled bin removes the interferer to rounding level.
  const SpectralFrames fp = apply_weights(yp, lv.h);
  double in = 0.0, left = 0.0;
  std::size_t nulled = 0;
  for (std::size_t k = 0; k < lv.h.size(); ++k) {
    if (!lv.null_applied[k]) continue;
    ++nulled;
    in += sp.bin(k).squaredNorm();
    left += fp.bin(k).squaredNorm();
  }
  CHECK(nulled + 1 >= lv.h.size());
  CHECK(10.0 * std::log10(in / left) >= 80.0);
}

TEST_CASE("white-noise gain and directivity") {
  const SensorArray array = testing::ura16();
  BinVectors das, sel, mv;
  for (std::size_t k = 0; k < array.bin_count(); ++k) {
    const CVector d = steering_vector(array, {0.5, 0.0}, k);
    das.push_back(d / 16.0);
    sel.push_back(CVector::Unit(16, static_cast<Eigen::Index>(array.reference())));
    const CMatrix g = isotropic_pseudocov(array, k).matrix +
                      1e-4 * CMatrix::Identity(16, 16);
    mv.push_back(mvdr_weights(g, d));
  }
  const TheoreticalMetrics t = theoretical_metrics(das, array);
  CHECK(t.wng == doctest::Approx(16.0));
  CHECK(to_db(t.wng) == doctest::Approx(12.0412).epsilon(1e-5));
  const TheoreticalMetrics s = theoretical_metrics(sel, array);
  CHECK(s.df == doctest::Approx(1.0));
  CHECK(s.wng == doctest::Approx(1.0));
  CHECK(theoretical_metrics(mv, array).df >= t.df);
  CHECK_THROWS_AS(theoretical_metrics(BinVectors(3, CVector::Ones(16)), array), Error);
}

TEST_CASE("angular error") {
  CHECK(angular_error_deg(deg2rad(25.0), deg2rad(25.0)) == doctest::Approx(0.0));
  CHECK(angular_error_deg(deg2rad(10.0), deg2rad(30.0)) == doctest::Approx(20.0));
  CHECK(angular_error_deg(deg2rad(350.0), deg2rad(10.0)) == doctest::Approx(20.0));
  CHECK(angular_error_deg(0.0, kPi) == doctest::Approx(180.0));
  CHECK(angular_error_deg(Doa{0.0, deg2rad(90.0)}, Doa{1.0, deg2rad(90.0)}) ==
        doctest::Approx(0.0).epsilon(1e-6));
  CHECK(angular_error_deg(Doa{0.0, 0.0}, Doa{0.0, deg2rad(30.0)}) ==
        doctest::Approx(30.0));
}

TEST_CASE("boxplot statistics use linear interpolation") {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i + 1;
  std::shuffle(v.begin(), v.end(), std::mt19937_64(7));
  const BoxplotStats b = boxplot_stats(v);
  CHECK(b.p50 == doctest::Approx(50.5));
  CHECK(b.p9 == doctest::Approx(1.0 + 0.09 * 99));
  CHECK(b.p91 == doctest::Approx(1.0 + 0.91 * 99));
  const BoxplotStats c = boxplot_stats(std::vector<double>(9, 4.25));
  for (double q : {c.p9, c.p25, c.p50, c.p75, c.p91}) CHECK(q == 4.25);
  CHECK(quantile({3.0}, 0.37) == 3.0);
  CHECK_THROWS_AS(boxplot_stats({}), Error);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    const BoxplotStats r = boxplot_stats(noise(rng, 1 + rng() % 40));
    CHECK(r.p9 <= r.p25);
    CHECK(r.p25 <= r.p50);
    CHECK(r.p50 <= r.p75);
    CHECK(r.p75 <= r.p91);
  }
}

TEST_CASE("grouped report marginalises over the other parameters") {
  const std::string csv =
      "scenario,t60_ms,dx_m,dp_m,sir_db,scr_db,theta_b_deg,seed,method,doa_deg,"
      "angular_error_deg,gsnr_db,gsir_db,isrf_db,dsrf_db,df_db,wng_db,flags\n"
      "a,0,1.5,1.5,0,5,30,1,ncm-lcmv,30,1,2,3,4,5,6,7,\n"
      "b,0,3,1.5,0,5,70,2,ncm-lcmv,70,3,2,3,4,5,6,7,\n"
      "c,500,1.5,1.5,0,5,30,3,ncm-lcmv,30,5,2,3,4,5,6,7,\n"
      "a,0,1.5,1.5,0,5,30,1,msc,31,2,,,,,,,\n";
  const std::string out = boxplot_report(csv, "t60");
  std::istringstream in(out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "parameter,value,method,metric,count,p9,p25,p50,p75,p91");
  int rows = 0;
  bool saw = false;
  while (std::getline(in, line)) {
    ++rows;
    if (line.rfind("t60_ms,0,ncm-lcmv,angular_error_deg,2,", 0) == 0) {
      saw = true;
      CHECK(line.find(",2.000000,") != std::string::npos);
    }
  }
  // Two t60 groups x seven metrics for ncm-lcmv plus one msc angle row.
  CHECK(rows == 2 * 7 + 1);
  CHECK(saw);
  CHECK_THROWS_AS(boxplot_report(csv, "color"), Error);
  CHECK_THROWS_AS(boxplot_report("", "t60"), Error);
}

TEST_CASE("harmonic sources refuse content at Nyquist") {
  std::mt19937_64 rng(9);
  CHECK_THROWS_AS(harmonic_signal(100, 16000.0, 1000.0, 8, rng), Error);
  const auto ok = harmonic_signal(16000, 16000.0, 1000.0, 7, rng);
  CHECK(ok.size() == 16000);
  for (const Voice v : {Voice::kLow, Voice::kHigh, Voice::kMusic}) {
    std::mt19937_64 a(3), b(3);
    const auto x = speech_like(8000, 16000.0, v, a);
    CHECK(x == speech_like(8000, 16000.0, v, b));
    CHECK(std::all_of(x.begin(), x.end(), [](double s) { return std::isfinite(s); }));
  }
  CHECK(parse_source_kind(to_string(SourceKind::kHarmonic)) == SourceKind::kHarmonic);
  CHECK_THROWS_AS(parse_source_kind("violin"), Error);
}
