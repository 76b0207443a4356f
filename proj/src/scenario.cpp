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

#include "ncmdoa/scenario.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "ncmdoa/error.hpp"
#include "ncmdoa/fft.hpp"

namespace ncmdoa {

namespace {

constexpr double kReverbGap = 0.0025;
constexpr std::size_t kCoherenceGrid = 4097;
constexpr double kDirectLevel = 0.01;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Independent stream per (scenario seed, component tag).
std::mt19937_64 stream(std::uint64_t seed, const char* tag) {
  return std::mt19937_64(splitmix(fnv1a(tag, splitmix(seed))));
}

std::size_t next_pow2(std::size_t n) { return std::bit_ceil(std::max<std::size_t>(n, 2)); }

using Spectrum = std::vector<Complex>;

Spectrum spectrum_of(std::span<const double> x, std::size_t nfft) {
  Spectrum s(nfft / 2 + 1);
  cached_fft(nfft).forward(x, s);
  return s;
}

std::vector<double> time_of(const Spectrum& s, std::size_t nfft,
                            std::size_t samples) {
  std::vector<double> full(nfft);
  cached_fft(nfft).inverse(s, full);
  const double inv = 1.0 / static_cast<double>(nfft);
  std::vector<double> out(samples);
  for (std::size_t n = 0; n < samples; ++n) out[n] = full[n] * inv;
  return out;
}

// gain * x(t - delay), applied as a linear phase on the zero-padded
// spectrum. The Nyquist bin is dropped so the result stays real.
std::vector<double> delayed(const Spectrum& s, std::size_t nfft,
                            std::size_t samples, double delay_samples,
                            double gain) {
  Spectrum d(s.size());
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double w = -2.0 * kPi * static_cast<double>(k) * delay_samples /
                     static_cast<double>(nfft);
    d[k] = gain * s[k] * std::polar(1.0, w);
  }
  d.back() = 0.0;
  return time_of(d, nfft, samples);
}

// Real symmetric square roots of the isotropic coherence on a uniform
// frequency grid from 0 to Nyquist.
class CoherenceRoots {
 public:
  CoherenceRoots(std::span<const Eigen::Vector3d> positions, double fs,
                 double c)
      : fs_(fs) {
    roots_.reserve(kCoherenceGrid);
    for (std::size_t g = 0; g < kCoherenceGrid; ++g) {
      const double f = 0.5 * fs * static_cast<double>(g) /
                       static_cast<double>(kCoherenceGrid - 1);
      const Eigen::MatrixXd gamma = isotropic_coherence(positions, f, c);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma);
      const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      roots_.push_back(es.eigenvectors() * root.asDiagonal() *
                       es.eigenvectors().transpose());
    }
  }

  const Eigen::MatrixXd& at(double f) const {
    const auto g = static_cast<std::size_t>(std::llround(
        f / (0.5 * fs_) * static_cast<double>(kCoherenceGrid - 1)));
    return roots_[std::min(g, kCoherenceGrid - 1)];
  }

 private:
  double fs_;
  std::vector<Eigen::MatrixXd> roots_;
};

std::shared_ptr<const CoherenceRoots> coherence_roots(
    std::span<const Eigen::Vector3d> positions, double fs, double c) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const CoherenceRoots>> cache;
  std::string key;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g/%.17g", fs, c);
  key = buf;
  for (const auto& p : positions) {
    std::snprintf(buf, sizeof buf, "/%.17g,%.17g,%.17g", p.x(), p.y(), p.z());
    key += buf;
  }
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[key];
  if (!slot) slot = std::make_shared<CoherenceRoots>(positions, fs, c);
  return slot;
}

// Applies the coherence roots to M channel spectra in place.
void mix_coherent(std::vector<Spectrum>& spectra, std::size_t nfft,
                  const CoherenceRoots& roots, double fs) {
  const std::size_t m = spectra.size();
  Eigen::VectorXcd in(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < spectra.front().size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(nfft);
    for (std::size_t i = 0; i < m; ++i) in[static_cast<Eigen::Index>(i)] = spectra[i][k];
    const Eigen::VectorXcd out = roots.at(f).cast<Complex>() * in;
    for (std::size_t i = 0; i < m; ++i) spectra[i][k] = out[static_cast<Eigen::Index>(i)];
  }
}

Multichannel zeros(std::size_t m, std::size_t n) {
  return Multichannel(m, std::vector<double>(n, 0.0));
}

void scale(Multichannel& x, double g) {
  for (auto& ch : x) {
    for (double& v : ch) v *= g;
  }
}

void accumulate(Multichannel& acc, const Multichannel& x) {
  for (std::size_t m = 0; m < acc.size(); ++m) {
    for (std::size_t n = 0; n < acc[m].size(); ++n) acc[m][n] += x[m][n];
  }
}

struct Path {
  std::vector<double> delay;  // seconds
  std::vector<double> gain;
};

Path propagation_path(const SensorArray& array, const Eigen::Vector3d& center,
                      double azimuth, double distance, Propagation mode) {
  Path p;
  const double c = array.wave_speed();
  const Eigen::Vector3d u(std::cos(azimuth), std::sin(azimuth), 0.0);
  const Eigen::Vector3d src = center + distance * u;
  for (std::size_t m = 0; m < array.size(); ++m) {
    if (mode == Propagation::kPlane) {
      p.delay.push_back((distance - u.dot(array.position(m) - center)) / c);
      p.gain.push_back(1.0);
    } else {
      const double r = (src - array.position(m)).norm();
      p.delay.push_back(r / c);
      p.gain.push_back(distance / r);
    }
  }
  return p;
}

Multichannel render_direct(const Spectrum& s, std::size_t nfft,
                           std::size_t samples, const Path& path, double fs) {
  Multichannel out;
  for (std::size_t m = 0; m < path.delay.size(); ++m) {
    out.push_back(delayed(s, nfft, samples, path.delay[m] * fs, path.gain[m]));
  }
  return out;
}

BinVectors path_rfr(const SensorArray& array, const Path& path) {
  BinVectors out;
  const std::size_t ref = array.reference();
  for (std::size_t k = 0; k < array.bin_count(); ++k) {
    const double f = array.bin_frequency(k);
    CVector v(array.size());
    for (std::size_t m = 0; m < array.size(); ++m) {
      // Delays show up with a positive phase in the analysis convention.
      v[m] = path.gain[m] / path.gain[ref] *
             std::polar(1.0, 2.0 * kPi * f * (path.delay[m] - path.delay[ref]));
    }
    out.push_back(v);
  }
  return out;
}

// Late field for one source: M independent exponentially decaying noise
// tails convolved with the source, then spatially mixed to isotropic
// coherence.
Multichannel render_reverb(const Spectrum& s, std::size_t nfft,
                           std::size_t samples, double onset, double t60,
                           const SensorArray& array, std::mt19937_64& rng) {
  const double fs = array.sampling_rate();
  const auto start = static_cast<std::size_t>(std::llround(onset * fs));
  const auto length = static_cast<std::size_t>(std::ceil(t60 * fs));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double decay = 3.0 * std::log(10.0) / (t60 * fs);
  std::vector<Spectrum> spectra;
  std::vector<double> tail(nfft, 0.0);
  for (std::size_t m = 0; m < array.size(); ++m) {
    std::fill(tail.begin(), tail.end(), 0.0);
    for (std::size_t n = 0; n < length && start + n < nfft; ++n) {
      tail[start + n] = gauss(rng) * std::exp(-decay * static_cast<double>(n));
    }
    Spectrum h = spectrum_of(tail, nfft);
    for (std::size_t k = 0; k < h.size(); ++k) h[k] *= s[k];
    spectra.push_back(std::move(h));
  }
  const auto roots =
      coherence_roots(array.positions(), fs, array.wave_speed());
  mix_coherent(spectra, nfft, *roots, fs);
  Multichannel out;
  for (auto& sp : spectra) {
    sp.back() = Complex(sp.back().real(), 0.0);
    out.push_back(time_of(sp, nfft, samples));
  }
  return out;
}

}  // namespace

std::string to_string(Propagation p) {
  return p == Propagation::kPlane ? "plane" : "spherical";
}

Propagation parse_propagation(const std::string& name) {
  if (name == "plane") return Propagation::kPlane;
  if (name == "spherical") return Propagation::kSpherical;
  fail(ErrorCode::kConfig,
       "unknown propagation '" + name + "' (plane|spherical)");
}

namespace {

nlohmann::json source_json(const SourceSpec& s) {
  nlohmann::json j = {{"kind", to_string(s.kind)},
                      {"voice", static_cast<int>(s.voice)}};
  if (s.kind == SourceKind::kHarmonic) {
    j["fundamental_hz"] = s.fundamental;
    j["harmonics"] = s.harmonics;
  }
  if (s.kind == SourceKind::kWav) j["wav"] = s.wav_path;
  return j;
}

SourceSpec source_from_json(const nlohmann::json& j, SourceSpec def) {
  if (j.is_string()) {
    def.kind = parse_source_kind(j.get<std::string>());
    return def;
  }
  if (j.contains("kind")) def.kind = parse_source_kind(j.at("kind").get<std::string>());
  if (j.contains("voice")) def.voice = static_cast<Voice>(std::clamp(j.at("voice").get<int>(), 0, 2));
  def.fundamental = j.value("fundamental_hz", def.fundamental);
  def.harmonics = j.value("harmonics", def.harmonics);
  def.wav_path = j.value("wav", def.wav_path);
  return def;
}

}  // namespace

nlohmann::json ScenarioConfig::to_json() const {
  return {{"id", id},
          {"t60_ms", t60_ms},
          {"dx_m", dx},
          {"dp_m", dp},
          {"theta_b_deg", theta_b_deg},
          {"theta_d_deg", theta_d_deg},
          {"sir_db", sir_db},
          {"scr_db", scr_db},
          {"snr_db", snr_db},
          {"duration_s", duration},
          {"seed", seed},
          {"propagation", to_string(propagation)},
          {"desired_source", source_json(desired_source)},
          {"interferer_source", source_json(interferer_source)},
          {"ring_sources", ring_sources},
          {"ring_radius_m", ring_radius}};
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> keys = {
      "id", "t60_ms", "dx_m", "dp_m", "theta_b_deg", "theta_d_deg",
      "sir_db", "scr_db", "snr_db", "duration_s", "seed", "propagation",
      "desired_source", "interferer_source", "ring_sources", "ring_radius_m"};
  if (!j.is_object()) fail(ErrorCode::kConfig, "scenario config must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!keys.count(key)) {
      fail(ErrorCode::kConfig, "scenario config: unknown key '" + key + "'");
    }
  }
  ScenarioConfig c;
  try {
    c.id = j.value("id", c.id);
    c.t60_ms = j.value("t60_ms", c.t60_ms);
    c.dx = j.value("dx_m", c.dx);
    c.dp = j.value("dp_m", c.dp);
    c.theta_b_deg = j.value("theta_b_deg", c.theta_b_deg);
    c.theta_d_deg = j.value("theta_d_deg", c.theta_d_deg);
    c.sir_db = j.value("sir_db", c.sir_db);
    c.scr_db = j.value("scr_db", c.scr_db);
    c.snr_db = j.value("snr_db", c.snr_db);
    c.duration = j.value("duration_s", c.duration);
    c.seed = j.value("seed", c.seed);
    if (j.contains("propagation")) {
      c.propagation = parse_propagation(j.at("propagation").get<std::string>());
    }
    if (j.contains("desired_source")) {
      c.desired_source = source_from_json(j.at("desired_source"), c.desired_source);
    }
    if (j.contains("interferer_source")) {
      c.interferer_source =
          source_from_json(j.at("interferer_source"), c.interferer_source);
    }
    c.ring_sources = j.value("ring_sources", c.ring_sources);
    c.ring_radius = j.value("ring_radius_m", c.ring_radius);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfig, std::string("scenario config: ") + e.what());
  }
  c.validate();
  return c;
}

void ScenarioConfig::validate() const {
  const auto bad = [](const std::string& what) {
    fail(ErrorCode::kConfig, "scenario config: " + what);
  };
  if (!(dx > 0.0) || !(dp > 0.0)) bad("source distances must be positive");
  if (!(duration > 0.0)) bad("duration must be positive");
  if (!std::isfinite(sir_db) || !std::isfinite(scr_db) || !std::isfinite(snr_db)) {
    bad("SIR, SCR and SNR must be finite");
  }
  if (!(t60_ms >= 0.0)) bad("t60_ms must be non-negative");
  if (ring_sources < 0 || (ring_sources > 0 && !(ring_radius > 0.0))) {
    bad("ring sources need a positive radius");
  }
}

double diffuse_to_direct_db(double t60_ms, double distance) {
  if (t60_ms <= 0.0) return -std::numeric_limits<double>::infinity();
  // Anchors at 500 ms -> -5 dB and 800 ms -> -2 dB, linear in between and
  // beyond, for a source 1.5 m away; energy grows with distance squared.
  const double base = -5.0 + (t60_ms - 500.0) * (3.0 / 300.0);
  return base + 20.0 * std::log10(distance / 1.5);
}

Multichannel ScenarioSignals::gamma() const {
  Multichannel g = desired_reverb;
  accumulate(g, interferer_reverb);
  accumulate(g, correlated);
  return g;
}

Multichannel ScenarioSignals::interferer_total() const {
  Multichannel g = interferer_direct;
  accumulate(g, interferer_reverb);
  return g;
}

Multichannel ScenarioSignals::noise() const {
  Multichannel g = interferer_direct;
  accumulate(g, interferer_reverb);
  accumulate(g, desired_reverb);
  accumulate(g, correlated);
  accumulate(g, white);
  return g;
}

std::size_t ScenarioSignals::samples() const {
  return mixture.empty() ? 0 : mixture.front().size();
}

const std::vector<std::string>& ScenarioSignals::component_names() {
  static const std::vector<std::string> names = {
      "desired_direct", "desired_reverb", "interferer_direct",
      "interferer_reverb", "correlated", "white", "mixture"};
  return names;
}

const Multichannel& ScenarioSignals::component(const std::string& name) const {
  return const_cast<ScenarioSignals*>(this)->component(name);
}

Multichannel& ScenarioSignals::component(const std::string& name) {
  if (name == "desired_direct") return desired_direct;
  if (name == "desired_reverb") return desired_reverb;
  if (name == "interferer_direct") return interferer_direct;
  if (name == "interferer_reverb") return interferer_reverb;
  if (name == "correlated") return correlated;
  if (name == "white") return white;
  if (name == "mixture") return mixture;
  fail(ErrorCode::kInvalidArgument, "unknown component '" + name + "'");
}

double signal_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

ScenarioSignals synthesize(const ScenarioConfig& cfg, const SensorArray& array) {
  cfg.validate();
  const double fs = array.sampling_rate();
  const double c = array.wave_speed();
  const auto samples = static_cast<std::size_t>(std::llround(cfg.duration * fs));
  require(samples >= array.frame_length(),
          "scenario duration is shorter than one analysis frame");
  const std::size_t m = array.size();
  const std::size_t ref = array.reference();
  const Eigen::Vector3d center = array.centroid();

  const double max_distance = std::max({cfg.dx, cfg.dp, cfg.ring_radius});
  const double max_t60 = cfg.t60_ms / 1000.0;
  const std::size_t nfft = next_pow2(
      samples + static_cast<std::size_t>(
                    std::ceil((max_distance / c + kReverbGap + max_t60) * fs)) +
      256);

  ScenarioSignals sig;
  sig.sampling_rate = fs;
  const double th_d = deg2rad(cfg.theta_d_deg);
  const double th_b = deg2rad(cfg.theta_b_deg);
  sig.desired = Doa{th_d, 0.0}.normalized();
  sig.interferer = Doa{th_b, 0.0}.normalized();
  sig.desired_position = center + cfg.dx * sig.desired.unit();
  sig.interferer_position = center + cfg.dp * sig.interferer.unit();

  // Sources.
  auto rng_x = stream(cfg.seed, "desired");
  auto rng_p = stream(cfg.seed, "interferer");
  const Spectrum sx =
      spectrum_of(make_source(cfg.desired_source, samples, fs, rng_x), nfft);
  const Spectrum sp =
      spectrum_of(make_source(cfg.interferer_source, samples, fs, rng_p), nfft);

  const Path path_x = propagation_path(array, center, th_d, cfg.dx, cfg.propagation);
  const Path path_p = propagation_path(array, center, th_b, cfg.dp, cfg.propagation);
  sig.desired_rfr = path_rfr(array, path_x);
  sig.interferer_rfr = path_rfr(array, path_p);

  sig.desired_direct = render_direct(sx, nfft, samples, path_x, fs);
  sig.interferer_direct = render_direct(sp, nfft, samples, path_p, fs);

  const double ddr_x = diffuse_to_direct_db(cfg.t60_ms, cfg.dx);
  const double ddr_p = diffuse_to_direct_db(cfg.t60_ms, cfg.dp);
  if (std::isfinite(ddr_x)) {
    auto rng = stream(cfg.seed, "desired-reverb");
    sig.desired_reverb = render_reverb(sx, nfft, samples, cfg.dx / c + kReverbGap,
                                       max_t60, array, rng);
  } else {
    sig.desired_reverb = zeros(m, samples);
  }
  if (std::isfinite(ddr_p)) {
    auto rng = stream(cfg.seed, "interferer-reverb");
    sig.interferer_reverb = render_reverb(sp, nfft, samples, cfg.dp / c + kReverbGap,
                                          max_t60, array, rng);
  } else {
    sig.interferer_reverb = zeros(m, samples);
  }

  // Desired direct path sets the reference level.
  const double pd0 = signal_power(sig.desired_direct[ref]);
  require(pd0 > 0.0, "desired source rendered silent");
  scale(sig.desired_direct, std::sqrt(kDirectLevel / pd0));
  const double pd = signal_power(sig.desired_direct[ref]);

  if (std::isfinite(ddr_x)) {
    const double pr = signal_power(sig.desired_reverb[ref]);
    const double target = pd * std::pow(10.0, ddr_x / 10.0);
    scale(sig.desired_reverb, pr > 0.0 ? std::sqrt(target / pr) : 0.0);
  }

  // Interferer: fix the direct/diffuse split, then scale both to the SIR.
  {
    const double pdir = signal_power(sig.interferer_direct[ref]);
    require(pdir > 0.0, "interferer source rendered silent");
    if (std::isfinite(ddr_p)) {
      const double pr = signal_power(sig.interferer_reverb[ref]);
      const double target = pdir * std::pow(10.0, ddr_p / 10.0);
      scale(sig.interferer_reverb, pr > 0.0 ? std::sqrt(target / pr) : 0.0);
    }
    Multichannel total = sig.interferer_total();
    const double ptot = signal_power(total[ref]);
    const double g = std::sqrt(pd * std::pow(10.0, -cfg.sir_db / 10.0) / ptot);
    scale(sig.interferer_direct, g);
    scale(sig.interferer_reverb, g);
  }

  // Correlated ring sources.
  sig.correlated = zeros(m, samples);
  if (cfg.ring_sources > 0) {
    for (int i = 0; i < cfg.ring_sources; ++i) {
      char tag[32];
      std::snprintf(tag, sizeof tag, "ring-%d", i);
      auto rng = stream(cfg.seed, tag);
      const SourceSpec spec = SourceSpec::speech(Voice::kMusic);
      const Spectrum s = spectrum_of(make_source(spec, samples, fs, rng), nfft);
      const double az = th_d + deg2rad(22.5) + 2.0 * kPi * i / cfg.ring_sources;
      const Path path = propagation_path(array, center, az, cfg.ring_radius,
                                         cfg.propagation);
      accumulate(sig.correlated, render_direct(s, nfft, samples, path, fs));
    }
    const double pc = signal_power(sig.correlated[ref]);
    scale(sig.correlated, std::sqrt(pd * std::pow(10.0, -cfg.scr_db / 10.0) / pc));
  }

  // Sensor noise.
  {
    auto rng = stream(cfg.seed, "white");
    std::normal_distribution<double> gauss(0.0, 1.0);
    sig.white = zeros(m, samples);
    for (auto& ch : sig.white) {
      for (double& v : ch) v = gauss(rng);
    }
    const double pw = signal_power(sig.white[ref]);
    scale(sig.white, std::sqrt(pd * std::pow(10.0, -cfg.snr_db / 10.0) / pw));
  }

  sig.mixture = sig.desired_direct;
  accumulate(sig.mixture, sig.desired_reverb);
  accumulate(sig.mixture, sig.interferer_direct);
  accumulate(sig.mixture, sig.interferer_reverb);
  accumulate(sig.mixture, sig.correlated);
  accumulate(sig.mixture, sig.white);

  const auto db = [](double num, double den) {
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    if (num <= 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(num / den);
  };
  const double p_int = signal_power(sig.interferer_total()[ref]);
  const auto finite_or_null = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  sig.achieved = {
      {"sir_db", finite_or_null(db(pd, p_int))},
      {"scr_db", finite_or_null(db(pd, signal_power(sig.correlated[ref])))},
      {"snr_db", finite_or_null(db(pd, signal_power(sig.white[ref])))},
      {"desired_ddr_db",
       finite_or_null(db(signal_power(sig.desired_reverb[ref]), pd))},
      {"interferer_ddr_db",
       finite_or_null(db(signal_power(sig.interferer_reverb[ref]),
                         signal_power(sig.interferer_direct[ref])))},
      {"sir_denominator", "interferer direct + interferer diffuse"},
      {"reference_sensor", ref}};
  return sig;
}

Multichannel diffuse_field(std::span<const Eigen::Vector3d> positions,
                           double fs, std::size_t samples, std::uint64_t seed,
                           double wave_speed) {
  require(!positions.empty(), "diffuse field needs at least one sensor");
  require(samples >= 2, "diffuse field needs at least two samples");
  const std::size_t nfft = next_pow2(samples);
  auto rng = stream(seed, "diffuse");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Spectrum> spectra;
  // Noise fills the whole transform so the mixing acts circularly on a
  // stationary sequence.
  std::vector<double> x(nfft);
  for (std::size_t m = 0; m < positions.size(); ++m) {
    for (double& v : x) v = gauss(rng);
    spectra.push_back(spectrum_of(x, nfft));
  }
  const auto roots = coherence_roots(positions, fs, wave_speed);
  mix_coherent(spectra, nfft, *roots, fs);
  Multichannel out;
  for (auto& sp : spectra) out.push_back(time_of(sp, nfft, samples));
  return out;
}

std::uint64_t scenario_seed(std::uint64_t master, const ScenarioConfig& cfg) {
  nlohmann::json j = cfg.to_json();
  j.erase("seed");
  return splitmix(fnv1a(j.dump(), splitmix(master)));
}

std::vector<ScenarioConfig> scenario_grid(const std::string& preset,
                                          std::uint64_t master) {
  std::vector<double> t60 = {0, 500, 800};
  std::vector<double> dx = {0.5, 1.5, 3.0}, dp = {0.5, 1.5, 3.0};
  std::vector<double> sir = {-10, 0, 5}, scr = {0, 5, 10};
  const std::vector<double> theta = {10, 30, 50, 70, 90, 110};
  std::vector<ScenarioConfig> out;
  const auto add = [&](double t, double x, double p, double si, double sc,
                       double th) {
    ScenarioConfig c;
    c.t60_ms = t;
    c.dx = x;
    c.dp = p;
    c.sir_db = si;
    c.scr_db = sc;
    c.theta_b_deg = th;
    char id[96];
    std::snprintf(id, sizeof id, "t%03.0f_dx%03.0f_dp%03.0f_sir%+03.0f_scr%02.0f_tb%03.0f",
                  t, x * 100, p * 100, si, sc, th);
    c.id = id;
    c.seed = scenario_seed(master, c);
    out.push_back(c);
  };
  if (preset == "table1-mini") {
    add(0, 1.5, 1.5, 0, 5, 30);
    add(500, 1.5, 3.0, 0, 5, 70);
    add(800, 3.0, 1.5, -10, 10, 110);
    return out;
  }
  if (preset == "table1-reduced") {
    dx = {1.5, 3.0};
    dp = {1.5, 3.0};
    sir = {-10, 0};
    scr = {0, 5};
  } else if (preset != "table1-full") {
    fail(ErrorCode::kConfig, "unknown preset '" + preset +
                                 "' (table1-full|table1-reduced|table1-mini)");
  }
  for (double t : t60)
    for (double x : dx)
      for (double p : dp)
        for (double si : sir)
          for (double sc : scr)
            for (double th : theta) add(t, x, p, si, sc, th);
  return out;
}

void sweep(const std::vector<ScenarioConfig>& grid, const SensorArray& array,
           const std::function<void(const ScenarioConfig&,
                                    const ScenarioSignals&)>& fn) {
  require(!grid.empty(), "sweep needs a non-empty grid");
  for (const auto& cfg : grid) fn(cfg, synthesize(cfg, array));
}

}  // namespace ncmdoa
