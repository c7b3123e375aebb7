// Synthetic signature corpus standing in for a real tablet database.
//
// Each subject owns a smooth base curve: x drifts left to right plus a few
// harmonics, y is a sum of harmonics. A genuine sample re-draws the curve
// with a small smooth perturbation, a slight tempo change and faint sensor
// noise, all proportional to `genuine_jitter` (0 reproduces the base
// exactly). A forgery is written more slowly (more samples), with distorted
// harmonic amplitudes and phases and a visible per-sample tremor, all
// proportional to `forgery_distortion`.

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "permsig/dataio.hpp"
#include "permsig/errors.hpp"
#include "permsig/random.hpp"

namespace permsig {
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Harmonic {
  double amplitude;
  double phase;
};

struct BaseCurve {
  std::size_t length;
  double drift;
  std::vector<Harmonic> x;
  std::vector<Harmonic> y;
};

BaseCurve draw_base(Rng& rng, std::size_t harmonics) {
  BaseCurve b;
  b.length = 250 + static_cast<std::size_t>(rng.below(150));
  b.drift = rng.uniform(0.5, 1.5);
  for (std::size_t h = 1; h <= harmonics; ++h) {
    const double scale = 1.0 / static_cast<double>(h);
    b.x.push_back({rng.uniform(0.3, 1.0) * scale, rng.uniform(0.0, kTwoPi)});
    b.y.push_back({rng.uniform(0.3, 1.0) * scale, rng.uniform(0.0, kTwoPi)});
  }
  return b;
}

double harmonic_sum(const std::vector<Harmonic>& hs, double u) {
  double v = 0.0;
  for (std::size_t k = 0; k < hs.size(); ++k) {
    v += hs[k].amplitude * std::sin(kTwoPi * static_cast<double>(k + 1) * u + hs[k].phase);
  }
  return v;
}

struct Rendition {
  double length_factor = 1.0;
  double tempo_warp = 0.0;     // amplitude of the sin(pi u) time warp
  double sample_noise = 0.0;   // per-sample gaussian noise sd
  std::vector<Harmonic> extra_x;
  std::vector<Harmonic> extra_y;
};

SignatureTrace render(const BaseCurve& base, const std::vector<Harmonic>& hx,
                      const std::vector<Harmonic>& hy, const Rendition& r, Rng& rng) {
  const auto length = static_cast<std::size_t>(
      std::max(8.0, std::round(static_cast<double>(base.length) * r.length_factor)));
  SignatureTrace t;
  t.x.resize(length);
  t.y.resize(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double u0 = static_cast<double>(i) / static_cast<double>(length - 1);
    const double u = u0 + r.tempo_warp * std::sin(std::numbers::pi * u0);
    t.x[i] = base.drift * u + harmonic_sum(hx, u) + harmonic_sum(r.extra_x, u);
    t.y[i] = harmonic_sum(hy, u) + harmonic_sum(r.extra_y, u);
    if (r.sample_noise > 0.0) {
      t.x[i] += r.sample_noise * rng.normal();
      t.y[i] += r.sample_noise * rng.normal();
    }
  }
  return t;
}

std::vector<Harmonic> perturbation(Rng& rng, double amplitude, std::size_t count) {
  std::vector<Harmonic> out;
  if (amplitude <= 0.0) return out;
  for (std::size_t h = 0; h < count; ++h) {
    out.push_back({amplitude * rng.normal(), rng.uniform(0.0, kTwoPi)});
  }
  return out;
}

std::vector<Harmonic> distort(const std::vector<Harmonic>& hs, Rng& rng, double amount) {
  std::vector<Harmonic> out = hs;
  for (auto& h : out) {
    h.amplitude *= 1.0 + amount * rng.normal();
    h.phase += amount * rng.normal();
  }
  return out;
}

std::string subject_name(std::size_t s) {
  std::ostringstream ss;
  ss << 's';
  ss.width(3);
  ss.fill('0');
  ss << s;
  return ss.str();
}

std::string sample_name(Label label, int index) {
  std::ostringstream ss;
  ss << (label == Label::genuine ? 'g' : 'f');
  ss.width(2);
  ss.fill('0');
  ss << index;
  return ss.str();
}

}  // namespace

void SynthConfig::validate() const {
  if (n_subjects < 1 || genuine_per_subject < 1 || forgeries_per_subject < 1 || harmonics < 1) {
    throw ParameterError("synthetic dataset counts must be >= 1");
  }
  if (!(genuine_jitter >= 0.0) || !(forgery_distortion >= 0.0)) {
    throw ParameterError("synthetic amplitudes must be >= 0");
  }
}

std::vector<SignatureTrace> generate_synthetic(const SynthConfig& config) {
  config.validate();
  std::vector<SignatureTrace> out;
  for (std::size_t s = 0; s < config.n_subjects; ++s) {
    const std::string id = subject_name(s);
    Rng base_rng(derive_seed(config.seed, id));
    const BaseCurve base = draw_base(base_rng, config.harmonics);

    for (int j = 1; j <= static_cast<int>(config.genuine_per_subject); ++j) {
      Rng rng(derive_seed(config.seed, id + "/" + sample_name(Label::genuine, j)));
      const double jitter = config.genuine_jitter;
      Rendition r;
      if (jitter > 0.0) {
        r.length_factor = 1.0 + 5.0 * jitter * rng.uniform(-1.0, 1.0);
        r.tempo_warp = jitter * rng.normal();
        r.sample_noise = 0.1 * jitter;
        r.extra_x = perturbation(rng, jitter, 2);
        r.extra_y = perturbation(rng, jitter, 2);
      }
      SignatureTrace t = render(base, base.x, base.y, r, rng);
      t.subject_id = id;
      t.label = Label::genuine;
      t.sample_index = j;
      out.push_back(std::move(t));
    }

    for (int j = 1; j <= static_cast<int>(config.forgeries_per_subject); ++j) {
      Rng rng(derive_seed(config.seed, id + "/" + sample_name(Label::forgery, j)));
      const double amount = config.forgery_distortion;
      Rendition r;
      r.length_factor = 1.0 + amount * (2.0 + 2.0 * rng.uniform());
      r.tempo_warp = amount * rng.normal();
      r.sample_noise = 0.1 * amount;
      r.extra_x = perturbation(rng, amount, 3);
      r.extra_y = perturbation(rng, amount, 3);
      SignatureTrace t = render(base, distort(base.x, rng, amount), distort(base.y, rng, amount), r, rng);
      t.subject_id = id;
      t.label = Label::forgery;
      t.sample_index = j;
      out.push_back(std::move(t));
    }
  }
  return out;
}

fs::path write_synthetic_dataset(const SynthConfig& config, const fs::path& directory) {
  const std::vector<SignatureTrace> traces = generate_synthetic(config);
  fs::create_directories(directory);
  DatasetManifest manifest;
  manifest.root = ".";
  manifest.format = TraceFormat::csv_txy;
  for (const auto& t : traces) {
    if (manifest.subjects.empty() || manifest.subjects.back().subject_id != t.subject_id) {
      manifest.subjects.push_back({t.subject_id, {}, {}});
      fs::create_directories(directory / t.subject_id);
    }
    const std::string rel = t.subject_id + "/" + sample_name(t.label, t.sample_index) + ".csv";
    save_trace(directory / rel, t);
    auto& subject = manifest.subjects.back();
    (t.label == Label::genuine ? subject.genuine_files : subject.forgery_files).push_back(rel);
  }
  const fs::path manifest_path = directory / "manifest.json";
  save_manifest(manifest_path, manifest);
  return manifest_path;
}

}  // namespace permsig
