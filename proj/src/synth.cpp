#include "autosign/synth.hpp"

#include <cmath>
#include <filesystem>

#include "autosign/rng.hpp"

namespace autosign {

namespace {

// Stream labels for substream derivation.
constexpr std::uint64_t kGlossStream = 0x474c4f5353ULL;
constexpr std::uint64_t kSignerStream = 0x5349474eULL;
constexpr std::uint64_t kSampleStream = 0x53414d50ULL;
constexpr std::uint64_t kNoiseStream = 0x4e4f4953ULL;

constexpr Index kPoints = 86;
constexpr int kKeyframes = 4;

// Canonical resting pose in pixel-like coordinates (640x480 frame):
// a 5x5 upper-body grid, a face ellipse, and two hand clusters.
RowMat base_pose() {
  RowMat base(1, 2 * kPoints);
  const KeypointLayout layout = KeypointLayout::full86();
  // body: 5x5 grid over the torso region
  {
    const PartSpan s = layout.span(Part::body);
    for (Index i = 0; i < s.count; ++i) {
      const Index gx = i % 5, gy = i / 5;
      base(0, 2 * (s.begin + i)) = 250.0 + 35.0 * static_cast<double>(gx);
      base(0, 2 * (s.begin + i) + 1) = 165.0 + 40.0 * static_cast<double>(gy);
    }
  }
  // face: ellipse around the head
  {
    const PartSpan s = layout.span(Part::face);
    for (Index i = 0; i < s.count; ++i) {
      const double a = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(s.count);
      base(0, 2 * (s.begin + i)) = 320.0 + 28.0 * std::cos(a);
      base(0, 2 * (s.begin + i) + 1) = 128.0 + 34.0 * std::sin(a);
    }
  }
  // hands: tight spiral clusters
  auto hand = [&](Part part, double cx, double cy) {
    const PartSpan s = layout.span(part);
    for (Index i = 0; i < s.count; ++i) {
      const double a = 0.6 * static_cast<double>(i);
      const double r = 4.0 + 1.1 * static_cast<double>(i);
      base(0, 2 * (s.begin + i)) = cx + r * std::cos(a);
      base(0, 2 * (s.begin + i) + 1) = cy + r * std::sin(a);
    }
  };
  hand(Part::left_hand, 232.0, 318.0);
  hand(Part::right_hand, 408.0, 318.0);
  return base;
}

struct PartTransform {
  double angle = 0.0;   // radians
  double scale = 1.0;
  double dx = 0.0, dy = 0.0;
};

void apply_about_centroid(RowMat& frame, const PartSpan& span, const PartTransform& tf) {
  double cx = 0.0, cy = 0.0;
  for (Index i = 0; i < span.count; ++i) {
    cx += frame(0, 2 * (span.begin + i));
    cy += frame(0, 2 * (span.begin + i) + 1);
  }
  cx /= static_cast<double>(span.count);
  cy /= static_cast<double>(span.count);
  const double c = std::cos(tf.angle), s = std::sin(tf.angle);
  for (Index i = 0; i < span.count; ++i) {
    const double x = frame(0, 2 * (span.begin + i)) - cx;
    const double y = frame(0, 2 * (span.begin + i) + 1) - cy;
    frame(0, 2 * (span.begin + i)) = cx + tf.scale * (c * x - s * y) + tf.dx;
    frame(0, 2 * (span.begin + i) + 1) = cy + tf.scale * (s * x + c * y) + tf.dy;
  }
}

// One keyframe of a gloss gesture: every part gets its own pose drawn from
// the gloss's stream, hands with the widest motion range.
RowMat gloss_keyframe(RngStream& rng, const RowMat& base) {
  RowMat frame = base;
  const KeypointLayout layout = KeypointLayout::full86();
  for (const PartSpan& span : layout.parts) {
    PartTransform tf;
    switch (span.part) {
      case Part::left_hand:
      case Part::right_hand:
        tf.angle = rng.uniform(-1.1, 1.1);
        tf.scale = rng.uniform(0.7, 1.4);
        tf.dx = rng.uniform(-95.0, 95.0);
        tf.dy = rng.uniform(-95.0, 95.0);
        break;
      case Part::body:
        tf.angle = rng.uniform(-0.08, 0.08);
        tf.scale = rng.uniform(0.95, 1.05);
        tf.dx = rng.uniform(-24.0, 24.0);
        tf.dy = rng.uniform(-16.0, 16.0);
        break;
      case Part::face:
        tf.angle = rng.uniform(-0.12, 0.12);
        tf.scale = rng.uniform(0.97, 1.03);
        tf.dx = rng.uniform(-10.0, 10.0);
        tf.dy = rng.uniform(-8.0, 8.0);
        break;
    }
    apply_about_centroid(frame, span, tf);
  }
  return frame;
}

std::vector<RowMat> gloss_template(std::uint64_t seed, int gloss) {
  RngStream rng(seed, kGlossStream, static_cast<std::uint64_t>(gloss));
  const RowMat base = base_pose();
  std::vector<RowMat> keys;
  keys.reserve(kKeyframes);
  for (int k = 0; k < kKeyframes; ++k) keys.push_back(gloss_keyframe(rng, base));
  return keys;
}

struct SignerStyle {
  PartTransform parts[4];
  double dx = 0.0, dy = 0.0;  // global offset
};

SignerStyle signer_style(std::uint64_t seed, int signer) {
  RngStream rng(seed, kSignerStream, static_cast<std::uint64_t>(signer));
  SignerStyle style;
  for (int p = 0; p < 4; ++p) {
    style.parts[p].angle = rng.uniform(-0.07, 0.07);
    style.parts[p].scale = rng.uniform(0.94, 1.06);
    style.parts[p].dx = rng.uniform(-8.0, 8.0);
    style.parts[p].dy = rng.uniform(-8.0, 8.0);
  }
  style.dx = rng.uniform(-25.0, 25.0);
  style.dy = rng.uniform(-20.0, 20.0);
  return style;
}

}  // namespace

void SynthConfig::validate() const {
  if (vocab_size < 2) throw ConfigError("synth.vocab_size must be >= 2");
  if (n_samples() < 1) throw ConfigError("synth: need at least one sample");
  if (train_samples < 0 || dev_samples < 0 || test_samples < 0)
    throw ConfigError("synth: split sizes must be >= 0");
  if (sentence_len_min < 1 || sentence_len_max < sentence_len_min)
    throw ConfigError("synth: bad sentence length range");
  if (frames_per_gloss_min < 2 || frames_per_gloss_max < frames_per_gloss_min)
    throw ConfigError("synth: bad frames-per-gloss range");
  if (train_signers < 1 || eval_signers < 1)
    throw ConfigError("synth: need at least one signer per partition");
  if (noise_sigma < 0.0) throw ConfigError("synth.noise_sigma must be >= 0");
}

std::string synth_gloss_name(int gloss, int vocab_size) {
  int width = 1;
  for (int v = vocab_size - 1; v >= 10; v /= 10) ++width;
  width = std::max(width, 2);
  std::string digits = std::to_string(gloss);
  return "G" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

RowMat synth_render(std::uint64_t seed, const std::vector<int>& glosses,
                    const std::vector<int>& frames_per_gloss, int signer,
                    std::uint64_t noise_key, double noise_sigma) {
  if (glosses.size() != frames_per_gloss.size())
    throw ShapeError("synth_render: glosses and frame counts disagree");
  Index total = 0;
  for (int f : frames_per_gloss) total += f;
  if (total < 1) throw DataError("synth_render: zero total frames");

  RowMat out(total, 2 * kPoints);
  Index row = 0;
  for (std::size_t g = 0; g < glosses.size(); ++g) {
    const std::vector<RowMat> keys = gloss_template(seed, glosses[g]);
    const int frames = frames_per_gloss[g];
    for (int f = 0; f < frames; ++f, ++row) {
      const double phase = (static_cast<double>(f) + 0.5) / static_cast<double>(frames);
      const double u = phase * static_cast<double>(kKeyframes - 1);
      const int k0 = std::min(static_cast<int>(u), kKeyframes - 2);
      const double w = (1.0 - std::cos(M_PI * (u - k0))) / 2.0;  // cosine ease
      out.row(row) = (1.0 - w) * keys[static_cast<std::size_t>(k0)].row(0) +
                     w * keys[static_cast<std::size_t>(k0) + 1].row(0);
    }
  }

  // Signer warp: per-part rotation/scale/offset about each frame's part
  // centroid plus a global shift.
  const SignerStyle style = signer_style(seed, signer);
  const KeypointLayout layout = KeypointLayout::full86();
  for (Index r = 0; r < total; ++r) {
    RowMat frame = out.row(r);
    for (std::size_t p = 0; p < layout.parts.size(); ++p)
      apply_about_centroid(frame, layout.parts[p], style.parts[p]);
    for (Index c = 0; c < kPoints; ++c) {
      frame(0, 2 * c) += style.dx;
      frame(0, 2 * c + 1) += style.dy;
    }
    out.row(r) = frame;
  }

  if (noise_sigma > 0.0) {
    RngStream noise(noise_key);
    for (Index r = 0; r < total; ++r)
      for (Index c = 0; c < 2 * kPoints; ++c) out(r, c) += noise.normal(0.0, noise_sigma);
  }
  return out;
}

void synth_generate(const SynthConfig& config, std::uint64_t seed,
                    const std::string& out_dir) {
  config.validate();
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "poses");
  fs::create_directories(fs::path(out_dir) / "splits");

  struct SplitSpec {
    const char* name;
    int count;
    int signer_base;
    int signer_count;
  };
  const SplitSpec splits[3] = {
      {"train", config.train_samples, 0, config.train_signers},
      {"dev", config.dev_samples, config.train_signers, config.eval_signers},
      {"test", config.test_samples, config.train_signers, config.eval_signers},
  };

  std::vector<ManifestRow> manifest;
  for (int si = 0; si < 3; ++si) {
    const SplitSpec& split = splits[si];
    std::vector<std::string> ids;
    for (int i = 0; i < split.count; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%s_%05d", split.name, i);
      const std::string sample_id = buf;
      RngStream rng(seed, kSampleStream, static_cast<std::uint64_t>(si),
                    static_cast<std::uint64_t>(i));
      const int len =
          static_cast<int>(rng.uniform_int(config.sentence_len_min, config.sentence_len_max));
      std::vector<int> glosses(static_cast<std::size_t>(len));
      std::vector<int> frames(static_cast<std::size_t>(len));
      for (int g = 0; g < len; ++g) {
        glosses[static_cast<std::size_t>(g)] =
            static_cast<int>(rng.uniform_int(0, config.vocab_size - 1));
        frames[static_cast<std::size_t>(g)] = static_cast<int>(
            rng.uniform_int(config.frames_per_gloss_min, config.frames_per_gloss_max));
      }
      const int signer = split.signer_base + i % split.signer_count;
      const std::uint64_t noise_key =
          substream_key(seed, kNoiseStream, static_cast<std::uint64_t>(si),
                        static_cast<std::uint64_t>(i));

      PoseSequence seq;
      seq.frames = synth_render(seed, glosses, frames, signer, noise_key, config.noise_sigma);
      seq.layout = KeypointLayout::full86();
      seq.sample_id = sample_id;
      seq.signer_id = "S" + std::to_string(signer);

      const std::string rel = "poses/" + sample_id + ".pseq";
      write_pose_file(seq, (fs::path(out_dir) / rel).string());

      std::string gloss_text;
      for (std::size_t g = 0; g < glosses.size(); ++g) {
        if (g) gloss_text += ' ';
        gloss_text += synth_gloss_name(glosses[g], config.vocab_size);
      }
      manifest.push_back({sample_id, seq.signer_id, rel, gloss_text});
      ids.push_back(sample_id);
    }
    write_split(ids, (fs::path(out_dir) / "splits" / (std::string(split.name) + ".txt")).string());
  }
  write_manifest(manifest, (fs::path(out_dir) / "manifest.tsv").string());
}

}  // namespace autosign
