#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "space.hpp"
#include "tensor.hpp"

namespace seqnas {

// Seeded random binary glyphs, one per class, pairwise Hamming distance
// at least 25% of the bits (rejection sampling keeps classes separable).
struct GlyphSet {
  int classes = 0;
  int size = 0;  // glyphs are size x size
  uint64_t seed = 0;
  std::vector<uint8_t> bits;  // classes * size * size, values 0/1

  static GlyphSet make(int classes, int size, uint64_t seed);

  uint8_t bit(int k, int r, int c) const {
    return bits[(static_cast<size_t>(k) * size + r) * size + c];
  }
};

// One text-line image with per-frame labels.
struct SeqSample {
  Tensor4 image;            // (1, 1, H, W), values in [0,1]
  std::vector<int> labels;  // one class id per horizontal cell of width 2^a
};

// Flat sample container (images and labels stored contiguously).
struct Dataset {
  int h = 0, w = 0, a = 0, classes = 0, count = 0;
  std::vector<float> pixels;   // count * h * w
  std::vector<uint8_t> labels; // count * frames()

  int cell_w() const { return 1 << a; }
  int frames() const { return w / cell_w(); }

  const float* sample_pixels(int i) const { return pixels.data() + static_cast<size_t>(i) * h * w; }
  const uint8_t* sample_labels(int i) const {
    return labels.data() + static_cast<size_t>(i) * frames();
  }
  SeqSample sample(int i) const;
};

// Each sample drops one uniformly chosen glyph into every horizontal cell of
// width 2^a (vertically centered), shifts each glyph horizontally by a
// per-cell offset in [-jitter, jitter], then adds seeded uniform noise of
// amplitude `noise` and clamps to [0,1]. Deterministic per (seed, index).
Dataset gen_dataset(const SpaceSpec& spec, const GlyphSet& glyphs, int n, double noise,
                    int jitter, uint64_t seed);

// File layout: magic "SQD1", u32 h, w, a, classes, count, then count samples
// of h*w little-endian float32 pixels followed by frames() label bytes.
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

}  // namespace seqnas
