#include "data.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "rng.hpp"

namespace seqnas {

GlyphSet GlyphSet::make(int classes, int size, uint64_t seed) {
  if (classes <= 0 || classes > 255) fail(ErrorKind::Invalid, "glyphs: classes must be in 1..255");
  if (size <= 0) fail(ErrorKind::Invalid, "glyphs: size must be positive");
  GlyphSet g;
  g.classes = classes;
  g.size = size;
  g.seed = seed;
  const int bits_per = size * size;
  const int min_dist = (bits_per + 3) / 4;  // ceil(25% of bits)
  SplitMix64 rng(derive_seed(seed, fnv1a64("glyphs")));
  std::vector<uint8_t> cand(bits_per);
  int attempts = 0;
  while (static_cast<int>(g.bits.size()) < classes * bits_per) {
    if (++attempts > 10000 * classes)
      fail(ErrorKind::Infeasible, "glyphs: cannot satisfy pairwise distance");
    for (auto& b : cand) b = static_cast<uint8_t>(rng.next() >> 63);
    bool ok = true;
    const int accepted = static_cast<int>(g.bits.size()) / bits_per;
    for (int k = 0; k < accepted && ok; ++k) {
      int dist = 0;
      for (int i = 0; i < bits_per; ++i) dist += cand[i] != g.bits[k * bits_per + i];
      ok = dist >= min_dist;
    }
    if (ok) g.bits.insert(g.bits.end(), cand.begin(), cand.end());
  }
  return g;
}

SeqSample Dataset::sample(int i) const {
  SeqSample s;
  s.image = Tensor4(1, 1, h, w);
  std::memcpy(s.image.v.data(), sample_pixels(i), static_cast<size_t>(h) * w * sizeof(float));
  s.labels.assign(sample_labels(i), sample_labels(i) + frames());
  return s;
}

Dataset gen_dataset(const SpaceSpec& spec, const GlyphSet& glyphs, int n, double noise,
                    int jitter, uint64_t seed) {
  spec.validate();
  const int cell = 1 << spec.a;
  if (spec.input_w % cell != 0) fail(ErrorKind::Invalid, "gen_dataset: width not divisible by 2^a");
  if (glyphs.size > cell || glyphs.size > spec.input_h)
    fail(ErrorKind::Invalid, "gen_dataset: glyph does not fit the frame cell");
  if (noise < 0.0 || noise >= 1.0) fail(ErrorKind::Invalid, "gen_dataset: noise must be in [0,1)");
  if (jitter < 0 || jitter > cell / 2)
    fail(ErrorKind::Invalid, "gen_dataset: jitter must be in [0, 2^(a-1)]");
  if (n <= 0) fail(ErrorKind::Invalid, "gen_dataset: sample count must be positive");

  Dataset ds;
  ds.h = spec.input_h;
  ds.w = spec.input_w;
  ds.a = spec.a;
  ds.classes = glyphs.classes;
  ds.count = n;
  const int frames = ds.frames();
  ds.pixels.assign(static_cast<size_t>(n) * ds.h * ds.w, 0.0f);
  ds.labels.assign(static_cast<size_t>(n) * frames, 0);

  const uint64_t base = derive_seed(seed, fnv1a64("dataset"));
  const int y0 = (ds.h - glyphs.size) / 2;
  for (int i = 0; i < n; ++i) {
    SplitMix64 rng(derive_seed(base, static_cast<uint64_t>(i)));
    float* img = ds.pixels.data() + static_cast<size_t>(i) * ds.h * ds.w;
    uint8_t* lab = ds.labels.data() + static_cast<size_t>(i) * frames;
    for (int f = 0; f < frames; ++f) {
      const int k = static_cast<int>(rng.next_below(static_cast<uint64_t>(glyphs.classes)));
      lab[f] = static_cast<uint8_t>(k);
      const int off =
          jitter == 0 ? 0
                      : static_cast<int>(rng.next_below(static_cast<uint64_t>(2 * jitter + 1))) -
                            jitter;
      const int x0 = f * cell + off;
      for (int r = 0; r < glyphs.size; ++r)
        for (int c = 0; c < glyphs.size; ++c) {
          const int x = x0 + c;
          if (x < 0 || x >= ds.w) continue;
          if (glyphs.bit(k, r, c))
            img[static_cast<size_t>(y0 + r) * ds.w + x] = 1.0f;
        }
    }
    if (noise > 0.0) {
      for (int p = 0; p < ds.h * ds.w; ++p) {
        const double v = img[p] + noise * rng.next_sym();
        img[p] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return ds;
}

static constexpr char kMagic[4] = {'S', 'Q', 'D', '1'};

static void put_u32(std::ofstream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

static uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out.write(kMagic, 4);
  put_u32(out, static_cast<uint32_t>(ds.h));
  put_u32(out, static_cast<uint32_t>(ds.w));
  put_u32(out, static_cast<uint32_t>(ds.a));
  put_u32(out, static_cast<uint32_t>(ds.classes));
  put_u32(out, static_cast<uint32_t>(ds.count));
  out.write(reinterpret_cast<const char*>(ds.pixels.data()),
            static_cast<std::streamsize>(ds.pixels.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(ds.labels.data()),
            static_cast<std::streamsize>(ds.labels.size()));
  if (!out) fail(ErrorKind::Io, "short write: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    fail(ErrorKind::Parse, "not a dataset file: " + path);
  Dataset ds;
  ds.h = static_cast<int>(get_u32(in));
  ds.w = static_cast<int>(get_u32(in));
  ds.a = static_cast<int>(get_u32(in));
  ds.classes = static_cast<int>(get_u32(in));
  ds.count = static_cast<int>(get_u32(in));
  if (!in || ds.h <= 0 || ds.w <= 0 || ds.a < 0 || ds.classes <= 0 || ds.count <= 0 ||
      ds.w % (1 << ds.a) != 0)
    fail(ErrorKind::Parse, "bad dataset header: " + path);
  ds.pixels.resize(static_cast<size_t>(ds.count) * ds.h * ds.w);
  ds.labels.resize(static_cast<size_t>(ds.count) * ds.frames());
  in.read(reinterpret_cast<char*>(ds.pixels.data()),
          static_cast<std::streamsize>(ds.pixels.size() * sizeof(float)));
  in.read(reinterpret_cast<char*>(ds.labels.data()),
          static_cast<std::streamsize>(ds.labels.size()));
  if (!in) fail(ErrorKind::Parse, "truncated dataset: " + path);
  for (uint8_t l : ds.labels)
    if (l >= ds.classes) fail(ErrorKind::Parse, "label out of range: " + path);
  return ds;
}

}  // namespace seqnas
