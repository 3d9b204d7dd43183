#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bigint.hpp"
#include "error.hpp"

namespace seqnas {

// Per-layer stride assignment. Three kinds exist:
//   A = (2,2)  halves height and width
//   B = (2,1)  halves height only
//   N = (1,1)  keeps the spatial size
enum class StrideKind : uint8_t { A = 0, B = 1, N = 2 };

struct StrideStep {
  StrideKind kind = StrideKind::N;

  int stride_h() const { return kind == StrideKind::N ? 1 : 2; }
  int stride_w() const { return kind == StrideKind::A ? 2 : 1; }
  char letter() const { return kind == StrideKind::A ? 'A' : kind == StrideKind::B ? 'B' : 'N'; }
  bool is_downsampling() const { return kind != StrideKind::N; }

  bool operator==(const StrideStep&) const = default;
};

// Ordered per-layer stride assignments; the downsampling path.
struct StridePath {
  std::vector<StrideStep> steps;

  int length() const { return static_cast<int>(steps.size()); }
  int count(StrideKind k) const;

  // Letters of the downsampling steps in layer order, e.g. "ABABB".
  std::string stage_string() const;
  // 1-based indices of the downsampling layers.
  std::vector<int> ds_layers() const;
  // "<stage_string>@<comma-separated ds layer indices>", e.g. "ABABB@1,4,7,10,13".
  std::string text() const;

  bool operator==(const StridePath&) const = default;
};

enum class OpFamily : uint8_t { MBConv, SkipConnect, ResidualConv3x3 };

// One entry of the per-layer operation vocabulary.
struct OperationSpec {
  OpFamily family = OpFamily::MBConv;
  int kernel = 3;     // 3 or 5 for conv families
  int expansion = 1;  // 1, 3 or 6 for MBConv
  std::string code;   // stable identifier: mb3e1 .. mb5e6, skip, res3

  bool operator==(const OperationSpec&) const = default;
};

// The searchable 7-way choice-block vocabulary, in fixed order:
// mb3e1, mb3e3, mb3e6, mb5e1, mb5e3, mb5e6, skip.
const std::vector<OperationSpec>& choice_vocab();

// Fixed default operation used while the path is searched: a 3x3 residual
// convolution. Never part of the choice-block vocabulary.
const OperationSpec& residual_conv_op();

// Lookup by code over the 8 known ops (choice vocabulary + res3).
// Returns nullptr for unknown codes.
const OperationSpec* find_op(std::string_view code);

// Search-space definition: the constrained downsampling lattice plus the
// per-layer operation vocabulary and the channel schedule.
struct SpaceSpec {
  int L = 0;                          // layer count
  int a = 0;                          // required number of A=(2,2) steps
  int b = 0;                          // required number of B=(2,1) steps
  int input_h = 0;
  int input_w = 0;
  int c1 = 0;                         // required output height
  int c2 = 0;                         // required output width
  int input_ch = 1;                   // channels entering layer 1
  std::vector<int> channels;          // per-stage output channels, size a+b
  std::vector<OperationSpec> op_vocab = choice_vocab();
  std::vector<int> ds_positions;      // optional fixed 1-based ds layers, size a+b

  bool has_fixed_positions() const { return !ds_positions.empty(); }

  // Throws Error{Invalid|Infeasible} naming the violated relation.
  void validate() const;

  // Flat key-value space definition text. Keys: L, a, b, input_h, input_w,
  // c1, c2, channels, ds_positions. Unknown keys are rejected.
  static SpaceSpec from_text(const std::string& text);
  std::string to_text() const;

  bool operator==(const SpaceSpec&) const = default;
};

// A concrete point of the space: path plus one operation per layer.
struct Architecture {
  SpaceSpec space;
  StridePath path;
  std::vector<OperationSpec> ops;

  bool operator==(const Architecture&) const = default;
};

// All distinct paths with exactly `a` A-steps and `b` B-steps (restricted to
// ds_positions when set), in lexicographic order with A < B < N.
std::vector<StridePath> enumerate_paths(const SpaceSpec& space);

// True iff the path maps (input_h, input_w) onto (c1, c2) with exact integer
// division at every layer.
bool check_constraint(const StridePath& path, const SpaceSpec& space);

struct LayerShape {
  int h = 0;
  int w = 0;
  int ch = 0;
  bool operator==(const LayerShape&) const = default;
};

// Output spatial size and channel count after each layer. Channels advance
// to the next stage entry exactly at downsampling layers.
std::vector<LayerShape> shape_trace(const StridePath& path, const SpaceSpec& space);

struct SpaceCount {
  uint64_t path_count = 0;
  BigUint arch_count;  // path_count * C^L, skip-connect exclusions not applied
};

// Combinatorial count, no enumeration.
SpaceCount count_space(const SpaceSpec& space);

// Stage-aligned candidate paths for the path-search step: downsampling fixed
// at ds_positions when set, else at the first layer of each of a+b stages of
// the most even partition of L layers. All letter arrangements, in
// lexicographic order.
std::vector<StridePath> typical_paths(const SpaceSpec& space);

// Skip-connect is representable only where it keeps the tensor shape.
bool op_legal_at(const OperationSpec& op, const StrideStep& step, int in_ch, int out_ch);

// Throws Error{Invalid} on constraint violation or illegal skip placement.
void validate_arch(const Architecture& arch);

// Text grammar:
//   path=<stagestring>@<comma-separated 1-based ds layers>;ops=<op codes, length L>
// Round-trip identity with parse_arch holds for every valid architecture.
std::string serialize_arch(const Architecture& arch);
Architecture parse_arch(const std::string& text, const SpaceSpec& space);

// Parses "<stagestring>@<positions>" against the space.
StridePath parse_path(const std::string& text, const SpaceSpec& space);

}  // namespace seqnas
