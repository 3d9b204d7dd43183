#include "space.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace seqnas {
namespace {

uint64_t checked_mul(uint64_t x, uint64_t y) {
  uint64_t r;
  if (__builtin_mul_overflow(x, y, &r))
    fail(ErrorKind::Invalid, "count overflows 64 bits; space too large");
  return r;
}

// C(n, k) in exact 64-bit arithmetic.
uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    // r * (n-k+i) is divisible by i once the previous factors are in.
    uint64_t num = checked_mul(r, static_cast<uint64_t>(n - k + i));
    r = num / static_cast<uint64_t>(i);
  }
  return r;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    if (item.empty()) fail(ErrorKind::Parse, "empty entry in integer list '" + s + "'");
    size_t pos = 0;
    int v = std::stoi(item, &pos);
    if (pos != item.size()) fail(ErrorKind::Parse, "bad integer '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

int StridePath::count(StrideKind k) const {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(),
                                        [&](const StrideStep& s) { return s.kind == k; }));
}

std::string StridePath::stage_string() const {
  std::string out;
  for (const auto& s : steps)
    if (s.is_downsampling()) out += s.letter();
  return out;
}

std::vector<int> StridePath::ds_layers() const {
  std::vector<int> out;
  for (int i = 0; i < length(); ++i)
    if (steps[i].is_downsampling()) out.push_back(i + 1);
  return out;
}

std::string StridePath::text() const {
  return stage_string() + "@" + join_ints(ds_layers());
}

const std::vector<OperationSpec>& choice_vocab() {
  static const std::vector<OperationSpec> vocab = {
      {OpFamily::MBConv, 3, 1, "mb3e1"}, {OpFamily::MBConv, 3, 3, "mb3e3"},
      {OpFamily::MBConv, 3, 6, "mb3e6"}, {OpFamily::MBConv, 5, 1, "mb5e1"},
      {OpFamily::MBConv, 5, 3, "mb5e3"}, {OpFamily::MBConv, 5, 6, "mb5e6"},
      {OpFamily::SkipConnect, 0, 0, "skip"},
  };
  return vocab;
}

const OperationSpec& residual_conv_op() {
  static const OperationSpec op = {OpFamily::ResidualConv3x3, 3, 1, "res3"};
  return op;
}

const OperationSpec* find_op(std::string_view code) {
  for (const auto& op : choice_vocab())
    if (op.code == code) return &op;
  if (code == residual_conv_op().code) return &residual_conv_op();
  return nullptr;
}

void SpaceSpec::validate() const {
  if (L <= 0) fail(ErrorKind::Invalid, "L must be positive, got " + std::to_string(L));
  if (a < 0 || b < 0) fail(ErrorKind::Invalid, "a and b must be non-negative");
  if (a + b > L)
    fail(ErrorKind::Invalid,
         "a+b=" + std::to_string(a + b) + " downsampling layers exceed L=" + std::to_string(L));
  if (input_h <= 0 || input_w <= 0 || c1 <= 0 || c2 <= 0 || input_ch <= 0)
    fail(ErrorKind::Invalid, "input_h, input_w, c1, c2, input_ch must be positive");

  // Constraint P must be satisfiable: height strides multiply to 2^(a+b),
  // width strides to 2^a.
  const long long hdiv = 1ll << (a + b);
  const long long wdiv = 1ll << a;
  if (static_cast<long long>(c1) * hdiv != input_h)
    fail(ErrorKind::Invalid, "2^(a+b) != input_h / c1: " + std::to_string(hdiv) + " * " +
                                 std::to_string(c1) + " != " + std::to_string(input_h));
  if (static_cast<long long>(c2) * wdiv != input_w)
    fail(ErrorKind::Invalid, "2^a != input_w / c2: " + std::to_string(wdiv) + " * " +
                                 std::to_string(c2) + " != " + std::to_string(input_w));

  if (static_cast<int>(channels.size()) != a + b)
    fail(ErrorKind::Invalid, "channels needs one entry per downsampling stage: expected " +
                                 std::to_string(a + b) + ", got " + std::to_string(channels.size()));
  for (int c : channels)
    if (c <= 0) fail(ErrorKind::Invalid, "channel counts must be positive");

  if (!ds_positions.empty()) {
    if (static_cast<int>(ds_positions.size()) != a + b)
      fail(ErrorKind::Invalid, "ds_positions must list exactly a+b layers");
    int prev = 0;
    for (int p : ds_positions) {
      if (p <= prev || p > L)
        fail(ErrorKind::Invalid, "ds_positions must be strictly increasing 1-based layers <= L");
      prev = p;
    }
  }
  if (op_vocab.empty()) fail(ErrorKind::Invalid, "op_vocab must not be empty");
  for (const auto& op : op_vocab)
    if (op.family == OpFamily::ResidualConv3x3)
      fail(ErrorKind::Invalid, "res3 is the fixed path-search default, not a choice-block entry");
}

SpaceSpec SpaceSpec::from_text(const std::string& text) {
  SpaceSpec spec;
  spec.channels.clear();
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::Parse, "line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!kv.emplace(key, val).second)
      fail(ErrorKind::Parse, "duplicate key '" + key + "'");
  }

  auto take_int = [&](const std::string& key, int& dst, bool required) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (required) fail(ErrorKind::Parse, "missing required key '" + key + "'");
      return;
    }
    dst = std::stoi(it->second);
    kv.erase(it);
  };
  take_int("L", spec.L, true);
  take_int("a", spec.a, true);
  take_int("b", spec.b, true);
  take_int("input_h", spec.input_h, true);
  take_int("input_w", spec.input_w, true);
  take_int("c1", spec.c1, true);
  take_int("c2", spec.c2, true);
  if (auto it = kv.find("channels"); it != kv.end()) {
    spec.channels = parse_int_list(it->second);
    kv.erase(it);
  }
  if (auto it = kv.find("ds_positions"); it != kv.end()) {
    if (!it->second.empty()) spec.ds_positions = parse_int_list(it->second);
    kv.erase(it);
  }
  if (!kv.empty()) fail(ErrorKind::Parse, "unknown key '" + kv.begin()->first + "'");
  spec.validate();
  return spec;
}

std::string SpaceSpec::to_text() const {
  std::string out;
  out += "L = " + std::to_string(L) + "\n";
  out += "a = " + std::to_string(a) + "\n";
  out += "b = " + std::to_string(b) + "\n";
  out += "input_h = " + std::to_string(input_h) + "\n";
  out += "input_w = " + std::to_string(input_w) + "\n";
  out += "c1 = " + std::to_string(c1) + "\n";
  out += "c2 = " + std::to_string(c2) + "\n";
  out += "channels = " + join_ints(channels) + "\n";
  if (!ds_positions.empty()) out += "ds_positions = " + join_ints(ds_positions) + "\n";
  return out;
}

namespace {

// Emits all length-n sequences over {A,B,N} with the required counts, in
// lexicographic order (A < B < N). Depth-first with remaining-count pruning.
void emit_paths(int n, int rem_a, int rem_b, std::vector<StrideStep>& prefix,
                std::vector<StridePath>& out) {
  int pos = static_cast<int>(prefix.size());
  if (pos == n) {
    out.push_back(StridePath{prefix});
    return;
  }
  int slots_left = n - pos;
  for (StrideKind k : {StrideKind::A, StrideKind::B, StrideKind::N}) {
    int na = rem_a - (k == StrideKind::A ? 1 : 0);
    int nb = rem_b - (k == StrideKind::B ? 1 : 0);
    if (na < 0 || nb < 0) continue;
    if (na + nb > slots_left - 1) continue;
    prefix.push_back(StrideStep{k});
    emit_paths(n, na, nb, prefix, out);
    prefix.pop_back();
  }
}

// Letter arrangements with rem_a A's and rem_b B's, lexicographic.
void emit_stage_strings(int rem_a, int rem_b, std::string& prefix, std::vector<std::string>& out) {
  if (rem_a == 0 && rem_b == 0) {
    out.push_back(prefix);
    return;
  }
  if (rem_a > 0) {
    prefix += 'A';
    emit_stage_strings(rem_a - 1, rem_b, prefix, out);
    prefix.pop_back();
  }
  if (rem_b > 0) {
    prefix += 'B';
    emit_stage_strings(rem_a, rem_b - 1, prefix, out);
    prefix.pop_back();
  }
}

StridePath path_from_positions(int L, const std::vector<int>& positions, const std::string& letters) {
  StridePath path;
  path.steps.assign(L, StrideStep{StrideKind::N});
  for (size_t i = 0; i < positions.size(); ++i)
    path.steps[positions[i] - 1].kind = letters[i] == 'A' ? StrideKind::A : StrideKind::B;
  return path;
}

}  // namespace

std::vector<StridePath> enumerate_paths(const SpaceSpec& space) {
  space.validate();
  std::vector<StridePath> out;
  if (space.has_fixed_positions()) {
    std::vector<std::string> strings;
    std::string prefix;
    emit_stage_strings(space.a, space.b, prefix, strings);
    out.reserve(strings.size());
    for (const auto& s : strings) out.push_back(path_from_positions(space.L, space.ds_positions, s));
  } else {
    std::vector<StrideStep> prefix;
    prefix.reserve(space.L);
    emit_paths(space.L, space.a, space.b, prefix, out);
  }
  return out;
}

bool check_constraint(const StridePath& path, const SpaceSpec& space) {
  if (path.length() != space.L) fail(ErrorKind::Invalid, "path length != space.L");
  int h = space.input_h;
  int w = space.input_w;
  for (const auto& step : path.steps) {
    if (h % step.stride_h() != 0 || w % step.stride_w() != 0) return false;
    h /= step.stride_h();
    w /= step.stride_w();
  }
  return h == space.c1 && w == space.c2;
}

std::vector<LayerShape> shape_trace(const StridePath& path, const SpaceSpec& space) {
  space.validate();
  if (path.length() != space.L) fail(ErrorKind::Invalid, "path length != space.L");
  std::vector<LayerShape> out;
  out.reserve(space.L);
  int h = space.input_h;
  int w = space.input_w;
  int stage = 0;  // number of downsampling layers seen so far
  for (int i = 0; i < space.L; ++i) {
    const auto& step = path.steps[i];
    if (h % step.stride_h() != 0 || w % step.stride_w() != 0)
      fail(ErrorKind::Invalid, "non-integer feature size at layer " + std::to_string(i + 1));
    h /= step.stride_h();
    w /= step.stride_w();
    if (step.is_downsampling()) ++stage;
    int ch = stage == 0 ? space.input_ch : space.channels[stage - 1];
    out.push_back(LayerShape{h, w, ch});
  }
  if (h != space.c1 || w != space.c2)
    fail(ErrorKind::Invalid, "path output (" + std::to_string(h) + "," + std::to_string(w) +
                                 ") does not meet (c1,c2)");
  return out;
}

SpaceCount count_space(const SpaceSpec& space) {
  space.validate();
  SpaceCount count;
  if (space.has_fixed_positions()) {
    count.path_count = binomial(space.a + space.b, space.a);
  } else {
    count.path_count =
        checked_mul(binomial(space.L, space.a + space.b), binomial(space.a + space.b, space.a));
  }
  count.arch_count = BigUint(count.path_count);
  const uint32_t c = static_cast<uint32_t>(space.op_vocab.size());
  for (int i = 0; i < space.L; ++i) count.arch_count.mul_u32(c);
  return count;
}

std::vector<StridePath> typical_paths(const SpaceSpec& space) {
  space.validate();
  const int stages = space.a + space.b;
  if (stages == 0) {
    StridePath all_n;
    all_n.steps.assign(space.L, StrideStep{StrideKind::N});
    return {all_n};
  }
  std::vector<int> positions = space.ds_positions;
  if (positions.empty()) {
    // Most even partition into a+b stages; downsampling at the first layer
    // of each stage. Earlier stages take the remainder.
    positions.reserve(stages);
    int base = space.L / stages;
    int rem = space.L % stages;
    int at = 1;
    for (int s = 0; s < stages; ++s) {
      positions.push_back(at);
      at += base + (s < rem ? 1 : 0);
    }
  }
  std::vector<std::string> strings;
  std::string prefix;
  emit_stage_strings(space.a, space.b, prefix, strings);
  std::vector<StridePath> out;
  out.reserve(strings.size());
  for (const auto& s : strings) out.push_back(path_from_positions(space.L, positions, s));
  return out;
}

bool op_legal_at(const OperationSpec& op, const StrideStep& step, int in_ch, int out_ch) {
  if (op.family != OpFamily::SkipConnect) return true;
  return step.kind == StrideKind::N && in_ch == out_ch;
}

void validate_arch(const Architecture& arch) {
  arch.space.validate();
  if (arch.path.length() != arch.space.L)
    fail(ErrorKind::Invalid, "path length != space.L");
  if (static_cast<int>(arch.ops.size()) != arch.space.L)
    fail(ErrorKind::Invalid, "ops list must have one entry per layer");
  if (arch.path.count(StrideKind::A) != arch.space.a ||
      arch.path.count(StrideKind::B) != arch.space.b)
    fail(ErrorKind::Invalid, "path step counts do not match space (a, b)");
  if (!check_constraint(arch.path, arch.space))
    fail(ErrorKind::Invalid, "path violates the output-size constraint");
  auto trace = shape_trace(arch.path, arch.space);
  int in_ch = arch.space.input_ch;
  for (int i = 0; i < arch.space.L; ++i) {
    if (!op_legal_at(arch.ops[i], arch.path.steps[i], in_ch, trace[i].ch))
      fail(ErrorKind::Invalid, "skip-connect illegal at layer " + std::to_string(i + 1) +
                                   " (stride or channel change)");
    in_ch = trace[i].ch;
  }
}

std::string serialize_arch(const Architecture& arch) {
  std::string out = "path=" + arch.path.text() + ";ops=";
  for (size_t i = 0; i < arch.ops.size(); ++i) {
    if (i) out += ',';
    out += arch.ops[i].code;
  }
  return out;
}

StridePath parse_path(const std::string& text, const SpaceSpec& space) {
  size_t at = text.find('@');
  if (at == std::string::npos)
    fail(ErrorKind::Parse, "path: missing '@' separator in '" + text + "'");
  std::string letters = text.substr(0, at);
  for (size_t i = 0; i < letters.size(); ++i)
    if (letters[i] != 'A' && letters[i] != 'B')
      fail(ErrorKind::Parse, "path: bad stage letter at position " + std::to_string(i + 1));
  std::vector<int> positions;
  if (at + 1 < text.size()) positions = parse_int_list(text.substr(at + 1));
  if (positions.size() != letters.size())
    fail(ErrorKind::Parse, "path: " + std::to_string(letters.size()) + " letters but " +
                               std::to_string(positions.size()) + " layer indices");
  int prev = 0;
  for (int p : positions) {
    if (p <= prev || p > space.L)
      fail(ErrorKind::Parse, "path: layer indices must be strictly increasing and <= L");
    prev = p;
  }
  StridePath path = path_from_positions(space.L, positions, letters);
  if (path.count(StrideKind::A) != space.a || path.count(StrideKind::B) != space.b)
    fail(ErrorKind::Parse, "path: step counts do not match space (a=" + std::to_string(space.a) +
                               ", b=" + std::to_string(space.b) + ")");
  return path;
}

Architecture parse_arch(const std::string& text, const SpaceSpec& space) {
  space.validate();
  const std::string path_tag = "path=";
  const std::string ops_tag = ";ops=";
  if (text.rfind(path_tag, 0) != 0)
    fail(ErrorKind::Parse, "arch: expected 'path=' at position 1");
  size_t ops_at = text.find(ops_tag);
  if (ops_at == std::string::npos)
    fail(ErrorKind::Parse, "arch: missing ';ops=' section");

  Architecture arch;
  arch.space = space;
  arch.path = parse_path(text.substr(path_tag.size(), ops_at - path_tag.size()), space);

  std::string ops_text = text.substr(ops_at + ops_tag.size());
  std::stringstream ss(ops_text);
  std::string code;
  size_t offset = ops_at + ops_tag.size();
  while (std::getline(ss, code, ',')) {
    const OperationSpec* op = find_op(code);
    if (op == nullptr)
      fail(ErrorKind::Parse,
           "arch: unknown op code '" + code + "' at position " + std::to_string(offset + 1));
    arch.ops.push_back(*op);
    offset += code.size() + 1;
  }
  if (static_cast<int>(arch.ops.size()) != space.L)
    fail(ErrorKind::Parse, "arch: expected " + std::to_string(space.L) + " op codes, got " +
                               std::to_string(arch.ops.size()));
  validate_arch(arch);
  return arch;
}

}  // namespace seqnas
