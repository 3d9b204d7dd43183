#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace seqnas {

// Unsigned integer with base-1e9 limbs. Only what architecture counting
// needs: construct from u64, multiply by a small factor, print as decimal.
class BigUint {
 public:
  BigUint() : limbs_{0} {}

  explicit BigUint(uint64_t v) {
    limbs_.clear();
    do {
      limbs_.push_back(static_cast<uint32_t>(v % kBase));
      v /= kBase;
    } while (v != 0);
  }

  void mul_u32(uint32_t m) {
    uint64_t carry = 0;
    for (auto& limb : limbs_) {
      uint64_t cur = static_cast<uint64_t>(limb) * m + carry;
      limb = static_cast<uint32_t>(cur % kBase);
      carry = cur / kBase;
    }
    while (carry != 0) {
      limbs_.push_back(static_cast<uint32_t>(carry % kBase));
      carry /= kBase;
    }
  }

  std::string str() const {
    std::string out = std::to_string(limbs_.back());
    for (size_t i = limbs_.size() - 1; i-- > 0;) {
      std::string part = std::to_string(limbs_[i]);
      out += std::string(9 - part.size(), '0') + part;
    }
    return out;
  }

  bool fits_u64() const {
    if (limbs_.size() > 3) return false;
    unsigned __int128 v = 0;
    for (size_t i = limbs_.size(); i-- > 0;) v = v * kBase + limbs_[i];
    return v <= UINT64_MAX;
  }

  uint64_t to_u64() const {
    uint64_t v = 0;
    for (size_t i = limbs_.size(); i-- > 0;) v = v * kBase + limbs_[i];
    return v;
  }

 private:
  static constexpr uint64_t kBase = 1000000000ull;
  std::vector<uint32_t> limbs_;  // little-endian
};

}  // namespace seqnas
