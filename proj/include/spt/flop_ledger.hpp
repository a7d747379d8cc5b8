#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>

namespace spt {

/// Operation counter for comparing SNR solvers.
///
/// Each of +, -, *, /, sqrt, factorial, exp, ln and Q^-1 costs one unit.
/// Subexpressions that recur across iterations (for example N ln 2 / m) are
/// charged under a key the first time only.
class FlopLedger {
 public:
  void charge(std::uint64_t flops = 1) noexcept { count_ += flops; }

  /// Returns true if this call was charged, false if `key` was already paid.
  bool charge_once(std::string_view key, std::uint64_t flops) {
    if (memo_.contains(key)) return false;
    memo_.emplace(key);
    count_ += flops;
    return true;
  }

  bool memoized(std::string_view key) const { return memo_.contains(key); }
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::uint64_t count_ = 0;
  std::set<std::string, std::less<>> memo_;
};

}  // namespace spt
