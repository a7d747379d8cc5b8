#pragma once

#include <cstddef>

namespace spt {

/// Numerical tolerances and iteration limits shared across modules.
struct Tolerances {
  double root_rel = 1e-12;       // gamma_bar / gamma_star bisections
  double reference_rel = 1e-15;  // reference oracle bracket width
  double solver_rel = 1e-10;     // default stopping tolerance for solve_*
  double mm_rel = 1e-8;          // joint relative change that ends MM
  double dinkelbach_rel = 1e-9;

  std::size_t ear_max_iter = 64;
  std::size_t fixed_point_max_iter = 200;
  std::size_t bisection_max_iter = 128;
  std::size_t mm_max_rounds = 500;
  std::size_t dinkelbach_max_iter = 100;

  /// Below this blocklength the normal approximation is flagged as inaccurate.
  double min_accurate_blocklength = 20.0;
};

inline constexpr Tolerances kDefaultTolerances{};

}  // namespace spt
