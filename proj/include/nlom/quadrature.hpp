#pragma once

// Cumulative quadrature on a refined time ladder. Each grid interval is split
// into an even number of equal substeps so that composite Simpson pairs never
// straddle a grid point; cumulative values are available at every ladder node,
// which is what the nested F-function integrals consume.

#include <cstddef>
#include <vector>

#include "nlom/core.hpp"

namespace nlom {

enum class QuadratureRule { Trapezoid, Simpson };

/// Refined ladder over a TimeGrid. grid_index[i] is the ladder position of
/// grid point i; substeps within one grid interval are equally spaced.
struct TimeLadder {
  std::vector<double> t;
  std::vector<std::size_t> grid_index;
  std::size_t refine = 1;  // substeps per grid interval = 2*refine

  static TimeLadder build(const TimeGrid& grid, std::size_t refine) {
    if (refine == 0) refine = 1;
    TimeLadder lad;
    lad.refine = refine;
    const std::size_t sub = 2 * refine;
    lad.grid_index.resize(grid.size());
    lad.t.reserve((grid.size() - 1) * sub + 1);
    lad.t.push_back(grid.t.front());
    lad.grid_index[0] = 0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double a = grid.t[i], b = grid.t[i + 1];
      for (std::size_t j = 1; j <= sub; ++j)
        lad.t.push_back(a + (b - a) * static_cast<double>(j) / static_cast<double>(sub));
      lad.grid_index[i + 1] = lad.t.size() - 1;
    }
    return lad;
  }

  std::size_t size() const { return t.size(); }
};

/// Cumulative integral of a sampled integrand over the ladder.  Simpson uses
/// the standard composite pair rule plus the half-pair rule
/// int_{t0}^{t1} = h/12 (5 f0 + 8 f1 - f2) so every ladder node carries a
/// cumulative value at full composite order.
class CumulativeIntegrator {
 public:
  CumulativeIntegrator(const TimeLadder& ladder, QuadratureRule rule)
      : ladder_(&ladder), rule_(rule), value_(0.0), pos_(0) {}

  double value() const { return value_; }
  std::size_t position() const { return pos_; }

  /// Advance by one ladder pair (two substeps). f0,f1,f2 are the integrand at
  /// ladder nodes pos, pos+1, pos+2. Returns the cumulative value at pos+1 via
  /// out_mid and leaves value() at pos+2.
  void advance_pair(double f0, double f1, double f2, double& out_mid) {
    const double h = ladder_->t[pos_ + 1] - ladder_->t[pos_];
    if (rule_ == QuadratureRule::Simpson) {
      out_mid = value_ + h / 12.0 * (5.0 * f0 + 8.0 * f1 - f2);
      value_ += h / 3.0 * (f0 + 4.0 * f1 + f2);
    } else {
      out_mid = value_ + 0.5 * h * (f0 + f1);
      value_ = out_mid + 0.5 * h * (f1 + f2);
    }
    pos_ += 2;
  }

 private:
  const TimeLadder* ladder_;
  QuadratureRule rule_;
  double value_;
  std::size_t pos_;
};

}  // namespace nlom
