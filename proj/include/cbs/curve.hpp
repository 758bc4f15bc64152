#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cbs/rational.hpp"

namespace cbs {

// Raised by h_dev when the arrival's long-run rate is not strictly below
// the service rate.
class InstabilityError : public Error {
 public:
  InstabilityError(Rational arrival_rate, Rational service_rate);
  const Rational arrival_rate;
  const Rational service_rate;
};

// One linear piece. `value` is the right limit at `start`; the piece runs
// until the next segment's start (or forever for the last one).
struct Segment {
  Rational start;
  Rational value;
  Rational slope;

  bool operator==(const Segment&) const = default;
};

// Affine description of the last segment: burst + rate * t for t >= start.
struct Tail {
  Rational start;
  Rational burst;
  Rational rate;
  bool exact = true;
};

// Non-decreasing piecewise-linear function on [0, inf) with f(0) = 0.
//
// For t > 0 the curve is left-continuous: f(t) is the value just before
// any jump at t, so a staircase m * ceil(t / P) evaluates to m at t = P and
// to 2m just after. Jumps are encoded by a segment whose `value` exceeds
// the previous segment's end point.
//
// Folded staircases carry an upper-bounding affine tail. `exact_until()`
// reports the horizon up to which the represented function (including its
// right limit at the horizon) coincides with the unfolded one.
class Curve {
 public:
  Curve();  // the zero curve

  // Takes ownership of raw segments, validates and canonicalizes them.
  static Curve from_segments(std::vector<Segment> segments, bool tail_exact = true,
                             std::optional<Rational> exact_until = std::nullopt);

  const std::vector<Segment>& segments() const { return segments_; }
  Tail tail() const;
  bool tail_exact() const { return tail_exact_; }
  // nullopt: exact everywhere. A negative value means nowhere exact.
  const std::optional<Rational>& exact_until() const { return exact_until_; }
  bool exact_at(const Rational& t) const { return !exact_until_ || t <= *exact_until_; }

  Rational eval(const Rational& t) const;        // left value (0 at t = 0)
  Rational eval_right(const Rational& t) const;  // right limit
  Rational long_run_rate() const { return segments_.back().slope; }

  // Throws ParameterError if any invariant does not hold.
  void validate() const;

  // `t,value,slope` per line, decimals with `digits` fractional digits.
  std::string dump(int digits = 9) const;

  bool operator==(const Curve& other) const;

 private:
  size_t index_before(const Rational& t) const;   // last segment with start < t
  size_t index_at_or_before(const Rational& t) const;  // last with start <= t
  void canonicalize();

  std::vector<Segment> segments_;
  bool tail_exact_ = true;
  std::optional<Rational> exact_until_;
};

// Default number of exact periods before a staircase is folded.
inline constexpr long kDefaultFoldPeriods = 64;

// m * ceil(t / period), exact for `fold_periods` periods, then bounded by
// m + (m / period) * t.
Curve staircase(const Rational& m, const Rational& period, long fold_periods = kDefaultFoldPeriods);

// staircase(m, period) advanced by `offset`: m * ceil((t + offset) / period)
// for t > 0, exact for `exact_periods` jumps past the origin. Equivalent to
// shift_earlier(staircase(...), offset) without materializing the skipped
// prefix.
Curve shifted_staircase(const Rational& m, const Rational& period, const Rational& offset,
                        long exact_periods);

Curve affine(const Rational& burst, const Rational& rate);
Curve rate_latency(const Rational& rate, const Rational& latency);

Curve sum(const Curve& a, const Curve& b);
Curve minimum(const Curve& a, const Curve& b);
Curve shift_earlier(const Curve& a, const Rational& delta);
// Multiplies every value by a non-negative factor.
Curve scale(const Curve& a, const Rational& factor);

struct Deviation {
  Rational delay;
  Rational at;  // arrival instant where the supremum is reached
};

// Maximum horizontal deviation between arrival and service curve. The
// service curve must be continuous and strictly increasing wherever it is
// positive (rate-latency curves and their sums qualify).
Deviation h_dev_detail(const Curve& alpha, const Curve& beta);
inline Rational h_dev(const Curve& alpha, const Curve& beta) { return h_dev_detail(alpha, beta).delay; }

}  // namespace cbs
