#include "cbs/curve.hpp"

#include <algorithm>
#include <sstream>

namespace cbs {

namespace {

std::string rate_text(const Rational& r) { return to_decimal(r, 3); }

std::optional<Rational> min_horizon(const std::optional<Rational>& a, const std::optional<Rational>& b) {
  if (!a) return b;
  if (!b) return a;
  return min(*a, *b);
}

Rational end_value(const Segment& s, const Rational& end) { return s.value + s.slope * (end - s.start); }

}  // namespace

InstabilityError::InstabilityError(Rational arrival, Rational service)
    : Error("unstable: arrival rate " + rate_text(arrival) + " bit/s >= service rate " +
            rate_text(service) + " bit/s"),
      arrival_rate(std::move(arrival)),
      service_rate(std::move(service)) {}

Curve::Curve() : segments_{Segment{0, 0, 0}} {}

Curve Curve::from_segments(std::vector<Segment> segments, bool tail_exact,
                           std::optional<Rational> exact_until) {
  Curve c;
  c.segments_ = std::move(segments);
  c.tail_exact_ = tail_exact;
  c.exact_until_ = std::move(exact_until);
  c.validate();
  c.canonicalize();
  return c;
}

void Curve::validate() const {
  if (segments_.empty()) throw ParameterError("curve has no segments");
  if (segments_.front().start != 0) throw ParameterError("curve must start at t = 0");
  for (size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (s.slope < 0) throw ParameterError("curve slope is negative");
    if (i == 0) {
      if (s.value < 0) throw ParameterError("curve value at 0+ is negative");
      continue;
    }
    const Segment& prev = segments_[i - 1];
    if (s.start <= prev.start) throw ParameterError("curve breakpoints not strictly increasing");
    if (s.value < end_value(prev, s.start)) throw ParameterError("curve decreases at a breakpoint");
  }
}

void Curve::canonicalize() {
  std::vector<Segment> out;
  out.reserve(segments_.size());
  for (auto& s : segments_) {
    if (!out.empty()) {
      const Segment& last = out.back();
      if (last.slope == s.slope && end_value(last, s.start) == s.value) continue;
    }
    out.push_back(std::move(s));
  }
  segments_ = std::move(out);
}

Tail Curve::tail() const {
  const Segment& s = segments_.back();
  return Tail{s.start, s.value - s.slope * s.start, s.slope, tail_exact_};
}

size_t Curve::index_before(const Rational& t) const {
  auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                             [](const Segment& s, const Rational& x) { return s.start < x; });
  return static_cast<size_t>(it - segments_.begin()) - 1;
}

size_t Curve::index_at_or_before(const Rational& t) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](const Rational& x, const Segment& s) { return x < s.start; });
  return static_cast<size_t>(it - segments_.begin()) - 1;
}

Rational Curve::eval(const Rational& t) const {
  if (t <= 0) return 0;
  const Segment& s = segments_[index_before(t)];
  return end_value(s, t);
}

Rational Curve::eval_right(const Rational& t) const {
  if (t < 0) return 0;
  const Segment& s = segments_[index_at_or_before(t)];
  return end_value(s, t);
}

std::string Curve::dump(int digits) const {
  std::ostringstream out;
  for (const auto& s : segments_)
    out << to_decimal(s.start, digits) << ',' << to_decimal(s.value, digits) << ','
        << to_decimal(s.slope, digits) << '\n';
  return out.str();
}

bool Curve::operator==(const Curve& other) const {
  return segments_ == other.segments_ && tail_exact_ == other.tail_exact_ &&
         exact_until_ == other.exact_until_;
}

Curve staircase(const Rational& m, const Rational& period, long fold_periods) {
  if (m <= 0) throw ParameterError("staircase burst must be positive");
  if (period <= 0) throw ParameterError("staircase period must be positive");
  return shifted_staircase(m, period, 0, fold_periods);
}

Curve shifted_staircase(const Rational& m, const Rational& period, const Rational& offset,
                        long exact_periods) {
  if (m <= 0) throw ParameterError("staircase burst must be positive");
  if (period <= 0) throw ParameterError("staircase period must be positive");
  if (offset < 0) throw ParameterError("staircase offset must be non-negative");
  if (exact_periods < 1) throw ParameterError("staircase needs at least one exact period");

  // First unshifted jump strictly after `offset` is at k0 * period.
  mpz_class k0 = floor(Rational(offset / period)) + 1;
  std::vector<Segment> segs;
  segs.reserve(static_cast<size_t>(exact_periods) + 1);
  segs.push_back({0, m * Rational(k0), 0});
  for (long j = 0; j < exact_periods; ++j) {
    mpz_class k = k0 + j;
    Rational start = period * Rational(k) - offset;
    Rational value = m * Rational(k + 1);
    if (j + 1 == exact_periods)
      segs.push_back({start, value, m / period});  // fold: m + m (t + offset) / period
    else
      segs.push_back({start, value, 0});
  }
  Rational horizon = segs.back().start;
  return Curve::from_segments(std::move(segs), false, horizon);
}

Curve affine(const Rational& burst, const Rational& rate) {
  if (burst < 0 || rate < 0) throw ParameterError("affine curve needs burst >= 0 and rate >= 0");
  return Curve::from_segments({Segment{0, burst, rate}});
}

Curve rate_latency(const Rational& rate, const Rational& latency) {
  if (rate <= 0) throw ParameterError("service rate must be positive");
  if (latency < 0) throw ParameterError("service latency must be non-negative");
  if (latency == 0) return Curve::from_segments({Segment{0, 0, rate}});
  return Curve::from_segments({Segment{0, 0, 0}, Segment{latency, 0, rate}});
}

namespace {

std::vector<Rational> merged_breakpoints(const Curve& a, const Curve& b) {
  std::vector<Rational> xs;
  xs.reserve(a.segments().size() + b.segments().size());
  const auto& sa = a.segments();
  const auto& sb = b.segments();
  size_t i = 0, j = 0;
  while (i < sa.size() || j < sb.size()) {
    if (j == sb.size() || (i < sa.size() && sa[i].start < sb[j].start)) {
      xs.push_back(sa[i++].start);
    } else if (i == sa.size() || sb[j].start < sa[i].start) {
      xs.push_back(sb[j++].start);
    } else {
      xs.push_back(sa[i].start);
      ++i;
      ++j;
    }
  }
  return xs;
}

// Walks a curve's segments in increasing time.
struct Cursor {
  const std::vector<Segment>& segs;
  size_t idx = 0;
  void advance_to(const Rational& x) {
    while (idx + 1 < segs.size() && segs[idx + 1].start <= x) ++idx;
  }
  Rational value_at(const Rational& x) const { return end_value(segs[idx], x); }
  const Rational& slope() const { return segs[idx].slope; }
};

}  // namespace

Curve sum(const Curve& a, const Curve& b) {
  std::vector<Rational> xs = merged_breakpoints(a, b);
  Cursor ca{a.segments()}, cb{b.segments()};
  std::vector<Segment> out;
  out.reserve(xs.size());
  for (const auto& x : xs) {
    ca.advance_to(x);
    cb.advance_to(x);
    out.push_back({x, ca.value_at(x) + cb.value_at(x), ca.slope() + cb.slope()});
  }
  return Curve::from_segments(std::move(out), a.tail_exact() && b.tail_exact(),
                              min_horizon(a.exact_until(), b.exact_until()));
}

Curve minimum(const Curve& a, const Curve& b) {
  std::vector<Rational> xs = merged_breakpoints(a, b);
  Cursor ca{a.segments()}, cb{b.segments()};
  std::vector<Segment> out;
  out.reserve(xs.size() * 2);
  for (size_t k = 0; k < xs.size(); ++k) {
    const Rational& x = xs[k];
    ca.advance_to(x);
    cb.advance_to(x);
    Rational va = ca.value_at(x), vb = cb.value_at(x);
    const Rational& sa = ca.slope();
    const Rational& sb = cb.slope();
    bool a_low = va < vb || (va == vb && sa <= sb);
    const Rational& v_low = a_low ? va : vb;
    const Rational& s_low = a_low ? sa : sb;
    const Rational& v_high = a_low ? vb : va;
    const Rational& s_high = a_low ? sb : sa;
    out.push_back({x, v_low, s_low});
    if (s_low > s_high) {
      Rational cross = x + (v_high - v_low) / (s_low - s_high);
      bool inside = k + 1 == xs.size() || cross < xs[k + 1];
      if (inside && cross > x) out.push_back({cross, v_high + s_high * (cross - x), s_high});
    }
  }
  return Curve::from_segments(std::move(out), a.tail_exact() && b.tail_exact(),
                              min_horizon(a.exact_until(), b.exact_until()));
}

Curve shift_earlier(const Curve& a, const Rational& delta) {
  if (delta < 0) throw ParameterError("shift must be non-negative");
  if (delta == 0) return a;
  const auto& segs = a.segments();
  std::vector<Segment> out;
  Cursor c{segs};
  c.advance_to(delta);
  out.push_back({0, c.value_at(delta), c.slope()});
  for (size_t i = c.idx + 1; i < segs.size(); ++i)
    out.push_back({segs[i].start - delta, segs[i].value, segs[i].slope});
  std::optional<Rational> horizon = a.exact_until();
  if (horizon) *horizon -= delta;
  return Curve::from_segments(std::move(out), a.tail_exact(), horizon);
}

Curve scale(const Curve& a, const Rational& factor) {
  if (factor < 0) throw ParameterError("scale factor must be non-negative");
  if (factor == 0) return Curve();
  std::vector<Segment> out = a.segments();
  for (auto& s : out) {
    s.value *= factor;
    s.slope *= factor;
  }
  return Curve::from_segments(std::move(out), a.tail_exact(), a.exact_until());
}

Deviation h_dev_detail(const Curve& alpha, const Curve& beta) {
  const auto& bs = beta.segments();
  // Levels of the strictly increasing part of beta.
  struct Level {
    Rational value, start, slope;
  };
  std::vector<Level> levels;
  for (size_t i = 0; i < bs.size(); ++i) {
    if (i > 0 && bs[i].value != end_value(bs[i - 1], bs[i].start))
      throw ParameterError("service curve must be continuous");
    if (bs[i].slope == 0) {
      if (bs[i].value != 0 || i + 1 == bs.size())
        throw ParameterError("service curve may only be flat at zero");
      continue;
    }
    levels.push_back({bs[i].value, bs[i].start, bs[i].slope});
  }
  if (bs.front().value != 0) throw ParameterError("service curve must start at zero");
  if (alpha.long_run_rate() >= beta.long_run_rate())
    throw InstabilityError(alpha.long_run_rate(), beta.long_run_rate());

  size_t lv = 0;  // last level with value < y, advanced monotonically
  auto inverse = [&](const Rational& y) -> Rational {
    if (y <= 0) return 0;
    while (lv + 1 < levels.size() && levels[lv + 1].value < y) ++lv;
    const Level& l = levels[lv];
    return l.start + (y - l.value) / l.slope;
  };

  Deviation best{0, 0};
  auto consider = [&](const Rational& t, const Rational& y) {
    if (y <= 0) return;
    Rational d = inverse(y) - t;
    if (d > best.delay) best = {d, t};
  };

  const auto& as = alpha.segments();
  for (size_t i = 0; i < as.size(); ++i) {
    const Segment& s = as[i];
    consider(s.start, s.value);
    if (s.slope == 0) continue;
    bool last = i + 1 == as.size();
    Rational w = last ? Rational(0) : end_value(s, as[i + 1].start);
    for (size_t j = lv + 1; j < levels.size(); ++j) {
      const Rational& level = levels[j].value;
      if (level <= s.value) continue;
      if (!last && level >= w) break;
      consider(s.start + (level - s.value) / s.slope, level);
    }
    if (!last) consider(as[i + 1].start, w);
  }
  return best;
}

}  // namespace cbs
