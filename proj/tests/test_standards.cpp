#include <random>

#include "cbs/standards.hpp"
#include "doctest.h"

using namespace cbs;

namespace {

StdHopParams base() {
  StdHopParams p;
  p.capacity = 100'000'000;
  p.idle_slope_p7 = 75'000'000;
  p.cmi = micros(125);
  p.l_max = 12336;
  p.l_foi = 1184;
  p.l_min = 672;
  return p;
}

// Octet accounting for the plenary bound. The spare reservation is spread
// octet by octet over the input links. Every spare octet is sent ahead of
// the frame of interest, and every octet not on the busiest link also
// arrives while that link is still delivering.
long plenary_octets(long l_max, long foi, long spare, long links) {
  std::vector<long> share(static_cast<size_t>(links), 0);
  for (long o = 0; o < spare; ++o) share[static_cast<size_t>(o % links)]++;
  long ledger = l_max + foi;
  for (size_t i = 0; i < share.size(); ++i) {
    ledger += share[i];
    if (i > 0) ledger += share[i];
  }
  return ledger;
}

}  // namespace

TEST_CASE("802.1BA worked example") {
  StdBound b = delay_ba(base());
  CHECK_FALSE(b.same_priority_negative);
  // 123.36 + 81.91 * 4 / 3 + 10.88 us, three times is 730.36 us
  CHECK(b.delay * 3 == ratio(73036, 100'000'000));
  CHECK(format_us(b.delay) == "243.453");
  double manual = 123.36e-6 + (93.75e-6 - 11.84e-6) * 4.0 / 3.0 + 10.88e-6;
  CHECK(to_double(b.delay) == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("802.1BA additive and flagged terms") {
  StdHopParams p = base();
  Rational d0 = delay_ba(p).delay;
  p.t_proc = micros(10);
  CHECK(delay_ba(p).delay - d0 == micros(10));

  StdHopParams n = base();
  n.cmi = micros(5);
  StdBound b = delay_ba(n);
  CHECK(b.same_priority_negative);
  CHECK(b.delay > 0);
}

TEST_CASE("Annex L examples") {
  StdHopParams p = base();
  CHECK(default_fanin_frames(p) == 0);
  CHECK(delay_annex_l(p, 7) == ratio(1352, 10'000'000));

  StdHopParams q = base();
  q.l_same_p7 = 12336;
  Rational t_queue = delay_annex_l(q, 6, 0) - q.l_foi / q.capacity;
  CHECK(t_queue == ratio(98688, 100'000'000));

  CHECK_THROWS_AS(delay_annex_l(p, 5), ParameterError);
  CHECK_THROWS_AS(delay_annex_l(p, 7, -1), ParameterError);
}

TEST_CASE("Annex L fan-in and permanent buffer terms") {
  StdHopParams p = base();
  p.num_input_links = 4;
  // 75 Mbit/s * 125 us / 1184 bits = 7 reservable frames
  CHECK(default_fanin_frames(p) == 3);
  CHECK(delay_annex_l(p, 7) - delay_annex_l(p, 7, 0) == 3 * Rational(1184) / 75'000'000);
  p.num_input_links = 40;
  CHECK(default_fanin_frames(p) == 6);
  StdHopParams q = base();
  q.t_perm = micros(50);
  CHECK(delay_annex_l(q, 7) == ratio(1352, 10'000'000) + micros(50));
}

TEST_CASE("plenary reserved octets") {
  StdHopParams p = base();
  PlenaryTerms t = plenary_terms(p);
  CHECK(t.r_max == 1171);
  CHECK(t.n == 1);
}

TEST_CASE("plenary single link") {
  StdHopParams p = base();
  p.l_min = 8 * 84;
  p.l_foi = 8 * (1171 - 84);
  CHECK(plenary_terms(p).n == 1);
  // 2 * spare - spare leaves one spare
  Rational octets = 12336 / 8 + 84 + (1171 - 84);
  CHECK(delay_plenary(p) == octets * ratio(8, 100'000'000));
}

TEST_CASE("plenary bound against octet accounting") {
  StdHopParams p = base();
  p.l_max = 8 * 1542;
  p.l_foi = 8 * 148;
  p.l_min = 8 * 84;
  p.num_input_links = 4;
  CHECK(plenary_terms(p).n == 4);
  long octets = plenary_octets(1542, 148, 1171 - 148, 4);
  CHECK(octets == 3480);
  CHECK(delay_plenary(p) == Rational(octets) * ratio(8, 100'000'000));
  CHECK(format_us(delay_plenary(p)) == "278.400");

  std::mt19937_64 rng(41);
  auto pick = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  for (int i = 0; i < 500; ++i) {
    StdHopParams r = base();
    r.cmi = micros(pick(100, 1000));
    r.l_max = 8 * pick(84, 1542);
    r.l_foi = 8 * pick(84, 600);
    r.l_min = 8 * pick(84, 200);
    r.num_input_links = pick(1, 12);
    PlenaryTerms t = plenary_terms(r);
    long spare = t.r_max.get_si() - r.l_foi.get_num().get_si() / 8;
    long expect = plenary_octets(r.l_max.get_num().get_si() / 8, r.l_foi.get_num().get_si() / 8, spare, t.n.get_si());
    CHECK(delay_plenary(r) == Rational(expect) * ratio(8, 100'000'000));
  }
}

TEST_CASE("plenary errors") {
  StdHopParams p = base();
  p.capacity = 1'000'000'000;
  p.idle_slope_p7 = 750'000'000;
  CHECK_THROWS_AS(delay_plenary(p), ParameterError);
  StdHopParams q = base();
  q.l_foi = 8 * 1171;
  CHECK_THROWS_AS(delay_plenary(q), ParameterError);
  StdHopParams z = base();
  z.l_foi = 8 * 1100;
  z.l_min = 8 * 100;
  CHECK_THROWS_AS(delay_plenary(z), ParameterError);
}

TEST_CASE("parameter validation") {
  StdHopParams p = base();
  p.idle_slope_p7 = p.capacity;
  CHECK_THROWS_AS(delay_ba(p), ParameterError);
  StdHopParams q = base();
  q.num_input_links = 0;
  CHECK_THROWS_AS(delay_annex_l(q, 7), ParameterError);
  StdHopParams r = base();
  r.l_min = 0;
  CHECK_THROWS_AS(delay_ba(r), ParameterError);
}

TEST_CASE("bounds are positive and monotone") {
  std::mt19937_64 rng(43);
  auto pick = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  for (int i = 0; i < 2000; ++i) {
    StdHopParams p = base();
    p.idle_slope_p7 = pick(10, 90) * 1'000'000;
    p.cmi = micros(pick(125, 1000));
    p.l_max = 8 * pick(84, 1542);
    p.l_foi = 8 * pick(84, 300);
    p.l_min = 8 * 84;
    p.num_input_links = pick(1, 8);
    p.l_same_p7 = 8 * pick(84, 1542);

    StdHopParams big = p;
    big.l_max += 8 * pick(1, 500);
    StdHopParams longer = p;
    longer.cmi += micros(pick(1, 500));
    StdHopParams wider = p;
    wider.num_input_links += pick(1, 4);

    CHECK(delay_ba(p).delay > 0);
    CHECK(delay_ba(big).delay >= delay_ba(p).delay);
    CHECK(delay_ba(longer).delay >= delay_ba(p).delay);
    for (int prio : {7, 6}) {
      CHECK(delay_annex_l(p, prio) > 0);
      CHECK(delay_annex_l(big, prio) >= delay_annex_l(p, prio));
      CHECK(delay_annex_l(longer, prio) >= delay_annex_l(p, prio));
    }
    if (p.cmi * p.idle_slope_p7 / 8 < p.l_foi / 8 + 85) continue;
    CHECK(delay_plenary(p) > 0);
    CHECK(delay_plenary(big) >= delay_plenary(p));
    CHECK(delay_plenary(longer) >= delay_plenary(p));
    CHECK(delay_plenary(wider) >= delay_plenary(p));
  }
}
