#pragma once

#include <optional>

#include "cbs/rational.hpp"

namespace cbs {

// Inputs of the per-hop formulas published with the AVB/TSN standards.
// Frame sizes are on-wire bits (preamble, SFD and IPG included).
struct StdHopParams {
  Rational capacity;       // C, bit/s
  Rational idle_slope_p7;  // bit/s
  Rational cmi;            // s
  Rational l_max;          // largest interfering frame of any priority
  Rational l_foi;          // frame of interest
  Rational l_min;          // smallest frame
  long num_input_links = 1;
  Rational t_proc = 0, t_prop = 0, t_in_queue = 0, t_sf = 0;
  Rational l_same_p7 = 0;  // L^(7); 0 means "same as l_foi"
  Rational t_perm = 0;     // permanent buffer delay supplied by the caller

  void validate() const;
};

struct StdBound {
  Rational delay;
  // Set when the same-priority term of the 802.1BA formula is negative.
  bool same_priority_negative = false;
};

// 802.1BA, priority 7 only.
StdBound delay_ba(const StdHopParams& p);

// 802.1Q Annex L for priority 7 or 6. `fanin_frames` is the number of
// same-class frames from other input ports arriving together with the frame
// of interest; when omitted it is min(|inputs|, reservable frames) - 1.
Rational delay_annex_l(const StdHopParams& p, int priority, std::optional<long> fanin_frames = std::nullopt);
long default_fanin_frames(const StdHopParams& p);

// Plenary reference formula in octets. Only defined for 100 Mbit/s links.
Rational delay_plenary(const StdHopParams& p);

struct PlenaryTerms {
  mpz_class r_max;  // octets
  mpz_class n;
};
PlenaryTerms plenary_terms(const StdHopParams& p);

}  // namespace cbs
