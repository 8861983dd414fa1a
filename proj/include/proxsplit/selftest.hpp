#pragma once

#include <iosfwd>

namespace proxsplit {

struct SelftestOptions {
  /// Swaps the l1 prox for a deliberately wrong one (threshold 1.05 t) so the
  /// suite can be seen to catch a broken proximity operator.
  bool corrupt_prox = false;
};

/// Fast invariant suite: operator adjoints, Moreau identities, TV
/// equivalences, and the single-inner-iteration reductions of DFB/PDFB.
/// Prints one line per property; returns 0 when every property holds.
int run_selftest(std::ostream& out, const SelftestOptions& options = {});

}  // namespace proxsplit
