#ifndef DFMSYNTH_OBJECTIVE_H_
#define DFMSYNTH_OBJECTIVE_H_

#include <span>

#include "dfmsynth/gain.h"

namespace dfmsynth {

// Closed-loop objective inf_T sum rho(r) - mu(v) > -inf. The performance
// alphabet is {"0", "1"}; the exogenous alphabet is whatever rho declares
// (a single symbol for the plants handled here).
struct Objective {
  Valuation rho;
  Valuation mu;
};

// Error-system description: rho_delta over the control alphabet (z = u),
// mu_delta over the mismatch alphabet W = {"0", "1"}.
struct ErrorModel {
  Valuation rho;
  Valuation mu;
};

inline constexpr const char* kExogenousSymbol = "r";

// rho = 0 on the single exogenous symbol, mu(v) = v.
Objective reach_and_hold_objective();

// rho_delta = 1 on every control, mu_delta(w) = w.
ErrorModel mismatch_error_model(std::span<const Symbol> controls);

inline const Symbol& bit_symbol(int bit) {
  static const Symbol zero = "0", one = "1";
  return bit ? one : zero;
}

}  // namespace dfmsynth

#endif  // DFMSYNTH_OBJECTIVE_H_
