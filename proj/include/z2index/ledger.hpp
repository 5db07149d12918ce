#pragma once

// Virtual-dimension bookkeeping from user-supplied index data.

#include <string>
#include <vector>

#include "z2index/errors.hpp"

namespace z2index {

struct LedgerInput {
  long long Ahat_integral = 0;
  long long dim_ker_DSigma = 0;
  long long dim_ker_Dminus_L21 = 0;
  long long index_T_exp_minus = 0;
};

enum class LedgerMode { ThreeD, FourD };

struct LedgerResult {
  long long index_T_circ_B = 0;
  long long virtual_dim = 0;
  std::vector<std::string> chain;  // substituted derivation, one step per line
};

inline LedgerResult virtual_dimension_ledger(const LedgerInput& in, LedgerMode mode) {
  if (in.dim_ker_DSigma < 0 || in.dim_ker_Dminus_L21 < 0)
    throw DomainError("ledger: kernel dimensions must be nonnegative");
  LedgerResult r;
  const auto k = in.dim_ker_Dminus_L21;
  auto s = [](long long v) { return std::to_string(v); };

  if (mode == LedgerMode::ThreeD) {
    // index(T|Exp-) = 0 and index(p-) = -dim ker(D|L2_1)
    r.index_T_circ_B = 0 - k;
    r.virtual_dim = r.index_T_circ_B + k;
    r.chain = {
        "index(T o B) = index(T|Exp-) + index(p-)",
        "index(T|Exp-) = 0",
        "index(p-) = -dim ker(D|L2_1) = " + s(-k),
        "index(T o B) = 0 + (" + s(-k) + ") = " + s(r.index_T_circ_B),
        "virtual_dim = index(T o B) + dim ker(D|L2_1) = " + s(r.index_T_circ_B) + " + " + s(k) + " = " +
            s(r.virtual_dim),
    };
    return r;
  }

  if (in.dim_ker_DSigma % 2 != 0)
    throw DomainError("ledger: dim ker(D_Sigma) must be even in the 4D chain (got " + s(in.dim_ker_DSigma) + ")");
  const long long half = in.dim_ker_DSigma / 2;
  // index(p-) = ker(p-) - ker(p^{-,0}) + dim ker(D-|L2_1), with ker(p-) - ker(p^{-,0}) = Ahat + half
  const long long index_p = in.Ahat_integral + half + k;
  r.index_T_circ_B = in.index_T_exp_minus + index_p;
  r.virtual_dim = r.index_T_circ_B - k;
  r.chain = {
      "index(T o B) = index(T|Exp-) + index(p-)",
      "index(T|Exp-) = " + s(in.index_T_exp_minus),
      "index(p-) = [ker(p-) - ker(p^{-,0})] + dim ker(D-|L2_1)",
      "ker(p-) - ker(p^{-,0}) = int Ahat + dim ker(D_Sigma)/2 = " + s(in.Ahat_integral) + " + " + s(half) +
          " = " + s(in.Ahat_integral + half),
      "index(p-) = " + s(in.Ahat_integral + half) + " + " + s(k) + " = " + s(index_p),
      "index(T o B) = " + s(in.index_T_exp_minus) + " + " + s(index_p) + " = " + s(r.index_T_circ_B),
      "dim K0 - dim K1 = index(T o B) - dim ker(D-|L2_1) = " + s(r.index_T_circ_B) + " - " + s(k) + " = " +
          s(r.virtual_dim),
  };
  return r;
}

}  // namespace z2index
