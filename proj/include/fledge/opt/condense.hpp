#pragma once

#include "fledge/gp/expr.hpp"

namespace fledge::opt {

// Weighted AM-GM condensation: replaces a posynomial g by the monomial
//   prod_i (u_i(x)/w_i)^{w_i},  w_i = u_i(x_ref)/g(x_ref),
// which lower-bounds g on the positive orthant and matches it in value and
// gradient at x_ref.
gp::Monomial condense_posynomial(const gp::Posynomial& g, const gp::Point& x_ref);

}  // namespace fledge::opt
