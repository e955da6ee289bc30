#include "fledge/opt/condense.hpp"

#include <cmath>
#include <stdexcept>

namespace fledge::opt {

gp::Monomial condense_posynomial(const gp::Posynomial& g, const gp::Point& x_ref) {
  g.validate();
  if (g.terms.size() == 1) return g.terms.front();

  double total = g.eval(x_ref);
  gp::Monomial out = gp::constant(1.0);
  for (const auto& term : g.terms) {
    double weight = term.eval(x_ref) / total;
    if (!(weight > 0.0)) {
      throw std::domain_error("condense_posynomial: vanishing term weight");
    }
    gp::Monomial scaled = term;
    scaled.coeff /= weight;
    out = out * scaled.pow(weight);
  }
  return out;
}

}  // namespace fledge::opt
