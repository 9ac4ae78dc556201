#pragma once

#include <map>
#include <string>
#include <vector>

#include "gibbslab/potential.hpp"

namespace gibbslab {

using ParamMap = std::map<std::string, double>;

// Test landscapes with every applicable constant filled in:
//   quadratic           F(w) = c|w|^2/2            (params: c>0, dim)
//   pl_sine             F(w) = w^2 + 3 sin^2 w     (1D)
//   kl_power            F(w) = |w|^p, p = 2/(1-theta)  (params: theta in (0,1), window)
//   double_well         F(w) = (w^2-1)^2           (1D)
//   dissipative_quartic F(w) = w^4/4 - w^2/2 + 1/4 (1D)
// Throws std::invalid_argument on unknown names or bad parameters.
Potential catalogue(const std::string& name, const ParamMap& params = {});

std::vector<std::string> catalogue_names();

}  // namespace gibbslab
