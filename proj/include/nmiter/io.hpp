#pragma once

#include "nmiter/grid.hpp"
#include "nmiter/hyperb.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace nmiter::io {

/// Fixed-format float printing so that identical runs produce identical files.
std::string fmt(double v);

/// (x, u, v, ...) columns of a grid function.
void write_profile_csv(std::ostream& os, const fnspace::GridFunction& f,
                       const std::vector<std::string>& names);

/// (t, x, u) rows of a space-time snapshot.
void write_spacetime_csv(std::ostream& os, const hyperb::SpaceTimeFn& u);

/// Ordinary least squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nmiter::io
