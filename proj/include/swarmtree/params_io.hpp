#pragma once

#include <iosfwd>
#include <string>

#include "swarmtree/core.hpp"

namespace swarmtree {

// Plain `key = value` text, one entry per line, `#` starts a comment. Keys are
// the parameter symbols (S, A, delta, epsilon, tau, R, I, E, J, C, dt, v_max,
// u_max, body_radius, target_reach, ...). An optional `base = outwards|inwards`
// line selects the defaults that unlisted keys keep. Values are SI.

Params parse_params(std::istream& in, AlgorithmVariant fallback_base);
Params load_params(const std::string& path, AlgorithmVariant fallback_base);
void write_params(std::ostream& out, const Params& p);

}  // namespace swarmtree
