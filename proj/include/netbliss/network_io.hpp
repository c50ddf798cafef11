#pragma once

#include <iosfwd>
#include <string>

#include "netbliss/network.hpp"

namespace netbliss {

/// Dense self-describing text layout:
///
///   n <count>
///   liabilities            # n rows of n entries
///   ...
///   external_liabilities   # n entries
///   ...
///   liquid_assets
///   ...
///   illiquid_units
///   ...
///   demand exponential <qbar> <nu>
///   # or: demand tabulated <k>, followed by k lines of "x price"
///
/// '#' starts a comment; numbers accept exponent notation. Throws ParseError
/// with line/column on malformed input.
Network read_network(std::istream& in);
Network read_network_file(const std::string& path);

void write_network(std::ostream& out, const Network& net);
void write_network_file(const std::string& path, const Network& net);

}  // namespace netbliss
