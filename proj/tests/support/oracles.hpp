#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ipag/ast.hpp"
#include "ipag/ipag.hpp"

namespace ipag::test {

/// Why `g` fails to carry all of `ast`'s information, or nullopt. Checks the
/// IPAG invariants, the token chain against the AST frontier, and that every
/// property name survives in some (merged) label.
std::optional<std::string> lossless_failure(const Ast& ast, const Ipag& g);

/// Maximal property sequences found by enumerating every e_pp path and
/// filtering by the sequence conditions. Node lists are entry end first.
std::vector<std::vector<NodeId>> brute_force_sequences(const Ipag& g);

}  // namespace ipag::test
