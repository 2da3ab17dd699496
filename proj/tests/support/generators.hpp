#pragma once

#include <random>
#include <string>
#include <vector>

#include "ipag/ast.hpp"

namespace ipag::test {

struct MiniCOptions {
  int max_depth = 3;
  int max_statements = 5;
};

/// One random function definition in the accepted mini-C subset. Calls go to
/// `callees` (plus a few library names) when any are given.
std::string random_routine(std::mt19937_64& rng, const std::string& name,
                           const std::vector<std::string>& callees, MiniCOptions opts = {});

/// `count` routines named r0, r1, ... that call each other at random.
std::string random_program(std::mt19937_64& rng, int count, MiniCOptions opts = {});

/// Arbitrary well-formed AST: property labels drawn from `labels`, token
/// labels "t<i>", root is a property.
Ast random_ast(std::mt19937_64& rng, std::size_t node_count, const std::vector<std::string>& labels);

}  // namespace ipag::test
