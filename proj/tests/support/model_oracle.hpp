#pragma once

#include <array>
#include <random>
#include <vector>

#include "ipag/embed.hpp"
#include "ipag/hagnn.hpp"

namespace ipag::test {

using Vec = std::vector<double>;
using Rows = std::vector<Vec>;

/// Message passing written out as nested loops over an edge list.
Rows dense_unit(const Rows& x, const UnitTopology& topo, const std::vector<Matrix>& wd,
                const std::vector<Matrix>& wc, MessagePasser passer);

/// The full model score with plain loops and no tape.
double dense_score(const HagnnModel& model, const EmbeddedGraph& g);

/// Edge depths by repeated relaxation until nothing changes.
std::array<std::vector<int>, kEdgeKinds> relaxed_depths(const Ipag& g);

Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale = 1.0);
UnitTopology random_topology(std::mt19937_64& rng, std::size_t max_nodes, int max_depth);

Rows to_rows(const Matrix& m);

}  // namespace ipag::test
