#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace vsartrack {

enum class Gate { Exclusive, Inclusive };

/// Maximum-weight bipartite matching (Hungarian / Kuhn-Munkres, O(n^3)) over
/// a rows x cols score matrix. Only pairs whose score passes the gate
/// (score > threshold, or >= for Gate::Inclusive) can be matched; the result
/// maximizes the total score of matched pairs. Pairs are returned as
/// (row, col) sorted by row. The solver is deterministic for a given matrix.
std::vector<std::pair<int, int>> max_score_assignment(const Eigen::MatrixXd& scores, double threshold,
                                                      Gate gate = Gate::Exclusive);

}  // namespace vsartrack
