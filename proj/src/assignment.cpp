#include "vsartrack/assignment.hpp"

#include <algorithm>
#include <limits>

namespace vsartrack {

std::vector<std::pair<int, int>> max_score_assignment(const Eigen::MatrixXd& scores, double threshold, Gate gate) {
    const auto rows = static_cast<int>(scores.rows());
    const auto cols = static_cast<int>(scores.cols());
    std::vector<std::pair<int, int>> result;
    if (rows == 0 || cols == 0) return result;

    auto passes = [&](int r, int c) {
        const double s = scores(r, c);
        return gate == Gate::Exclusive ? s > threshold : s >= threshold;
    };

    // Square min-cost problem on negated, gated scores; padding costs 0.
    const int n = std::max(rows, cols);
    auto cost = [&](int i, int j) {  // 1-based
        if (i > rows || j > cols || !passes(i - 1, j - 1)) return 0.0;
        return -scores(i - 1, j - 1);
    };

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<double> v(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<int> owner(static_cast<std::size_t>(n + 1), 0);  // column -> row
    std::vector<int> way(static_cast<std::size_t>(n + 1), 0);

    for (int i = 1; i <= n; ++i) {
        owner[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
        std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = owner[static_cast<std::size_t>(j0)];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (used[ju]) continue;
                const double cur = cost(i0, j) - u[static_cast<std::size_t>(i0)] - v[ju];
                if (cur < minv[ju]) {
                    minv[ju] = cur;
                    way[ju] = j0;
                }
                if (minv[ju] < delta) {
                    delta = minv[ju];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (used[ju]) {
                    u[static_cast<std::size_t>(owner[ju])] += delta;
                    v[ju] -= delta;
                } else {
                    minv[ju] -= delta;
                }
            }
            j0 = j1;
        } while (owner[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            owner[static_cast<std::size_t>(j0)] = owner[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    for (int j = 1; j <= cols; ++j) {
        const int i = owner[static_cast<std::size_t>(j)];
        if (i >= 1 && i <= rows && passes(i - 1, j - 1)) result.emplace_back(i - 1, j - 1);
    }
    std::sort(result.begin(), result.end());
    return result;
}

}  // namespace vsartrack
