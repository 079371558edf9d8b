#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_util.hpp"
#include "vsartrack/assignment.hpp"

#include <algorithm>
#include <numeric>
#include <set>

using namespace vsartrack;

namespace {

// Best total gated score by enumerating every partial injection rows -> cols.
double brute_force_best(const Eigen::MatrixXd& s, double threshold, Gate gate) {
    const int rows = static_cast<int>(s.rows());
    const int cols = static_cast<int>(s.cols());
    double best = 0.0;
    std::vector<int> choice(static_cast<std::size_t>(rows), -1);
    std::vector<bool> used(static_cast<std::size_t>(cols), false);
    auto rec = [&](auto&& self, int r, double total) -> void {
        if (r == rows) {
            best = std::max(best, total);
            return;
        }
        self(self, r + 1, total);
        for (int c = 0; c < cols; ++c) {
            const double v = s(r, c);
            const bool ok = gate == Gate::Exclusive ? v > threshold : v >= threshold;
            if (used[static_cast<std::size_t>(c)] || !ok) continue;
            used[static_cast<std::size_t>(c)] = true;
            self(self, r + 1, total + v);
            used[static_cast<std::size_t>(c)] = false;
        }
    };
    rec(rec, 0, 0.0);
    return best;
}

double total_of(const Eigen::MatrixXd& s, const std::vector<std::pair<int, int>>& pairs) {
    double t = 0.0;
    for (const auto& [r, c] : pairs) t += s(r, c);
    return t;
}

void check_matching(const Eigen::MatrixXd& s, const std::vector<std::pair<int, int>>& pairs, double threshold, Gate gate) {
    std::set<int> rows, cols;
    for (const auto& [r, c] : pairs) {
        REQUIRE(rows.insert(r).second);
        REQUIRE(cols.insert(c).second);
        REQUIRE((gate == Gate::Exclusive ? s(r, c) > threshold : s(r, c) >= threshold));
    }
    REQUIRE(std::is_sorted(pairs.begin(), pairs.end()));
}

}  // namespace

TEST_CASE("matches brute force on every shape up to 4x4") {
    for (int rows = 1; rows <= 4; ++rows)
        for (int cols = 1; cols <= 4; ++cols)
            for (int n = 0; n < 400; ++n) {
                Eigen::MatrixXd s(rows, cols);
                const bool quantized = n % 2 == 0;  // coarse values produce many ties
                for (int r = 0; r < rows; ++r)
                    for (int c = 0; c < cols; ++c)
                        s(r, c) = quantized ? testutil::uniform_int(0, 4) / 4.0 : testutil::uniform(0.0, 1.0);
                for (Gate gate : {Gate::Exclusive, Gate::Inclusive}) {
                    const auto pairs = max_score_assignment(s, 0.5, gate);
                    check_matching(s, pairs, 0.5, gate);
                    REQUIRE(total_of(s, pairs) == doctest::Approx(brute_force_best(s, 0.5, gate)).epsilon(1e-12));
                }
            }
}

TEST_CASE("examples") {
    SUBCASE("empty") {
        CHECK(max_score_assignment(Eigen::MatrixXd(0, 3), 0.5).empty());
        CHECK(max_score_assignment(Eigen::MatrixXd(2, 0), 0.5).empty());
    }
    SUBCASE("gate boundary") {
        Eigen::MatrixXd s(1, 1);
        s << 0.5;
        CHECK(max_score_assignment(s, 0.5, Gate::Exclusive).empty());
        CHECK(max_score_assignment(s, 0.5, Gate::Inclusive).size() == 1);
    }
    SUBCASE("global optimum beats greedy") {
        Eigen::MatrixXd s(2, 2);
        s << 0.9, 0.8, 0.8, 0.0;
        const auto pairs = max_score_assignment(s, 0.5);
        CHECK(pairs == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
    }
    SUBCASE("symmetric ties go to the lowest indices") {
        Eigen::MatrixXd s = Eigen::MatrixXd::Constant(2, 2, 0.7);
        CHECK(max_score_assignment(s, 0.5) == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
    }
}

TEST_CASE("deterministic") {
    const Eigen::MatrixXd s = testutil::random_matrix(7, 5, 0.0, 1.0);
    const auto a = max_score_assignment(s, 0.3);
    for (int i = 0; i < 5; ++i) CHECK(max_score_assignment(s, 0.3) == a);
}

TEST_CASE("large random instances stay one-to-one") {
    for (int n = 0; n < 200; ++n) {
        const Eigen::MatrixXd s = testutil::random_matrix(testutil::uniform_int(1, 30), testutil::uniform_int(1, 30), 0.0, 1.0);
        check_matching(s, max_score_assignment(s, 0.4), 0.4, Gate::Exclusive);
    }
}
