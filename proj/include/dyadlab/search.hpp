#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "dyadlab/spaces.hpp"

namespace dyadlab {

using Objective = std::function<double(const std::vector<double>&)>;

struct AscentResult {
    double value = 0.0;
    std::vector<double> x;
    long evaluations = 0;
    int best_start = -1;  // index into seeds, then random starts
};

// Maximizes a scale invariant objective over x >= 0 supported on `support`.
// Seeds run first, then b.starts log-normal random starts drawn from b.seed.
// Each start is refined by multiplicative coordinate moves.
AscentResult ascend(const Objective& obj, const std::vector<std::vector<double>>& seeds,
                    const std::vector<char>& support, const Budget& b);

struct PowerResult {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<double> x;  // maximizer estimate for the lower bound
    int iterations = 0;
};

// ||A||_{l^p -> l^p} for a dense nonnegative n x n matrix (row major),
// 1 < p < inf. Lower bound from the iterate, upper bound from the Schur test
// with the iterate as test vector.
PowerResult boyd_norm(const std::vector<double>& A, std::size_t n, double p, std::vector<double> x0,
                      double gap, int max_iter);

}  // namespace dyadlab
