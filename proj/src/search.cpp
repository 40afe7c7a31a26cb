#include "dyadlab/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dyadlab {

namespace {

double safe(double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; }

void refine(const Objective& obj, std::vector<double>& x, double& val, const std::vector<std::size_t>& idx,
            int rounds, long& evals) {
    double step = 4.0;
    for (int r = 0; r < rounds; ++r) {
        bool improved = false;
        double top = 0.0;
        for (std::size_t i : idx) top = std::max(top, x[i]);
        if (top == 0.0) return;
        for (std::size_t i : idx) {
            const double old = x[i];
            double cand[3];
            int nc = 0;
            if (old == 0.0) {
                cand[nc++] = top / step;
                cand[nc++] = top;
            } else {
                cand[nc++] = old * step;
                cand[nc++] = old / step;
                cand[nc++] = 0.0;
            }
            for (int c = 0; c < nc; ++c) {
                x[i] = cand[c];
                double v = safe(obj(x));
                ++evals;
                if (v > val * (1 + 1e-14) && v > val) {
                    val = v;
                    improved = true;
                    break;
                }
                x[i] = old;
            }
        }
        if (!improved) {
            step = std::sqrt(step);
            if (step < 1.0 + 1e-7) return;
        }
    }
}

}  // namespace

AscentResult ascend(const Objective& obj, const std::vector<std::vector<double>>& seeds,
                    const std::vector<char>& support, const Budget& b) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < support.size(); ++i)
        if (support[i]) idx.push_back(i);
    AscentResult res;
    res.value = -std::numeric_limits<double>::infinity();
    res.x.assign(support.size(), 0.0);
    if (idx.empty()) {
        res.value = 0.0;
        return res;
    }
    auto run = [&](std::vector<double> x, int tag) {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!support[i]) x[i] = 0.0;
        bool any = std::any_of(x.begin(), x.end(), [](double v) { return v > 0.0; });
        if (!any) return;
        double v = safe(obj(x));
        ++res.evaluations;
        refine(obj, x, v, idx, b.rounds, res.evaluations);
        if (v > res.value) {
            res.value = v;
            res.x = x;
            res.best_start = tag;
        }
    };
    int tag = 0;
    for (const auto& s : seeds) run(s, tag++);
    std::mt19937_64 rng(b.seed);
    // Box-Muller on raw draws keeps the stream library-independent
    auto gauss = [](std::mt19937_64& g) {
        double u = std::max(double(g() >> 11) * 0x1.0p-53, 1e-300), v = double(g() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
    };
    for (int s = 0; s < b.starts; ++s) {
        std::vector<double> x(support.size(), 0.0);
        for (std::size_t i : idx) x[i] = std::exp(gauss(rng));
        run(std::move(x), tag++);
    }
    if (!std::isfinite(res.value)) res.value = 0.0;
    return res;
}

PowerResult boyd_norm(const std::vector<double>& A, std::size_t n, double p, std::vector<double> x,
                      double gap, int max_iter) {
    require(p > 1.0 && std::isfinite(p), ErrorKind::Domain, "boyd_norm needs 1 < p < inf");
    require(A.size() == n * n && x.size() == n, ErrorKind::Structural, "boyd_norm size mismatch");
    const double pc = p / (p - 1.0);
    std::vector<double> y(n), z(n);
    PowerResult res;
    res.upper = std::numeric_limits<double>::infinity();
    for (auto& v : x) v = std::fabs(v);
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += A[i * n + j] * x[j];
            y[i] = s;
        }
        double ny = 0.0, nx = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ny += std::pow(y[i], p);
            nx += std::pow(x[i], p);
        }
        if (nx == 0.0) break;
        double lower = std::pow(ny / nx, 1.0 / p);
        if (lower > res.lower) {
            res.lower = lower;
            res.x = x;
        }
        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (y[i] == 0.0) continue;
            double yp = std::pow(y[i], p - 1.0);
            for (std::size_t j = 0; j < n; ++j) z[j] += A[i * n + j] * yp;
        }
        double up = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (z[j] == 0.0) continue;
            if (x[j] == 0.0) {
                up = std::numeric_limits<double>::infinity();
                break;
            }
            up = std::max(up, z[j] / std::pow(x[j], p - 1.0));
        }
        res.upper = std::min(res.upper, std::pow(up, 1.0 / p));
        if (res.upper - res.lower <= gap * res.upper) break;
        double zmax = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            x[j] = std::pow(z[j], pc - 1.0);
            zmax = std::max(zmax, x[j]);
        }
        if (zmax == 0.0) break;
        for (auto& v : x) v /= zmax;
    }
    return res;
}

}  // namespace dyadlab
