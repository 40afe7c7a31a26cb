#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "dyadlab/mesh.hpp"

namespace dyadlab {

// phi(t) = (w t)^p / p with 1 < p < inf.
struct PowerPhi {
    double p = 2.0;
    double w = 1.0;
    bool operator==(const PowerPhi&) const = default;
};

// Convex piecewise linear phi through (t_j, v_j) starting at (0,0). Past the
// last vertex phi continues with slope `tail`, or is +inf when `capped`.
struct TablePhi {
    std::vector<double> t;
    std::vector<double> v;
    double tail = 0.0;
    bool capped = false;
    bool operator==(const TablePhi&) const = default;
};

using CellPhi = std::variant<PowerPhi, TablePhi>;

// Validates convexity and monotonicity, drops collinear vertices.
TablePhi make_table(std::vector<double> t, std::vector<double> v, double tail, bool capped);
TablePhi linear_phi(double w);     // phi(t) = w t
TablePhi indicator_phi(double w);  // phi(t) = 0 for w t <= 1, inf beyond

double phi_value(const CellPhi& phi, double t);
double phi_slope(const CellPhi& phi, double t);  // left derivative, right derivative at 0
double phi_slope_right(const CellPhi& phi, double t);  // right derivative
double phi_cap(const CellPhi& phi);              // sup{t : phi(t) < inf}
double phi_tail_slope(const CellPhi& phi);       // lim phi(t)/t (inf when superlinear or capped)
CellPhi phi_conjugate(const CellPhi& phi);
std::string describe(const CellPhi& phi);

class PhiFunction {
public:
    PhiFunction() = default;
    PhiFunction(const Mesh& m, std::vector<CellPhi> cells);

    // phi(x,t) = (w t)^{p(x)} / p(x), with p(x) = 1 giving w t and
    // p(x) = inf the indicator branch.
    static PhiFunction variable_exponent(const GridFunction& p, const GridFunction& w);
    static PhiFunction uniform(const Mesh& m, const CellPhi& cell);
    // Piecewise linear interpolation of a convex fn on grid t (t[0] = 0),
    // continued linearly past the last sample.
    static PhiFunction sampled(const Mesh& m, const std::function<double(double)>& fn,
                               const std::vector<double>& grid);

    const Mesh& mesh() const { return mesh_; }
    const CellPhi& cell(std::size_t i) const { return cells_[i]; }
    const std::vector<CellPhi>& cells() const { return cells_; }
    PhiFunction conjugate() const;

    // sum_x mu phi(x, |f(x)| s)
    double modular(const GridFunction& f, double s) const;

    bool operator==(const PhiFunction&) const = default;

private:
    Mesh mesh_;
    std::vector<CellPhi> cells_;
};

// inf{lambda > 0 : modular(f, 1/lambda) <= 1}
double luxemburg_norm(const PhiFunction& phi, const GridFunction& f);

struct AmemiyaResult {
    double value = 0.0;
    double k = 0.0;      // minimizer, inf when the infimum is the k -> inf limit
    bool limit = false;
};

// inf_{k>0} (1 + modular(g, k)) / k. With phi replaced by its conjugate this
// is the Koethe dual norm of the Luxemburg space of phi.
AmemiyaResult amemiya_norm(const PhiFunction& phi, const GridFunction& g);

// f >= 0 nearly attaining the Koethe dual norm of the Luxemburg space of
// phi at g, normalized to Luxemburg norm 1.
GridFunction luxemburg_dual_witness(const PhiFunction& phi, const GridFunction& g);
// g >= 0 nearly attaining the Koethe dual norm of the Amemiya space of
// phi_star at f; normalized to Amemiya norm 1.
GridFunction amemiya_dual_witness(const PhiFunction& phi, const GridFunction& f);

struct Delta2Report {
    bool delta2 = false;
    double K2 = 0.0;       // smallest K on the grid with h = 0
    bool delta_s = false;
    double Ks = 0.0;
    double witness_t = 0.0;
    std::size_t witness_cell = 0;
    double witness_lambda = 0.0;
    std::string reason;
};

// Grid t_j = t0 2^j. A condition fails when some ratio is infinite, or when
// the grid supremum is still growing at the top of the grid.
Delta2Report delta2_check(const PhiFunction& phi, double s, double t0 = 1.0 / 1024, int steps = 21);

}  // namespace dyadlab
