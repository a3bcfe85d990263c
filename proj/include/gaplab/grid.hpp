#pragma once

#include <cstddef>
#include <vector>

namespace gaplab {

enum class Spacing { Uniform, GradedRight };

// 1D mesh on [a, b], strictly increasing nodes, endpoints included.
// GradedRight clusters nodes toward b (used when coefficients steepen there).
struct Grid1D {
    double a = 0.0;
    double b = 1.0;
    Spacing spacing = Spacing::Uniform;
    std::vector<double> nodes;

    static Grid1D uniform(double a, double b, std::size_t n_nodes);
    static Grid1D graded_right(double a, double b, std::size_t n_nodes, double strength = 3.0);

    std::size_t size() const { return nodes.size(); }
    double length() const { return b - a; }

    // throws NumericsError("invalid grid", ...) on unordered nodes, size < 3,
    // or endpoints not matching a/b
    void validate() const;

    // index of the cell [nodes[i], nodes[i+1]] containing z (clamped to range)
    std::size_t cell_of(double z) const;
};

}  // namespace gaplab
