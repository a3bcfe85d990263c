#include "gaplab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "gaplab/error.hpp"

namespace gaplab {

Grid1D Grid1D::uniform(double a, double b, std::size_t n_nodes) {
    Grid1D g;
    g.a = a;
    g.b = b;
    g.spacing = Spacing::Uniform;
    g.nodes.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i)
        g.nodes[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n_nodes - 1);
    g.nodes.front() = a;
    g.nodes.back() = b;
    g.validate();
    return g;
}

Grid1D Grid1D::graded_right(double a, double b, std::size_t n_nodes, double strength) {
    // x in [0,1] -> 1 - sinh(s(1-x))/sinh(s): cells shrink by ~s near b.
    Grid1D g;
    g.a = a;
    g.b = b;
    g.spacing = Spacing::GradedRight;
    g.nodes.resize(n_nodes);
    const double sh = std::sinh(strength);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        double x = static_cast<double>(i) / static_cast<double>(n_nodes - 1);
        g.nodes[i] = a + (b - a) * (1.0 - std::sinh(strength * (1.0 - x)) / sh);
    }
    g.nodes.front() = a;
    g.nodes.back() = b;
    g.validate();
    return g;
}

void Grid1D::validate() const {
    if (nodes.size() < 3) fail("invalid grid", "need at least 3 nodes");
    if (!(a < b)) fail("invalid grid", "empty interval");
    if (nodes.front() != a || nodes.back() != b) fail("invalid grid", "endpoints do not match interval");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1])) fail("invalid grid", "nodes not strictly increasing");
}

std::size_t Grid1D::cell_of(double z) const {
    if (z <= nodes.front()) return 0;
    if (z >= nodes.back()) return nodes.size() - 2;
    auto it = std::upper_bound(nodes.begin(), nodes.end(), z);
    return static_cast<std::size_t>(it - nodes.begin()) - 1;
}

}  // namespace gaplab
