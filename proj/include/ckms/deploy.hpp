#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ckms/csv.hpp"
#include "ckms/rng.hpp"

namespace ckms {

/// Node ids are dense 0..m-1 within a deployment.
using NodeId = std::uint32_t;

struct Position {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Position&, const Position&) = default;
};

inline double distance_squared(Position a, Position b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

/// Euclidean distance between two positions.
inline double distance(Position a, Position b) { return std::sqrt(distance_squared(a, b)); }

/// One simulated network instance: node i sits at positions[i]. The same
/// (node count, area_side, seed) triple reproduces bit-identical positions.
struct Deployment {
    std::uint64_t seed = 0;
    double area_side = 0.0;
    std::vector<Position> positions;

    std::size_t size() const { return positions.size(); }
};

/// Drops `node_count` nodes i.i.d. uniform on the square [0, area_side]^2.
inline Deployment generate_deployment(std::size_t node_count, double area_side,
                                      std::uint64_t seed) {
    if (node_count == 0)
        throw std::invalid_argument("generate_deployment: node count must be at least 1");
    if (!std::isfinite(area_side) || !(area_side > 0.0))
        throw std::invalid_argument("generate_deployment: area side must be positive");
    Deployment deployment{seed, area_side, {}};
    deployment.positions.reserve(node_count);
    RandomEngine rng(seed);
    for (std::size_t i = 0; i < node_count; ++i) {
        const double x = uniform_unit(rng) * area_side;
        const double y = uniform_unit(rng) * area_side;
        deployment.positions.push_back({x, y});
    }
    return deployment;
}

inline void dump_deployment_csv(const Deployment& deployment, std::ostream& out) {
    out << "node_id,x,y\n";
    for (std::size_t i = 0; i < deployment.positions.size(); ++i)
        out << i << ',' << format_double(deployment.positions[i].x) << ','
            << format_double(deployment.positions[i].y) << '\n';
}

/// Reads positions back from a node_id,x,y dump. Ids must be dense and
/// ascending; coordinates round-trip bit-exactly.
inline std::vector<Position> load_deployment_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "node_id,x,y")
        throw std::runtime_error("deployment csv: expected header 'node_id,x,y'");
    std::vector<Position> positions;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw std::runtime_error("deployment csv: expected 3 fields per row, got " +
                                     std::to_string(fields.size()));
        if (parse_uint_field(fields[0], "node_id") != positions.size())
            throw std::runtime_error("deployment csv: node ids must be dense and ascending");
        positions.push_back(
            {parse_double_field(fields[1], "x"), parse_double_field(fields[2], "y")});
    }
    return positions;
}

}  // namespace ckms
