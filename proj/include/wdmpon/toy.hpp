#pragma once

// Homogeneous limited-server polling model: N queues, S servers, Poisson(lambda)
// arrivals per queue, exponential(mu) services, one customer per visit and
// instantaneous moves. After each service a server picks a non-empty queue
// that no other server attends, uniformly at random, or goes idle.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace wdmpon {

/// Independent Geometric(rho) queue lengths, P(Q = k) = (1 - rho) rho^k.
struct GeometricStart {};

struct ExplicitStart {
    std::vector<int> lengths;
};

using ToyStart = std::variant<GeometricStart, ExplicitStart>;

struct ToyOptions {
    int n_queues = 0;
    int n_servers = 0;
    double lambda = 0.0;
    double mu = 1.0;
    double horizon = 0.0;
    std::uint64_t seed = 1;
    ToyStart initial = GeometricStart{};
    int grid_points = 200;
};

struct ToyReport {
    std::vector<double> grid_times;
    std::vector<double> busy_fraction;  // A_N(t) on the grid
    double max_busy_fraction = 0.0;     // over every state visited in [0, T]
    double min_busy_fraction = 0.0;
    std::vector<std::uint64_t> marginal;  // histogram of queue lengths at the horizon
    std::optional<double> drain_time;     // first time fewer than S queues are non-empty
    std::uint64_t events = 0;

    /// sup over [0, T] of |A_N(t) - level|.
    double sup_deviation(double level) const;
};

ToyReport run_homogeneous(const ToyOptions& options);

/// Total-variation distance between a histogram and Geometric(rho).
double tv_distance_geometric(const std::vector<std::uint64_t>& histogram, double rho);

}  // namespace wdmpon
