#pragma once

// Domain model of a WDM PON seen as a multiserver polling system.
//
// All times are seconds. Packet sizes are stored as transmission times on a
// single wavelength, so the line rate never appears below the config layer.

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace wdmpon {

/// Identifies queue j of ONU i (both zero-based).
struct QueueId {
    int onu = 0;
    int queue = 0;

    auto operator<=>(const QueueId&) const = default;
};

struct QueueConfig {
    double grant_limit = 0.0;  // d_ij, seconds of transmission per visit; +inf = unlimited gated
    double weight = 1.0;       // only read by the frame-based allocator
};

struct OnuConfig {
    int transmitters = 1;
    double switch_overhead = 0.0;
    std::vector<QueueConfig> queues;
};

struct PonConfig {
    int n_onus = 0;
    int n_wavelengths = 0;
    std::vector<OnuConfig> onus;

    int total_transmitters() const;
    std::size_t total_queues() const;
};

struct ArrivalProcess {
    enum class Kind { Poisson };
    Kind kind = Kind::Poisson;
    double rate = 0.0;  // packets per second
};

struct PacketLaw {
    enum class Kind { Deterministic, Exponential };
    Kind kind = Kind::Deterministic;
    double mean = 0.0;  // seconds of transmission

    static PacketLaw deterministic(double seconds) { return {Kind::Deterministic, seconds}; }
    static PacketLaw exponential(double mean_seconds) { return {Kind::Exponential, mean_seconds}; }
};

struct QueueTraffic {
    ArrivalProcess arrival;
    PacketLaw packet;

    /// rho_ij in units of one wavelength's bit rate.
    double intensity() const { return arrival.rate * packet.mean; }

    /// Back-solves the Poisson rate that yields the requested intensity.
    static QueueTraffic from_intensity(double rho, PacketLaw law);
};

struct TrafficSpec {
    std::vector<std::vector<QueueTraffic>> per_queue;  // [onu][queue]

    double intensity(QueueId q) const { return per_queue[q.onu][q.queue].intensity(); }
};

double onu_load(const TrafficSpec& traffic, int onu);
double total_load(const TrafficSpec& traffic);

/// Returns a copy with every arrival rate multiplied by `factor`.
TrafficSpec scaled(const TrafficSpec& traffic, double factor);

struct RandomPolling {};

/// One cyclic visit order per wavelength. Entries are ONU indices; an ONU
/// with t_i transmitters may appear up to t_i times (transmitter slots).
/// An empty `orders` asks the simulator to draw a random permutation of
/// transmitter slots for each wavelength from the run seed.
struct PeriodicPolling {
    std::vector<std::vector<int>> orders;
};

struct GponFramePolicy {
    double frame = 125e-6;
    std::vector<double> overhead_ratios;  // delta_i = Delta_i / f, one per ONU
};

using PollingPolicy = std::variant<RandomPolling, PeriodicPolling, GponFramePolicy>;

std::string policy_name(const PollingPolicy& policy);

/// Returns human-readable violations; empty when config and traffic are consistent.
std::vector<std::string> validate(const PonConfig& config, const TrafficSpec& traffic);

/// Checks a policy against a config (order permutations, ratio counts).
std::vector<std::string> validate(const PonConfig& config, const PollingPolicy& policy);

/// Builds N identical single-transmitter ONUs, each with one queue.
PonConfig uniform_config(int n_onus, int n_wavelengths, double switch_overhead, double grant_limit,
                         int transmitters = 1);

/// Same packet law and intensity for every queue of `config`.
TrafficSpec uniform_traffic(const PonConfig& config, double rho_per_queue, PacketLaw law);

}  // namespace wdmpon
