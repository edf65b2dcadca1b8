#pragma once

// Evaluation harness: capacity-region boundaries along rays (simulated by
// bisection and analytic), overhead-fraction convergence sweeps, overhead
// impact families and toy-model checks.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wdmpon/analysis.hpp"
#include "wdmpon/config_io.hpp"
#include "wdmpon/model.hpp"
#include "wdmpon/sim.hpp"
#include "wdmpon/toy.hpp"

namespace wdmpon {

/// A config whose queues are grouped into load classes. A load point is
/// `base_load + scale * direction`, one entry per class, applied to every
/// queue of the class as its intensity.
struct RegionTemplate {
    PonConfig config;
    std::vector<std::vector<int>> queue_class;  // zero-based
    PacketLaw packet = PacketLaw::deterministic(8e-6);
    std::vector<double> base_load;  // per class; empty means zero
    PollingPolicy policy = RandomPolling{};

    int n_classes() const;
};

/// N single-queue ONUs split into two classes (class 0 first), one transmitter each.
RegionTemplate two_class_template(int n_onus, int n_wavelengths, int class0_onus, double switch_overhead,
                                  double grant_limit, PacketLaw packet);

/// Builds a template from a parsed scenario; the packet law of queue (0,0) is used throughout.
RegionTemplate template_from(const Scenario& scenario);

TrafficSpec traffic_at(const RegionTemplate& tmpl, std::span<const double> direction, double scale);

/// Queues whose class is listed (all queues when `classes` is empty).
std::vector<std::vector<bool>> watched_queues(const RegionTemplate& tmpl, std::span<const int> classes);

/// Slope-based instability test on a finished run: a watched queue whose
/// work backlog grows faster than `rel_threshold` times its offered load, or
/// a watched total growing faster than `rel_threshold` times the watched load.
bool backlog_growing(const SimReport& report, const std::vector<std::vector<bool>>& watched, double rel_threshold);

/// Analytic verdict for the watched queues: true when any of them is not Stable.
bool analytic_unstable(const RegionTemplate& tmpl, const TrafficSpec& traffic,
                       const std::vector<std::vector<bool>>& watched);

/// Largest scale keeping the watched ONUs within their zero-overhead limits
/// (and the total load within L when every class is watched).
double no_overhead_bound(const RegionTemplate& tmpl, std::span<const double> direction, std::span<const int> watched);

struct RayProbe {
    std::vector<double> direction;
    double boundary_load = 0.0;  // scale at the boundary (bracket midpoint)
    double stable_scale = 0.0;
    double unstable_scale = 0.0;
    int iterations = 0;
    int simulations = 0;
    std::vector<std::uint64_t> seeds;
};

struct ProbeOptions {
    double resolution = 0.0;  // absolute scale; 0 -> 1% of the no-overhead bound
    std::vector<std::uint64_t> seeds{1, 2, 3};
    double horizon = 1.0;
    double warmup_fraction = 0.1;
    double slope_threshold = 0.01;
    std::vector<int> watched_classes;  // empty: every class
    std::optional<std::pair<double, double>> bracket;  // (stable, unstable) guess, verified by simulation
};

class ExperimentError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Majority verdict over the seeds (stops early once a majority is reached).
bool simulate_unstable(const RegionTemplate& tmpl, std::span<const double> direction, double scale,
                       const ProbeOptions& options, int* runs = nullptr);

/// Bisects the scale between a stable and an unstable simulated verdict.
RayProbe probe_boundary_sim(const RegionTemplate& tmpl, std::span<const double> direction,
                            const ProbeOptions& options);

/// Scalar bisection on the analytic verdict for each ray.
std::vector<RayProbe> region_analytic(const RegionTemplate& tmpl, const std::vector<std::vector<double>>& directions,
                                      std::span<const int> watched_classes = {}, double rel_tol = 1e-10);

/// Simulated probes for several rays, spread over worker threads
/// (WDMPON_WORKERS, default hardware concurrency). Output order follows input.
std::vector<RayProbe> region_sim(const RegionTemplate& tmpl, const std::vector<std::vector<double>>& directions,
                                 const ProbeOptions& options);

unsigned worker_count();

struct ConvergenceSweep {
    std::vector<int> n_onus;
    std::vector<double> stddev;         // seed-averaged std-dev of the windowed overhead fraction
    std::vector<double> mean_fraction;  // seed-averaged time-average overhead fraction
    double window = 1e-3;
    double load = 0.0;   // per-ONU load
    double ratio = 0.0;  // L / N

    bool strictly_decreasing() const;
};

struct SweepOptions {
    double window = 1e-3;
    double horizon = 0.1;
    double warmup = 0.01;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    double switch_overhead = 1.2e-6;
    double grant = 8e-6;
    PacketLaw packet = PacketLaw::deterministic(8e-6);
    PollingPolicy policy = RandomPolling{};
};

/// Throws ExperimentError when ratio * N is not an integer.
ConvergenceSweep convergence_sweep(const std::vector<int>& n_list, double ratio, double load,
                                   const SweepOptions& options = {});

struct OverheadImpact {
    std::vector<double> ratios;                  // Delta / d
    std::vector<std::vector<RayProbe>> regions;  // [ratio][ray]

    /// True when every ray's boundary shrinks as the ratio grows.
    bool nested() const;
};

/// One analytic region per overhead ratio, with Delta_i = ratio * d_i0.
OverheadImpact overhead_impact(const RegionTemplate& tmpl, const std::vector<double>& ratios,
                               const std::vector<std::vector<double>>& directions);

struct ToyCheck {
    int n_queues = 0;
    int n_servers = 0;
    std::vector<double> sup_deviation;  // per seed, geometric start
    int within = 0;                     // seeds with sup deviation below the threshold
    double tv = 0.0;                    // pooled marginal at the horizon vs Geometric(rho)
    std::vector<double> drain_time;     // per seed, explicit start
    double drain_bound = 0.0;           // C / (mu s - lambda)
    bool pass_sup = false, pass_tv = false, pass_drain = false;
};

struct ToyCheckOptions {
    double mu = 1.0;
    double horizon = 10.0;        // sup and marginal checks, in units of 1/mu
    double drain_horizon = 200.0;  // overloaded-start runs stop here if never drained
    std::vector<std::uint64_t> seeds;  // empty: 1..20
    int start_level = 2;               // C of the explicit overloaded start
    double sup_threshold = 0.05;
    double seed_fraction = 0.9;        // share of seeds that must stay within sup_threshold
    double tv_threshold = 0.02;
};

/// Throws ExperimentError when rho >= s.
std::vector<ToyCheck> verify_toy_meanfield(const std::vector<int>& n_list, double s, double rho,
                                           const ToyCheckOptions& options = {});

}  // namespace wdmpon
