#pragma once

// Discrete-event simulation of wavelengths circulating among ONUs.
//
// A visit by a wavelength to ONU i serves each of its queues once, cyclically,
// under limited-gated service (only work present at visit start, at most d_ij
// seconds per queue; a packet that overruns the grant is split and its rest
// waits for the next visit), then holds the ONU for the switch
// overhead Delta_i before moving on according to the polling policy. At most
// t_i wavelengths are present at ONU i at once.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "wdmpon/model.hpp"

namespace wdmpon {

/// Welford accumulator.
struct RunningStats {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
    void merge(const RunningStats& other);
    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    /// Coefficient of variation; 0 when undefined.
    double cv() const;
};

struct SimOptions {
    double horizon = 0.0;  // seconds, absolute end time
    double warmup = 0.0;   // statistics start here
    std::uint64_t seed = 1;
    double window = 1e-3;  // overhead-fraction window
    int backlog_samples = 400;
    double runaway_backlog = 1.0;  // seconds of queued work in one queue that triggers a warning
    double vacation_bin = 0.5e-6;  // histogram bin width, seconds
    int vacation_bins = 100;       // last bin collects the overflow
    bool audit = false;            // check engine invariants at every event (slow)
};

struct QueueReport {
    double offered_load = 0.0;
    double mean_backlog_packets = 0.0;
    double mean_backlog_work = 0.0;  // seconds of transmission
    double growth_slope = 0.0;       // d(backlog work)/dt over the second half of the measured span
    double mean_sojourn = 0.0;       // arrival to end of transmission
    double final_backlog_work = 0.0;
    std::uint64_t arrivals = 0;
    std::uint64_t served = 0;
};

struct OnuReport {
    RunningStats inter_visit;
    RunningStats vacation;
    std::vector<std::uint64_t> vacation_histogram;
    std::uint64_t visits = 0;
};

struct SimReport {
    std::string policy;
    double horizon = 0.0;
    double warmup = 0.0;
    double window = 0.0;
    double vacation_bin = 0.0;
    std::vector<std::vector<QueueReport>> queues;  // [onu][queue]
    std::vector<OnuReport> onus;
    std::vector<double> overhead_series;  // one value per complete window after warmup
    double overhead_fraction = 0.0;       // time average over the measured span
    RunningStats overhead_per_visit;      // measured delta
    std::vector<double> sample_times;
    std::vector<std::vector<double>> backlog_work;  // [flat queue index][sample]
    std::uint64_t events = 0;
    std::vector<std::string> warnings;

    /// Total work-backlog slope over all queues.
    double total_growth_slope() const;
};

class SimError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Random or periodic polling. Throws SimError on invalid inputs and
/// std::logic_error when an audited invariant breaks.
SimReport run(const PonConfig& config, const TrafficSpec& traffic, const PollingPolicy& policy,
              const SimOptions& options);

/// Frame-based allocation: every frame, weighted max-min fair shares of
/// L f (1 - sum delta_i), capped at t_i f (1 - delta_i) per ONU, are granted
/// against the backlog reported at frame start. Queues keep a deficit credit
/// so that whole-packet service matches the allocation over time.
SimReport run_gpon_frame(const PonConfig& config, const TrafficSpec& traffic, const GponFramePolicy& policy,
                         const SimOptions& options);

struct AllocationDemand {
    int onu = 0;
    double demand = 0.0;  // seconds
    double weight = 1.0;
};

/// Weighted max-min fair split of `capacity` with per-ONU caps. Returns one
/// allocation per demand.
std::vector<double> max_min_allocate(const std::vector<AllocationDemand>& demands, const std::vector<double>& onu_caps,
                                     double capacity);

struct VacationSummary {
    std::uint64_t count = 0;
    double mean = 0.0;
    double cv = 0.0;  // approaches 1 for exponential vacations
};

struct VacationReport {
    std::vector<VacationSummary> per_onu;
    VacationSummary pooled;  // all vacation intervals of all ONUs together
};

VacationReport measure_vacations(const SimReport& report);

/// Least-squares slope of y over t.
double ls_slope(const std::vector<double>& t, const std::vector<double>& y, std::size_t first = 0);

/// Independent generator for one stochastic entity of a run.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t kind, std::uint64_t index);

/// Writes <prefix>_queues.csv, _cycles.csv, _vacations.csv, _overhead.csv and
/// _backlog.csv into `dir`; returns the paths written.
std::vector<std::filesystem::path> write_report_csv(const SimReport& report, const std::filesystem::path& dir,
                                                    const std::string& prefix);

}  // namespace wdmpon
