#pragma once

// Analytical capacity results for multiserver limited-gated polling:
// classical stability with no server limits, mean cycle time, server-limit
// stability for unlimited gated service, the mean-field vacation fixed point
// and the greedy saturated-set procedure built on it, plus the frame-based
// GPON conditions.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wdmpon/model.hpp"

namespace wdmpon {

class AnalysisError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Offered load reaches or exceeds the wavelength count; no equilibrium.
class NoSolution : public AnalysisError {
   public:
    using AnalysisError::AnalysisError;
};

/// Inputs fall outside the regime an operation is defined for.
class RegimeError : public AnalysisError {
   public:
    using AnalysisError::AnalysisError;
};

enum class Verdict { Stable, Saturated, Indeterminate };

const char* to_string(Verdict v);

struct MeanFieldSolution {
    double theta = 0.0;  // mean vacation, seconds
    double delta = 0.0;  // equilibrium mean switchover, seconds
    int iterations = 0;
    double residual = 0.0;  // |theta - (T-L) delta(theta) / (L-rho)| / max(theta, tiny)
    bool bisection = false;
};

struct StabilityReport {
    std::vector<std::vector<Verdict>> verdict;         // [onu][queue]
    std::vector<QueueId> saturated_set;                // in the order queues were saturated
    std::optional<MeanFieldSolution> mean_field;       // final round, when applicable
    std::vector<std::vector<double>> binding_margin;   // lhs - rhs of the governing inequality
    double global_margin = 0.0;                        // rho - capacity, where a global condition applies

    bool all_stable() const;
    bool any_saturated() const;
    Verdict at(QueueId q) const { return verdict[q.onu][q.queue]; }
};

struct SolverOptions {
    double tolerance = 1e-10;
    int max_iters = 10'000;
    bool allow_closed_form = true;  // equal overheads short-circuit the iteration
};

/// Per-ONU inputs of the vacation fixed point.
struct OnuLoad {
    double overhead = 0.0;  // effective Delta_i (plus any saturated grants)
    double load = 0.0;      // rho_i of the queues still competing
    int transmitters = 1;
};

/// Solves theta = (T - L) delta(theta) / (L - rho) with
/// delta(theta) = sum w_i Delta_i / (Delta_i + theta) / sum w_i / (Delta_i + theta),
/// w_i = t_i - rho_i and T = sum t_i (T = N for single transmitters).
/// Throws NoSolution when rho >= L and RegimeError when T <= L.
MeanFieldSolution solve_theta(std::span<const OnuLoad> onus, int wavelengths, const SolverOptions& options = {});

/// The overhead average delta(theta) for a given vacation.
double equilibrium_overhead(std::span<const OnuLoad> onus, double theta);

/// solve_theta on a config; `extra_overhead` (seconds, one per ONU or empty)
/// is added to each Delta_i.
MeanFieldSolution solve_mean_field(const PonConfig& config, const TrafficSpec& traffic,
                                   std::span<const double> extra_overhead = {}, const SolverOptions& options = {});

/// No server limits (t_i = L): rho + rho_ij/d_ij * sum Delta_k < L, relaxed
/// greedily by saturating the queue with the largest rho_ij/d_ij.
StabilityReport classical_stability(const PonConfig& config, const TrafficSpec& traffic);

/// Mean time between visits to an ONU: sum Delta / (L - rho).
double mean_cycle_time(const PonConfig& config, const TrafficSpec& traffic);

/// Unlimited gated service with server limits: rho_i < t_i and rho < L.
StabilityReport server_limit_stability(const PonConfig& config, const TrafficSpec& traffic);

enum class SaturationOrder {
    Overhead,          // argmax rho_ij/d_ij * Delta_i
    OverheadPlusTheta  // argmax rho_ij/d_ij * (Delta_i + theta)
};

struct MeanFieldOptions {
    SolverOptions solver{};
    SaturationOrder order = SaturationOrder::Overhead;
};

/// Mean-field stability with the greedy saturated-set search. Each round
/// re-solves theta with saturated grants folded into the ONU overhead.
StabilityReport mean_field_stability(const PonConfig& config, const TrafficSpec& traffic,
                                     const MeanFieldOptions& options = {});

/// Closed-form check for equal overheads:
/// rho + max rho_ij/d_ij * delta (T - rho) / (t_i - rho_i) < L.
/// Throws RegimeError when the Delta_i differ.
StabilityReport uniform_overhead_stability(const PonConfig& config, const TrafficSpec& traffic);

/// Frame-based allocation: rho < L (1 - sum delta_i) and rho_i < t_i (1 - delta_i).
/// Throws RegimeError when the ratios sum to 1 or more.
StabilityReport gpon_frame_stability(const PonConfig& config, const TrafficSpec& traffic,
                                     std::span<const double> delta_ratios);

}  // namespace wdmpon
