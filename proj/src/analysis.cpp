#include "wdmpon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace wdmpon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Conditions are strict; a margin within this relative band of zero is a tie.
constexpr double kTieTolerance = 1e-12;

Verdict judge(double margin, double scale) {
    const double band = kTieTolerance * std::max(1.0, std::abs(scale));
    if (margin < -band) return Verdict::Stable;
    if (margin > band) return Verdict::Saturated;
    return Verdict::Indeterminate;
}

StabilityReport empty_report(const PonConfig& config) {
    StabilityReport r;
    r.verdict.resize(config.onus.size());
    r.binding_margin.resize(config.onus.size());
    for (std::size_t i = 0; i < config.onus.size(); ++i) {
        r.verdict[i].assign(config.onus[i].queues.size(), Verdict::Stable);
        r.binding_margin[i].assign(config.onus[i].queues.size(), 0.0);
    }
    return r;
}

void require_valid(const PonConfig& config, const TrafficSpec& traffic) {
    const auto issues = validate(config, traffic);
    if (!issues.empty()) throw AnalysisError("invalid input: " + issues.front());
}

// rho_ij / d_ij, zero for unlimited grants.
double grant_pressure(double rho, double grant) { return std::isinf(grant) ? 0.0 : rho / grant; }

// Per-ONU and global capacity check shared by the server-limit and frame conditions.
StabilityReport two_level_report(const PonConfig& config, const TrafficSpec& traffic,
                                 const std::vector<double>& onu_capacity, double global_capacity) {
    auto r = empty_report(config);
    const double rho = total_load(traffic);
    r.global_margin = rho - global_capacity;
    const Verdict global = judge(r.global_margin, global_capacity);

    for (std::size_t i = 0; i < config.onus.size(); ++i) {
        const double margin_i = onu_load(traffic, static_cast<int>(i)) - onu_capacity[i];
        const Verdict local = judge(margin_i, onu_capacity[i]);
        for (std::size_t j = 0; j < config.onus[i].queues.size(); ++j) {
            const bool idle = traffic.per_queue[i][j].intensity() == 0.0;
            Verdict v = Verdict::Stable;
            if (!idle) {
                if (local == Verdict::Saturated || global == Verdict::Saturated)
                    v = Verdict::Saturated;
                else if (local == Verdict::Indeterminate || global == Verdict::Indeterminate)
                    v = Verdict::Indeterminate;
            }
            r.verdict[i][j] = v;
            r.binding_margin[i][j] = std::max(margin_i, r.global_margin);
            if (v == Verdict::Saturated) r.saturated_set.push_back({static_cast<int>(i), static_cast<int>(j)});
        }
    }
    return r;
}

}  // namespace

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "stable";
        case Verdict::Saturated: return "saturated";
        default: return "indeterminate";
    }
}

bool StabilityReport::all_stable() const {
    for (const auto& onu : verdict)
        for (Verdict v : onu)
            if (v != Verdict::Stable) return false;
    return true;
}

bool StabilityReport::any_saturated() const {
    for (const auto& onu : verdict)
        for (Verdict v : onu)
            if (v == Verdict::Saturated) return true;
    return false;
}

double equilibrium_overhead(std::span<const OnuLoad> onus, double theta) {
    double num = 0.0, den = 0.0, plain_num = 0.0, plain_den = 0.0;
    for (const auto& onu : onus) {
        if (std::isinf(onu.overhead)) continue;
        const double w = std::max(0.0, onu.transmitters - onu.load);
        plain_num += w * onu.overhead;
        plain_den += w;
        if (w == 0.0) continue;
        const double cycle = onu.overhead + theta;
        // A zero-overhead ONU with no vacation is visited infinitely often.
        if (cycle == 0.0) return 0.0;
        num += w * onu.overhead / cycle;
        den += w / cycle;
    }
    if (den > 0.0) return num / den;
    return plain_den > 0.0 ? plain_num / plain_den : 0.0;
}

MeanFieldSolution solve_theta(std::span<const OnuLoad> onus, int wavelengths, const SolverOptions& options) {
    // ONUs whose effective overhead is infinite hold their servers forever.
    std::vector<OnuLoad> active;
    double servers = wavelengths;
    double slots = 0.0, rho = 0.0;
    for (const auto& onu : onus) {
        if (std::isinf(onu.overhead)) {
            servers -= onu.transmitters;
            continue;
        }
        active.push_back(onu);
        slots += onu.transmitters;
        rho += onu.load;
    }
    if (rho >= servers) {
        std::ostringstream os;
        os << "offered load " << rho << " reaches the available wavelengths " << servers;
        throw NoSolution(os.str());
    }
    if (slots <= servers) {
        std::ostringstream os;
        os << "vacation is undefined with " << slots << " transmitter slots and " << servers << " wavelengths";
        throw RegimeError(os.str());
    }

    const double gain = (slots - servers) / (servers - rho);
    double lo = kInf, hi = 0.0;
    for (const auto& onu : active) {
        lo = std::min(lo, onu.overhead);
        hi = std::max(hi, onu.overhead);
    }

    MeanFieldSolution s;
    auto residual = [&](double theta) {
        const double g = theta - gain * equilibrium_overhead(active, theta);
        return std::abs(g) / std::max(std::abs(theta), std::numeric_limits<double>::min());
    };

    if (hi == 0.0) return s;
    if (lo == hi && options.allow_closed_form) {
        s.delta = lo;
        s.theta = gain * lo;
        s.residual = residual(s.theta);
        return s;
    }

    double theta = gain * lo;
    for (int k = 1; k <= options.max_iters; ++k) {
        const double next = gain * equilibrium_overhead(active, theta);
        s.iterations = k;
        const bool done = std::abs(next - theta) <= options.tolerance * std::abs(next);
        theta = next;
        if (done) {
            s.theta = theta;
            s.delta = equilibrium_overhead(active, theta);
            s.residual = residual(theta);
            return s;
        }
    }

    // g(0) <= 0 and g(gain * max Delta) >= 0 because delta never exceeds max Delta.
    double a = 0.0, b = gain * hi;
    s.bisection = true;
    while (b - a > options.tolerance * b) {
        const double mid = 0.5 * (a + b);
        if (mid - gain * equilibrium_overhead(active, mid) < 0.0)
            a = mid;
        else
            b = mid;
        ++s.iterations;
    }
    s.theta = 0.5 * (a + b);
    s.delta = equilibrium_overhead(active, s.theta);
    s.residual = residual(s.theta);
    return s;
}

MeanFieldSolution solve_mean_field(const PonConfig& config, const TrafficSpec& traffic,
                                   std::span<const double> extra_overhead, const SolverOptions& options) {
    require_valid(config, traffic);
    if (!extra_overhead.empty() && extra_overhead.size() != config.onus.size())
        throw AnalysisError("extra overhead needs one entry per ONU");
    std::vector<OnuLoad> onus;
    onus.reserve(config.onus.size());
    for (std::size_t i = 0; i < config.onus.size(); ++i) {
        const double extra = extra_overhead.empty() ? 0.0 : extra_overhead[i];
        onus.push_back({config.onus[i].switch_overhead + extra, onu_load(traffic, static_cast<int>(i)),
                        config.onus[i].transmitters});
    }
    return solve_theta(onus, config.n_wavelengths, options);
}

StabilityReport classical_stability(const PonConfig& config, const TrafficSpec& traffic) {
    require_valid(config, traffic);
    const int L = config.n_wavelengths;
    for (std::size_t i = 0; i < config.onus.size(); ++i)
        if (config.onus[i].transmitters != L)
            throw RegimeError("classical stability needs t_i = L at every ONU (ONU " + std::to_string(i) + ")");

    auto r = empty_report(config);
    double overhead = 0.0;
    for (const auto& onu : config.onus) overhead += onu.switch_overhead;
    double rho = total_load(traffic);

    std::vector<std::vector<bool>> saturated(config.onus.size());
    for (std::size_t i = 0; i < config.onus.size(); ++i) saturated[i].assign(config.onus[i].queues.size(), false);

    auto margin_of = [&](std::size_t i, std::size_t j) {
        const double pressure = grant_pressure(traffic.per_queue[i][j].intensity(), config.onus[i].queues[j].grant_limit);
        return rho + (pressure > 0.0 ? pressure * overhead : 0.0) - L;
    };

    for (;;) {
        // Every violator shares rho, so the largest rho_ij/d_ij is the largest margin.
        double worst = 0.0;
        std::optional<QueueId> pick;
        for (std::size_t i = 0; i < config.onus.size(); ++i)
            for (std::size_t j = 0; j < config.onus[i].queues.size(); ++j) {
                if (saturated[i][j]) continue;
                const double m = margin_of(i, j);
                if (judge(m, L) == Verdict::Saturated && (!pick || m > worst)) {
                    worst = m;
                    pick = QueueId{static_cast<int>(i), static_cast<int>(j)};
                }
            }
        if (!pick) break;
        const auto [i, j] = *pick;
        saturated[i][j] = true;
        r.binding_margin[i][j] = worst;
        r.verdict[i][j] = Verdict::Saturated;
        r.saturated_set.push_back(*pick);
        rho -= traffic.per_queue[i][j].intensity();
        overhead += config.onus[i].queues[j].grant_limit;
    }

    for (std::size_t i = 0; i < config.onus.size(); ++i)
        for (std::size_t j = 0; j < config.onus[i].queues.size(); ++j) {
            if (saturated[i][j]) continue;
            r.binding_margin[i][j] = margin_of(i, j);
            r.verdict[i][j] = judge(r.binding_margin[i][j], L);
        }
    r.global_margin = rho - L;
    return r;
}

double mean_cycle_time(const PonConfig& config, const TrafficSpec& traffic) {
    require_valid(config, traffic);
    const double rho = total_load(traffic);
    if (rho >= config.n_wavelengths) throw NoSolution("no stationary cycle: offered load reaches the wavelength count");
    double overhead = 0.0;
    for (const auto& onu : config.onus) overhead += onu.switch_overhead;
    return overhead / (config.n_wavelengths - rho);
}

StabilityReport server_limit_stability(const PonConfig& config, const TrafficSpec& traffic) {
    require_valid(config, traffic);
    std::vector<double> caps;
    for (const auto& onu : config.onus) caps.push_back(onu.transmitters);
    return two_level_report(config, traffic, caps, config.n_wavelengths);
}

StabilityReport mean_field_stability(const PonConfig& config, const TrafficSpec& traffic,
                                     const MeanFieldOptions& options) {
    require_valid(config, traffic);
    const std::size_t n = config.onus.size();
    auto r = empty_report(config);

    std::vector<OnuLoad> onus(n);
    double rho = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        onus[i] = {config.onus[i].switch_overhead, onu_load(traffic, static_cast<int>(i)), config.onus[i].transmitters};
        rho += onus[i].load;
    }
    std::vector<std::vector<bool>> saturated(n);
    for (std::size_t i = 0; i < n; ++i) saturated[i].assign(config.onus[i].queues.size(), false);

    auto pressure = [&](std::size_t i, std::size_t j) {
        return grant_pressure(traffic.per_queue[i][j].intensity(), config.onus[i].queues[j].grant_limit);
    };
    // Per-queue condition with the right-hand side generalized to t_i.
    auto margin_of = [&](std::size_t i, std::size_t j, double theta) {
        const double p = pressure(i, j);
        const double term = p > 0.0 ? p * (onus[i].overhead + theta) : 0.0;
        return onus[i].load + term - onus[i].transmitters;
    };
    auto order_key = [&](std::size_t i, std::size_t j, double theta) {
        const double p = pressure(i, j);
        if (options.order == SaturationOrder::OverheadPlusTheta && std::isfinite(theta))
            return p * (onus[i].overhead + theta);
        if (std::isinf(theta)) return p;
        return p * onus[i].overhead;
    };
    auto saturate = [&](std::size_t i, std::size_t j, double margin) {
        const double load = traffic.per_queue[i][j].intensity();
        saturated[i][j] = true;
        r.verdict[i][j] = Verdict::Saturated;
        r.binding_margin[i][j] = margin;
        r.saturated_set.push_back({static_cast<int>(i), static_cast<int>(j)});
        onus[i].overhead += config.onus[i].queues[j].grant_limit;
        onus[i].load -= load;
        rho -= load;
    };

    double theta = 0.0;
    r.mean_field.reset();
    for (;;) {
        // An ONU offered at least t_i cannot keep all of its queues.
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (judge(onus[i].load - onus[i].transmitters, onus[i].transmitters) == Verdict::Stable) continue;
                std::optional<std::size_t> best;
                for (std::size_t j = 0; j < saturated[i].size(); ++j) {
                    if (saturated[i][j] || traffic.per_queue[i][j].intensity() == 0.0) continue;
                    if (!best || order_key(i, j, 0.0) > order_key(i, *best, 0.0) ||
                        (order_key(i, j, 0.0) == order_key(i, *best, 0.0) &&
                         traffic.per_queue[i][j].intensity() > traffic.per_queue[i][*best].intensity()))
                        best = j;
                }
                if (!best) continue;
                if (judge(margin_of(i, *best, 0.0), onus[i].transmitters) != Verdict::Saturated) continue;
                saturate(i, *best, margin_of(i, *best, 0.0));
                changed = true;
            }
        }

        try {
            const auto sol = solve_theta(onus, config.n_wavelengths, options.solver);
            theta = sol.theta;
            r.mean_field = sol;
        } catch (const RegimeError&) {
            // Every transmitter slot always holds a server: no vacations.
            theta = 0.0;
            r.mean_field = MeanFieldSolution{};
        } catch (const NoSolution&) {
            // Vacations grow without bound as rho approaches L.
            theta = kInf;
            r.mean_field.reset();
        }

        std::optional<QueueId> candidate, worst;
        double best_key = -1.0, worst_margin = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < saturated[i].size(); ++j) {
                if (saturated[i][j]) continue;
                const double m = margin_of(i, j, theta);
                if (traffic.per_queue[i][j].intensity() > 0.0) {
                    const double key = order_key(i, j, theta);
                    if (key > best_key) {
                        best_key = key;
                        candidate = QueueId{static_cast<int>(i), static_cast<int>(j)};
                    }
                }
                if (judge(m, onus[i].transmitters) == Verdict::Saturated && (!worst || m > worst_margin)) {
                    worst_margin = m;
                    worst = QueueId{static_cast<int>(i), static_cast<int>(j)};
                }
            }

        if (!worst) break;
        // The argmax ordering decides whenever its pick violates; otherwise
        // fall back to the worst remaining violator.
        QueueId pick = *worst;
        if (candidate) {
            const auto [ci, cj] = *candidate;
            const double cm = margin_of(ci, cj, theta);
            if (judge(cm, onus[ci].transmitters) == Verdict::Saturated) pick = *candidate;
        }
        saturate(pick.onu, pick.queue, margin_of(pick.onu, pick.queue, theta));
    }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < saturated[i].size(); ++j) {
            if (saturated[i][j]) continue;
            r.binding_margin[i][j] = margin_of(i, j, theta);
            r.verdict[i][j] = judge(r.binding_margin[i][j], onus[i].transmitters);
        }
    r.global_margin = rho - config.n_wavelengths;
    return r;
}

StabilityReport uniform_overhead_stability(const PonConfig& config, const TrafficSpec& traffic) {
    require_valid(config, traffic);
    const double overhead = config.onus.front().switch_overhead;
    for (const auto& onu : config.onus)
        if (std::abs(onu.switch_overhead - overhead) > kTieTolerance * std::max(overhead, 1e-300))
            throw RegimeError("uniform overhead check needs equal switch overheads at every ONU");

    auto r = empty_report(config);
    const double L = config.n_wavelengths;
    const double slots = config.total_transmitters();
    const double rho = total_load(traffic);
    r.global_margin = rho - L;
    const bool overloaded = judge(r.global_margin, L) != Verdict::Stable;

    for (std::size_t i = 0; i < config.onus.size(); ++i) {
        const double t = config.onus[i].transmitters;
        const double rho_i = onu_load(traffic, static_cast<int>(i));
        for (std::size_t j = 0; j < config.onus[i].queues.size(); ++j) {
            const double load = traffic.per_queue[i][j].intensity();
            if (load == 0.0) {
                r.binding_margin[i][j] = r.global_margin;
                continue;
            }
            const double p = grant_pressure(load, config.onus[i].queues[j].grant_limit);
            double margin;
            Verdict v;
            if (slots <= L) {
                // No vacations: each ONU always holds its servers.
                margin = rho_i + p * overhead - t;
                v = judge(margin, t);
                if (overloaded && v == Verdict::Stable) v = judge(r.global_margin, L);
            } else if (judge(rho_i - t, t) != Verdict::Stable) {
                margin = rho_i - t;
                v = Verdict::Saturated;
            } else if (overloaded) {
                margin = r.global_margin;
                v = judge(margin, L);
            } else {
                margin = rho + p * overhead * (slots - rho) / (t - rho_i) - L;
                v = judge(margin, L);
            }
            r.verdict[i][j] = v;
            r.binding_margin[i][j] = margin;
            if (v == Verdict::Saturated) r.saturated_set.push_back({static_cast<int>(i), static_cast<int>(j)});
        }
    }
    if (slots > L && !overloaded) {
        r.mean_field = MeanFieldSolution{(slots - L) * overhead / (L - rho), overhead, 0, 0.0, false};
    }
    return r;
}

StabilityReport gpon_frame_stability(const PonConfig& config, const TrafficSpec& traffic,
                                     std::span<const double> delta_ratios) {
    require_valid(config, traffic);
    if (delta_ratios.size() != config.onus.size())
        throw AnalysisError("frame stability needs one overhead ratio per ONU");
    double sum = 0.0;
    for (double d : delta_ratios) {
        if (!(d >= 0.0)) throw AnalysisError("overhead ratios must be nonnegative");
        sum += d;
    }
    if (sum >= 1.0) throw RegimeError("overhead ratios sum to at least 1; no frame capacity remains");

    std::vector<double> caps;
    for (std::size_t i = 0; i < config.onus.size(); ++i)
        caps.push_back(config.onus[i].transmitters * (1.0 - delta_ratios[i]));
    return two_level_report(config, traffic, caps, config.n_wavelengths * (1.0 - sum));
}

}  // namespace wdmpon
