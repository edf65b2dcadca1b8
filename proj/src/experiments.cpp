#include "wdmpon/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <thread>

namespace wdmpon {

int RegionTemplate::n_classes() const {
    int k = 0;
    for (const auto& onu : queue_class)
        for (int c : onu) k = std::max(k, c + 1);
    return k;
}

RegionTemplate two_class_template(int n_onus, int n_wavelengths, int class0_onus, double switch_overhead,
                                  double grant_limit, PacketLaw packet) {
    RegionTemplate t;
    t.config = uniform_config(n_onus, n_wavelengths, switch_overhead, grant_limit);
    t.packet = packet;
    for (int i = 0; i < n_onus; ++i) t.queue_class.push_back({i < class0_onus ? 0 : 1});
    return t;
}

RegionTemplate template_from(const Scenario& scenario) {
    RegionTemplate t;
    t.config = scenario.config;
    t.queue_class = scenario.queue_class;
    t.packet = scenario.traffic.per_queue.at(0).at(0).packet;
    t.policy = scenario.policy;
    return t;
}

TrafficSpec traffic_at(const RegionTemplate& tmpl, std::span<const double> direction, double scale) {
    if (static_cast<int>(direction.size()) < tmpl.n_classes())
        throw ExperimentError("direction needs one entry per load class");
    TrafficSpec t;
    t.per_queue.resize(tmpl.config.onus.size());
    for (std::size_t i = 0; i < tmpl.config.onus.size(); ++i)
        for (std::size_t j = 0; j < tmpl.config.onus[i].queues.size(); ++j) {
            const auto c = static_cast<std::size_t>(tmpl.queue_class[i][j]);
            const double base = c < tmpl.base_load.size() ? tmpl.base_load[c] : 0.0;
            t.per_queue[i].push_back(QueueTraffic::from_intensity(base + scale * direction[c], tmpl.packet));
        }
    return t;
}

std::vector<std::vector<bool>> watched_queues(const RegionTemplate& tmpl, std::span<const int> classes) {
    std::vector<std::vector<bool>> out(tmpl.queue_class.size());
    for (std::size_t i = 0; i < tmpl.queue_class.size(); ++i)
        for (int c : tmpl.queue_class[i])
            out[i].push_back(classes.empty() || std::find(classes.begin(), classes.end(), c) != classes.end());
    return out;
}

bool backlog_growing(const SimReport& report, const std::vector<std::vector<bool>>& watched, double rel_threshold) {
    double slope = 0.0, load = 0.0;
    for (std::size_t i = 0; i < report.queues.size(); ++i)
        for (std::size_t j = 0; j < report.queues[i].size(); ++j) {
            if (!watched[i][j]) continue;
            const auto& q = report.queues[i][j];
            if (q.offered_load > 0.0 && q.growth_slope > rel_threshold * q.offered_load) return true;
            slope += q.growth_slope;
            load += q.offered_load;
        }
    return load > 0.0 && slope > rel_threshold * load;
}

bool analytic_unstable(const RegionTemplate& tmpl, const TrafficSpec& traffic,
                       const std::vector<std::vector<bool>>& watched) {
    StabilityReport r;
    if (const auto* frame = std::get_if<GponFramePolicy>(&tmpl.policy))
        r = gpon_frame_stability(tmpl.config, traffic, frame->overhead_ratios);
    else
        r = mean_field_stability(tmpl.config, traffic);
    for (std::size_t i = 0; i < r.verdict.size(); ++i)
        for (std::size_t j = 0; j < r.verdict[i].size(); ++j)
            if (watched[i][j] && r.verdict[i][j] != Verdict::Stable) return true;
    return false;
}

double no_overhead_bound(const RegionTemplate& tmpl, std::span<const double> direction, std::span<const int> watched) {
    const auto w = watched_queues(tmpl, watched);
    const auto* frame = std::get_if<GponFramePolicy>(&tmpl.policy);
    const TrafficSpec base = traffic_at(tmpl, direction, 0.0);
    const TrafficSpec unit = traffic_at(tmpl, direction, 1.0);

    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tmpl.config.onus.size(); ++i) {
        bool any = false;
        for (bool b : w[i]) any = any || b;
        if (!any) continue;
        const double b0 = onu_load(base, static_cast<int>(i));
        const double slope = onu_load(unit, static_cast<int>(i)) - b0;
        if (slope <= 0.0) continue;
        const double cap = tmpl.config.onus[i].transmitters * (1.0 - (frame ? frame->overhead_ratios[i] : 0.0));
        bound = std::min(bound, (cap - b0) / slope);
    }
    if (watched.empty()) {
        double sum = 0.0;
        if (frame)
            for (double r : frame->overhead_ratios) sum += r;
        const double cap = tmpl.config.n_wavelengths * (1.0 - sum);
        const double b0 = total_load(base);
        const double slope = total_load(unit) - b0;
        if (slope > 0.0) bound = std::min(bound, (cap - b0) / slope);
    }
    if (!std::isfinite(bound) || bound <= 0.0) throw ExperimentError("direction does not load any watched queue");
    return bound;
}

bool simulate_unstable(const RegionTemplate& tmpl, std::span<const double> direction, double scale,
                       const ProbeOptions& options, int* runs) {
    if (options.seeds.empty()) throw ExperimentError("need at least one seed");
    const auto traffic = traffic_at(tmpl, direction, scale);
    const auto watched = watched_queues(tmpl, options.watched_classes);
    const std::size_t need = options.seeds.size() / 2 + 1;
    std::size_t unstable = 0, stable = 0;
    for (auto seed : options.seeds) {
        SimOptions so;
        so.horizon = options.horizon;
        so.warmup = options.horizon * options.warmup_fraction;
        so.seed = seed;
        so.window = std::min(1e-3, options.horizon / 10);
        so.backlog_samples = 200;
        so.runaway_backlog = std::numeric_limits<double>::infinity();
        const auto report = run(tmpl.config, traffic, tmpl.policy, so);
        if (runs) ++*runs;
        if (backlog_growing(report, watched, options.slope_threshold))
            ++unstable;
        else
            ++stable;
        if (unstable >= need || stable >= need) break;
    }
    return unstable > stable;
}

RayProbe probe_boundary_sim(const RegionTemplate& tmpl, std::span<const double> direction,
                            const ProbeOptions& options) {
    if (std::none_of(direction.begin(), direction.end(), [](double d) { return d > 0.0; }))
        throw ExperimentError("direction needs at least one positive entry");
    RayProbe p;
    p.direction.assign(direction.begin(), direction.end());
    p.seeds = options.seeds;

    const double ceiling = no_overhead_bound(tmpl, direction, options.watched_classes);
    const double resolution = options.resolution > 0.0 ? options.resolution : 0.01 * ceiling;

    double lo = 0.0, hi = ceiling * 1.02;
    if (options.bracket) {
        lo = options.bracket->first;
        hi = options.bracket->second;
        if (lo > 0.0 && simulate_unstable(tmpl, direction, lo, options, &p.simulations))
            throw ExperimentError("lower end of the initial bracket is not stable");
    }
    int expansions = 0;
    while (!simulate_unstable(tmpl, direction, hi, options, &p.simulations)) {
        lo = hi;
        hi *= 1.25;
        if (++expansions > 4) throw ExperimentError("no unstable scale found along this ray");
    }

    while (hi - lo > resolution) {
        const double mid = 0.5 * (lo + hi);
        if (simulate_unstable(tmpl, direction, mid, options, &p.simulations))
            hi = mid;
        else
            lo = mid;
        ++p.iterations;
    }
    p.stable_scale = lo;
    p.unstable_scale = hi;
    p.boundary_load = 0.5 * (lo + hi);
    return p;
}

std::vector<RayProbe> region_analytic(const RegionTemplate& tmpl, const std::vector<std::vector<double>>& directions,
                                      std::span<const int> watched_classes, double rel_tol) {
    const auto watched = watched_queues(tmpl, watched_classes);
    std::vector<RayProbe> out;
    for (const auto& dir : directions) {
        RayProbe p;
        p.direction = dir;
        auto unstable = [&](double scale) { return analytic_unstable(tmpl, traffic_at(tmpl, dir, scale), watched); };
        double lo = 0.0, hi = no_overhead_bound(tmpl, dir, watched_classes);
        if (unstable(lo)) throw ExperimentError("ray is unstable at zero scale");
        int guard = 0;
        while (!unstable(hi)) {
            lo = hi;
            hi *= 2.0;
            if (++guard > 60) throw ExperimentError("analytic boundary not found along this ray");
        }
        while (hi - lo > rel_tol * hi) {
            const double mid = 0.5 * (lo + hi);
            if (unstable(mid))
                hi = mid;
            else
                lo = mid;
            ++p.iterations;
        }
        p.stable_scale = lo;
        p.unstable_scale = hi;
        p.boundary_load = 0.5 * (lo + hi);
        out.push_back(std::move(p));
    }
    return out;
}

unsigned worker_count() {
    if (const char* env = std::getenv("WDMPON_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RayProbe> region_sim(const RegionTemplate& tmpl, const std::vector<std::vector<double>>& directions,
                                 const ProbeOptions& options) {
    std::vector<RayProbe> out(directions.size());
    std::vector<std::exception_ptr> errors(directions.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < directions.size(); k = next++) {
            try {
                out[k] = probe_boundary_sim(tmpl, directions[k], options);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const unsigned n = std::min<unsigned>(worker_count(), static_cast<unsigned>(directions.size()));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

bool ConvergenceSweep::strictly_decreasing() const {
    for (std::size_t k = 1; k < stddev.size(); ++k)
        if (!(stddev[k] < stddev[k - 1])) return false;
    return true;
}

ConvergenceSweep convergence_sweep(const std::vector<int>& n_list, double ratio, double load,
                                   const SweepOptions& options) {
    ConvergenceSweep out;
    out.window = options.window;
    out.load = load;
    out.ratio = ratio;
    for (int n : n_list) {
        const double l = ratio * n;
        if (std::abs(l - std::round(l)) > 1e-9 || l < 1.0)
            throw ExperimentError("L/N ratio " + std::to_string(ratio) + " gives a non-integer L for N=" + std::to_string(n));
        const auto cfg = uniform_config(n, static_cast<int>(std::lround(l)), options.switch_overhead, options.grant);
        const auto traffic = uniform_traffic(cfg, load, options.packet);
        double sd = 0.0, mean = 0.0;
        for (auto seed : options.seeds) {
            SimOptions so;
            so.horizon = options.horizon;
            so.warmup = options.warmup;
            so.seed = seed;
            so.window = options.window;
            so.backlog_samples = 50;
            const auto r = run(cfg, traffic, options.policy, so);
            RunningStats s;
            for (double v : r.overhead_series) s.add(v);
            sd += std::sqrt(s.variance());
            mean += r.overhead_fraction;
        }
        const auto k = static_cast<double>(options.seeds.size());
        out.n_onus.push_back(n);
        out.stddev.push_back(sd / k);
        out.mean_fraction.push_back(mean / k);
    }
    return out;
}

bool OverheadImpact::nested() const {
    for (std::size_t r = 1; r < regions.size(); ++r) {
        if (!(ratios[r] > ratios[r - 1])) return false;
        for (std::size_t k = 0; k < regions[r].size(); ++k)
            if (!(regions[r][k].boundary_load < regions[r - 1][k].boundary_load)) return false;
    }
    return true;
}

OverheadImpact overhead_impact(const RegionTemplate& tmpl, const std::vector<double>& ratios,
                               const std::vector<std::vector<double>>& directions) {
    OverheadImpact out;
    out.ratios = ratios;
    for (double ratio : ratios) {
        RegionTemplate t = tmpl;
        for (auto& onu : t.config.onus) onu.switch_overhead = ratio * onu.queues.front().grant_limit;
        out.regions.push_back(region_analytic(t, directions));
    }
    return out;
}

std::vector<ToyCheck> verify_toy_meanfield(const std::vector<int>& n_list, double s, double rho,
                                           const ToyCheckOptions& options) {
    if (!(rho < s)) throw ExperimentError("toy model needs rho < s (the stability premise)");
    if (!(s > 0.0 && s < 1.0)) throw ExperimentError("server fraction s must lie in (0, 1)");
    std::vector<std::uint64_t> seeds = options.seeds;
    if (seeds.empty())
        for (std::uint64_t k = 1; k <= 20; ++k) seeds.push_back(k);

    std::vector<ToyCheck> out;
    for (int n : n_list) {
        ToyCheck c;
        c.n_queues = n;
        c.n_servers = static_cast<int>(std::lround(s * n));
        const double lambda = rho * options.mu;
        c.drain_bound = options.start_level / (options.mu * c.n_servers / n - lambda);

        std::vector<std::uint64_t> pooled;
        for (auto seed : seeds) {
            ToyOptions o;
            o.n_queues = n;
            o.n_servers = c.n_servers;
            o.lambda = lambda;
            o.mu = options.mu;
            o.horizon = options.horizon;
            o.seed = seed;
            o.initial = GeometricStart{};
            const auto r = run_homogeneous(o);
            c.sup_deviation.push_back(r.sup_deviation(rho));
            if (c.sup_deviation.back() < options.sup_threshold) ++c.within;
            if (pooled.size() < r.marginal.size()) pooled.resize(r.marginal.size(), 0);
            for (std::size_t k = 0; k < r.marginal.size(); ++k) pooled[k] += r.marginal[k];

            o.initial = ExplicitStart{std::vector<int>(static_cast<std::size_t>(n), options.start_level)};
            o.horizon = options.drain_horizon;
            const auto d = run_homogeneous(o);
            c.drain_time.push_back(d.drain_time.value_or(std::numeric_limits<double>::infinity()));
        }
        c.tv = tv_distance_geometric(pooled, rho);
        c.pass_sup = c.within >= static_cast<int>(std::ceil(options.seed_fraction * static_cast<double>(seeds.size())));
        c.pass_tv = c.tv < options.tv_threshold;
        c.pass_drain = std::all_of(c.drain_time.begin(), c.drain_time.end(),
                                   [&](double t) { return t / n <= c.drain_bound; });
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace wdmpon
