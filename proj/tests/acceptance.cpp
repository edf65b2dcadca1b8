// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "wdmpon/analysis.hpp"
#include "wdmpon/experiments.hpp"
#include "wdmpon/sim.hpp"
#include "wdmpon/toy.hpp"

using namespace wdmpon;

namespace {

const PacketLaw kPacket = PacketLaw::deterministic(8e-6);
constexpr double kGrant = 8e-6;
constexpr double kOverhead = 1.2e-6;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

SimOptions sim_opts(double horizon, std::uint64_t seed) {
    SimOptions o;
    o.horizon = horizon;
    o.warmup = 0.1 * horizon;
    o.seed = seed;
    o.runaway_backlog = std::numeric_limits<double>::infinity();
    return o;
}

double onu_mean_inter_visit(const SimReport& r) {
    RunningStats per_onu;
    for (const auto& o : r.onus) per_onu.add(o.inter_visit.mean);
    return per_onu.mean;
}

std::vector<std::vector<bool>> every_queue(const PonConfig& cfg) {
    std::vector<std::vector<bool>> w;
    for (const auto& onu : cfg.onus) w.emplace_back(onu.queues.size(), true);
    return w;
}

// ---- 1 ---------------------------------------------------------------------

Outcome balanced_boundary() {
    const auto t = two_class_template(20, 10, 10, kOverhead, kGrant, kPacket);
    const std::vector<double> ray{1, 1};
    const double analytic = region_analytic(t, {ray})[0].boundary_load;
    ProbeOptions po;
    po.horizon = 8.0;  // 10^6 grant times
    const auto p = probe_boundary_sim(t, ray, po);
    const double gap = rel(p.boundary_load, 10.0 / 23.0);
    Outcome o;
    o.pass = rel(analytic, 10.0 / 23.0) < 1e-9 && gap <= 0.05;
    o.detail = "analytic " + fmt("%.6f", analytic) + ", simulated " + fmt("%.5f", p.boundary_load) + " (gap " +
               fmt("%.2f%%", 100 * gap) + ", " + std::to_string(p.simulations) + " runs)";
    return o;
}

// ---- 2 ---------------------------------------------------------------------

Outcome unbalanced_region() {
    const auto t = two_class_template(20, 10, 5, kOverhead, kGrant, kPacket);
    const std::vector<std::vector<double>> rays{{1, 0}, {3, 1}, {1, 1}, {1, 3}, {0, 1}};
    const auto analytic = region_analytic(t, rays);
    ProbeOptions po;
    po.horizon = 2.0;
    const auto sim = region_sim(t, rays, po);
    double worst = 0.0;
    for (std::size_t k = 0; k < rays.size(); ++k) worst = std::max(worst, rel(sim[k].boundary_load, analytic[k].boundary_load));
    return {worst <= 0.05, std::to_string(rays.size()) + " rays, worst gap " + fmt("%.2f%%", 100 * worst)};
}

// ---- 3 ---------------------------------------------------------------------

Outcome overhead_fluctuations() {
    SweepOptions so;
    so.horizon = 0.11;
    so.warmup = 0.01;
    const auto s = convergence_sweep({10, 50, 100, 500}, 0.5, 0.2, so);
    bool means = true;
    std::ostringstream d;
    d << "stddev";
    for (std::size_t k = 0; k < s.n_onus.size(); ++k) {
        means = means && std::abs(s.mean_fraction[k] - 0.6) <= 0.02;
        d << ' ' << s.n_onus[k] << ':' << fmt("%.4f", s.stddev[k]);
    }
    d << "; means";
    for (double m : s.mean_fraction) d << ' ' << fmt("%.4f", m);
    const double ratio = s.stddev.front() / s.stddev.back();
    d << "; N=10/N=500 ratio " << fmt("%.1f", ratio);
    return {s.strictly_decreasing() && means && ratio > 3.0, d.str()};
}

// ---- 4 ---------------------------------------------------------------------

Outcome cycle_time() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    int configs = 0;
    while (configs < 10) {
        const int n = 50 + static_cast<int>(u(rng) * 70);
        const int l = 2 + static_cast<int>(u(rng) * 7);
        auto cfg = uniform_config(n, l, kOverhead, kGrant, l);
        TrafficSpec tr;
        for (auto& onu : cfg.onus) {
            onu.switch_overhead = (0.5 + 2.5 * u(rng)) * 1e-6;
            onu.queues[0].grant_limit = (4 + 12 * u(rng)) * 1e-6;
            tr.per_queue.push_back({QueueTraffic::from_intensity(u(rng), PacketLaw::exponential(4e-6))});
        }
        // aim the total between 30% and 70% of the classical limit
        const double target = (0.3 + 0.4 * u(rng)) * l;
        tr = scaled(tr, target / total_load(tr));
        if (!classical_stability(cfg, tr).all_stable()) continue;
        ++configs;
        const double c = mean_cycle_time(cfg, tr);
        const auto r = run(cfg, tr, RandomPolling{}, sim_opts(0.2, static_cast<std::uint64_t>(configs)));
        worst = std::max(worst, rel(onu_mean_inter_visit(r), c));
    }
    return {worst <= 0.02, "10 configurations, worst deviation from sum(Delta)/(L - rho) " + fmt("%.2f%%", 100 * worst)};
}

// ---- 5 ---------------------------------------------------------------------

Outcome vacation_mean() {
    auto equal = uniform_config(100, 50, kOverhead, kGrant);
    auto unequal = equal;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.5e-6, 4e-6);
    for (auto& onu : unequal.onus) onu.switch_overhead = u(rng);

    std::ostringstream d;
    bool pass = true;
    for (const auto* cfg : {&equal, &unequal}) {
        const auto tr = uniform_traffic(*cfg, 0.2, kPacket);
        const double theta = solve_mean_field(*cfg, tr).theta;
        const auto r = run(*cfg, tr, RandomPolling{}, sim_opts(0.2, 11));
        const double v = measure_vacations(r).pooled.mean;
        pass = pass && rel(v, theta) <= 0.05;
        d << (cfg == &equal ? "equal" : "; unequal") << " theta " << fmt("%.4g", theta) << " sim " << fmt("%.4g", v)
          << " (" << fmt("%.2f%%", 100 * rel(v, theta)) << ")";
    }
    return {pass, d.str()};
}

// ---- 6 ---------------------------------------------------------------------

Outcome server_limits() {
    const double inf = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(66);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checks = 0, failures = 0;
    double worst_stable = 0.0, weakest_growth = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 4; ++trial) {
        const int n = 10 + static_cast<int>(u(rng) * 15);
        const int l = 4 + static_cast<int>(u(rng) * 4);
        auto cfg = uniform_config(n, l, kOverhead, inf);
        for (auto& onu : cfg.onus) {
            onu.transmitters = 1 + static_cast<int>(u(rng) * 3);
            onu.switch_overhead = (0.5 + 2 * u(rng)) * 1e-6;
        }
        const auto law = PacketLaw::exponential(8e-6);
        auto build = [&](const std::vector<double>& onu_loads) {
            TrafficSpec t;
            for (double x : onu_loads) t.per_queue.push_back({QueueTraffic::from_intensity(x, law)});
            return t;
        };
        const auto seed = static_cast<std::uint64_t>(100 + trial);

        // (a) 95% of the binding constraint along a random direction
        std::vector<double> shape(static_cast<std::size_t>(n));
        for (auto& s : shape) s = 0.2 + u(rng);
        double scale = l / std::accumulate(shape.begin(), shape.end(), 0.0);
        for (int i = 0; i < n; ++i)
            scale = std::min(scale, cfg.onus[static_cast<std::size_t>(i)].transmitters / shape[static_cast<std::size_t>(i)]);
        std::vector<double> loads(shape);
        for (auto& x : loads) x *= 0.95 * scale;
        {
            const auto r = run(cfg, build(loads), RandomPolling{}, sim_opts(1.0, seed));
            double slope = 0.0;
            for (const auto& q : r.queues) slope = std::max(slope, q[0].growth_slope / q[0].offered_load);
            worst_stable = std::max(worst_stable, slope);
            ++checks;
            if (backlog_growing(r, every_queue(cfg), 0.01)) ++failures;
        }

        // (b) one ONU at 105% of its transmitters, total well below L
        {
            std::vector<double> one(static_cast<std::size_t>(n), 0.0);
            const int k = static_cast<int>(u(rng) * n);
            const double tk = cfg.onus[static_cast<std::size_t>(k)].transmitters;
            const double rest = std::min(0.5 * (l - 1.05 * tk), 0.5 * n) / (n - 1);
            for (int i = 0; i < n; ++i) one[static_cast<std::size_t>(i)] = i == k ? 1.05 * tk : std::max(0.0, rest);
            const auto r = run(cfg, build(one), RandomPolling{}, sim_opts(1.0, seed));
            const auto& q = r.queues[static_cast<std::size_t>(k)][0];
            const double g = q.growth_slope / (0.05 * tk);
            weakest_growth = std::min(weakest_growth, g);
            ++checks;
            if (!(q.growth_slope > 0.01 * q.offered_load)) ++failures;
        }

        // (c) total at 105% of L, every ONU below 95% of its transmitters
        {
            std::vector<double> cap(static_cast<std::size_t>(n));
            double room = 0.0;
            for (int i = 0; i < n; ++i) room += cap[static_cast<std::size_t>(i)] = 0.9 * cfg.onus[static_cast<std::size_t>(i)].transmitters;
            if (room < 1.05 * l) continue;  // cannot overload L without also breaking an ONU limit
            std::vector<double> all(cap);
            for (auto& x : all) x *= 1.05 * l / room;
            const auto r = run(cfg, build(all), RandomPolling{}, sim_opts(1.0, seed));
            const double g = r.total_growth_slope() / (0.05 * l);
            weakest_growth = std::min(weakest_growth, g);
            ++checks;
            if (!(r.total_growth_slope() > 0.01 * total_load(build(all)))) ++failures;
        }
    }
    return {failures == 0, std::to_string(checks) + " runs, " + std::to_string(failures) + " wrong; worst relative slope at 95% " +
                               fmt("%.4f", worst_stable) + ", weakest growth at 105% " + fmt("%.2f", weakest_growth) +
                               " of the excess"};
}

// ---- 7 ---------------------------------------------------------------------

Outcome local_stability() {
    auto t = two_class_template(20, 10, 5, kOverhead, kGrant, kPacket);
    t.base_load = {0.9, 0.0};
    const std::vector<int> second{1};
    const std::vector<double> ray{0, 1};
    const auto analytic = region_analytic(t, {ray}, second)[0];

    // the overloaded class must be what the analysis saturates
    const auto report = mean_field_stability(t.config, traffic_at(t, ray, 0.5 * analytic.boundary_load));
    bool class1_saturated = true;
    for (int i = 0; i < 5; ++i) class1_saturated = class1_saturated && report.verdict[static_cast<std::size_t>(i)][0] == Verdict::Saturated;

    ProbeOptions po;
    po.horizon = 2.0;
    po.watched_classes = second;
    po.resolution = 0.005 * analytic.boundary_load;
    const auto sim = probe_boundary_sim(t, ray, po);
    const double gap = rel(sim.boundary_load, analytic.boundary_load);
    return {class1_saturated && gap <= 0.05, "class 1 at 0.9 saturated: " + std::string(class1_saturated ? "yes" : "no") +
                                                 "; class-2 boundary analytic " + fmt("%.5f", analytic.boundary_load) +
                                                 ", simulated " + fmt("%.5f", sim.boundary_load) + " (gap " +
                                                 fmt("%.2f%%", 100 * gap) + ")"};
}

// ---- 8 ---------------------------------------------------------------------

Outcome frame_mode() {
    std::ostringstream d;
    bool pass = true;
    auto check = [&](const RegionTemplate& t, const std::vector<double>& ray, std::vector<int> watched, const char* label) {
        const auto analytic = region_analytic(t, {ray}, watched)[0].boundary_load;
        ProbeOptions po;
        po.horizon = 1.0;
        po.watched_classes = watched;
        const bool below = simulate_unstable(t, ray, 0.95 * analytic, po);
        const bool above = simulate_unstable(t, ray, 1.05 * analytic, po);
        const auto sim = probe_boundary_sim(t, ray, po);
        const double gap = rel(sim.boundary_load, analytic);
        pass = pass && !below && above && gap <= 0.05;
        d << label << ": bound " << fmt("%.4f", analytic) << ", stable at 95% " << (below ? "no" : "yes")
          << ", unstable at 105% " << (above ? "yes" : "no") << ", transition " << fmt("%.4f", sim.boundary_load);
    };

    // global: L (1 - sum delta) = 25 * 0.8 = 20 over 100 ONUs
    auto global = two_class_template(100, 25, 100, 0.0, kGrant, kPacket);
    global.policy = GponFramePolicy{125e-6, std::vector<double>(100, 0.002)};
    check(global, {1}, {}, "global");

    // per ONU: one tagged ONU, the others at 0.1 on ample wavelengths
    auto single = two_class_template(100, 100, 1, 0.0, kGrant, kPacket);
    std::vector<double> ratios(100, 0.001);
    ratios[0] = 0.05;
    single.policy = GponFramePolicy{125e-6, ratios};
    single.base_load = {0.0, 0.1};
    d << "; ";
    check(single, {1, 0}, {0}, "per-ONU");
    return {pass, d.str()};
}

// ---- 9 ---------------------------------------------------------------------

Outcome toy_model() {
    const auto c = verify_toy_meanfield({1000}, 0.5, 0.3)[0];
    double worst = 0.0;
    for (double t : c.drain_time) worst = std::max(worst, t / c.n_queues);
    std::ostringstream d;
    d << "(a) " << c.within << "/" << c.sup_deviation.size() << " seeds within 0.05; (b) TV " << fmt("%.4f", c.tv)
      << "; (c) worst T_N/N " << fmt("%.4f", worst) << " <= " << fmt("%.1f", c.drain_bound);
    return {c.pass_sup && c.pass_tv && c.pass_drain && c.within >= 18, d.str()};
}

// ---- 10 --------------------------------------------------------------------

std::string read_all(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome invariants() {
    std::ostringstream d;

    // identical seeds, identical bytes
    const auto cfg = uniform_config(30, 10, kOverhead, kGrant);
    const auto tr = uniform_traffic(cfg, 0.25, PacketLaw::exponential(8e-6));
    const auto dir = std::filesystem::temp_directory_path() / "wdmpon_acceptance";
    std::filesystem::remove_all(dir);
    const auto a = write_report_csv(run(cfg, tr, RandomPolling{}, sim_opts(0.05, 42)), dir / "a", "run");
    const auto b = write_report_csv(run(cfg, tr, RandomPolling{}, sim_opts(0.05, 42)), dir / "b", "run");
    bool same = a.size() == b.size();
    for (std::size_t k = 0; same && k < a.size(); ++k) same = read_all(a[k]) == read_all(b[k]);
    std::filesystem::remove_all(dir);
    d << "CSVs identical: " << (same ? "yes" : "no");

    // closed form vs iteration, then corollary vs greedy search
    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    int mismatches = 0, stable = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 3 + static_cast<int>(u(rng) * 100);
        const int l = 1 + static_cast<int>(u(rng) * (n - 1));
        auto c = uniform_config(n, l, (0.2 + 4 * u(rng)) * 1e-6, kGrant);
        const int q = 1 + static_cast<int>(u(rng) * 3);
        for (auto& onu : c.onus) {
            onu.queues.resize(static_cast<std::size_t>(q));
            for (auto& qc : onu.queues) qc = {(2 + 14 * u(rng)) * 1e-6, 1.0};
        }
        TrafficSpec t;
        for (auto& onu : c.onus) {
            t.per_queue.emplace_back();
            for (std::size_t j = 0; j < onu.queues.size(); ++j)
                t.per_queue.back().push_back(QueueTraffic::from_intensity(u(rng) < 0.1 ? 0.0 : u(rng), kPacket));
        }
        t = scaled(t, (0.2 + 1.0 * u(rng)) * l / std::max(total_load(t), 1e-12));

        if (total_load(t) < l && n > l) {
            SolverOptions it;
            it.allow_closed_form = false;
            it.tolerance = 1e-15;
            const double x = solve_mean_field(c, t).theta;
            const double y = solve_mean_field(c, t, {}, it).theta;
            worst = std::max(worst, rel(y, x));
        }
        // The corollary judges the unsaturated system, the greedy search
        // re-solves after each saturation: they must agree on whether the
        // system is stable, and every queue the search saturates must violate
        // the corollary.
        const auto r1 = uniform_overhead_stability(c, t);
        const auto r2 = mean_field_stability(c, t);
        bool agree = r1.all_stable() == r2.all_stable();
        for (std::size_t i = 0; i < r2.verdict.size(); ++i)
            for (std::size_t j = 0; j < r2.verdict[i].size(); ++j)
                if (r2.verdict[i][j] != Verdict::Stable && r1.verdict[i][j] == Verdict::Stable) agree = false;
        if (r1.all_stable()) {
            ++stable;
            agree = agree && r1.verdict == r2.verdict;
        }
        if (!agree) ++mismatches;
    }
    d << "; closed form vs iteration worst " << fmt("%.2e", worst) << "; verdict mismatches " << mismatches
      << "/1000 (" << stable << " stable)";
    return {same && worst <= 1e-12 && mismatches == 0, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"mean-field boundary, balanced two-class N=20", balanced_boundary},
        {"unbalanced classes, analytic vs simulated region", unbalanced_region},
        {"overhead-fraction fluctuations shrink with N", overhead_fluctuations},
        {"mean inter-visit time equals sum(Delta)/(L - rho)", cycle_time},
        {"mean vacation equals the fixed-point theta at N=100", vacation_mean},
        {"server limits with unlimited gated service", server_limits},
        {"local stability with a saturated class", local_stability},
        {"frame-based allocation boundaries at N=100", frame_mode},
        {"homogeneous toy model against its mean-field limit", toy_model},
        {"determinism and cross-implementation invariants", invariants},
    };
    std::set<int> only;
    for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d: %s -- %s [%.0fs]\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
