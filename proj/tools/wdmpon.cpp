// wdmpon: analyze, simulate and probe WDM PON polling scenarios.
//
// Exit codes: 0 stable/success, 1 input or solver error, 2 saturation detected.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wdmpon/analysis.hpp"
#include "wdmpon/config_io.hpp"
#include "wdmpon/experiments.hpp"
#include "wdmpon/sim.hpp"
#include "wdmpon/toy.hpp"

namespace fs = std::filesystem;
using namespace wdmpon;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kSaturated = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_numbers(const std::string& text, char sep) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        double v = 0.0;
        const char* first = item.data() + b;
        const char* last = item.data() + e + 1;
        auto [p, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || p != last) throw UsageError("not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

// "1,0;1,1" -> {{1,0},{1,1}}
std::vector<std::vector<double>> parse_rays(const std::string& text) {
    std::vector<std::vector<double>> rays;
    std::stringstream ss(text);
    std::string ray;
    while (std::getline(ss, ray, ';'))
        if (ray.find_first_not_of(" \t") != std::string::npos) rays.push_back(parse_numbers(ray, ','));
    if (rays.empty()) throw UsageError("--rays needs at least one direction");
    return rays;
}

std::ofstream open_csv(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(12);
    return out;
}

// The parsed subcommand in canonical form: explicit long names, absolute
// paths, and any generated seeds appended.
struct Invocation {
    std::string command;
    std::vector<std::string> args;
    std::string config;
    fs::path out;
    std::vector<std::uint64_t> seeds;
};

std::vector<std::string> canonical_args(const CLI::App& sub, const std::string& config, const fs::path& out) {
    std::vector<std::string> args{sub.get_name()};
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->count() == 0) continue;
        const auto& res = opt->results();
        std::string joined;
        for (std::size_t k = 0; k < res.size(); ++k) joined += (k ? "," : "") + res[k];
        if (!opt->nonpositional()) {
            args.push_back(opt->get_name() == "config" ? config : joined);
            continue;
        }
        if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
        const std::string name = opt->get_lnames().front();
        args.push_back("--" + name);
        args.push_back(name == "out" ? out.string() : joined);
    }
    return args;
}

void write_manifest(const Invocation& inv) {
    nlohmann::json j;
    j["tool"] = "wdmpon";
    j["version"] = WDMPON_VERSION;
    j["command"] = inv.command;
    j["config"] = inv.config;
    j["args"] = inv.args;
    j["seeds"] = inv.seeds;
    j["output"] = inv.out.string();
    std::ofstream f(inv.out / "manifest.json");
    f << j.dump(2) << '\n';
}

std::vector<std::uint64_t> seeds_or_generated(std::vector<std::uint64_t> seeds, std::size_t count, bool& generated) {
    generated = seeds.empty();
    if (generated) {
        std::random_device rd;
        for (std::size_t k = 0; k < count; ++k) seeds.push_back((std::uint64_t{rd()} << 32) ^ rd());
    }
    return seeds;
}

std::string join(const std::vector<std::uint64_t>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
    return s;
}

// ---- analyze ---------------------------------------------------------------

int cmd_analyze(const Scenario& sc, const std::string& method, const std::string& order, const fs::path& out) {
    for (const auto& v : validate(sc.config, sc.traffic)) throw ConfigError(v);
    for (const auto& v : validate(sc.config, sc.policy)) throw ConfigError(v);

    bool unlimited = true;
    for (const auto& onu : sc.config.onus)
        for (const auto& q : onu.queues) unlimited = unlimited && std::isinf(q.grant_limit);

    std::string used = method;
    if (used == "auto")
        used = std::holds_alternative<GponFramePolicy>(sc.policy) ? "frame" : unlimited ? "server_limit" : "mean_field";

    StabilityReport r;
    if (used == "mean_field") {
        MeanFieldOptions mo;
        if (order == "overhead_theta") mo.order = SaturationOrder::OverheadPlusTheta;
        r = mean_field_stability(sc.config, sc.traffic, mo);
    } else if (used == "uniform") {
        r = uniform_overhead_stability(sc.config, sc.traffic);
    } else if (used == "classical") {
        r = classical_stability(sc.config, sc.traffic);
    } else if (used == "server_limit") {
        r = server_limit_stability(sc.config, sc.traffic);
    } else if (used == "frame") {
        const auto* frame = std::get_if<GponFramePolicy>(&sc.policy);
        if (!frame) throw UsageError("method 'frame' needs a gpon_frame policy in the config");
        r = gpon_frame_stability(sc.config, sc.traffic, frame->overhead_ratios);
    }

    std::cout << "method: " << used << "\n";
    std::cout << "total load: " << total_load(sc.traffic) << " of " << sc.config.n_wavelengths << " wavelengths\n";
    if (r.mean_field) {
        std::cout << "theta: " << r.mean_field->theta << " s\n";
        std::cout << "delta: " << r.mean_field->delta << " s\n";
        std::cout << "iterations: " << r.mean_field->iterations << (r.mean_field->bisection ? " (bisection)" : "")
                  << "\n";
    }
    std::cout << "global margin: " << r.global_margin << "\n";
    std::cout << "saturated set:";
    if (r.saturated_set.empty()) std::cout << " none";
    for (auto q : r.saturated_set) std::cout << " (" << q.onu << "," << q.queue << ")";
    std::cout << "\n";

    std::size_t counts[3] = {0, 0, 0};
    for (std::size_t i = 0; i < r.verdict.size(); ++i)
        for (std::size_t j = 0; j < r.verdict[i].size(); ++j) {
            ++counts[static_cast<int>(r.verdict[i][j])];
            if (r.verdict[i][j] != Verdict::Stable || r.verdict.size() <= 32)
                std::cout << "  queue (" << i << "," << j << ") class " << sc.queue_class[i][j] + 1 << " load "
                          << sc.traffic.per_queue[i][j].intensity() << ": " << to_string(r.verdict[i][j])
                          << "  margin " << r.binding_margin[i][j] << "\n";
        }
    std::cout << "stable " << counts[0] << ", saturated " << counts[1] << ", indeterminate " << counts[2] << "\n";

    if (!out.empty()) {
        fs::create_directories(out);
        auto csv = open_csv(out / "analysis.csv");
        csv << "onu,queue,class,load,grant_s,verdict,margin\n";
        for (std::size_t i = 0; i < r.verdict.size(); ++i)
            for (std::size_t j = 0; j < r.verdict[i].size(); ++j)
                csv << i << ',' << j << ',' << sc.queue_class[i][j] + 1 << ',' << sc.traffic.per_queue[i][j].intensity()
                    << ',' << sc.config.onus[i].queues[j].grant_limit << ',' << to_string(r.verdict[i][j]) << ','
                    << r.binding_margin[i][j] << '\n';
        auto sum = open_csv(out / "analysis_summary.csv");
        sum << "method,total_load,wavelengths,theta_s,delta_s,global_margin,saturated\n";
        sum << used << ',' << total_load(sc.traffic) << ',' << sc.config.n_wavelengths << ','
            << (r.mean_field ? r.mean_field->theta : NAN) << ',' << (r.mean_field ? r.mean_field->delta : NAN) << ','
            << r.global_margin << ',' << r.saturated_set.size() << '\n';
    }
    return r.any_saturated() || counts[2] > 0 ? kSaturated : kOk;
}

// ---- simulate --------------------------------------------------------------

int cmd_simulate(Scenario sc, const std::string& policy, const SimOptions& so, const fs::path& out) {
    for (const auto& v : validate(sc.config, sc.traffic)) throw ConfigError(v);
    if (policy == "random")
        sc.policy = RandomPolling{};
    else if (policy == "periodic" && !std::holds_alternative<PeriodicPolling>(sc.policy))
        sc.policy = PeriodicPolling{};
    else if (policy == "gpon_frame" && !std::holds_alternative<GponFramePolicy>(sc.policy))
        throw UsageError("--policy gpon_frame needs a gpon_frame [policy] section with overhead ratios");
    for (const auto& v : validate(sc.config, sc.policy)) throw ConfigError(v);

    const auto report = run(sc.config, sc.traffic, sc.policy, so);
    fs::create_directories(out);
    write_report_csv(report, out, "sim");

    std::vector<std::vector<bool>> all(sc.config.onus.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i].assign(sc.config.onus[i].queues.size(), true);
    const bool growing = backlog_growing(report, all, 0.01);

    RunningStats inter;
    for (const auto& o : report.onus) inter.merge(o.inter_visit);
    const auto vac = measure_vacations(report);
    std::cout << "policy: " << report.policy << "\n";
    std::cout << "events: " << report.events << "\n";
    std::cout << "overhead fraction: " << report.overhead_fraction << "\n";
    std::cout << "mean overhead per visit: " << report.overhead_per_visit.mean << " s\n";
    std::cout << "mean inter-visit time: " << inter.mean << " s\n";
    std::cout << "mean vacation: " << vac.pooled.mean << " s (cv " << vac.pooled.cv << ")\n";
    std::cout << "total backlog slope: " << report.total_growth_slope() << "\n";
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << (growing ? "backlog growing: saturation detected\n" : "backlog bounded\n");
    return growing ? kSaturated : kOk;
}

// ---- region ----------------------------------------------------------------

int cmd_region(const Scenario& sc, const std::string& rays_text, const std::string& base_text,
               const std::vector<int>& watch, const std::string& mode, const ProbeOptions& po_in, const fs::path& out) {
    for (const auto& v : validate(sc.config, sc.traffic)) throw ConfigError(v);
    auto tmpl = template_from(sc);
    const auto rays = parse_rays(rays_text);
    for (const auto& r : rays)
        if (static_cast<int>(r.size()) != tmpl.n_classes())
            throw UsageError("each ray needs " + std::to_string(tmpl.n_classes()) + " components, one per class");
    if (!base_text.empty()) {
        tmpl.base_load = parse_numbers(base_text, ',');
        if (static_cast<int>(tmpl.base_load.size()) != tmpl.n_classes())
            throw UsageError("--base needs one load per class");
    }
    ProbeOptions po = po_in;
    for (int c : watch) {
        if (c < 1 || c > tmpl.n_classes()) throw UsageError("--watch classes are 1-based and must exist");
        po.watched_classes.push_back(c - 1);
    }

    std::vector<RayProbe> analytic, sim;
    if (mode != "sim") analytic = region_analytic(tmpl, rays, po.watched_classes);
    if (mode != "analytic") sim = region_sim(tmpl, rays, po);

    fs::create_directories(out);
    auto csv = open_csv(out / "region.csv");
    csv << "ray,direction,mode,boundary_scale,stable_scale,unstable_scale,iterations,simulations";
    if (mode == "both") csv << ",analytic_scale,rel_gap";
    csv << '\n';
    auto dir_text = [](const std::vector<double>& d) {
        std::ostringstream s;
        s << std::setprecision(12);
        for (std::size_t k = 0; k < d.size(); ++k) s << (k ? ":" : "") << d[k];
        return s.str();
    };
    auto row = [&](std::size_t k, const RayProbe& p, const char* m) {
        csv << k << ',' << dir_text(p.direction) << ',' << m << ',' << p.boundary_load << ',' << p.stable_scale << ','
            << p.unstable_scale << ',' << p.iterations << ',' << p.simulations;
        if (mode == "both") {
            const double a = analytic[k].boundary_load;
            csv << ',' << a << ',' << (p.boundary_load - a) / a;
        }
        csv << '\n';
    };
    for (std::size_t k = 0; k < rays.size(); ++k) {
        if (!analytic.empty()) row(k, analytic[k], "analytic");
        if (!sim.empty()) row(k, sim[k], "sim");
    }

    for (std::size_t k = 0; k < rays.size(); ++k) {
        std::cout << "ray " << k << " (" << dir_text(rays[k]) << "):";
        if (!analytic.empty()) std::cout << " analytic " << analytic[k].boundary_load;
        if (!sim.empty())
            std::cout << " sim " << sim[k].boundary_load << " [" << sim[k].stable_scale << ", " << sim[k].unstable_scale
                      << "]";
        if (mode == "both")
            std::cout << " gap " << 100.0 * (sim[k].boundary_load - analytic[k].boundary_load) / analytic[k].boundary_load
                      << "%";
        std::cout << "\n";
    }
    return kOk;
}

// ---- converge --------------------------------------------------------------

int cmd_converge(const std::vector<int>& ns, double ratio, double load, const SweepOptions& so, const fs::path& out) {
    if (!(load > 0.0 && load < 1.0)) throw UsageError("--load is the per-ONU load and must lie in (0, 1)");
    const auto sweep = convergence_sweep(ns, ratio, load, so);
    fs::create_directories(out);
    auto csv = open_csv(out / "converge.csv");
    csv << "n_onus,wavelengths,window_s,overhead_stddev,overhead_mean\n";
    for (std::size_t k = 0; k < sweep.n_onus.size(); ++k) {
        csv << sweep.n_onus[k] << ',' << std::lround(ratio * sweep.n_onus[k]) << ',' << sweep.window << ','
            << sweep.stddev[k] << ',' << sweep.mean_fraction[k] << '\n';
        std::cout << "N=" << sweep.n_onus[k] << "  stddev " << sweep.stddev[k] << "  mean " << sweep.mean_fraction[k]
                  << "\n";
    }
    const double expected = 1.0 - load / ratio;
    bool near = true;
    for (double m : sweep.mean_fraction) near = near && std::abs(m - expected) <= 0.02;
    std::cout << (sweep.strictly_decreasing() ? "PASS" : "FAIL") << " stddev strictly decreasing in N\n";
    std::cout << (near ? "PASS" : "FAIL") << " mean overhead fraction within 0.02 of " << expected << "\n";
    return kOk;
}

// ---- toy -------------------------------------------------------------------

int cmd_toy(const std::vector<int>& ns, double s, double rho, const ToyCheckOptions& to, const fs::path& out) {
    if (!(rho < s))
        throw UsageError("rho must be below s: the toy model is only stable when the load per queue is below the "
                         "server fraction");
    if (rho < 0.0) throw UsageError("--rho must be nonnegative");
    const auto checks = verify_toy_meanfield(ns, s, rho, to);
    fs::create_directories(out);
    auto runs = open_csv(out / "toy_runs.csv");
    runs << "n_queues,n_servers,seed,sup_deviation,drain_time,drain_per_queue\n";
    auto sum = open_csv(out / "toy_summary.csv");
    sum << "n_queues,n_servers,within,seeds,tv,drain_bound,pass_sup,pass_tv,pass_drain\n";
    for (const auto& c : checks) {
        for (std::size_t k = 0; k < c.sup_deviation.size(); ++k)
            runs << c.n_queues << ',' << c.n_servers << ',' << to.seeds[k] << ',' << c.sup_deviation[k] << ','
                 << c.drain_time[k] << ',' << c.drain_time[k] / c.n_queues << '\n';
        sum << c.n_queues << ',' << c.n_servers << ',' << c.within << ',' << c.sup_deviation.size() << ',' << c.tv
            << ',' << c.drain_bound << ',' << c.pass_sup << ',' << c.pass_tv << ',' << c.pass_drain << '\n';
        std::cout << "N=" << c.n_queues << " S=" << c.n_servers << "\n";
        std::cout << "  " << (c.pass_sup ? "PASS" : "FAIL") << " sup |A_N(t) - rho| < " << to.sup_threshold << " on "
                  << c.within << "/" << c.sup_deviation.size() << " seeds\n";
        std::cout << "  " << (c.pass_tv ? "PASS" : "FAIL") << " TV to Geometric(" << rho << ") = " << c.tv << "\n";
        double worst = 0.0;
        for (double t : c.drain_time) worst = std::max(worst, t / c.n_queues);
        std::cout << "  " << (c.pass_drain ? "PASS" : "FAIL") << " drain T_N/N worst " << worst << " vs bound "
                  << c.drain_bound << "\n";
    }
    return kOk;
}

int run_cli(std::vector<std::string> argv);

int cmd_replay(const fs::path& manifest, const std::string& out) {
    std::ifstream f(manifest);
    if (!f) throw UsageError("cannot read manifest " + manifest.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("malformed manifest: " + std::string(e.what()));
    }
    if (j.value("tool", "") != "wdmpon") throw UsageError("not a wdmpon manifest");
    auto args = j.at("args").get<std::vector<std::string>>();
    if (!out.empty()) {
        auto it = std::find(args.begin(), args.end(), "--out");
        if (it == args.end() || std::next(it) == args.end()) throw UsageError("manifest has no output directory");
        *std::next(it) = out;
    }
    return run_cli(args);
}

int run_cli(std::vector<std::string> argv) {
    CLI::App app{"WDM PON capacity analysis and polling simulation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(WDMPON_VERSION));

    std::string config, out;

    auto* analyze = app.add_subcommand("analyze", "Stability verdicts for a scenario");
    std::string method = "auto", order = "overhead";
    analyze->add_option("config", config, "Scenario file")->required();
    analyze->add_option("--method", method, "Stability test")
        ->check(CLI::IsMember({"auto", "mean_field", "uniform", "classical", "server_limit", "frame"}));
    analyze->add_option("--order", order, "Saturation order for mean_field")
        ->check(CLI::IsMember({"overhead", "overhead_theta"}));
    analyze->add_option("--out", out, "Also write CSVs here");

    auto* simulate = app.add_subcommand("simulate", "Discrete-event simulation of a scenario");
    SimOptions so;
    so.horizon = 1.0;
    std::string policy = "config";
    std::vector<std::uint64_t> sim_seed;
    double warmup = 0.1;
    simulate->add_option("config", config, "Scenario file")->required();
    simulate->add_option("--horizon", so.horizon, "Simulated seconds")->check(CLI::PositiveNumber);
    simulate->add_option("--warmup", warmup, "Seconds discarded before measuring")->check(CLI::NonNegativeNumber);
    simulate->add_option("--seed", sim_seed, "Random seed (generated and recorded when omitted)")->expected(1);
    simulate->add_option("--window", so.window, "Overhead-fraction window, seconds")->check(CLI::PositiveNumber);
    simulate->add_option("--policy", policy, "Override the config policy")
        ->check(CLI::IsMember({"config", "random", "periodic", "gpon_frame"}));
    simulate->add_option("--out", out, "Output directory")->required();

    auto* region = app.add_subcommand("region", "Capacity-region boundary along load rays");
    std::string rays, base, mode = "both";
    std::vector<int> watch;
    ProbeOptions po;
    po.seeds.clear();
    region->add_option("config", config, "Scenario file whose classes span the load space")->required();
    region->add_option("--rays", rays, "Directions, e.g. \"1,0;1,1;0,1\"")->required();
    region->add_option("--base", base, "Fixed per-class load added to every point");
    region->add_option("--watch", watch, "1-based classes judged for stability (default all)")->delimiter(',');
    region->add_option("--mode", mode, "sim, analytic or both")->check(CLI::IsMember({"sim", "analytic", "both"}));
    region->add_option("--resolution", po.resolution, "Bisection resolution in scale units (0: 1% of bound)");
    region->add_option("--seeds", po.seeds, "Seeds for the majority verdict")->delimiter(',');
    region->add_option("--horizon", po.horizon, "Simulated seconds per probe")->check(CLI::PositiveNumber);
    region->add_option("--threshold", po.slope_threshold, "Relative backlog slope that counts as growth");
    region->add_option("--out", out, "Output directory")->required();

    auto* converge = app.add_subcommand("converge", "Overhead-fraction fluctuation sweep over N");
    std::vector<int> ns;
    double ratio = 0.5, load = 0.2;
    SweepOptions sw;
    sw.seeds.clear();
    converge->add_option("--Ns", ns, "ONU counts, e.g. 10,50,100,500")->delimiter(',')->required();
    converge->add_option("--ratio", ratio, "Wavelengths per ONU, L/N")->check(CLI::PositiveNumber);
    converge->add_option("--load", load, "Per-ONU load");
    converge->add_option("--window", sw.window, "Window length, seconds")->check(CLI::PositiveNumber);
    converge->add_option("--horizon", sw.horizon, "Simulated seconds")->check(CLI::PositiveNumber);
    converge->add_option("--warmup", sw.warmup, "Seconds discarded")->check(CLI::NonNegativeNumber);
    converge->add_option("--seeds", sw.seeds, "Seeds averaged per N")->delimiter(',');
    converge->add_option("--out", out, "Output directory")->required();

    auto* toy = app.add_subcommand("toy", "Homogeneous toy model against its mean-field limit");
    std::vector<int> toy_n;
    double s = 0.5, rho = 0.3;
    ToyCheckOptions to;
    toy->add_option("--N", toy_n, "Queue counts")->delimiter(',')->required();
    toy->add_option("--s", s, "Servers per queue, S/N");
    toy->add_option("--rho", rho, "Load per queue, lambda/mu");
    toy->add_option("--mu", to.mu, "Service rate")->check(CLI::PositiveNumber);
    toy->add_option("--horizon", to.horizon, "Simulated time")->check(CLI::PositiveNumber);
    toy->add_option("--seeds", to.seeds, "Seeds")->delimiter(',');
    toy->add_option("--drain-horizon", to.drain_horizon, "Time limit of the overloaded-start runs")
        ->check(CLI::PositiveNumber);
    toy->add_option("--start-level", to.start_level, "Queue length of the overloaded start")
        ->check(CLI::PositiveNumber);
    toy->add_option("--out", out, "Output directory")->required();

    auto* replay = app.add_subcommand("replay", "Re-run a recorded manifest");
    std::string manifest;
    replay->add_option("manifest", manifest, "manifest.json")->required()->check(CLI::ExistingFile);
    replay->add_option("--out", out, "Write to another directory");

    try {
        std::reverse(argv.begin(), argv.end());
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kError;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (sub == replay) return cmd_replay(manifest, out);

        Invocation inv;
        inv.command = sub->get_name();
        if (!config.empty()) inv.config = fs::absolute(config).lexically_normal().string();
        if (!out.empty()) inv.out = fs::absolute(out).lexically_normal();

        if (sub == analyze) {
            const auto sc = load_scenario(config);
            const int code = cmd_analyze(sc, method, order, inv.out);
            if (!out.empty()) {
                inv.args = canonical_args(*sub, inv.config, inv.out);
                write_manifest(inv);
            }
            return code;
        }

        bool generated = false;
        int code = kOk;
        if (sub == simulate) {
            const auto sc = load_scenario(config);
            inv.seeds = seeds_or_generated(sim_seed, 1, generated);
            so.seed = inv.seeds.front();
            so.warmup = warmup;
            if (!(so.warmup < so.horizon)) throw UsageError("--warmup must be shorter than --horizon");
            fs::create_directories(inv.out);
            code = cmd_simulate(sc, policy, so, inv.out);
            inv.args = canonical_args(*sub, inv.config, inv.out);
            if (generated) inv.args.insert(inv.args.end(), {"--seed", join(inv.seeds)});
        } else if (sub == region) {
            const auto sc = load_scenario(config);
            if (mode != "analytic") inv.seeds = seeds_or_generated(po.seeds, 3, generated);
            po.seeds = inv.seeds;
            code = cmd_region(sc, rays, base, watch, mode, po, inv.out);
            inv.args = canonical_args(*sub, inv.config, inv.out);
            if (generated) inv.args.insert(inv.args.end(), {"--seeds", join(inv.seeds)});
        } else if (sub == converge) {
            inv.seeds = sw.seeds = seeds_or_generated(sw.seeds, 3, generated);
            code = cmd_converge(ns, ratio, load, sw, inv.out);
            inv.args = canonical_args(*sub, inv.config, inv.out);
            if (generated) inv.args.insert(inv.args.end(), {"--seeds", join(inv.seeds)});
        } else if (sub == toy) {
            inv.seeds = to.seeds = seeds_or_generated(to.seeds, 20, generated);
            code = cmd_toy(toy_n, s, rho, to, inv.out);
            inv.args = canonical_args(*sub, inv.config, inv.out);
            if (generated) inv.args.insert(inv.args.end(), {"--seeds", join(inv.seeds)});
        }
        write_manifest(inv);
        return code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const AnalysisError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
    } catch (const ExperimentError& e) {
        std::cerr << "experiment error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kError;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(std::vector<std::string>(argv + 1, argv + argc)); }
