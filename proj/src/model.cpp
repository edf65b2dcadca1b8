#include "wdmpon/model.hpp"

#include <cmath>
#include <sstream>

namespace wdmpon {

int PonConfig::total_transmitters() const {
    int total = 0;
    for (const auto& onu : onus) total += onu.transmitters;
    return total;
}

std::size_t PonConfig::total_queues() const {
    std::size_t total = 0;
    for (const auto& onu : onus) total += onu.queues.size();
    return total;
}

QueueTraffic QueueTraffic::from_intensity(double rho, PacketLaw law) {
    QueueTraffic q;
    q.packet = law;
    q.arrival.rate = law.mean > 0.0 ? rho / law.mean : 0.0;
    return q;
}

double onu_load(const TrafficSpec& traffic, int onu) {
    double sum = 0.0;
    for (const auto& q : traffic.per_queue.at(static_cast<std::size_t>(onu))) sum += q.intensity();
    return sum;
}

double total_load(const TrafficSpec& traffic) {
    double sum = 0.0;
    for (std::size_t i = 0; i < traffic.per_queue.size(); ++i) sum += onu_load(traffic, static_cast<int>(i));
    return sum;
}

TrafficSpec scaled(const TrafficSpec& traffic, double factor) {
    TrafficSpec out = traffic;
    for (auto& onu : out.per_queue)
        for (auto& q : onu) q.arrival.rate *= factor;
    return out;
}

std::string policy_name(const PollingPolicy& policy) {
    switch (policy.index()) {
        case 0: return "random";
        case 1: return "periodic";
        default: return "gpon_frame";
    }
}

std::vector<std::string> validate(const PonConfig& config, const TrafficSpec& traffic) {
    std::vector<std::string> out;
    auto fail = [&out](auto&&... parts) {
        std::ostringstream os;
        (os << ... << parts);
        out.push_back(os.str());
    };

    if (config.n_onus < 1) fail("number of ONUs must be at least 1 (got ", config.n_onus, ")");
    if (config.n_wavelengths < 1) fail("number of wavelengths must be at least 1 (got ", config.n_wavelengths, ")");
    if (config.onus.size() != static_cast<std::size_t>(std::max(config.n_onus, 0)))
        fail("config lists ", config.onus.size(), " ONUs but declares ", config.n_onus);

    for (std::size_t i = 0; i < config.onus.size(); ++i) {
        const auto& onu = config.onus[i];
        if (onu.transmitters < 1) fail("ONU ", i, " has no transmitters");
        if (onu.transmitters > config.n_wavelengths)
            fail("transmitters exceed wavelengths at ONU ", i, " (", onu.transmitters, " > ", config.n_wavelengths, ")");
        if (!(onu.switch_overhead >= 0.0) || !std::isfinite(onu.switch_overhead))
            fail("ONU ", i, " switch overhead must be finite and nonnegative");
        if (onu.queues.empty()) fail("ONU ", i, " has no queues");
        for (std::size_t j = 0; j < onu.queues.size(); ++j) {
            const auto& q = onu.queues[j];
            if (!(q.grant_limit > 0.0)) fail("queue (", i, ",", j, ") grant limit must be positive");
            if (!(q.weight > 0.0) || !std::isfinite(q.weight)) fail("queue (", i, ",", j, ") weight must be positive");
        }
    }

    if (traffic.per_queue.size() != config.onus.size()) {
        fail("traffic shape mismatch: ", traffic.per_queue.size(), " ONUs in traffic, ", config.onus.size(), " in config");
        return out;
    }
    for (std::size_t i = 0; i < config.onus.size(); ++i) {
        if (traffic.per_queue[i].size() != config.onus[i].queues.size())
            fail("traffic shape mismatch at ONU ", i, ": ", traffic.per_queue[i].size(), " queues vs ",
                 config.onus[i].queues.size());
        for (std::size_t j = 0; j < traffic.per_queue[i].size(); ++j) {
            const auto& q = traffic.per_queue[i][j];
            if (!(q.arrival.rate >= 0.0) || !std::isfinite(q.arrival.rate))
                fail("queue (", i, ",", j, ") arrival rate must be finite and nonnegative");
            if (!(q.packet.mean > 0.0) || !std::isfinite(q.packet.mean))
                fail("queue (", i, ",", j, ") packet transmission time must be positive");
        }
    }
    return out;
}

std::vector<std::string> validate(const PonConfig& config, const PollingPolicy& policy) {
    std::vector<std::string> out;
    const auto n = config.onus.size();
    if (const auto* periodic = std::get_if<PeriodicPolling>(&policy)) {
        if (!periodic->orders.empty() && periodic->orders.size() != static_cast<std::size_t>(config.n_wavelengths))
            out.push_back("periodic policy needs one visit order per wavelength");
        for (std::size_t w = 0; w < periodic->orders.size(); ++w) {
            std::vector<int> seen(n, 0);
            for (int onu : periodic->orders[w]) {
                if (onu < 0 || static_cast<std::size_t>(onu) >= n) {
                    out.push_back("visit order " + std::to_string(w) + " names unknown ONU " + std::to_string(onu));
                    continue;
                }
                ++seen[static_cast<std::size_t>(onu)];
            }
            for (std::size_t i = 0; i < n && i < seen.size(); ++i) {
                if (seen[i] < 1 || seen[i] > config.onus[i].transmitters)
                    out.push_back("visit order " + std::to_string(w) + " must list ONU " + std::to_string(i) +
                                  " between 1 and t_i times");
            }
        }
    } else if (const auto* frame = std::get_if<GponFramePolicy>(&policy)) {
        if (!(frame->frame > 0.0)) out.push_back("frame duration must be positive");
        if (frame->overhead_ratios.size() != n) out.push_back("frame policy needs one overhead ratio per ONU");
        double sum = 0.0;
        for (double r : frame->overhead_ratios) {
            if (!(r >= 0.0)) out.push_back("overhead ratios must be nonnegative");
            sum += r;
        }
        if (sum >= 1.0) out.push_back("overhead ratios sum to at least 1; no frame capacity remains");
    }
    return out;
}

PonConfig uniform_config(int n_onus, int n_wavelengths, double switch_overhead, double grant_limit,
                         int transmitters) {
    PonConfig c;
    c.n_onus = n_onus;
    c.n_wavelengths = n_wavelengths;
    c.onus.assign(static_cast<std::size_t>(n_onus),
                  OnuConfig{transmitters, switch_overhead, {QueueConfig{grant_limit, 1.0}}});
    return c;
}

TrafficSpec uniform_traffic(const PonConfig& config, double rho_per_queue, PacketLaw law) {
    TrafficSpec t;
    t.per_queue.resize(config.onus.size());
    for (std::size_t i = 0; i < config.onus.size(); ++i)
        t.per_queue[i].assign(config.onus[i].queues.size(), QueueTraffic::from_intensity(rho_per_queue, law));
    return t;
}

}  // namespace wdmpon
