#include "wdmpon/config_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace wdmpon {

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

struct Section {
    std::string name;
    int line = 0;
    std::multimap<std::string, Entry> keys;
};

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Splits "1.2us" into (1.2, "us").
std::pair<double, std::string> split_number(const std::string& text) {
    const std::string t = trim(text);
    if (lower(t) == "inf") return {std::numeric_limits<double>::infinity(), ""};
    double value = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) throw ConfigError("expected a number in '" + t + "'");
    return {value, trim(std::string(ptr, end))};
}

class Reader {
   public:
    Reader(std::string source, std::vector<Section> sections) : source_(std::move(source)), sections_(std::move(sections)) {}

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
    }

    std::optional<std::string> get(Section& s, const std::string& key) const {
        const auto count = s.keys.count(key);
        if (count == 0) return std::nullopt;
        auto it = s.keys.find(key);
        if (count > 1) fail(std::next(it)->second.line, "duplicate key '" + key + "'");
        it->second.used = true;
        return it->second.value;
    }

    int line_of(const Section& s, const std::string& key) const {
        auto it = s.keys.find(key);
        return it == s.keys.end() ? s.line : it->second.line;
    }

    template <typename F>
    auto convert(Section& s, const std::string& key, F&& f) const {
        try {
            return f(*get(s, key));
        } catch (const ConfigError& e) {
            fail(line_of(s, key), "key '" + key + "': " + e.what());
        }
    }

    double duration(Section& s, const std::string& key, double line_rate) const {
        return convert(s, key, [&](const std::string& v) { return parse_duration(v, line_rate); });
    }

    long integer(Section& s, const std::string& key) const {
        return convert(s, key, [](const std::string& v) {
            const auto [value, unit] = split_number(v);
            if (!unit.empty() || value != std::floor(value) || !std::isfinite(value))
                throw ConfigError("expected an integer, got '" + v + "'");
            return static_cast<long>(value);
        });
    }

    double plain(Section& s, const std::string& key) const {
        return convert(s, key, [](const std::string& v) {
            const auto [value, unit] = split_number(v);
            if (!unit.empty()) throw ConfigError("unexpected unit '" + unit + "'");
            return value;
        });
    }

    double rate(Section& s, const std::string& key) const {
        return convert(s, key, [](const std::string& v) {
            const auto [value, unit] = split_number(v);
            if (unit != "/s") throw ConfigError("packet rates need a '/s' suffix");
            return value;
        });
    }

    void check_all_used() const {
        for (const auto& s : sections_)
            for (const auto& [key, entry] : s.keys)
                if (!entry.used) fail(entry.line, "unknown key '" + key + "' in [" + s.name + "]");
    }

    std::vector<Section>& sections() { return sections_; }

   private:
    std::string source_;
    std::vector<Section> sections_;
};

// Queue-level settings that [queue] sections may override.
struct QueueSpec {
    std::optional<double> grant, weight, packet, load, rate;
    std::optional<PacketLaw::Kind> law;
    int line = 0;
};

void read_queue_keys(Reader& r, Section& s, double line_rate, QueueSpec& q) {
    if (s.keys.count("grant")) q.grant = r.duration(s, "grant", line_rate);
    if (s.keys.count("weight")) q.weight = r.plain(s, "weight");
    if (s.keys.count("packet")) q.packet = r.duration(s, "packet", line_rate);
    if (s.keys.count("load")) q.load = r.plain(s, "load");
    if (s.keys.count("rate")) q.rate = r.rate(s, "rate");
    if (s.keys.count("packet_law")) {
        const auto v = lower(*r.get(s, "packet_law"));
        if (v == "deterministic")
            q.law = PacketLaw::Kind::Deterministic;
        else if (v == "exponential")
            q.law = PacketLaw::Kind::Exponential;
        else
            r.fail(r.line_of(s, "packet_law"), "packet_law must be deterministic or exponential");
    }
}

}  // namespace

int Scenario::n_classes() const {
    int k = 0;
    for (const auto& onu : queue_class)
        for (int c : onu) k = std::max(k, c + 1);
    return k;
}

std::string exact_number(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

double parse_duration(const std::string& text, double line_rate) {
    const auto [value, unit] = split_number(text);
    if (std::isinf(value)) return value;
    if (unit == "s") return value;
    if (unit == "ms") return value * 1e-3;
    if (unit == "us" || unit == "\xC2\xB5s") return value * 1e-6;
    if (unit == "ns") return value * 1e-9;
    if (unit == "B") {
        if (!(line_rate > 0.0)) throw ConfigError("byte sizes need [pon] line_rate");
        return value * 8.0 / line_rate;
    }
    if (unit.empty()) throw ConfigError("duration '" + trim(text) + "' needs a unit (s, ms, us, ns, B)");
    throw ConfigError("unknown duration unit '" + unit + "'");
}

double parse_bit_rate(const std::string& text) {
    const auto [value, unit] = split_number(text);
    const auto u = lower(unit);
    if (u == "bps") return value;
    if (u == "kbps") return value * 1e3;
    if (u == "mbps") return value * 1e6;
    if (u == "gbps") return value * 1e9;
    throw ConfigError("line rate '" + trim(text) + "' needs a unit (bps, Kbps, Mbps, Gbps)");
}

Scenario parse_scenario(std::istream& in, const std::string& source) {
    std::vector<Section> sections;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find_first_of("#;");
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(source + ":" + std::to_string(lineno) + ": malformed section header");
            sections.push_back({lower(trim(line.substr(1, line.size() - 2))), lineno, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
        if (sections.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": key outside any section");
        sections.back().keys.emplace(lower(trim(line.substr(0, eq))), Entry{trim(line.substr(eq + 1)), lineno});
    }

    Reader r(source, std::move(sections));
    Scenario out;
    std::optional<std::size_t> pon_index, policy_index;
    for (std::size_t k = 0; k < r.sections().size(); ++k) {
        const auto& s = r.sections()[k];
        if (s.name == "pon") {
            if (pon_index) r.fail(s.line, "duplicate [pon] section");
            pon_index = k;
        } else if (s.name == "policy") {
            if (policy_index) r.fail(s.line, "duplicate [policy] section");
            policy_index = k;
        } else if (s.name != "onus" && s.name != "queue") {
            r.fail(s.line, "unknown section [" + s.name + "]");
        }
    }
    if (!pon_index) throw ConfigError(source + ": missing [pon] section");

    auto& pon = r.sections()[*pon_index];
    if (!pon.keys.count("wavelengths")) r.fail(pon.line, "[pon] needs 'wavelengths'");
    out.config.n_wavelengths = static_cast<int>(r.integer(pon, "wavelengths"));
    if (pon.keys.count("line_rate"))
        out.line_rate = r.convert(pon, "line_rate", [](const std::string& v) { return parse_bit_rate(v); });

    std::vector<double> ratios;
    struct Group {
        std::size_t section;
        std::vector<std::size_t> queues;
    };
    std::vector<Group> groups;
    for (std::size_t k = 0; k < r.sections().size(); ++k) {
        const auto& s = r.sections()[k];
        if (s.name == "onus") groups.push_back({k, {}});
        if (s.name == "queue") {
            if (groups.empty()) r.fail(s.line, "[queue] must follow an [onus] section");
            groups.back().queues.push_back(k);
        }
    }
    if (groups.empty()) throw ConfigError(source + ": no [onus] sections");

    for (auto& g : groups) {
        auto& s = r.sections()[g.section];
        const long count = s.keys.count("count") ? r.integer(s, "count") : 1;
        if (count < 1) r.fail(r.line_of(s, "count"), "count must be at least 1");
        const long cls = s.keys.count("class") ? r.integer(s, "class") : 1;
        if (cls < 1) r.fail(r.line_of(s, "class"), "class labels start at 1");
        OnuConfig onu;
        onu.transmitters = s.keys.count("transmitters") ? static_cast<int>(r.integer(s, "transmitters")) : 1;
        onu.switch_overhead = s.keys.count("switch_overhead") ? r.duration(s, "switch_overhead", out.line_rate) : 0.0;
        const double ratio = s.keys.count("overhead_ratio") ? r.plain(s, "overhead_ratio") : 0.0;

        QueueSpec base;
        base.line = s.line;
        read_queue_keys(r, s, out.line_rate, base);
        std::vector<QueueSpec> specs;
        if (g.queues.empty()) {
            const long n = s.keys.count("queues") ? r.integer(s, "queues") : 1;
            if (n < 1) r.fail(r.line_of(s, "queues"), "queues must be at least 1");
            specs.assign(static_cast<std::size_t>(n), base);
        } else {
            if (s.keys.count("queues")) r.fail(r.line_of(s, "queues"), "'queues' conflicts with [queue] sections");
            for (auto qk : g.queues) {
                auto& qs = r.sections()[qk];
                QueueSpec q = base;
                q.line = qs.line;
                q.load.reset();
                q.rate.reset();
                if (base.load) q.load = base.load;
                if (base.rate) q.rate = base.rate;
                QueueSpec own;
                read_queue_keys(r, qs, out.line_rate, own);
                if (own.grant) q.grant = own.grant;
                if (own.weight) q.weight = own.weight;
                if (own.packet) q.packet = own.packet;
                if (own.law) q.law = own.law;
                if (own.load || own.rate) {
                    q.load = own.load;
                    q.rate = own.rate;
                }
                specs.push_back(q);
            }
        }

        std::vector<QueueTraffic> traffic;
        for (const auto& q : specs) {
            if (!q.grant) r.fail(q.line, "queue needs a 'grant'");
            if (!q.packet) r.fail(q.line, "queue needs a 'packet' size");
            if (q.load && q.rate) r.fail(q.line, "give either 'load' or 'rate', not both");
            onu.queues.push_back({*q.grant, q.weight.value_or(1.0)});
            const PacketLaw law{q.law.value_or(PacketLaw::Kind::Deterministic), *q.packet};
            if (q.rate) {
                QueueTraffic t;
                t.packet = law;
                t.arrival.rate = *q.rate;
                traffic.push_back(t);
            } else {
                traffic.push_back(QueueTraffic::from_intensity(q.load.value_or(0.0), law));
            }
        }
        for (long k = 0; k < count; ++k) {
            out.config.onus.push_back(onu);
            out.traffic.per_queue.push_back(traffic);
            out.queue_class.emplace_back(onu.queues.size(), static_cast<int>(cls - 1));
            ratios.push_back(ratio);
        }
    }
    out.config.n_onus = static_cast<int>(out.config.onus.size());

    if (policy_index) {
        auto& s = r.sections()[*policy_index];
        const std::string kind = s.keys.count("kind") ? lower(*r.get(s, "kind")) : "random";
        if (kind == "random") {
            out.policy = RandomPolling{};
        } else if (kind == "periodic") {
            PeriodicPolling p;
            auto range = s.keys.equal_range("order");
            for (auto it = range.first; it != range.second; ++it) {
                it->second.used = true;
                std::istringstream os(it->second.value);
                std::vector<int> order;
                std::string tok;
                while (os >> tok) {
                    const auto [v, unit] = split_number(tok);
                    if (!unit.empty() || v != std::floor(v)) r.fail(it->second.line, "visit orders list ONU indices");
                    order.push_back(static_cast<int>(v));
                }
                p.orders.push_back(std::move(order));
            }
            out.policy = std::move(p);
        } else if (kind == "gpon_frame") {
            GponFramePolicy p;
            if (s.keys.count("frame")) p.frame = r.duration(s, "frame", out.line_rate);
            p.overhead_ratios = ratios;
            out.policy = std::move(p);
        } else {
            r.fail(r.line_of(s, "kind"), "policy kind must be random, periodic or gpon_frame");
        }
    }
    r.check_all_used();

    auto issues = validate(out.config, out.traffic);
    const auto policy_issues = validate(out.config, out.policy);
    issues.insert(issues.end(), policy_issues.begin(), policy_issues.end());
    if (!issues.empty()) throw ConfigError(source + ": " + issues.front());
    return out;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return parse_scenario(in, path);
}

std::string format_scenario(const Scenario& s) {
    std::ostringstream os;
    os << "[pon]\nwavelengths = " << s.config.n_wavelengths << "\n";
    if (s.line_rate > 0.0) os << "line_rate = " << exact_number(s.line_rate) << "bps\n";

    os << "\n[policy]\nkind = " << policy_name(s.policy) << "\n";
    const auto* frame = std::get_if<GponFramePolicy>(&s.policy);
    if (frame) os << "frame = " << exact_number(frame->frame) << "s\n";
    if (const auto* periodic = std::get_if<PeriodicPolling>(&s.policy)) {
        for (const auto& order : periodic->orders) {
            os << "order =";
            for (int onu : order) os << ' ' << onu;
            os << "\n";
        }
    }

    for (std::size_t i = 0; i < s.config.onus.size(); ++i) {
        const auto& onu = s.config.onus[i];
        const int cls = i < s.queue_class.size() && !s.queue_class[i].empty() ? s.queue_class[i].front() : 0;
        os << "\n[onus]\ncount = 1\nclass = " << cls + 1 << "\ntransmitters = " << onu.transmitters
           << "\nswitch_overhead = " << exact_number(onu.switch_overhead) << "s\n";
        if (frame && i < frame->overhead_ratios.size())
            os << "overhead_ratio = " << exact_number(frame->overhead_ratios[i]) << "\n";
        for (std::size_t j = 0; j < onu.queues.size(); ++j) {
            const auto& q = onu.queues[j];
            const auto& t = s.traffic.per_queue[i][j];
            os << "[queue]\ngrant = " << exact_number(q.grant_limit) << (std::isinf(q.grant_limit) ? "" : "s")
               << "\nweight = " << exact_number(q.weight) << "\npacket = " << exact_number(t.packet.mean)
               << "s\npacket_law = "
               << (t.packet.kind == PacketLaw::Kind::Deterministic ? "deterministic" : "exponential")
               << "\nrate = " << exact_number(t.arrival.rate) << "/s\n";
        }
    }
    return os.str();
}

}  // namespace wdmpon
