#include "wdmpon/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace wdmpon {

void RunningStats::merge(const RunningStats& other) {
    if (other.count == 0) return;
    if (count == 0) {
        *this = other;
        return;
    }
    const double n1 = static_cast<double>(count), n2 = static_cast<double>(other.count);
    const double d = other.mean - mean;
    mean += d * n2 / (n1 + n2);
    m2 += other.m2 + d * d * n1 * n2 / (n1 + n2);
    count += other.count;
}

double RunningStats::cv() const {
    if (count < 2 || mean <= 0.0) return 0.0;
    return std::sqrt(variance()) / mean;
}

double SimReport::total_growth_slope() const {
    double s = 0.0;
    for (const auto& onu : queues)
        for (const auto& q : onu) s += q.growth_slope;
    return s;
}

double ls_slope(const std::vector<double>& t, const std::vector<double>& y, std::size_t first) {
    const std::size_t n = std::min(t.size(), y.size());
    if (n < first + 2) return 0.0;
    double mt = 0.0, my = 0.0;
    for (std::size_t k = first; k < n; ++k) {
        mt += t[k];
        my += y[k];
    }
    const double m = static_cast<double>(n - first);
    mt /= m;
    my /= m;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = first; k < n; ++k) {
        sxy += (t[k] - mt) * (y[k] - my);
        sxx += (t[k] - mt) * (t[k] - mt);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t kind, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(kind), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

namespace {

enum StreamKind : std::uint64_t { kArrivalStream = 1, kRoutingStream = 2, kOrderStream = 3 };

// Lower value wins when events share a timestamp.
enum class EventKind : std::uint8_t { ServiceEnd = 0, OverheadEnd = 1, Arrival = 2, Frame = 3, Sample = 4 };

struct Event {
    double time;
    EventKind kind;
    std::uint64_t seq;
    int target;

    bool operator>(const Event& o) const {
        if (time != o.time) return time > o.time;
        if (kind != o.kind) return kind > o.kind;
        return seq > o.seq;
    }
};

class EventQueue {
   public:
    void push(double time, EventKind kind, int target) { heap_.push(Event{time, kind, next_seq_++, target}); }
    bool empty() const { return heap_.empty(); }
    Event pop() {
        Event e = heap_.top();
        heap_.pop();
        return e;
    }
    const Event& top() const { return heap_.top(); }

   private:
    std::priority_queue<Event, std::vector<Event>, std::greater<>> heap_;
    std::uint64_t next_seq_ = 0;
};

// Prefix sums over free-transmitter counts for weighted destination draws.
class Fenwick {
   public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0), n_(n) {
        while ((std::size_t{1} << log_) <= n_) ++log_;
    }

    void add(std::size_t i, int delta) {
        total_ += delta;
        for (std::size_t k = i + 1; k <= n_; k += k & (~k + 1)) tree_[k] += delta;
    }

    int total() const { return total_; }

    // Index whose cumulative range contains `target` (0 <= target < total).
    std::size_t find(int target) const {
        std::size_t pos = 0;
        for (int b = log_; b >= 0; --b) {
            const std::size_t next = pos + (std::size_t{1} << b);
            if (next <= n_ && tree_[next] <= target) {
                pos = next;
                target -= tree_[next];
            }
        }
        return pos;
    }

   private:
    std::vector<int> tree_;
    std::size_t n_;
    int log_ = 0;
    int total_ = 0;
};

struct Packet {
    double arrival;
    double size;
};

struct QueueState {
    int onu = 0;
    double grant = 0.0;
    double offered = 0.0;
    PacketLaw law;
    double rate = 0.0;
    std::mt19937_64 rng;
    std::deque<Packet> waiting;
    double waiting_work = 0.0;
    std::uint64_t claimed = 0;  // popped for transmission, not yet finished
    double claimed_work = 0.0;
    double credit = 0.0;  // frame mode deficit

    std::uint64_t arrivals = 0, served = 0;
    RunningStats sojourn;
    double sum_backlog_packets = 0.0, sum_backlog_work = 0.0;
    std::uint64_t samples = 0;
    bool runaway = false;

    double draw_size() {
        if (law.kind == PacketLaw::Kind::Deterministic) return law.mean;
        return std::exponential_distribution<double>(1.0 / law.mean)(rng);
    }
    double draw_gap() { return std::exponential_distribution<double>(rate)(rng); }
};

struct OnuState {
    int transmitters = 1;
    double overhead = 0.0;
    int present = 0;
    int first_queue = 0;
    int n_queues = 0;
    int next_queue = 0;
    std::optional<double> last_visit;
    std::optional<double> vacation_start;
    OnuReport report;
};

enum class Phase { InService, InOverhead, Idle };

struct Claim {
    int queue;
    std::uint64_t packets;
    double work;
};

struct WavelengthState {
    Phase phase = Phase::Idle;
    int onu = -1;
    double until = 0.0;
    std::vector<Claim> claims;
    std::mt19937_64 rng;
    std::vector<int> order;
    std::size_t position = 0;
};

class Engine {
   public:
    Engine(const PonConfig& config, const TrafficSpec& traffic, const SimOptions& options)
        : config_(config), opt_(options), free_(config.onus.size()) {
        if (!(options.horizon > 0.0)) throw SimError("horizon must be positive");
        if (!(options.warmup >= 0.0) || !(options.warmup < options.horizon))
            throw SimError("warmup must satisfy 0 <= warmup < horizon");
        if (!(options.window > 0.0)) throw SimError("window must be positive");
        const auto issues = validate(config, traffic);
        if (!issues.empty()) throw SimError("invalid input: " + issues.front());

        int flat = 0;
        for (std::size_t i = 0; i < config.onus.size(); ++i) {
            OnuState o;
            o.transmitters = config.onus[i].transmitters;
            o.overhead = config.onus[i].switch_overhead;
            o.first_queue = flat;
            o.n_queues = static_cast<int>(config.onus[i].queues.size());
            o.report.vacation_histogram.assign(static_cast<std::size_t>(std::max(1, options.vacation_bins)), 0);
            onus_.push_back(std::move(o));
            free_.add(i, config.onus[i].transmitters);
            for (std::size_t j = 0; j < config.onus[i].queues.size(); ++j, ++flat) {
                QueueState q;
                q.onu = static_cast<int>(i);
                q.grant = config.onus[i].queues[j].grant_limit;
                q.law = traffic.per_queue[i][j].packet;
                q.rate = traffic.per_queue[i][j].arrival.rate;
                q.offered = traffic.per_queue[i][j].intensity();
                q.rng = substream(options.seed, kArrivalStream, static_cast<std::uint64_t>(flat));
                queues_.push_back(std::move(q));
            }
        }

        span_ = options.horizon - options.warmup;
        const auto windows = static_cast<std::size_t>(std::floor(span_ / options.window + 1e-9));
        overhead_windows_.assign(windows, 0.0);
        const int samples = std::max(2, options.backlog_samples);
        for (int k = 0; k <= samples; ++k) sample_times_.push_back(options.warmup + span_ * k / samples);
        backlog_.assign(queues_.size(), {});
        for (auto& b : backlog_) b.reserve(sample_times_.size());
    }

    SimReport run_polling(const PollingPolicy& policy) {
        const int L = config_.n_wavelengths;
        wavelengths_.resize(static_cast<std::size_t>(L));
        periodic_ = std::holds_alternative<PeriodicPolling>(policy);
        for (int w = 0; w < L; ++w) {
            auto& wl = wavelengths_[static_cast<std::size_t>(w)];
            wl.rng = substream(opt_.seed, kRoutingStream, static_cast<std::uint64_t>(w));
            if (periodic_) wl.order = visit_order(std::get<PeriodicPolling>(policy), w);
        }
        schedule_initial_arrivals();
        schedule_samples();
        for (int w = 0; w < L; ++w) idle_.push_back(w);
        dispatch_idle(0.0);

        while (!events_.empty() && events_.top().time <= opt_.horizon) {
            const Event e = events_.pop();
            ++event_count_;
            switch (e.kind) {
                case EventKind::Arrival: on_arrival(e.time, e.target); break;
                case EventKind::ServiceEnd: on_service_end(e.target); break;
                case EventKind::OverheadEnd: on_overhead_end(e.time, e.target); break;
                case EventKind::Sample: on_sample(e.target); break;
                case EventKind::Frame: break;
            }
            if (opt_.audit) audit(e.time);
        }
        return finish(policy_name(policy));
    }

    SimReport run_frames(const GponFramePolicy& policy) {
        const auto issues = validate(config_, PollingPolicy{policy});
        if (!issues.empty()) throw SimError("invalid frame policy: " + issues.front());
        frame_ = policy;
        double ratio_sum = 0.0;
        for (double r : policy.overhead_ratios) ratio_sum += r;
        frame_capacity_ = config_.n_wavelengths * policy.frame * (1.0 - ratio_sum);
        for (std::size_t i = 0; i < onus_.size(); ++i)
            frame_caps_.push_back(onus_[i].transmitters * policy.frame * (1.0 - policy.overhead_ratios[i]));
        frame_overhead_ = ratio_sum;

        schedule_initial_arrivals();
        schedule_samples();
        events_.push(0.0, EventKind::Frame, 0);
        while (!events_.empty() && events_.top().time <= opt_.horizon) {
            const Event e = events_.pop();
            ++event_count_;
            switch (e.kind) {
                case EventKind::Arrival: on_arrival(e.time, e.target); break;
                case EventKind::Sample: on_sample(e.target); break;
                case EventKind::Frame: on_frame(e.time, e.target); break;
                default: break;
            }
        }
        std::fill(overhead_windows_.begin(), overhead_windows_.end(), frame_overhead_ * opt_.window * config_.n_wavelengths);
        overhead_total_ = frame_overhead_ * span_ * config_.n_wavelengths;
        return finish("gpon_frame");
    }

   private:
    std::vector<int> visit_order(const PeriodicPolling& policy, int w) {
        if (!policy.orders.empty()) return policy.orders[static_cast<std::size_t>(w)];
        std::vector<int> slots;
        for (std::size_t i = 0; i < onus_.size(); ++i)
            for (int k = 0; k < onus_[i].transmitters; ++k) slots.push_back(static_cast<int>(i));
        auto rng = substream(opt_.seed, kOrderStream, static_cast<std::uint64_t>(w));
        std::shuffle(slots.begin(), slots.end(), rng);
        return slots;
    }

    void schedule_initial_arrivals() {
        for (std::size_t q = 0; q < queues_.size(); ++q)
            if (queues_[q].rate > 0.0) events_.push(queues_[q].draw_gap(), EventKind::Arrival, static_cast<int>(q));
    }

    void schedule_samples() {
        for (std::size_t k = 0; k < sample_times_.size(); ++k)
            events_.push(sample_times_[k], EventKind::Sample, static_cast<int>(k));
    }

    void on_arrival(double now, int qi) {
        auto& q = queues_[static_cast<std::size_t>(qi)];
        const double size = q.draw_size();
        q.waiting.push_back({now, size});
        q.waiting_work += size;
        if (now >= opt_.warmup) ++q.arrivals;
        events_.push(now + q.draw_gap(), EventKind::Arrival, qi);

        // Zero-overhead idling: a parked wavelength answers new work directly.
        if (!parked_.empty()) {
            const auto onu = static_cast<std::size_t>(q.onu);
            if (onus_[onu].present < onus_[onu].transmitters) {
                const int w = parked_.front();
                parked_.pop_front();
                start_visit(now, w, onu);
            }
        }
    }

    void on_service_end(int w) {
        auto& wl = wavelengths_[static_cast<std::size_t>(w)];
        for (const auto& c : wl.claims) {
            auto& q = queues_[static_cast<std::size_t>(c.queue)];
            q.claimed -= c.packets;
            q.claimed_work -= c.work;
            if (q.claimed == 0) q.claimed_work = 0.0;
        }
        wl.claims.clear();
        wl.phase = Phase::InOverhead;
    }

    void on_overhead_end(double now, int w) {
        auto& wl = wavelengths_[static_cast<std::size_t>(w)];
        const auto i = static_cast<std::size_t>(wl.onu);
        release(now, i);
        wl.phase = Phase::Idle;
        wl.onu = -1;
        idle_.push_back(w);
        dispatch_idle(now);
    }

    void release(double now, std::size_t i) {
        auto& o = onus_[i];
        --o.present;
        free_.add(i, 1);
        if (o.present == 0) o.vacation_start = now;
    }

    void dispatch_idle(double now) {
        while (!idle_.empty() && free_.total() > 0) {
            const int w = idle_.front();
            idle_.pop_front();
            start_visit(now, w, choose_destination(w));
        }
    }

    std::size_t choose_destination(int w) {
        auto& wl = wavelengths_[static_cast<std::size_t>(w)];
        if (periodic_) {
            const std::size_t n = wl.order.size();
            for (std::size_t step = 0; step < n; ++step) {
                const auto onu = static_cast<std::size_t>(wl.order[wl.position]);
                wl.position = (wl.position + 1) % n;
                if (onus_[onu].present < onus_[onu].transmitters) return onu;
            }
            throw std::logic_error("periodic order has no ONU with a free transmitter");
        }
        std::uniform_int_distribution<int> pick(0, free_.total() - 1);
        return free_.find(pick(wl.rng));
    }

    void start_visit(double now, int w, std::size_t i) {
        auto& wl = wavelengths_[static_cast<std::size_t>(w)];
        auto& o = onus_[i];
        ++o.present;
        free_.add(i, -1);
        const bool measured = now >= opt_.warmup;

        if (o.present == 1 && o.vacation_start) {
            if (*o.vacation_start >= opt_.warmup) {
                const double v = now - *o.vacation_start;
                o.report.vacation.add(v);
                auto bin = static_cast<std::size_t>(v / opt_.vacation_bin);
                bin = std::min(bin, o.report.vacation_histogram.size() - 1);
                ++o.report.vacation_histogram[bin];
            }
            o.vacation_start.reset();
        }
        if (o.last_visit && *o.last_visit >= opt_.warmup) o.report.inter_visit.add(now - *o.last_visit);
        o.last_visit = now;
        if (measured) ++o.report.visits;

        // Gated: everything in `waiting` arrived no later than now.
        double served = 0.0;
        int last_served = -1;
        wl.claims.clear();
        for (int k = 0; k < o.n_queues; ++k) {
            const int local = (o.next_queue + k) % o.n_queues;
            const int qi = o.first_queue + local;
            auto& q = queues_[static_cast<std::size_t>(qi)];
            double used = 0.0;
            std::uint64_t count = 0;
            while (!q.waiting.empty()) {
                Packet& head = q.waiting.front();
                if (opt_.audit && head.arrival > now) throw std::logic_error("gated service took a packet arriving after visit start");
                const double room = q.grant - used;
                if (head.size > room) {
                    // Grants cap transmission time, so the head packet is split and its rest waits.
                    if (room > 1e-9 * q.grant) {
                        head.size -= room;
                        used = q.grant;
                    }
                    break;
                }
                used += head.size;
                ++count;
                if (head.arrival >= opt_.warmup) {
                    q.sojourn.add(now + served + used - head.arrival);
                    ++q.served;
                }
                q.waiting.pop_front();
            }
            if (used == 0.0) continue;
            if (opt_.audit && used > q.grant * (1.0 + 1e-12)) throw std::logic_error("grant limit exceeded");
            q.waiting_work = q.waiting.empty() ? 0.0 : q.waiting_work - used;
            q.claimed += count;
            q.claimed_work += used;
            wl.claims.push_back({qi, count, used});
            served += used;
            last_served = local;
        }
        if (last_served >= 0) o.next_queue = (last_served + 1) % o.n_queues;

        if (served == 0.0 && o.overhead == 0.0) {
            // Nothing to send and nothing to pay: park until new work shows up.
            --o.present;
            free_.add(i, 1);
            if (o.present == 0) o.vacation_start = now;
            wl.phase = Phase::Idle;
            wl.onu = -1;
            parked_.push_back(w);
            return;
        }

        wl.onu = static_cast<int>(i);
        const double service_end = now + served;
        const double end = service_end + o.overhead;
        add_overhead(service_end, end);
        if (measured) overhead_per_visit_.add(o.overhead);
        wl.until = end;
        if (served > 0.0) {
            wl.phase = Phase::InService;
            events_.push(service_end, EventKind::ServiceEnd, w);
        } else {
            wl.phase = Phase::InOverhead;
        }
        events_.push(end, EventKind::OverheadEnd, w);
    }

    void add_overhead(double t0, double t1) {
        t0 = std::max(t0, opt_.warmup);
        t1 = std::min(t1, opt_.horizon);
        if (t1 <= t0) return;
        overhead_total_ += t1 - t0;
        while (t0 < t1) {
            const double rel = (t0 - opt_.warmup) / opt_.window;
            auto k = static_cast<std::size_t>(rel);
            const double boundary = opt_.warmup + static_cast<double>(k + 1) * opt_.window;
            const double upto = std::min(t1, boundary);
            if (k < overhead_windows_.size()) overhead_windows_[k] += upto - t0;
            if (upto <= t0) break;
            t0 = upto;
        }
    }

    void on_sample(int k) {
        for (std::size_t qi = 0; qi < queues_.size(); ++qi) {
            auto& q = queues_[qi];
            const double work = q.waiting_work + q.claimed_work;
            const double packets = static_cast<double>(q.waiting.size() + q.claimed);
            backlog_[qi].push_back(work);
            q.sum_backlog_work += work;
            q.sum_backlog_packets += packets;
            ++q.samples;
            if (!q.runaway && work > opt_.runaway_backlog) {
                q.runaway = true;
                std::ostringstream os;
                os << "queue (" << q.onu << "," << qi - static_cast<std::size_t>(onus_[static_cast<std::size_t>(q.onu)].first_queue)
                   << ") backlog exceeded " << opt_.runaway_backlog << " s of work at t=" << sample_times_[static_cast<std::size_t>(k)]
                   << "; possible instability";
                warnings_.push_back(os.str());
            }
        }
    }

    void on_frame(double now, int index) {
        // Previous frame's transmissions are complete.
        for (auto& q : queues_) {
            q.claimed = 0;
            q.claimed_work = 0.0;
        }

        std::vector<AllocationDemand> demands;
        std::vector<std::size_t> who;
        for (std::size_t qi = 0; qi < queues_.size(); ++qi) {
            auto& q = queues_[qi];
            const double need = q.waiting_work - q.credit;
            if (q.waiting.empty() || need <= 0.0) continue;
            const auto& cfg = config_.onus[static_cast<std::size_t>(q.onu)]
                                  .queues[qi - static_cast<std::size_t>(onus_[static_cast<std::size_t>(q.onu)].first_queue)];
            demands.push_back({q.onu, need, cfg.weight});
            who.push_back(qi);
        }
        const auto alloc = max_min_allocate(demands, frame_caps_, frame_capacity_);
        for (std::size_t k = 0; k < who.size(); ++k) queues_[who[k]].credit += alloc[k];

        const double frame_end = now + frame_.frame;
        for (auto& q : queues_) {
            while (!q.waiting.empty() && q.waiting.front().size <= q.credit * (1.0 + 1e-12)) {
                const Packet p = q.waiting.front();
                q.waiting.pop_front();
                q.credit = std::max(0.0, q.credit - p.size);
                q.waiting_work -= p.size;
                q.claimed += 1;
                q.claimed_work += p.size;
                if (p.arrival >= opt_.warmup) {
                    q.sojourn.add(frame_end - p.arrival);
                    ++q.served;
                }
            }
            if (q.waiting.empty()) {
                q.waiting_work = 0.0;
                q.credit = 0.0;
            }
            if (q.claimed > 0) {
                auto& o = onus_[static_cast<std::size_t>(q.onu)];
                if (now >= opt_.warmup && o.last_visit != now) ++o.report.visits;
                o.last_visit = now;
            }
        }
        events_.push(frame_end, EventKind::Frame, index + 1);
    }

    void audit(double now) {
        int present = 0;
        for (std::size_t i = 0; i < onus_.size(); ++i) {
            const auto& o = onus_[i];
            if (o.present < 0 || o.present > o.transmitters) throw std::logic_error("transmitter cap violated");
            present += o.present;
        }
        int active = 0;
        for (const auto& wl : wavelengths_) {
            if (wl.phase == Phase::Idle) continue;
            ++active;
            if (wl.until < now) throw std::logic_error("wavelength busy past its release time");
        }
        if (active != present) throw std::logic_error("wavelength/transmitter accounting mismatch");
        // Idle wavelengths wait only for a transmitter or, when parked, for work.
        if (!idle_.empty() && free_.total() > 0) throw std::logic_error("idle wavelength with a free transmitter");
        if (!parked_.empty())
            for (std::size_t i = 0; i < onus_.size(); ++i) {
                if (onus_[i].present >= onus_[i].transmitters || onus_[i].overhead > 0.0) continue;
                for (int k = 0; k < onus_[i].n_queues; ++k)
                    if (!queues_[static_cast<std::size_t>(onus_[i].first_queue + k)].waiting.empty())
                        throw std::logic_error("parked wavelength while a free ONU has backlog");
            }
    }

    SimReport finish(std::string policy) {
        SimReport r;
        r.policy = std::move(policy);
        r.horizon = opt_.horizon;
        r.warmup = opt_.warmup;
        r.window = opt_.window;
        r.vacation_bin = opt_.vacation_bin;
        r.events = event_count_;
        r.warnings = warnings_;
        r.sample_times = sample_times_;
        r.backlog_work = backlog_;
        r.overhead_per_visit = overhead_per_visit_;
        const double L = config_.n_wavelengths;
        for (double v : overhead_windows_) r.overhead_series.push_back(std::clamp(v / (L * opt_.window), 0.0, 1.0));
        r.overhead_fraction = std::clamp(overhead_total_ / (L * span_), 0.0, 1.0);

        // Slope over the second half of the measured span.
        const std::size_t half = sample_times_.size() / 2;
        r.queues.resize(onus_.size());
        for (std::size_t i = 0; i < onus_.size(); ++i) {
            r.onus.push_back(onus_[i].report);
            for (int k = 0; k < onus_[i].n_queues; ++k) {
                const auto qi = static_cast<std::size_t>(onus_[i].first_queue + k);
                const auto& q = queues_[qi];
                QueueReport qr;
                qr.offered_load = q.offered;
                qr.arrivals = q.arrivals;
                qr.served = q.served;
                qr.mean_sojourn = q.sojourn.mean;
                if (q.samples > 0) {
                    qr.mean_backlog_packets = q.sum_backlog_packets / static_cast<double>(q.samples);
                    qr.mean_backlog_work = q.sum_backlog_work / static_cast<double>(q.samples);
                }
                qr.final_backlog_work = backlog_[qi].empty() ? 0.0 : backlog_[qi].back();
                qr.growth_slope = ls_slope(sample_times_, backlog_[qi], half);
                r.queues[i].push_back(qr);
            }
        }
        return r;
    }

    const PonConfig& config_;
    SimOptions opt_;
    double span_ = 0.0;
    EventQueue events_;
    std::vector<QueueState> queues_;
    std::vector<OnuState> onus_;
    std::vector<WavelengthState> wavelengths_;
    Fenwick free_;
    std::deque<int> idle_;
    std::deque<int> parked_;
    bool periodic_ = false;

    GponFramePolicy frame_;
    double frame_capacity_ = 0.0;
    double frame_overhead_ = 0.0;
    std::vector<double> frame_caps_;

    std::vector<double> overhead_windows_;
    double overhead_total_ = 0.0;
    RunningStats overhead_per_visit_;
    std::vector<double> sample_times_;
    std::vector<std::vector<double>> backlog_;
    std::vector<std::string> warnings_;
    std::uint64_t event_count_ = 0;
};

}  // namespace

SimReport run(const PonConfig& config, const TrafficSpec& traffic, const PollingPolicy& policy,
              const SimOptions& options) {
    if (std::holds_alternative<GponFramePolicy>(policy))
        return run_gpon_frame(config, traffic, std::get<GponFramePolicy>(policy), options);
    const auto issues = validate(config, policy);
    if (!issues.empty()) throw SimError("invalid policy: " + issues.front());
    Engine engine(config, traffic, options);
    return engine.run_polling(policy);
}

SimReport run_gpon_frame(const PonConfig& config, const TrafficSpec& traffic, const GponFramePolicy& policy,
                         const SimOptions& options) {
    Engine engine(config, traffic, options);
    return engine.run_frames(policy);
}

std::vector<double> max_min_allocate(const std::vector<AllocationDemand>& demands, const std::vector<double>& onu_caps,
                                     double capacity) {
    const std::size_t n = demands.size();
    std::vector<double> alloc(n, 0.0);
    std::vector<bool> active(n, false);
    std::vector<double> used(onu_caps.size(), 0.0);
    std::vector<double> onu_weight(onu_caps.size(), 0.0);
    std::size_t live = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (demands[k].demand > 0.0 && demands[k].weight > 0.0) {
            active[k] = true;
            ++live;
        }
    }
    double remaining = capacity;
    constexpr double eps = 1e-15;

    while (live > 0 && remaining > eps) {
        std::fill(onu_weight.begin(), onu_weight.end(), 0.0);
        double total_weight = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (active[k]) {
                onu_weight[static_cast<std::size_t>(demands[k].onu)] += demands[k].weight;
                total_weight += demands[k].weight;
            }
        // Largest common increase of the fair level before something saturates.
        double step = remaining / total_weight;
        for (std::size_t k = 0; k < n; ++k)
            if (active[k]) step = std::min(step, (demands[k].demand - alloc[k]) / demands[k].weight);
        for (std::size_t i = 0; i < onu_caps.size(); ++i)
            if (onu_weight[i] > 0.0) step = std::min(step, (onu_caps[i] - used[i]) / onu_weight[i]);
        step = std::max(step, 0.0);

        for (std::size_t k = 0; k < n; ++k)
            if (active[k]) {
                const double inc = step * demands[k].weight;
                alloc[k] += inc;
                used[static_cast<std::size_t>(demands[k].onu)] += inc;
                remaining -= inc;
            }
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k]) continue;
            const auto i = static_cast<std::size_t>(demands[k].onu);
            if (demands[k].demand - alloc[k] <= eps * std::max(1.0, demands[k].demand) ||
                onu_caps[i] - used[i] <= eps * std::max(1.0, onu_caps[i])) {
                active[k] = false;
                --live;
            }
        }
    }
    return alloc;
}

VacationReport measure_vacations(const SimReport& report) {
    VacationReport out;
    RunningStats pooled;
    for (const auto& onu : report.onus) {
        out.per_onu.push_back({onu.vacation.count, onu.vacation.mean, onu.vacation.cv()});
        pooled.merge(onu.vacation);
    }
    out.pooled = {pooled.count, pooled.mean, pooled.cv()};
    return out;
}

std::vector<std::filesystem::path> write_report_csv(const SimReport& report, const std::filesystem::path& dir,
                                                    const std::string& prefix) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto open = [&](const std::string& suffix) {
        auto path = dir / (prefix + "_" + suffix + ".csv");
        std::ofstream out(path);
        if (!out) throw SimError("cannot write " + path.string());
        out << std::setprecision(12);
        written.push_back(path);
        return out;
    };

    {
        auto out = open("queues");
        out << "onu,queue,offered_load,mean_backlog_packets,mean_backlog_work_s,growth_slope,mean_sojourn_s,"
               "arrivals,served\n";
        for (std::size_t i = 0; i < report.queues.size(); ++i)
            for (std::size_t j = 0; j < report.queues[i].size(); ++j) {
                const auto& q = report.queues[i][j];
                out << i << ',' << j << ',' << q.offered_load << ',' << q.mean_backlog_packets << ','
                    << q.mean_backlog_work << ',' << q.growth_slope << ',' << q.mean_sojourn << ',' << q.arrivals
                    << ',' << q.served << '\n';
            }
    }
    {
        auto out = open("cycles");
        out << "onu,visits,intervals,mean_intervisit_s,var_intervisit_s2\n";
        for (std::size_t i = 0; i < report.onus.size(); ++i) {
            const auto& o = report.onus[i];
            out << i << ',' << o.visits << ',' << o.inter_visit.count << ',' << o.inter_visit.mean << ','
                << o.inter_visit.variance() << '\n';
        }
    }
    {
        auto out = open("vacations");
        out << "onu,count,mean_s,var_s2,cv";
        const std::size_t bins = report.onus.empty() ? 0 : report.onus.front().vacation_histogram.size();
        for (std::size_t b = 0; b < bins; ++b) out << ",bin_" << b;
        out << '\n';
        for (std::size_t i = 0; i < report.onus.size(); ++i) {
            const auto& v = report.onus[i].vacation;
            out << i << ',' << v.count << ',' << v.mean << ',' << v.variance() << ',' << v.cv();
            for (auto c : report.onus[i].vacation_histogram) out << ',' << c;
            out << '\n';
        }
    }
    {
        auto out = open("overhead");
        out << "window_start_s,overhead_fraction\n";
        for (std::size_t k = 0; k < report.overhead_series.size(); ++k)
            out << report.warmup + static_cast<double>(k) * report.window << ',' << report.overhead_series[k] << '\n';
    }
    {
        auto out = open("backlog");
        out << "time_s";
        for (std::size_t i = 0; i < report.queues.size(); ++i)
            for (std::size_t j = 0; j < report.queues[i].size(); ++j) out << ",q" << i << '_' << j;
        out << '\n';
        for (std::size_t k = 0; k < report.sample_times.size(); ++k) {
            out << report.sample_times[k];
            for (const auto& series : report.backlog_work) out << ',' << (k < series.size() ? series[k] : 0.0);
            out << '\n';
        }
    }
    return written;
}

}  // namespace wdmpon
