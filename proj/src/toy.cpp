#include "wdmpon/toy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "wdmpon/sim.hpp"

namespace wdmpon {

namespace {

enum ToyStream : std::uint64_t { kToyEvents = 101, kToyInitial = 102, kToyRouting = 103 };

// Set of small integers with O(1) insert, erase and uniform draw.
class IndexSet {
   public:
    explicit IndexSet(std::size_t n) : pos_(n, kAbsent) {}

    bool contains(std::size_t x) const { return pos_[x] != kAbsent; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }

    void insert(std::size_t x) {
        if (contains(x)) return;
        pos_[x] = items_.size();
        items_.push_back(x);
    }

    void erase(std::size_t x) {
        const std::size_t p = pos_[x];
        if (p == kAbsent) return;
        const std::size_t last = items_.back();
        items_[p] = last;
        pos_[last] = p;
        items_.pop_back();
        pos_[x] = kAbsent;
    }

    template <typename Rng>
    std::size_t draw(Rng& rng) const {
        std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
        return items_[pick(rng)];
    }

   private:
    static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
    std::vector<std::size_t> items_;
    std::vector<std::size_t> pos_;
};

}  // namespace

double ToyReport::sup_deviation(double level) const {
    return std::max(max_busy_fraction - level, level - min_busy_fraction);
}

ToyReport run_homogeneous(const ToyOptions& opt) {
    if (!(opt.mu > 0.0)) throw std::invalid_argument("service rate mu must be positive");
    if (!(opt.lambda >= 0.0)) throw std::invalid_argument("arrival rate lambda must be nonnegative");
    if (opt.n_queues < 1 || opt.n_servers < 1) throw std::invalid_argument("need at least one queue and one server");
    if (!(opt.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");

    const auto n = static_cast<std::size_t>(opt.n_queues);
    const auto servers = static_cast<std::size_t>(opt.n_servers);
    std::vector<int> q(n, 0);

    auto init_rng = substream(opt.seed, kToyInitial, 0);
    if (const auto* ex = std::get_if<ExplicitStart>(&opt.initial)) {
        if (ex->lengths.size() != n) throw std::invalid_argument("explicit start needs one length per queue");
        for (std::size_t k = 0; k < n; ++k) {
            if (ex->lengths[k] < 0) throw std::invalid_argument("queue lengths must be nonnegative");
            q[k] = ex->lengths[k];
        }
    } else {
        const double rho = opt.lambda / opt.mu;
        if (rho >= 1.0) throw std::invalid_argument("geometric start needs lambda < mu");
        std::geometric_distribution<int> geo(1.0 - rho);
        for (auto& x : q) x = geo(init_rng);
    }

    IndexSet busy(n), waiting(n);
    std::vector<std::size_t> nonempty;
    for (std::size_t k = 0; k < n; ++k)
        if (q[k] > 0) nonempty.push_back(k);
    std::shuffle(nonempty.begin(), nonempty.end(), init_rng);
    for (std::size_t k = 0; k < nonempty.size(); ++k) {
        if (k < servers)
            busy.insert(nonempty[k]);
        else
            waiting.insert(nonempty[k]);
    }

    auto events = substream(opt.seed, kToyEvents, 0);
    auto routing = substream(opt.seed, kToyRouting, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> any_queue(0, n - 1);

    ToyReport r;
    const int points = std::max(1, opt.grid_points);
    for (int k = 0; k <= points; ++k) r.grid_times.push_back(opt.horizon * k / points);
    std::size_t next_grid = 0;

    auto fraction = [&] { return static_cast<double>(busy.size() + waiting.size()) / static_cast<double>(n); };
    auto observe = [&](double t) {
        const double a = fraction();
        r.max_busy_fraction = std::max(r.max_busy_fraction, a);
        r.min_busy_fraction = std::min(r.min_busy_fraction, a);
        if (!r.drain_time && busy.size() + waiting.size() < servers) r.drain_time = t;
    };
    r.max_busy_fraction = r.min_busy_fraction = fraction();
    observe(0.0);

    const double arrival_rate = opt.lambda * static_cast<double>(n);
    double t = 0.0;
    for (;;) {
        const double total = arrival_rate + opt.mu * static_cast<double>(busy.size());
        const double next = total > 0.0 ? t + std::exponential_distribution<double>(total)(events) : opt.horizon * 2;
        while (next_grid < r.grid_times.size() && r.grid_times[next_grid] <= std::min(next, opt.horizon)) {
            r.busy_fraction.push_back(fraction());
            ++next_grid;
        }
        if (next > opt.horizon) break;
        t = next;
        ++r.events;

        if (unit(events) * total < arrival_rate) {
            const std::size_t k = any_queue(events);
            if (q[k]++ == 0) {
                if (busy.size() < servers)
                    busy.insert(k);
                else
                    waiting.insert(k);
            }
        } else {
            const std::size_t k = busy.draw(events);
            busy.erase(k);
            if (--q[k] > 0) waiting.insert(k);
            if (!waiting.empty()) {
                const std::size_t dest = waiting.draw(routing);
                waiting.erase(dest);
                busy.insert(dest);
            }
        }
        observe(t);
    }
    while (r.busy_fraction.size() < r.grid_times.size()) r.busy_fraction.push_back(fraction());

    const int longest = *std::max_element(q.begin(), q.end());
    r.marginal.assign(static_cast<std::size_t>(longest) + 1, 0);
    for (int x : q) ++r.marginal[static_cast<std::size_t>(x)];
    return r;
}

double tv_distance_geometric(const std::vector<std::uint64_t>& histogram, double rho) {
    std::uint64_t total = 0;
    for (auto c : histogram) total += c;
    if (total == 0) return 1.0;
    double sum = 0.0, covered = 0.0;
    double p = 1.0 - rho;
    for (std::size_t k = 0; k < histogram.size(); ++k) {
        sum += std::abs(static_cast<double>(histogram[k]) / static_cast<double>(total) - p);
        covered += p;
        p *= rho;
    }
    // Geometric mass beyond the longest observed queue.
    sum += std::max(0.0, 1.0 - covered);
    return 0.5 * sum;
}

}  // namespace wdmpon
