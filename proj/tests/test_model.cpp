#include <doctest.h>

#include <algorithm>
#include <string>

#include "wdmpon/model.hpp"

using namespace wdmpon;

namespace {

bool mentions(const std::vector<std::string>& issues, const std::string& needle) {
    return std::any_of(issues.begin(), issues.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_SUITE("model") {
    TEST_CASE("consistent uniform config has no violations") {
        const auto cfg = uniform_config(10, 5, 1.2e-6, 8e-6);
        const auto tr = uniform_traffic(cfg, 0.3, PacketLaw::deterministic(8e-6));
        CHECK(validate(cfg, tr).empty());
        CHECK(cfg.total_transmitters() == 10);
        CHECK(cfg.total_queues() == 10);
    }

    TEST_CASE("too many transmitters at one ONU") {
        auto cfg = uniform_config(10, 5, 1.2e-6, 8e-6);
        cfg.onus[3].transmitters = 7;
        const auto tr = uniform_traffic(cfg, 0.1, PacketLaw::deterministic(8e-6));
        CHECK(mentions(validate(cfg, tr), "transmitters exceed wavelengths at ONU 3"));
    }

    TEST_CASE("traffic shape must match the config") {
        const auto cfg5 = uniform_config(5, 2, 1e-6, 8e-6);
        const auto tr4 = uniform_traffic(uniform_config(4, 2, 1e-6, 8e-6), 0.1, PacketLaw::deterministic(8e-6));
        CHECK_FALSE(validate(cfg5, tr4).empty());
    }

    TEST_CASE("negative overhead and nonpositive grants are rejected") {
        auto cfg = uniform_config(3, 1, 1e-6, 8e-6);
        cfg.onus[0].switch_overhead = -1e-9;
        cfg.onus[1].queues[0].grant_limit = 0.0;
        const auto tr = uniform_traffic(cfg, 0.1, PacketLaw::deterministic(8e-6));
        CHECK(validate(cfg, tr).size() >= 2);
    }

    TEST_CASE("zero overhead is allowed") {
        const auto cfg = uniform_config(3, 1, 0.0, 8e-6);
        CHECK(validate(cfg, uniform_traffic(cfg, 0.1, PacketLaw::deterministic(8e-6))).empty());
    }

    TEST_CASE("load sums") {
        TrafficSpec t;
        const auto law = PacketLaw::exponential(8e-6);
        t.per_queue = {{QueueTraffic::from_intensity(0.2, law), QueueTraffic::from_intensity(0.3, law)},
                       {QueueTraffic::from_intensity(0.1, law)}};
        CHECK(onu_load(t, 0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(onu_load(t, 1) == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(total_load(t) == doctest::Approx(0.6).epsilon(1e-12));

        const auto cfg = uniform_config(20, 10, 1e-6, 8e-6);
        CHECK(total_load(uniform_traffic(cfg, 0.3, law)) == doctest::Approx(6.0).epsilon(1e-12));
        CHECK(total_load(uniform_traffic(cfg, 0.0, law)) == 0.0);
    }

    TEST_CASE("intensity is rate times mean size") {
        const auto q = QueueTraffic::from_intensity(0.37, PacketLaw::deterministic(12e-6));
        CHECK(q.arrival.rate == doctest::Approx(0.37 / 12e-6).epsilon(1e-12));
        CHECK(q.intensity() == doctest::Approx(0.37).epsilon(1e-12));
        const auto cfg = uniform_config(4, 2, 1e-6, 8e-6);
        const auto t = scaled(uniform_traffic(cfg, 0.2, PacketLaw::deterministic(8e-6)), 1.5);
        CHECK(total_load(t) == doctest::Approx(1.2).epsilon(1e-12));
    }

    TEST_CASE("periodic orders must cover every transmitter slot") {
        auto cfg = uniform_config(3, 2, 1e-6, 8e-6);
        CHECK(validate(cfg, PeriodicPolling{{{0, 1, 2}, {2, 0, 1}}}).empty());
        CHECK_FALSE(validate(cfg, PeriodicPolling{{{0, 1}, {2, 0, 1}}}).empty());
        CHECK_FALSE(validate(cfg, PeriodicPolling{{{0, 1, 2}}}).empty());
        CHECK_FALSE(validate(cfg, PeriodicPolling{{{0, 0, 1, 2}, {0, 1, 2}}}).empty());
        cfg.onus[0].transmitters = 2;
        CHECK(validate(cfg, PeriodicPolling{{{0, 0, 1, 2}, {0, 1, 2}}}).empty());
        CHECK(validate(cfg, PeriodicPolling{}).empty());
    }

    TEST_CASE("frame ratios need one entry per ONU and a sum below one") {
        const auto cfg = uniform_config(4, 2, 0.0, 8e-6);
        CHECK(validate(cfg, GponFramePolicy{125e-6, {0.1, 0.1, 0.1, 0.1}}).empty());
        CHECK_FALSE(validate(cfg, GponFramePolicy{125e-6, {0.1, 0.1}}).empty());
        CHECK_FALSE(validate(cfg, GponFramePolicy{125e-6, {0.3, 0.3, 0.3, 0.3}}).empty());
        CHECK(policy_name(GponFramePolicy{}) == "gpon_frame");
        CHECK(policy_name(RandomPolling{}) == "random");
        CHECK(policy_name(PeriodicPolling{}) == "periodic");
    }
}
