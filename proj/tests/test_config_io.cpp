#include <doctest.h>

#include <cmath>
#include <sstream>

#include "wdmpon/config_io.hpp"

using namespace wdmpon;

namespace {

Scenario parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in, "test.ini");
}

const char* kTwoClass = R"(
[pon]
wavelengths = 10
line_rate = 1Gbps

[onus]
count = 3
class = 1
switch_overhead = 1.2us
grant = 1000B
packet = 1000B
load = 0.4

[onus]
count = 2
class = 2
transmitters = 2
switch_overhead = 2.5us
grant = inf
packet = 500B
packet_law = exponential
rate = 10000/s

[queue]
grant = 16us
load = 0.1
)";

}  // namespace

TEST_SUITE("config_io") {
    TEST_CASE("duration units") {
        CHECK(parse_duration("1.2us") == doctest::Approx(1.2e-6).epsilon(1e-15));
        CHECK(parse_duration("1.2\xC2\xB5s") == doctest::Approx(1.2e-6).epsilon(1e-15));
        CHECK(parse_duration("125 us") == doctest::Approx(125e-6).epsilon(1e-15));
        CHECK(parse_duration("3ms") == doctest::Approx(3e-3).epsilon(1e-15));
        CHECK(parse_duration("40ns") == doctest::Approx(40e-9).epsilon(1e-15));
        CHECK(parse_duration("2s") == 2.0);
        CHECK(parse_duration("1000B", 1e9) == doctest::Approx(8e-6).epsilon(1e-15));
        CHECK_THROWS_AS(parse_duration("1000B"), ConfigError);
        CHECK_THROWS_AS(parse_duration("1.2"), ConfigError);
        CHECK_THROWS_AS(parse_duration("1.2 parsecs"), ConfigError);
    }

    TEST_CASE("bit rates") {
        CHECK(parse_bit_rate("1Gbps") == 1e9);
        CHECK(parse_bit_rate("2.5 Mbps") == 2.5e6);
        CHECK(parse_bit_rate("10kbps") == 1e4);
        CHECK_THROWS_AS(parse_bit_rate("10"), ConfigError);
    }

    TEST_CASE("groups, classes and queue sections") {
        const auto s = parse(kTwoClass);
        CHECK(s.config.n_onus == 5);
        CHECK(s.config.n_wavelengths == 10);
        CHECK(s.n_classes() == 2);
        CHECK(s.queue_class[0][0] == 0);
        CHECK(s.queue_class[4][0] == 1);
        CHECK(s.config.onus[0].switch_overhead == doctest::Approx(1.2e-6));
        CHECK(s.config.onus[0].queues[0].grant_limit == doctest::Approx(8e-6));
        CHECK(s.traffic.per_queue[0][0].intensity() == doctest::Approx(0.4));
        CHECK(s.config.onus[3].transmitters == 2);
        REQUIRE(s.config.onus[3].queues.size() == 1);
        CHECK(s.config.onus[3].queues[0].grant_limit == doctest::Approx(16e-6));
        CHECK(s.traffic.per_queue[3][0].intensity() == doctest::Approx(0.1));
        CHECK(s.traffic.per_queue[3][0].packet.kind == PacketLaw::Kind::Exponential);
        CHECK(s.traffic.per_queue[3][0].packet.mean == doctest::Approx(4e-6));
    }

    TEST_CASE("unlimited grant and packet rates") {
        const auto s = parse(R"(
[pon]
wavelengths = 2
[onus]
count = 2
switch_overhead = 1us
grant = inf
packet = 8us
rate = 50000/s
)");
        CHECK(std::isinf(s.config.onus[0].queues[0].grant_limit));
        CHECK(s.traffic.per_queue[1][0].intensity() == doctest::Approx(0.4));
    }

    TEST_CASE("format and parse round-trip exactly") {
        const auto a = parse(kTwoClass);
        const auto b = parse(format_scenario(a));
        REQUIRE(b.config.n_onus == a.config.n_onus);
        CHECK(b.config.n_wavelengths == a.config.n_wavelengths);
        CHECK(b.queue_class == a.queue_class);
        for (std::size_t i = 0; i < a.config.onus.size(); ++i) {
            CHECK(b.config.onus[i].transmitters == a.config.onus[i].transmitters);
            CHECK(b.config.onus[i].switch_overhead == a.config.onus[i].switch_overhead);
            for (std::size_t j = 0; j < a.config.onus[i].queues.size(); ++j) {
                CHECK(b.config.onus[i].queues[j].grant_limit == a.config.onus[i].queues[j].grant_limit);
                CHECK(b.traffic.per_queue[i][j].arrival.rate == a.traffic.per_queue[i][j].arrival.rate);
                CHECK(b.traffic.per_queue[i][j].packet.mean == a.traffic.per_queue[i][j].packet.mean);
                CHECK(b.traffic.per_queue[i][j].packet.kind == a.traffic.per_queue[i][j].packet.kind);
            }
        }
    }

    TEST_CASE("policies") {
        const auto frame = parse(R"(
[pon]
wavelengths = 2
[policy]
kind = gpon_frame
frame = 125us
[onus]
count = 4
overhead_ratio = 0.01
grant = 8us
packet = 8us
load = 0.1
)");
        const auto* f = std::get_if<GponFramePolicy>(&frame.policy);
        REQUIRE(f);
        CHECK(f->frame == doctest::Approx(125e-6));
        CHECK(f->overhead_ratios.size() == 4);
        CHECK(format_scenario(parse(format_scenario(frame))) == format_scenario(frame));

        const auto periodic = parse(R"(
[pon]
wavelengths = 2
[policy]
kind = periodic
order = 0 1 2
order = 2 1 0
[onus]
count = 3
grant = 8us
packet = 8us
load = 0.1
)");
        const auto* p = std::get_if<PeriodicPolling>(&periodic.policy);
        REQUIRE(p);
        CHECK(p->orders == std::vector<std::vector<int>>{{0, 1, 2}, {2, 1, 0}});
    }

    TEST_CASE("errors name the file and line") {
        try {
            parse("[pon]\nwavelengths = 2\n[onus]\ncount = 1\ngrant = 8us\npacket = 8us\nload = 0.1\nbogus = 1\n");
            FAIL("expected an error");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("test.ini:8") != std::string::npos);
        }
        CHECK_THROWS_AS(parse("[pon]\nwavelengths = 2\n"), ConfigError);
        CHECK_THROWS_AS(parse("[onus]\ncount = 1\n"), ConfigError);
        CHECK_THROWS_AS(parse("[pon]\nwavelengths = 2\n[onus]\ngrant = 8us\npacket = 8us\nload = 0.1\nrate = 5/s\n"),
                        ConfigError);
        CHECK_THROWS_AS(parse("[pon]\nwavelengths = 1\n[onus]\ntransmitters = 2\ngrant = 8us\npacket = 8us\nload = 0.1\n"),
                        ConfigError);
        CHECK_THROWS_AS(load_scenario("/nonexistent/file.ini"), ConfigError);
    }
}
