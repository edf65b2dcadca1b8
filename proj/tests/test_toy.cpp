#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "wdmpon/toy.hpp"

using namespace wdmpon;

TEST_SUITE("toy") {
    TEST_CASE("geometric distance is zero for an exact histogram") {
        // 1 - rho = 0.5: masses 1/2, 1/4, 1/8, ... truncated at k = 3 leaves 1/16 unmatched
        const std::vector<std::uint64_t> h{8, 4, 2, 2};
        CHECK(tv_distance_geometric(h, 0.5) == doctest::Approx(0.5 * (1.0 / 16 + 1.0 / 16)).epsilon(1e-12));
        CHECK(tv_distance_geometric({100}, 0.0) == doctest::Approx(0.0));
        CHECK(tv_distance_geometric({0, 100}, 0.0) == doctest::Approx(1.0));
    }

    TEST_CASE("no arrivals drain every queue") {
        ToyOptions o;
        o.n_queues = 200;
        o.n_servers = 100;
        o.lambda = 0.0;
        o.horizon = 100.0;
        o.initial = ExplicitStart{std::vector<int>(200, 2)};
        const auto r = run_homogeneous(o);
        CHECK(r.busy_fraction.front() == doctest::Approx(1.0));
        CHECK(r.busy_fraction.back() == doctest::Approx(0.0));
        REQUIRE(r.drain_time);
        CHECK(*r.drain_time > 0.0);
        REQUIRE(r.marginal.size() == 1);
        CHECK(r.marginal[0] == 200);
    }

    TEST_CASE("fraction of non-empty queues stays near rho") {
        ToyOptions o;
        o.n_queues = 1000;
        o.n_servers = 500;
        o.lambda = 0.3;
        o.horizon = 20.0;
        o.seed = 4;
        const auto r = run_homogeneous(o);
        CHECK(r.sup_deviation(0.3) < 0.05);
        CHECK(r.grid_times.size() == r.busy_fraction.size());
        CHECK(tv_distance_geometric(r.marginal, 0.3) < 0.05);
    }

    TEST_CASE("same seed, same trajectory") {
        ToyOptions o;
        o.n_queues = 100;
        o.n_servers = 40;
        o.lambda = 0.2;
        o.horizon = 10.0;
        o.seed = 17;
        const auto a = run_homogeneous(o);
        const auto b = run_homogeneous(o);
        CHECK(a.events == b.events);
        CHECK(a.busy_fraction == b.busy_fraction);
        CHECK(a.marginal == b.marginal);
    }

    TEST_CASE("invalid parameters") {
        ToyOptions o;
        o.n_queues = 10;
        o.n_servers = 5;
        o.horizon = 1.0;
        o.mu = 0.0;
        CHECK_THROWS_AS(run_homogeneous(o), std::invalid_argument);
        o.mu = 1.0;
        o.lambda = -1.0;
        CHECK_THROWS_AS(run_homogeneous(o), std::invalid_argument);
        o.lambda = 0.1;
        o.initial = ExplicitStart{{1, 2}};
        CHECK_THROWS_AS(run_homogeneous(o), std::invalid_argument);
    }
}
