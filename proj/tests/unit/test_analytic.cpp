#include <doctest.h>

#include "dpusim/analytic.hpp"
#include "dpusim/errors.hpp"
#include "test_helpers.hpp"

using namespace dpusim;
using dpusim::testing::make_scenario;
using dpusim::testing::params_of;

namespace {
ValidatedScenario vs(const ScenarioConfig& c) { return ValidatedScenario::make(c); }
}

TEST_CASE("single thread period is the stage sum when the camera keeps up") {
    const auto c = make_scenario({{Resource::Cpu, 30.0}, {Resource::Dpu, 10.0}});
    CHECK(single_thread_period(vs(c), params_of(c)) == doctest::Approx(40.0));
}

TEST_CASE("a slow camera stretches the single thread period") {
    auto c = make_scenario({{Resource::Cpu, 30.0}, {Resource::Dpu, 10.0}}, 1, 1, 60.0);
    CHECK(single_thread_period(vs(c), params_of(c)) == doctest::Approx(60.0));
}

TEST_CASE("worker bound binds the worked example") {
    const auto c = make_scenario({{Resource::Cpu, 30.0}, {Resource::Dpu, 10.0}}, 2, 2);
    const auto b = throughput_upper_bound(vs(c), params_of(c));
    CHECK(b.fps == doctest::Approx(50.0));
    CHECK(b.binding_label() == "worker");
}

TEST_CASE("serialized host makes the cpu the bottleneck") {
    auto c = make_scenario({{Resource::Cpu, 30.0}, {Resource::Dpu, 10.0}}, 8, 4);
    c.host.serialize_compute = true;
    const auto b = throughput_upper_bound(vs(c), params_of(c));
    CHECK(b.fps == doctest::Approx(1000.0 / 30.0));
    CHECK(b.binding_label() == "cpu");
}

TEST_CASE("dpu bound for a dpu-only pipeline") {
    const auto c = make_scenario({{Resource::Dpu, 10.0}}, 4, 4);
    const auto b = throughput_upper_bound(vs(c), params_of(c));
    CHECK(b.fps == doctest::Approx(100.0));
    CHECK(b.binding_label() == "dpu");
}

TEST_CASE("ties report every binding constraint") {
    // One worker, single dpu stage: worker and dpu bounds coincide.
    const auto c = make_scenario({{Resource::Dpu, 10.0}}, 1, 1);
    const auto b = throughput_upper_bound(vs(c), params_of(c));
    CHECK(b.fps == doctest::Approx(100.0));
    CHECK(b.binding.size() == 2);
    CHECK(b.binding_label() == "dpu+worker");
}

TEST_CASE("camera bound") {
    const auto c = make_scenario({{Resource::Cpu, 1.0}}, 4, 4, 20.0);
    const auto b = throughput_upper_bound(vs(c), params_of(c));
    CHECK(b.fps == doctest::Approx(50.0));
    CHECK(b.binding_label() == "camera");
}

TEST_CASE("predicted busy fractions") {
    const auto c = make_scenario({{Resource::Cpu, 30.0}, {Resource::Dpu, 10.0}}, 2, 2);
    const auto busy = predicted_busy(vs(c), params_of(c), 25.0);
    CHECK(busy.at({"dpu", "T2"}) == doctest::Approx(0.25));
    CHECK(busy.at({"cpu", "s0"}) == doctest::Approx(25.0 * 0.030 / 2));

    const auto at50 = predicted_busy(vs(c), params_of(c), 50.0);
    CHECK(at50.at({"cpu", "s0"}) == doctest::Approx(0.75));
}

TEST_CASE("predicted busy rejects rates above the bound") {
    const auto c = make_scenario({{Resource::Cpu, 30.0}, {Resource::Dpu, 10.0}}, 2, 2);
    CHECK_THROWS_AS(predicted_busy(vs(c), params_of(c), 51.0), ModelError);
    CHECK_THROWS_AS(predicted_busy(vs(c), params_of(c), 0.0), ModelError);
}

TEST_CASE("saturation report flags the knee") {
    const auto c = make_scenario({{Resource::Cpu, 10.0}, {Resource::Dpu, 35.0}}, 2, 2);
    // At small sizes the dpu binds; growing the array shifts the constraint.
    const std::vector<SweepPoint> sweep = {
        {512, 400.0, 2}, {1024, 400.0, 2}, {2048, 400.0, 2}, {4096, 400.0, 2}};
    const auto rows = saturation_report(vs(c), params_of(c), sweep);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].binding == "dpu");
    CHECK(rows[1].binding == "dpu");
    int knees = 0;
    for (const auto& r : rows) knees += r.knee ? 1 : 0;
    CHECK(knees == 1);
    CHECK(rows[2].knee);   // dpu time quarters, worker bound takes over
    CHECK(rows[2].binding == "worker");
}

TEST_CASE("dpu-only pipelines never leave the dpu bound") {
    const auto c = make_scenario({{Resource::Dpu, 10.0}}, 1, 1);
    const std::vector<SweepPoint> sweep = {
        {512, 300.0, 1}, {1024, 400.0, 1}, {4096, 600.0, 1}};
    for (const auto& row : saturation_report(vs(c), params_of(c), sweep)) {
        CHECK(row.binding.find("dpu") != std::string::npos);
        CHECK(!row.knee);
    }
}
