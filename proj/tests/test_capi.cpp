#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "bornlab/bornlab.h"

namespace {

struct Scenario {
    bornlab_scenario* p = nullptr;
    ~Scenario() { bornlab_scenario_destroy(p); }
};

struct Report {
    bornlab_report* p = nullptr;
    ~Report() { bornlab_report_destroy(p); }
};

}  // namespace

TEST_CASE("version and status strings") {
    CHECK(std::string(bornlab_version()).find('.') != std::string::npos);
    CHECK(std::string(bornlab_status_string(BORNLAB_OK)) == "Ok");
    CHECK(std::string(bornlab_status_string(BORNLAB_PARSE_ERROR)) == "ParseError");
    CHECK(bornlab_default_threads() >= 1);
}

TEST_CASE("preset catalogue") {
    const std::size_t n = bornlab_preset_count();
    REQUIRE(n > 0);
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(bornlab_preset_name(i) != nullptr);
        CHECK(bornlab_preset_kind(i) != nullptr);
        found = found || std::string(bornlab_preset_name(i)) == "energy-driven-qubit";
    }
    CHECK(found);
    CHECK(bornlab_preset_name(n) == nullptr);
}

TEST_CASE("errors set the status and the last-error message") {
    Scenario s;
    CHECK(bornlab_scenario_from_text("{ not json", &s.p) == BORNLAB_PARSE_ERROR);
    CHECK(s.p == nullptr);
    CHECK(std::string(bornlab_last_error()).find("line 1") != std::string::npos);

    CHECK(bornlab_scenario_from_preset("no-such-preset", &s.p) == BORNLAB_VALIDATION_ERROR);
    CHECK(std::string(bornlab_last_error()).find("no-such-preset") != std::string::npos);

    CHECK(bornlab_scenario_from_file("/nonexistent/dir/x.json", &s.p) == BORNLAB_IO_ERROR);
    CHECK(bornlab_scenario_from_text(nullptr, &s.p) == BORNLAB_INVALID_ARGUMENT);
    CHECK(bornlab_scenario_from_text("{}", nullptr) == BORNLAB_INVALID_ARGUMENT);
    CHECK(bornlab_run(nullptr, 1, nullptr) == BORNLAB_INVALID_ARGUMENT);
}

TEST_CASE("scenario accessors and round trip") {
    Scenario s;
    REQUIRE(bornlab_scenario_from_preset("energy-driven-qubit", &s.p) == BORNLAB_OK);
    CHECK(std::string(bornlab_scenario_name(s.p)) == "energy-driven-qubit");
    CHECK(std::string(bornlab_scenario_mode(s.p)) == "ensemble");
    CHECK(bornlab_scenario_set_seed(s.p, 99) == BORNLAB_OK);
    CHECK(bornlab_scenario_set_trajectories(s.p, 0) == BORNLAB_VALIDATION_ERROR);
    CHECK(bornlab_scenario_set_trajectories(s.p, 12) == BORNLAB_OK);
    const std::string text = bornlab_scenario_to_text(s.p);
    CHECK(text.find("\"seed\": 99") != std::string::npos);

    Scenario copy;
    REQUIRE(bornlab_scenario_from_text(text.c_str(), &copy.p) == BORNLAB_OK);
    CHECK(std::string(bornlab_scenario_to_text(copy.p)) == text);
    CHECK(std::string(bornlab_scenario_warnings(copy.p)).empty());
}

TEST_CASE("running a scenario through the C API") {
    const auto dir = std::filesystem::temp_directory_path() / "bornlab_test_capi";
    std::filesystem::create_directories(dir);
    Scenario s;
    REQUIRE(bornlab_scenario_from_preset("histories-demo", &s.p) == BORNLAB_OK);
    REQUIRE(bornlab_scenario_set_output(s.p, (dir / "demo").c_str()) == BORNLAB_OK);
    Report r;
    REQUIRE(bornlab_run(s.p, 1, &r.p) == BORNLAB_OK);
    CHECK(bornlab_report_passed(r.p) == 1);
    CHECK(std::string(bornlab_report_text(r.p)).size() > 0);
    REQUIRE(bornlab_report_file_count(r.p) > 0);
    for (std::size_t i = 0; i < bornlab_report_file_count(r.p); ++i)
        CHECK(std::filesystem::exists(bornlab_report_file(r.p, i)));
    CHECK(bornlab_report_file(r.p, bornlab_report_file_count(r.p)) == nullptr);
}

TEST_CASE("Born probabilities entry point") {
    // sigma_x on |0>: eigenvalues -1, +1 with probability 1/2 each
    const double x[] = {0, 0, 1, 0, 1, 0, 0, 0};
    const double ground[] = {1, 0, 0, 0};
    double eig[2], prob[2];
    std::size_t count = 0;
    REQUIRE(bornlab_born_probabilities(2, x, ground, eig, prob, 2, &count) == BORNLAB_OK);
    REQUIRE(count == 2);
    CHECK(eig[0] == doctest::Approx(-1.0));
    CHECK(eig[1] == doctest::Approx(1.0));
    CHECK(prob[0] == doctest::Approx(0.5));
    CHECK(prob[1] == doctest::Approx(0.5));

    // degenerate identity collapses to one outcome
    const double id[] = {1, 0, 0, 0, 0, 0, 1, 0};
    REQUIRE(bornlab_born_probabilities(2, id, ground, eig, prob, 2, &count) == BORNLAB_OK);
    CHECK(count == 1);
    CHECK(prob[0] == doctest::Approx(1.0));

    const double not_hermitian[] = {0, 0, 1, 0, 0, 0, 0, 0};
    CHECK(bornlab_born_probabilities(2, not_hermitian, ground, eig, prob, 2, &count) == BORNLAB_NOT_HERMITIAN);
    CHECK(bornlab_born_probabilities(2, x, ground, eig, prob, 1, &count) == BORNLAB_INVALID_ARGUMENT);
    const double zero[] = {0, 0, 0, 0};
    CHECK(bornlab_born_probabilities(2, x, zero, eig, prob, 2, &count) != BORNLAB_OK);
}

TEST_CASE("verify through the C API") {
    Report r;
    REQUIRE(bornlab_verify(1, &r.p) == BORNLAB_OK);
    CHECK(bornlab_report_passed(r.p) == 1);
    CHECK(std::string(bornlab_report_text(r.p)).find("PASS") != std::string::npos);
}
