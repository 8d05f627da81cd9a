#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "madl/market_data.hpp"
#include "madl/rng.hpp"

using namespace madlab;

namespace {

std::filesystem::path write_temp_csv(const std::string& name, const std::string& body) {
    const auto dir = std::filesystem::temp_directory_path() / "madl_md_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream out(path);
    out << body;
    return path;
}

Date day(int offset) {
    // spread across months to exercise date ordering, 2020-01-01 + offset
    int y = 2020, m = 1, d = 1;
    for (int i = 0; i < offset; ++i) {
        ++d;
        static const int lens[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        if (d > lens[m - 1]) {
            d = 1;
            ++m;
            if (m > 12) {
                m = 1;
                ++y;
            }
        }
    }
    return Date{y, m, d};
}

}  // namespace

TEST_CASE("load_price_csv echoes a small well-formed file") {
    const auto path = write_temp_csv("small.csv",
                                     "date,close\n"
                                     "2020-01-01,100\n"
                                     "2020-01-02,110\n"
                                     "2020-01-03,99\n");
    const auto series = load_price_csv(path);
    REQUIRE(series.size() == 3);
    CHECK(series.prices[0] == 100.0);
    CHECK(series.prices[1] == 110.0);
    CHECK(series.prices[2] == 99.0);
    CHECK(series.dates[0] == Date{2020, 1, 1});
    CHECK(series.dates[2] == Date{2020, 1, 3});
}

TEST_CASE("load_price_csv rejects bad inputs with context") {
    CHECK_THROWS(load_price_csv("/nonexistent/prices.csv"));

    const auto zero = write_temp_csv("zero.csv", "date,close\n2020-01-01,0\n");
    CHECK_THROWS_WITH_AS(load_price_csv(zero), doctest::Contains("non-positive"),
                         std::runtime_error);

    const auto dup = write_temp_csv("dup.csv",
                                    "date,close\n2020-01-01,1\n2020-01-01,2\n");
    CHECK_THROWS_WITH_AS(load_price_csv(dup), doctest::Contains("duplicate"), std::runtime_error);

    const auto bad_row = write_temp_csv("bad.csv", "date,close\n2020-01-01,1\nnot-a-date,2\n");
    CHECK_THROWS_WITH_AS(load_price_csv(bad_row), doctest::Contains(":3:"), std::runtime_error);

    const auto bad_price = write_temp_csv("badprice.csv", "date,close\n2020-01-05,12x\n");
    CHECK_THROWS_WITH_AS(load_price_csv(bad_price), doctest::Contains("price"),
                         std::runtime_error);

    const auto no_col = write_temp_csv("nocol.csv", "date,last\n2020-01-01,1\n");
    CHECK_THROWS(load_price_csv(no_col));
}

TEST_CASE("load_price_csv honours a custom column schema") {
    const auto path = write_temp_csv("schema.csv",
                                     "Close,Timestamp\n"
                                     "5.5,2021-03-01\n"
                                     "6.5,2021-03-02\n");
    CsvSchema schema;
    schema.date_column = "Timestamp";
    schema.close_column = "Close";
    const auto series = load_price_csv(path, schema, "X");
    REQUIRE(series.size() == 2);
    CHECK(series.prices[0] == 5.5);
    CHECK(series.asset_id == "X");
}

TEST_CASE("load_price_csv sorts shuffled rows into date order") {
    // sort oracle: loading any permutation must equal loading the sorted file
    Rng rng(7);
    std::vector<Date> dates;
    std::vector<double> prices;
    for (int i = 0; i < 40; ++i) {
        dates.push_back(day(i));
        prices.push_back(50.0 + 100.0 * rng.uniform());
    }
    std::string sorted_body = "date,close\n";
    for (std::size_t i = 0; i < dates.size(); ++i) {
        sorted_body += dates[i].to_string() + "," + std::to_string(prices[i]) + "\n";
    }
    const auto sorted_series = load_price_csv(write_temp_csv("sorted.csv", sorted_body));

    std::vector<std::size_t> order(dates.size());
    std::iota(order.begin(), order.end(), 0);
    for (int trial = 0; trial < 5; ++trial) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.next_u64() % i]);
        }
        std::string body = "date,close\n";
        for (std::size_t idx : order) {
            body += dates[idx].to_string() + "," + std::to_string(prices[idx]) + "\n";
        }
        const auto shuffled = load_price_csv(write_temp_csv("shuffled.csv", body));
        REQUIRE(shuffled.size() == sorted_series.size());
        CHECK(shuffled.dates == sorted_series.dates);
        CHECK(shuffled.prices == sorted_series.prices);
    }
}

TEST_CASE("to_simple_returns hand cases") {
    PriceSeries p;
    p.dates = {day(0), day(1), day(2)};
    p.prices = {100.0, 110.0, 99.0};
    const auto r = to_simple_returns(p, 365);
    REQUIRE(r.size() == 2);
    CHECK(r.returns[0] == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(r.returns[1] == doctest::Approx(-0.10).epsilon(1e-12));
    CHECK(r.dates[0] == p.dates[1]);  // dated at the later day
    CHECK(r.periods_per_year == 365);

    PriceSeries flat;
    flat.dates = {day(0), day(1), day(2), day(3)};
    flat.prices = {42.0, 42.0, 42.0, 42.0};
    for (double v : to_simple_returns(flat, 252).returns) CHECK(v == 0.0);

    PriceSeries one;
    one.dates = {day(0)};
    one.prices = {1.0};
    CHECK_THROWS_AS(to_simple_returns(one, 252), std::invalid_argument);
}

TEST_CASE("to_simple_returns matches an element-wise ratio oracle") {
    Rng rng(11);
    PriceSeries p;
    for (int i = 0; i < 50; ++i) {
        p.dates.push_back(day(i));
        p.prices.push_back(std::exp(rng.uniform(-1.0, 1.0)) * 100.0);
    }
    const auto r = to_simple_returns(p, 252);
    REQUIRE(r.size() == 49);
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double expected = p.prices[i + 1] / p.prices[i] - 1.0;
        CHECK(r.returns[i] == expected);
    }
}

TEST_CASE("returns round-trip: prices reconstructed from returns") {
    Rng rng(13);
    PriceSeries p;
    for (int i = 0; i < 200; ++i) {
        p.dates.push_back(day(i));
        p.prices.push_back(std::exp(rng.uniform(-2.0, 2.0)) * 50.0);
    }
    const auto r = to_simple_returns(p, 365);
    double price = p.prices[0];
    for (std::size_t i = 0; i < r.size(); ++i) {
        price *= 1.0 + r.returns[i];
        CHECK(price == doctest::Approx(p.prices[i + 1]).epsilon(1e-9));
    }
}

TEST_CASE("fit_standardizer closed forms") {
    ReturnSeries r;
    r.dates = {day(0), day(1), day(2)};
    r.returns = {1.0, 2.0, 3.0};
    const auto s = fit_standardizer(r, 0, 3);
    CHECK(s.mean == doctest::Approx(2.0));
    CHECK(s.std == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK_FALSE(s.degenerate());

    ReturnSeries flat;
    flat.dates = {day(0), day(1), day(2)};
    flat.returns = {0.5, 0.5, 0.5};
    const auto sd = fit_standardizer(flat, 0, 3);
    CHECK(sd.std == 0.0);
    CHECK(sd.degenerate());

    CHECK_THROWS_AS(fit_standardizer(r, 2, 5), std::invalid_argument);
    CHECK_THROWS_AS(fit_standardizer(r, 1, 2), std::invalid_argument);  // window of 1
}

TEST_CASE("fit_standardizer matches a two-pass oracle within 1e-12") {
    Rng rng(17);
    ReturnSeries r;
    for (int i = 0; i < 100; ++i) {
        r.dates.push_back(day(i));
        r.returns.push_back(rng.uniform(-0.05, 0.05));
    }
    const auto s = fit_standardizer(r, 10, 90);

    double mean = 0.0;
    for (std::size_t i = 10; i < 90; ++i) mean += r.returns[i];
    mean /= 80.0;
    double var = 0.0;
    for (std::size_t i = 10; i < 90; ++i) var += (r.returns[i] - mean) * (r.returns[i] - mean);
    var /= 80.0;
    CHECK(std::fabs(s.mean - mean) < 1e-12);
    CHECK(std::fabs(s.std - std::sqrt(var)) < 1e-12);

    // applying then inverting is the identity
    for (double v : {-0.03, 0.0, 0.02}) {
        CHECK(s.invert(s.apply(v)) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("make_sequences constructs windows and targets by hand") {
    ReturnSeries r;
    const double a = 0.01, b = -0.02, c = 0.03, d = -0.04;
    r.returns = {a, b, c, d};
    for (int i = 0; i < 4; ++i) r.dates.push_back(day(i));
    Standardizer s{0.0, 1.0};  // identity scaling at std=1, mean 0

    const auto set = make_sequences(r, 2, s);
    REQUIRE(set.size() == 2);
    REQUIRE(set.sequence_length() == 2);
    CHECK(set.inputs(0, 0) == s.apply(a));
    CHECK(set.inputs(0, 1) == s.apply(b));
    CHECK(set.inputs(1, 0) == s.apply(b));
    CHECK(set.inputs(1, 1) == s.apply(c));
    CHECK(set.targets[0] == c);
    CHECK(set.targets[1] == d);
    CHECK(set.target_dates[0] == r.dates[2]);

    // boundary: sequence_length = len - 1 gives exactly one sequence
    const auto single = make_sequences(r, 3, s);
    CHECK(single.size() == 1);
    CHECK(single.targets[0] == d);

    CHECK_THROWS_AS(make_sequences(r, 4, s), std::invalid_argument);
    Standardizer degenerate{0.0, 0.0};
    CHECK_THROWS_AS(make_sequences(r, 2, degenerate), std::invalid_argument);
}

TEST_CASE("make_sequences alignment over a long series") {
    Rng rng(23);
    ReturnSeries r;
    for (int i = 0; i < 200; ++i) {
        r.dates.push_back(day(i));
        r.returns.push_back(rng.uniform(-0.04, 0.04));
    }
    const auto s = fit_standardizer(r, 0, 200);
    const auto set = make_sequences(r, 20, s);
    REQUIRE(set.size() == 180);
    for (std::size_t j = 0; j < set.size(); ++j) {
        // target is the return immediately after window j
        CHECK(set.targets[j] == r.returns[j + 20]);
        // destandardizing the last input yields the return preceding the target
        const double last_input = set.inputs(static_cast<Eigen::Index>(j), 19);
        CHECK(s.invert(last_input) == doctest::Approx(r.returns[j + 19]).epsilon(1e-12));
    }
}

TEST_CASE("make_sequences_for_targets spans the train/test boundary") {
    Rng rng(29);
    ReturnSeries r;
    for (int i = 0; i < 60; ++i) {
        r.dates.push_back(day(i));
        r.returns.push_back(rng.uniform(-0.04, 0.04));
    }
    const auto s = fit_standardizer(r, 0, 40);
    const auto set = make_sequences_for_targets(r, 10, s, 40, 60);
    REQUIRE(set.size() == 20);
    CHECK(set.targets[0] == r.returns[40]);
    // first test window reaches back into the training range
    CHECK(set.inputs(0, 0) == doctest::Approx(s.apply(r.returns[30])));
    CHECK_THROWS_AS(make_sequences_for_targets(r, 10, s, 5, 20), std::invalid_argument);
}

TEST_CASE("plan_walk_forward worked examples") {
    const auto plan = plan_walk_forward(100, 60, 20);
    REQUIRE(plan.windows.size() == 2);
    CHECK(plan.windows[0].train_start == 0);
    CHECK(plan.windows[0].train_end == 60);
    CHECK(plan.windows[0].test_start == 60);
    CHECK(plan.windows[0].test_end == 80);
    CHECK(plan.windows[1].train_start == 20);
    CHECK(plan.windows[1].train_end == 80);
    CHECK(plan.windows[1].test_start == 80);
    CHECK(plan.windows[1].test_end == 100);

    const auto truncated = plan_walk_forward(70, 60, 20);
    REQUIRE(truncated.windows.size() == 1);
    CHECK(truncated.windows[0].test_end == 70);

    CHECK_THROWS_AS(plan_walk_forward(60, 60, 20), std::invalid_argument);
    CHECK_THROWS_AS(plan_walk_forward(100, 0, 20), std::invalid_argument);
}

TEST_CASE("plan_walk_forward tiles the out-of-sample range") {
    const auto plan = plan_walk_forward(5000, 1460, 365);
    std::size_t expected_start = 1460;
    for (const auto& w : plan.windows) {
        CHECK(w.test_start == expected_start);
        CHECK(w.test_start == w.train_end);
        CHECK(w.train_end - w.train_start == 1460);
        expected_start = w.test_end;
    }
    CHECK(expected_start == 5000);
    CHECK(plan.windows.back().test_end - plan.windows.back().test_start < 365);
}

TEST_CASE("plan_walk_forward properties over random shapes") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t train_len = 20 + rng.next_u64() % 200;
        const std::size_t test_len = 1 + rng.next_u64() % 80;
        const std::size_t n = train_len + 1 + rng.next_u64() % 500;
        const auto plan = plan_walk_forward(n, train_len, test_len);
        REQUIRE(!plan.windows.empty());
        std::size_t covered = 0;
        std::size_t expected_start = train_len;
        for (const auto& w : plan.windows) {
            CHECK(w.train_end - w.train_start == train_len);  // rolling, not expanding
            CHECK(w.train_end == w.test_start);               // no gap, no look-ahead
            CHECK(w.test_start == expected_start);            // gapless tiling
            CHECK(w.test_end > w.test_start);
            CHECK(w.test_end <= n);
            covered += w.test_end - w.test_start;
            expected_start = w.test_end;
        }
        CHECK(expected_start == n);
        CHECK(covered == n - train_len);  // total OOS count
    }
}

TEST_CASE("segment bounds checking") {
    ReturnSeries r;
    for (int i = 0; i < 10; ++i) {
        r.dates.push_back(day(i));
        r.returns.push_back(0.01 * i);
    }
    const auto seg = segment(r, 2, 7);
    CHECK(seg.size() == 5);
    CHECK(seg.returns[0] == r.returns[2]);
    CHECK(seg.dates[4] == r.dates[6]);
    CHECK_THROWS_AS(segment(r, 5, 12), std::invalid_argument);
}
