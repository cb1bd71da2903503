#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccdr/data.hpp"

#include "doctest.h"

using namespace ccdr;
using namespace ccdr::data;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

std::string csv_hours(const std::vector<int>& hours, const std::vector<double>& loads,
                      const std::vector<double>& prices) {
    std::ostringstream ss;
    ss << "timestamp,load_a,price\n";
    for (std::size_t i = 0; i < hours.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "2018-07-01T%02d:00:00,%.3f,%.3f\n", hours[i], loads[i],
                      prices[i]);
        ss << buf;
    }
    return ss.str();
}

}  // namespace

TEST_CASE("calendar arithmetic matches the civil calendar") {
    HolidayCalendar holidays = HolidayCalendar::us_federal_2018();

    // 2018-07-04 was a Wednesday and a US federal holiday
    CalendarFeatures f = calendar_features(parse_stamp("2018-07-04T14:00:00"), holidays);
    CHECK(f.month_of_year == 7);
    CHECK(f.day_of_week == 3);
    CHECK(f.hour_of_day == 15);
    CHECK(f.is_holiday == 1);
    CHECK(f.is_weekend == 0);

    // 2018-07-01 was a Sunday
    CalendarFeatures sun = calendar_features(parse_stamp("2018-07-01T00:00:00"), holidays);
    CHECK(sun.day_of_week == 7);
    CHECK(sun.is_weekend == 1);
    CHECK(sun.hour_of_day == 1);

    // Mondays are never weekend
    for (const char* date : {"2018-07-02T08:00:00", "2018-01-01T00:00:00", "2019-04-08T12:00:00"}) {
        CalendarFeatures m = calendar_features(parse_stamp(date), holidays);
        CHECK(m.day_of_week == 1);
        CHECK(m.is_weekend == 0);
    }
}

TEST_CASE("stamp round trip and ordering") {
    HourStamp s = parse_stamp("2018-12-31T23:00:00");
    CHECK(format_stamp(s) == "2018-12-31T23:00:00");
    HourStamp next = add_hours(s, 1);
    CHECK(format_stamp(next) == "2019-01-01T00:00:00");
    CHECK(hours_since_epoch(next) == hours_since_epoch(s) + 1);
    CHECK_THROWS_AS(parse_stamp("2018-07-01T12:30:00"), ParseError);
    CHECK_THROWS_AS(parse_stamp("not a date"), ParseError);
}

TEST_CASE("load_series ingests a clean 24 hour file") {
    std::vector<int> hours(24);
    std::vector<double> loads(24), prices(24);
    for (int i = 0; i < 24; ++i) {
        hours[i] = i;
        loads[i] = 1.0 + 0.1 * i;
        prices[i] = 3.0 + 0.05 * i;
    }
    auto p = temp_file("ccdr_clean.csv");
    write_file(p, csv_hours(hours, loads, prices));
    HourlySeries s = load_series(p.string());
    CHECK(s.size() == 24);
    CHECK(s.num_households() == 1);
    CHECK(s.loads[0][5] == doctest::Approx(1.5));
    CHECK(s.household_ids[0] == "a");
    for (bool flag : s.interpolated) CHECK_FALSE(flag);
}

TEST_CASE("missing hour is interpolated as the mean of its neighbours") {
    std::vector<int> hours;
    std::vector<double> loads, prices;
    for (int i = 0; i < 24; ++i) {
        if (i == 3) continue;
        hours.push_back(i);
        loads.push_back(i == 2 ? 2.0 : (i == 4 ? 4.0 : 1.0));
        prices.push_back(i == 2 ? 6.0 : (i == 4 ? 8.0 : 5.0));
    }
    auto p = temp_file("ccdr_gap.csv");
    write_file(p, csv_hours(hours, loads, prices));
    HourlySeries s = load_series(p.string());
    REQUIRE(s.size() == 24);
    CHECK(s.loads[0][3] == doctest::Approx(3.0));
    CHECK(s.price[3] == doctest::Approx(7.0));
    CHECK(s.interpolated[3]);
    CHECK_FALSE(s.interpolated[2]);
}

TEST_CASE("interpolated values stay between their neighbours") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const int gap_at = 2 + static_cast<int>(rng.uniform_index(60));
        const int gap_len = 1 + static_cast<int>(rng.uniform_index(3));
        std::ostringstream ss;
        ss << "timestamp,load_a,price\n";
        for (int i = 0; i < 80; ++i) {
            if (i >= gap_at && i < gap_at + gap_len) continue;
            HourStamp st = add_hours(parse_stamp("2018-07-01T00:00:00"), i);
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%s,%.3f,%.3f\n", format_stamp(st).c_str(),
                          rng.uniform(0.0, 5.0), rng.uniform(2.0, 12.0));
            ss << buf;
        }
        auto p = temp_file("ccdr_gap_prop.csv");
        write_file(p, ss.str());
        HourlySeries s = load_series(p.string());
        const double lo = std::min(s.loads[0][gap_at - 1], s.loads[0][gap_at + gap_len]);
        const double hi = std::max(s.loads[0][gap_at - 1], s.loads[0][gap_at + gap_len]);
        for (int i = gap_at; i < gap_at + gap_len; ++i) {
            CHECK(s.loads[0][i] >= lo - 1e-12);
            CHECK(s.loads[0][i] <= hi + 1e-12);
        }
    }
}

TEST_CASE("malformed and unusable files are rejected") {
    SUBCASE("non-numeric load cell names the line") {
        auto p = temp_file("ccdr_bad_cell.csv");
        write_file(p, "timestamp,load_a,price\n"
                      "2018-07-01T00:00:00,1.0,3.0\n"
                      "2018-07-01T01:00:00,oops,3.0\n"
                      "2018-07-01T02:00:00,1.0,3.0\n");
        CHECK_THROWS_WITH_AS(load_series(p.string()),
                             doctest::Contains("line 3"), ParseError);
    }
    SUBCASE("gap longer than three hours") {
        std::ostringstream ss;
        ss << "timestamp,load_a,price\n";
        for (int i = 0; i < 120; ++i) {
            if (i >= 5 && i <= 8) continue;  // 4 consecutive missing hours, <5% overall
            HourStamp s = add_hours(parse_stamp("2018-07-01T00:00:00"), i);
            ss << format_stamp(s) << ",1.0,3.0\n";
        }
        auto p = temp_file("ccdr_big_gap.csv");
        write_file(p, ss.str());
        CHECK_THROWS_WITH_AS(load_series(p.string()), doctest::Contains("3 consecutive"),
                             DataError);
    }
    SUBCASE("more than five percent missing") {
        std::ostringstream ss;
        ss << "timestamp,load_a,price\n";
        // 100 hours span, keep hour pairs so no single gap exceeds 3 but 8% missing
        for (int i = 0; i < 100; ++i) {
            if (i % 12 == 4) continue;
            char buf[80];
            HourStamp s = add_hours(parse_stamp("2018-07-01T00:00:00"), i);
            std::snprintf(buf, sizeof(buf), "%s,1.0,3.0\n", format_stamp(s).c_str());
            ss << buf;
        }
        // removes ~8 of 100
        auto p = temp_file("ccdr_sparse.csv");
        write_file(p, ss.str());
        CHECK_THROWS_WITH_AS(load_series(p.string()), doctest::Contains("5%"), DataError);
    }
    SUBCASE("duplicate timestamps") {
        auto p = temp_file("ccdr_dup.csv");
        write_file(p, "timestamp,load_a,price\n"
                      "2018-07-01T00:00:00,1.0,3.0\n"
                      "2018-07-01T00:00:00,2.0,3.0\n");
        CHECK_THROWS_AS(load_series(p.string()), DataError);
    }
    SUBCASE("bad header") {
        auto p = temp_file("ccdr_bad_header.csv");
        write_file(p, "time,load_a,price\n2018-07-01T00:00:00,1.0,3.0\n");
        CHECK_THROWS_AS(load_series(p.string()), ParseError);
    }
}

TEST_CASE("write/load round trip preserves values to six decimals") {
    HourlySeries s = synth_generate(11, 2, 2);
    auto p = temp_file("ccdr_roundtrip.csv");
    write_series(s, p.string());
    HourlySeries back = load_series(p.string());
    REQUIRE(back.size() == s.size());
    REQUIRE(back.num_households() == s.num_households());
    for (std::size_t t = 0; t < s.size(); ++t) {
        for (std::size_t n = 0; n < s.num_households(); ++n)
            CHECK(std::abs(back.loads[n][t] - s.loads[n][t]) < 1e-6);
        CHECK(std::abs(back.price[t] - s.price[t]) < 1e-6);
    }
}

TEST_CASE("records out of order are sorted on load") {
    auto p = temp_file("ccdr_unsorted.csv");
    write_file(p, "timestamp,load_a,price\n"
                  "2018-07-01T02:00:00,3.0,5.0\n"
                  "2018-07-01T00:00:00,1.0,5.0\n"
                  "2018-07-01T01:00:00,2.0,5.0\n");
    HourlySeries s = load_series(p.string());
    CHECK(s.loads[0][0] == doctest::Approx(1.0));
    CHECK(s.loads[0][2] == doctest::Approx(3.0));
}

TEST_CASE("synthetic generator contracts") {
    SUBCASE("identical seeds give byte-identical output") {
        std::ostringstream a, b;
        write_series(synth_generate(42, 5, 3), a);
        write_series(synth_generate(42, 5, 3), b);
        CHECK(a.str() == b.str());
        std::ostringstream c;
        write_series(synth_generate(43, 5, 3), c);
        CHECK(a.str() != c.str());
    }
    SUBCASE("three-household aggregate daily peak stays in [9,12] kW") {
        HourlySeries s = synth_generate(42, 31, 3);
        REQUIRE(s.full_days() == 31);
        for (std::size_t d = 0; d < 31; ++d) {
            double peak = 0.0;
            for (int t = 0; t < 24; ++t)
                peak = std::max(peak, s.aggregate_load(d * 24 + t));
            CHECK(peak >= 9.0);
            CHECK(peak <= 12.0);
        }
    }
    SUBCASE("zero noise gives an exactly periodic daily profile") {
        SynthOptions opt;
        opt.noise = 0.0;
        opt.price_noise = 0.0;
        HourlySeries s = synth_generate(7, 4, 3, opt);
        for (int t = 0; t < 24; ++t)
            for (int d = 1; d < 4; ++d)
                for (std::size_t n = 0; n < 3; ++n)
                    CHECK(s.loads[n][d * 24 + t] == doctest::Approx(s.loads[n][t]).epsilon(1e-12));
    }
    SUBCASE("prices stay inside the 2-12 cents band") {
        HourlySeries s = synth_generate(5, 60, 3);
        for (double p : s.price) {
            CHECK(p >= 2.0);
            CHECK(p <= 12.0);
        }
    }
}

TEST_CASE("train/test split is disjoint and day aligned") {
    HourlySeries s = synth_generate(3, 40, 3);
    DatasetSplit split = split_train_test(s, parse_stamp("2018-05-01T00:00:00"), 7);
    CHECK(split.train.size() == 30 * 24);
    CHECK(split.test.size() == 7 * 24);
    CHECK(format_stamp(split.test.start) == "2018-05-01T00:00:00");
    CHECK(hours_since_epoch(split.test.start) ==
          hours_since_epoch(split.train.start) + static_cast<long>(split.train.size()));
    CHECK_THROWS_AS(split_train_test(s, parse_stamp("2018-04-01T00:00:00"), 7), DataError);
    CHECK_THROWS_AS(split_train_test(s, parse_stamp("2018-05-09T00:00:00"), 7), DataError);
}

TEST_CASE("capacity-style day slicing") {
    HourlySeries s = synth_generate(9, 3, 2);
    auto days = slice_days(s);
    REQUIRE(days.size() == 3);
    CHECK(days[1].price[0] == doctest::Approx(s.price[24]));
    CHECK(days[2].eu_loads[1][5] == doctest::Approx(s.loads[1][2 * 24 + 5]));
}
