#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "ccdr/common.hpp"

namespace ccdr::data {

// ---------------------------------------------------------------------------
// Civil-calendar hour stamps
// ---------------------------------------------------------------------------

struct HourStamp {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;   // 0..23 clock hour

    auto operator<=>(const HourStamp&) const = default;
};

// days since 1970-01-01 (proleptic Gregorian)
inline long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

inline void civil_from_days(long z, int& y, int& m, int& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long yy = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

inline long hours_since_epoch(const HourStamp& s) {
    return days_from_civil(s.year, s.month, s.day) * 24L + s.hour;
}

inline HourStamp stamp_from_hours(long h) {
    long days = h / 24;
    int hour = static_cast<int>(h % 24);
    if (hour < 0) {
        hour += 24;
        days -= 1;
    }
    HourStamp s;
    civil_from_days(days, s.year, s.month, s.day);
    s.hour = hour;
    return s;
}

inline HourStamp add_hours(const HourStamp& s, long n) {
    return stamp_from_hours(hours_since_epoch(s) + n);
}

// Monday = 1 .. Sunday = 7
inline int day_of_week(const HourStamp& s) {
    long d = days_from_civil(s.year, s.month, s.day);
    return static_cast<int>(((d % 7) + 10) % 7) + 1;  // 1970-01-01 was a Thursday
}

// Accepts "YYYY-MM-DDTHH:MM[:SS]" or "YYYY-MM-DD HH:MM[:SS]".
inline HourStamp parse_stamp(const std::string& text) {
    HourStamp s;
    int minute = 0, second = 0;
    char sep = 0;
    int got = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &s.year, &s.month, &s.day, &sep,
                          &s.hour, &minute, &second);
    if (got < 6 || (sep != 'T' && sep != ' '))
        throw ParseError("bad timestamp '" + text + "'");
    if (s.month < 1 || s.month > 12 || s.day < 1 || s.day > 31 || s.hour < 0 || s.hour > 23 ||
        minute != 0 || second != 0)
        throw ParseError("timestamp not at hour resolution: '" + text + "'");
    return s;
}

inline std::string format_stamp(const HourStamp& s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00", s.year, s.month, s.day, s.hour);
    return buf;
}

// ---------------------------------------------------------------------------
// Calendar features
// ---------------------------------------------------------------------------

struct CalendarFeatures {
    int month_of_year = 1;  // 1..12
    int day_of_week = 1;    // 1..7, Monday = 1
    int hour_of_day = 1;    // 1..24
    int is_holiday = 0;
    int is_weekend = 0;
};

// Fixed-date holiday list; defaults to the 2018 US federal observances.
class HolidayCalendar {
  public:
    HolidayCalendar() = default;

    static HolidayCalendar us_federal_2018() {
        HolidayCalendar cal;
        for (const char* d : {"2018-01-01", "2018-01-15", "2018-02-19", "2018-05-28", "2018-07-04",
                              "2018-09-03", "2018-10-08", "2018-11-12", "2018-11-22", "2018-12-25"})
            cal.add(d);
        return cal;
    }

    static HolidayCalendar from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open holiday list: " + path);
        HolidayCalendar cal;
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            cal.add(line);
        }
        return cal;
    }

    void add(const std::string& iso_date) {
        HourStamp s = parse_stamp(iso_date + "T00:00:00");
        dates_.insert(key(s));
    }

    bool contains(const HourStamp& s) const {
        return dates_.count(key(s)) > 0;
    }

  private:
    static int key(const HourStamp& s) {
        return s.year * 10000 + s.month * 100 + s.day;
    }
    std::set<int> dates_;
};

inline CalendarFeatures calendar_features(const HourStamp& s, const HolidayCalendar& holidays) {
    CalendarFeatures f;
    f.month_of_year = s.month;
    f.day_of_week = day_of_week(s);
    f.hour_of_day = s.hour + 1;
    f.is_holiday = holidays.contains(s) ? 1 : 0;
    f.is_weekend = f.day_of_week >= 6 ? 1 : 0;
    return f;
}

// ---------------------------------------------------------------------------
// Hourly series
// ---------------------------------------------------------------------------

// Gap-free hourly records: per-household loads (kWh per one-hour slot,
// numerically equal to kW) and a wholesale price column (cents/kWh).
struct HourlySeries {
    HourStamp start;
    std::vector<std::string> household_ids;
    std::vector<Vec> loads;  // loads[household][t]
    Vec price;               // price[t]
    std::vector<bool> interpolated;

    std::size_t size() const {
        return price.size();
    }
    std::size_t num_households() const {
        return loads.size();
    }
    HourStamp stamp_at(std::size_t t) const {
        return add_hours(start, static_cast<long>(t));
    }
    double aggregate_load(std::size_t t) const {
        double s = 0.0;
        for (const auto& col : loads) s += col[t];
        return s;
    }
    std::size_t full_days() const {
        return size() / kHoursPerDay;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t b = cell.find_first_not_of(' ');
        out.push_back(b == std::string::npos ? "" : cell.substr(b));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double parse_number(const std::string& cell, std::size_t line_no, const std::string& col) {
    try {
        std::size_t pos = 0;
        double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": column '" + col +
                         "' is not numeric ('" + cell + "')");
    }
}

}  // namespace detail

// Reads a CSV with header `timestamp,load_<id>...,price`. Records are sorted;
// missing hours are filled by linear interpolation (at most 3 consecutive) and
// flagged. More than 5% missing hours rejects the file.
inline HourlySeries load_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file: " + path);
    auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[0] != "timestamp" || header.back() != "price")
        throw ParseError("header must be 'timestamp,load_<id>...,price', got '" + line + "'");

    HourlySeries series;
    for (std::size_t c = 1; c + 1 < header.size(); ++c) {
        if (header[c].rfind("load_", 0) != 0)
            throw ParseError("load column '" + header[c] + "' must be named load_<id>");
        series.household_ids.push_back(header[c].substr(5));
    }
    const std::size_t n_house = series.household_ids.size();

    struct Row {
        long hours;
        Vec loads;
        double price;
    };
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " columns, got " +
                             std::to_string(cells.size()));
        Row r;
        try {
            r.hours = hours_since_epoch(parse_stamp(cells[0]));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        for (std::size_t c = 0; c < n_house; ++c) {
            double v = detail::parse_number(cells[c + 1], line_no, header[c + 1]);
            if (v < 0.0)
                throw ParseError("line " + std::to_string(line_no) + ": negative load " + cells[c + 1]);
            r.loads.push_back(v);
        }
        r.price = detail::parse_number(cells.back(), line_no, "price");
        if (r.price < 0.0) throw ParseError("line " + std::to_string(line_no) + ": negative price");
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw DataError("no data rows in " + path);

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.hours < b.hours; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].hours == rows[i - 1].hours)
            throw DataError("duplicate timestamp " + format_stamp(stamp_from_hours(rows[i].hours)));

    const long first = rows.front().hours;
    const long last = rows.back().hours;
    const std::size_t total = static_cast<std::size_t>(last - first + 1);
    const std::size_t missing = total - rows.size();
    if (missing > 0 && missing * 20 > total)
        throw DataError(">5% of hours missing (" + std::to_string(missing) + " of " +
                        std::to_string(total) + ")");

    series.start = stamp_from_hours(first);
    series.loads.assign(n_house, Vec());
    series.interpolated.assign(total, false);
    std::size_t src = 0;
    for (long h = first; h <= last; ++h) {
        if (src < rows.size() && rows[src].hours == h) {
            for (std::size_t c = 0; c < n_house; ++c) series.loads[c].push_back(rows[src].loads[c]);
            series.price.push_back(rows[src].price);
            ++src;
        } else {
            const Row& prev = rows[src - 1];
            const Row& next = rows[src];
            if (next.hours - prev.hours - 1 > 3)
                throw DataError("gap of more than 3 consecutive hours after " +
                                format_stamp(stamp_from_hours(prev.hours)));
            const double w = static_cast<double>(h - prev.hours) / static_cast<double>(next.hours - prev.hours);
            for (std::size_t c = 0; c < n_house; ++c)
                series.loads[c].push_back(prev.loads[c] + w * (next.loads[c] - prev.loads[c]));
            series.price.push_back(prev.price + w * (next.price - prev.price));
            series.interpolated[series.price.size() - 1] = true;
        }
    }
    return series;
}

inline void write_series(const HourlySeries& series, std::ostream& out) {
    out << "timestamp";
    for (const auto& id : series.household_ids) out << ",load_" << id;
    out << ",price\n";
    char buf[32];
    for (std::size_t t = 0; t < series.size(); ++t) {
        out << format_stamp(series.stamp_at(t));
        for (const auto& col : series.loads) {
            std::snprintf(buf, sizeof(buf), "%.6f", col[t]);
            out << ',' << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.6f", series.price[t]);
        out << ',' << buf << '\n';
    }
}

inline void write_series(const HourlySeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    write_series(series, out);
}

// ---------------------------------------------------------------------------
// Train/test split
// ---------------------------------------------------------------------------

struct DatasetSplit {
    HourlySeries train;
    HourlySeries test;
};

inline HourlySeries slice(const HourlySeries& s, std::size_t begin, std::size_t count) {
    HourlySeries out;
    out.start = s.stamp_at(begin);
    out.household_ids = s.household_ids;
    for (const auto& col : s.loads) out.loads.emplace_back(col.begin() + begin, col.begin() + begin + count);
    out.price.assign(s.price.begin() + begin, s.price.begin() + begin + count);
    out.interpolated.assign(s.interpolated.begin() + begin, s.interpolated.begin() + begin + count);
    return out;
}

// Test window: [test_start 00:00, test_start + test_days). Everything before
// becomes the training split.
inline DatasetSplit split_train_test(const HourlySeries& s, const HourStamp& test_start,
                                     int test_days) {
    HourStamp t0{test_start.year, test_start.month, test_start.day, 0};
    long offset = hours_since_epoch(t0) - hours_since_epoch(s.start);
    if (offset <= 0) throw DataError("test window leaves no training data");
    std::size_t begin = static_cast<std::size_t>(offset);
    std::size_t len = static_cast<std::size_t>(test_days) * kHoursPerDay;
    if (begin + len > s.size()) throw DataError("test window extends past end of series");
    return DatasetSplit{slice(s, 0, begin), slice(s, begin, len)};
}

// ---------------------------------------------------------------------------
// Day slices
// ---------------------------------------------------------------------------

// One simulated day: per-hour wholesale price and per-household demand.
struct DayData {
    HourStamp day_start;
    Vec price;                 // 24
    std::vector<Vec> eu_loads; // per household, 24 each

    double aggregate(int t) const {
        double s = 0.0;
        for (const auto& l : eu_loads) s += l[t];
        return s;
    }
};

// Splits a midnight-aligned series into whole days.
inline std::vector<DayData> slice_days(const HourlySeries& s) {
    if (s.start.hour != 0) throw DataError("series must start at midnight to slice into days");
    std::vector<DayData> days;
    for (std::size_t d = 0; d < s.full_days(); ++d) {
        DayData day;
        day.day_start = s.stamp_at(d * kHoursPerDay);
        const std::size_t base = d * kHoursPerDay;
        day.price.assign(s.price.begin() + base, s.price.begin() + base + kHoursPerDay);
        for (const auto& col : s.loads)
            day.eu_loads.emplace_back(col.begin() + base, col.begin() + base + kHoursPerDay);
        days.push_back(std::move(day));
    }
    return days;
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

struct SynthOptions {
    HourStamp start{2018, 4, 1, 0};
    double noise = 0.12;       // per-household load noise, kW
    double price_noise = 0.15; // cents/kWh
};

// License-free stand-in for the three-household summer profiles: afternoon
// peak plus evening shoulder per household, diurnal price with occasional
// spikes. Pure function of its arguments.
inline HourlySeries synth_generate(std::uint64_t seed, int days, int households,
                                   const SynthOptions& opt = {}) {
    require(days >= 1, "days must be >= 1");
    require(households >= 1, "households must be >= 1");

    Rng param_rng(seed * 1000003ULL + 17ULL);
    struct HouseShape {
        double base, base_phase, day_amp, day_center, day_width, eve_amp, eve_center, eve_width;
    };
    std::vector<HouseShape> shapes;
    for (int n = 0; n < households; ++n) {
        HouseShape hs;
        hs.base = 0.40 + 0.16 * param_rng.uniform();
        hs.base_phase = 9.0 + 2.0 * param_rng.uniform();
        hs.day_amp = 2.1 + 0.5 * param_rng.uniform();
        hs.day_center = 14.6 + 1.0 * param_rng.uniform();
        hs.day_width = 1.9 + 0.4 * param_rng.uniform();
        hs.eve_amp = hs.day_amp * (0.30 + 0.10 * param_rng.uniform());
        hs.eve_center = 18.3 + 0.9 * param_rng.uniform();
        hs.eve_width = 1.6 + 0.4 * param_rng.uniform();
        shapes.push_back(hs);
    }

    auto signal = [](const HouseShape& hs, int hour_of_day) {
        double h = hour_of_day + 0.5;  // slot center, 1-based clock
        double v = hs.base + 0.15 * std::sin(2.0 * M_PI * (h - hs.base_phase) / 24.0);
        double dd = (h - hs.day_center) / hs.day_width;
        double de = (h - hs.eve_center) / hs.eve_width;
        v += hs.day_amp * std::exp(-dd * dd) + hs.eve_amp * std::exp(-de * de);
        return v > 0.0 ? v : 0.0;
    };

    // Calibrate so a three-household aggregate peaks near 10.5 kW.
    double ref_peak = 0.0;
    for (int h = 0; h < kHoursPerDay; ++h) {
        double agg = 0.0;
        for (int n = 0; n < std::min(households, 3); ++n) agg += signal(shapes[n], h);
        ref_peak = std::max(ref_peak, agg);
    }
    if (households < 3) ref_peak *= 3.0 / households;
    const double scale = 10.5 / ref_peak;

    HourlySeries out;
    out.start = opt.start;
    for (int n = 0; n < households; ++n) out.household_ids.push_back("eu" + std::to_string(n + 1));
    out.loads.assign(households, Vec());
    const std::size_t total = static_cast<std::size_t>(days) * kHoursPerDay;
    out.interpolated.assign(total, false);

    Rng load_rng(seed * 6364136223846793005ULL + 1442695040888963407ULL);
    Rng price_rng(seed ^ 0xda3e39cb94b95bdbULL);

    std::vector<double> spike_amp(days, 0.0);
    std::vector<int> spike_hour(days, 0), spike_len(days, 0);
    for (int d = 0; d < days; ++d) {
        bool spike = price_rng.uniform() < 0.08;
        spike_hour[d] = 15 + static_cast<int>(price_rng.uniform_index(3));
        spike_len[d] = 1 + static_cast<int>(price_rng.uniform_index(3));
        spike_amp[d] = spike ? price_rng.uniform(2.5, 4.5) : 0.0;
    }

    for (std::size_t t = 0; t < total; ++t) {
        const int h = static_cast<int>(t % kHoursPerDay);
        const int d = static_cast<int>(t / kHoursPerDay);
        for (int n = 0; n < households; ++n) {
            double v = scale * signal(shapes[n], h) + opt.noise * load_rng.normal();
            out.loads[n].push_back(v > 0.0 ? v : 0.0);
        }
        double hc = h + 0.5;
        double p = 3.2 + 1.1 * std::sin(2.0 * M_PI * (hc - 15.0) / 24.0);
        double dp = (hc - 17.0) / 2.5;
        p += 2.2 * std::exp(-dp * dp);
        if (spike_amp[d] > 0.0 && h >= spike_hour[d] && h < spike_hour[d] + spike_len[d])
            p += spike_amp[d];
        p += opt.price_noise * price_rng.normal();
        out.price.push_back(clamp(p, 2.0, 12.0));
    }
    return out;
}

}  // namespace ccdr::data
