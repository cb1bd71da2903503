#pragma once

#include <fstream>
#include <sstream>

#include "ccdr/common.hpp"
#include "ccdr/data.hpp"
#include "ccdr/household.hpp"

namespace ccdr::env {

// ---------------------------------------------------------------------------
// Capacity threshold
// ---------------------------------------------------------------------------

// 75% of the average daily peak of the aggregate demand.
inline double capacity_threshold(const data::HourlySeries& series, double fraction = 0.75) {
    const std::size_t days = series.full_days();
    if (days == 0) throw DataError("capacity threshold needs at least one full day");
    double sum_peaks = 0.0;
    for (std::size_t d = 0; d < days; ++d) {
        double peak = 0.0;
        for (int t = 0; t < kHoursPerDay; ++t)
            peak = std::max(peak, series.aggregate_load(d * kHoursPerDay + t));
        sum_peaks += peak;
    }
    return fraction * sum_peaks / static_cast<double>(days);
}

// ---------------------------------------------------------------------------
// Discrete incentive actions
// ---------------------------------------------------------------------------

// Actions enumerate per-EU incentive levels; level d of L maps to the rate
// fraction d/(L-1) of lambda_max = 0.95 * p_h. The first EU holds the most
// significant digit.
struct ActionCodec {
    int n_eu = 3;
    int levels = 4;
    double max_fraction = 0.95;

    int num_actions() const {
        int a = 1;
        for (int i = 0; i < n_eu; ++i) a *= levels;
        return a;
    }

    std::vector<int> digits(int index) const {
        require(index >= 0 && index < num_actions(), "action index out of range");
        std::vector<int> d(n_eu, 0);
        for (int i = n_eu - 1; i >= 0; --i) {
            d[i] = index % levels;
            index /= levels;
        }
        return d;
    }

    int encode(const std::vector<int>& d) const {
        require(static_cast<int>(d.size()) == n_eu, "digit count mismatch");
        int index = 0;
        for (int i = 0; i < n_eu; ++i) {
            require(d[i] >= 0 && d[i] < levels, "digit out of range");
            index = index * levels + d[i];
        }
        return index;
    }

    Vec decode(int index, double price) const {
        auto d = digits(index);
        Vec rates(n_eu, 0.0);
        const double lambda_max = max_fraction * price;
        for (int i = 0; i < n_eu; ++i)
            rates[i] = static_cast<double>(d[i]) / static_cast<double>(levels - 1) * lambda_max;
        return rates;
    }
};

inline Vec decode_action(int index, double price, int n_eu, int levels = 4) {
    ActionCodec codec{n_eu, levels};
    return codec.decode(index, price);
}

// ---------------------------------------------------------------------------
// Reward shaping
// ---------------------------------------------------------------------------

// Shaping bonus/penalty in cents: +5 for a quiet hour with no incentives,
// -5*sum(lambda) for incentives nobody needed, -15 per kW of unmet reduction
// (doubled when no incentive was sent at all), -0.5 per kW of over-reduction.
inline double shaping(double required, double achieved, const Vec& rates) {
    require(required >= 0.0 && achieved >= 0.0, "shaping needs nonnegative reductions");
    double lambda_sum = 0.0;
    for (double r : rates) lambda_sum += r;
    if (required == 0.0) {
        return lambda_sum == 0.0 ? 5.0 : -5.0 * lambda_sum;
    }
    const double miss = std::max(0.0, required - achieved);
    const double over = std::max(0.0, achieved - required);
    double phi = -15.0 * miss;
    if (lambda_sum == 0.0) phi *= 2.0;
    phi -= 0.5 * over;
    return phi;
}

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

struct EnvState {
    int hour = 0;              // 0-based slot about to be decided
    double price = 0.0;        // forecast wholesale price, cents/kWh
    double forecast_load = 0.0;
    double current_load = 0.0; // planned aggregate at this hour before acting
    double capacity = 0.0;
    double margin = 0.0;       // capacity - forecast_load
    double required = 0.0;     // max(0, forecast_load - capacity)
    double prev_lambda_sum = 0.0;

    // Feature vector for the Q-network; scales keep entries near unit range.
    Vec to_vector() const {
        const double ang = 2.0 * M_PI * static_cast<double>(hour) / kHoursPerDay;
        return {std::sin(ang),
                std::cos(ang),
                static_cast<double>(hour) / kHoursPerDay,
                price / 10.0,
                forecast_load / 10.0,
                current_load / 10.0,
                capacity / 10.0,
                margin / 10.0,
                required / 10.0,
                prev_lambda_sum / 10.0};
    }
    static constexpr int dimension = 10;
};

struct StepInfo {
    int hour = 0;  // 0-based
    double price = 0.0;
    Vec rates;          // per EU, cents/kWh
    Vec delta_e;        // per EU, kWh
    Vec dis_cost;       // per EU, cents
    double load_before = 0.0;
    double load_after = 0.0;
    double required = 0.0;
    double achieved = 0.0;
    double phi = 0.0;
    double reward = 0.0;
};

struct StepResult {
    EnvState next_state;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

struct EnvConfig {
    double rho = 0.9;
    int incentive_levels = 4;
    double max_fraction = 0.95;
};

// Finite-horizon (24 hour) MDP over one day. Households respond to per-EU
// incentive rates; the reward is the hourly term of the global objective plus
// the shaping component.
class Environment {
  public:
    Environment(data::DayData day, std::vector<household::HouseholdDay> households,
                double capacity, EnvConfig cfg = {})
        : day_(std::move(day)), template_households_(std::move(households)), capacity_(capacity),
          cfg_(cfg) {
        require(day_.price.size() == kHoursPerDay, "day must provide 24 prices");
        require(day_.eu_loads.size() == template_households_.size(),
                "one load column per household required");
        codec_ = ActionCodec{static_cast<int>(template_households_.size()), cfg_.incentive_levels,
                             cfg_.max_fraction};
        reset();
    }

    int num_actions() const {
        return codec_.num_actions();
    }
    int num_households() const {
        return static_cast<int>(households_.size());
    }
    const ActionCodec& codec() const {
        return codec_;
    }
    double capacity() const {
        return capacity_;
    }
    const data::DayData& day() const {
        return day_;
    }
    const std::vector<StepInfo>& trace() const {
        return trace_;
    }
    const std::vector<household::HouseholdDay>& households() const {
        return households_;
    }

    EnvState reset() {
        households_ = template_households_;
        hour_ = 0;
        prev_lambda_sum_ = 0.0;
        trace_.clear();
        realized_.assign(kHoursPerDay, 0.0);
        return state();
    }

    EnvState state() const {
        EnvState s;
        s.hour = hour_;
        const int h = std::min(hour_, kHoursPerDay - 1);
        s.price = day_.price[h];
        s.forecast_load = day_.aggregate(h);
        s.current_load = planned_aggregate(h);
        s.capacity = capacity_;
        s.margin = capacity_ - s.forecast_load;
        s.required = std::max(0.0, s.forecast_load - capacity_);
        s.prev_lambda_sum = prev_lambda_sum_;
        return s;
    }

    bool done() const {
        return hour_ >= kHoursPerDay;
    }

    StepResult step(int action_index) {
        if (done()) throw std::logic_error("step() called on a finished episode");
        const int h = hour_;
        const EnvState cur = state();
        const Vec rates = codec_.decode(action_index, cur.price);

        StepInfo info;
        info.hour = h;
        info.price = cur.price;
        info.rates = rates;
        info.load_before = planned_aggregate(h);
        info.required = cur.required;

        // The aggregate view is refreshed after each household so that
        // shifted energy cannot pile up past the capacity limit at a
        // destination hour.
        double reward = 0.0;
        double achieved = 0.0;
        double realized_hour = 0.0;
        Vec snapshot(kHoursPerDay, 0.0);
        for (std::size_t n = 0; n < households_.size(); ++n) {
            for (int t = 0; t < kHoursPerDay; ++t) snapshot[t] = planned_aggregate(t);
            auto out = households_[n].respond(h, rates[n], snapshot, capacity_);
            info.delta_e.push_back(out.delta_e);
            info.dis_cost.push_back(out.dis_cost);
            achieved += out.delta_e;
            realized_hour += out.realized;
            reward += (cur.price - rates[n]) * out.delta_e;                     // SP margin
            reward += cfg_.rho * rates[n] * out.delta_e;                        // EU income
            reward -= (1.0 - cfg_.rho) * out.dis_cost;                          // EU discomfort
        }
        const double phi = shaping(cur.required, achieved, rates);
        reward += phi;

        realized_[h] = realized_hour;
        info.load_after = realized_hour;
        info.achieved = achieved;
        info.phi = phi;
        info.reward = reward;
        trace_.push_back(info);

        prev_lambda_sum_ = 0.0;
        for (double r : rates) prev_lambda_sum_ += r;
        hour_ = h + 1;

        StepResult result;
        result.reward = reward;
        result.done = done();
        result.next_state = state();
        result.info = info;
        return result;
    }

    // Realized aggregate for completed hours, current plan for future hours.
    Vec realized_profile() const {
        Vec out(kHoursPerDay, 0.0);
        for (int t = 0; t < kHoursPerDay; ++t)
            out[t] = t < hour_ ? realized_[t] : planned_aggregate(t);
        return out;
    }

    Vec preferred_profile() const {
        Vec out(kHoursPerDay, 0.0);
        for (int t = 0; t < kHoursPerDay; ++t)
            for (const auto& hh : households_) out[t] += hh.preferred_load(t);
        return out;
    }

    double rho() const {
        return cfg_.rho;
    }

  private:
    double planned_aggregate(int t) const {
        double s = 0.0;
        for (const auto& hh : households_) s += hh.planned_load(t);
        return s;
    }

    data::DayData day_;
    std::vector<household::HouseholdDay> template_households_;
    std::vector<household::HouseholdDay> households_;
    double capacity_ = 0.0;
    EnvConfig cfg_;
    ActionCodec codec_;
    int hour_ = 0;
    double prev_lambda_sum_ = 0.0;
    Vec realized_;
    std::vector<StepInfo> trace_;
};

// Builds the per-day households from a day's demand columns.
inline Environment make_environment(const data::DayData& day,
                                    const std::vector<household::ApplianceTemplate>& fleet,
                                    const std::vector<std::vector<double>>& betas_per_eu,
                                    double capacity, EnvConfig cfg = {}) {
    require(betas_per_eu.size() == day.eu_loads.size(), "betas must cover every household");
    std::vector<household::HouseholdDay> hhs;
    for (std::size_t n = 0; n < day.eu_loads.size(); ++n)
        hhs.push_back(household::build_household("eu" + std::to_string(n + 1), day.eu_loads[n],
                                                 fleet, betas_per_eu[n]));
    return Environment(day, std::move(hhs), capacity, cfg);
}

// ---------------------------------------------------------------------------
// Trace export
// ---------------------------------------------------------------------------

inline void write_trace_csv(const std::vector<StepInfo>& trace, std::ostream& out) {
    if (trace.empty()) return;
    const std::size_t n = trace.front().rates.size();
    out << "hour,price";
    for (std::size_t i = 1; i <= n; ++i) out << ",lambda_eu" << i;
    for (std::size_t i = 1; i <= n; ++i) out << ",delta_e_eu" << i;
    for (std::size_t i = 1; i <= n; ++i) out << ",dis_cost_eu" << i;
    out << ",load_before,load_after,required,phi,reward\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.9f", v);
        out << ',' << buf;
    };
    for (const auto& row : trace) {
        out << row.hour + 1;
        put(row.price);
        for (double v : row.rates) put(v);
        for (double v : row.delta_e) put(v);
        for (double v : row.dis_cost) put(v);
        put(row.load_before);
        put(row.load_after);
        put(row.required);
        put(row.phi);
        put(row.reward);
        out << '\n';
    }
}

inline void write_trace_csv(const std::vector<StepInfo>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    write_trace_csv(trace, out);
}

inline std::vector<StepInfo> read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty trace");
    auto header = data::detail::split_csv_line(line);
    std::size_t n = 0;
    for (const auto& h : header)
        if (h.rfind("lambda_eu", 0) == 0) ++n;
    std::vector<StepInfo> trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = data::detail::split_csv_line(line);
        if (cells.size() != header.size()) throw ParseError("trace row width mismatch");
        StepInfo row;
        std::size_t c = 0;
        row.hour = std::stoi(cells[c++]) - 1;
        row.price = std::stod(cells[c++]);
        for (std::size_t i = 0; i < n; ++i) row.rates.push_back(std::stod(cells[c++]));
        for (std::size_t i = 0; i < n; ++i) row.delta_e.push_back(std::stod(cells[c++]));
        for (std::size_t i = 0; i < n; ++i) row.dis_cost.push_back(std::stod(cells[c++]));
        row.load_before = std::stod(cells[c++]);
        row.load_after = std::stod(cells[c++]);
        row.required = std::stod(cells[c++]);
        row.phi = std::stod(cells[c++]);
        row.reward = std::stod(cells[c++]);
        trace.push_back(std::move(row));
    }
    return trace;
}

inline std::vector<StepInfo> read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_trace_csv(in);
}

}  // namespace ccdr::env
