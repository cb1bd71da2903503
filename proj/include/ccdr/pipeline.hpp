#pragma once

#include "ccdr/agent.hpp"
#include "ccdr/benchmark.hpp"
#include "ccdr/config.hpp"
#include "ccdr/data.hpp"
#include "ccdr/forecast.hpp"
#include "ccdr/market_env.hpp"
#include "ccdr/metrics.hpp"

namespace ccdr::pipeline {

// Split, capacity threshold and per-household dissatisfaction draws for one
// run; everything downstream derives from this.
struct Prepared {
    data::DatasetSplit split;
    double capacity = 0.0;
    std::vector<std::vector<double>> betas_per_eu;
    data::HolidayCalendar holidays;
};

inline Prepared prepare(const data::HourlySeries& series, const config::RunConfig& cfg) {
    Prepared p;
    p.split = data::split_train_test(series, cfg.parse_date(cfg.test_start), cfg.test_days);
    p.capacity = cfg.capacity_override > 0.0
                     ? cfg.capacity_override
                     : env::capacity_threshold(p.split.train, cfg.capacity_fraction);
    p.holidays = cfg.holidays();
    Rng beta_rng(cfg.seed ^ 0xb37a5eedULL);
    for (std::size_t n = 0; n < series.num_households(); ++n)
        p.betas_per_eu.push_back(household::sample_betas(cfg.fleet, beta_rng));
    return p;
}

inline env::EnvConfig env_config(const config::RunConfig& cfg) {
    return env::EnvConfig{cfg.rho, cfg.incentive_levels, cfg.max_incentive_fraction};
}

// Training pool over the train split; the last `n_val` days are held out as
// fixed validation days.
inline agent::EpisodePool make_pool(const Prepared& p, const config::RunConfig& cfg,
                                    int n_val = 3) {
    agent::EpisodePool pool;
    auto days = data::slice_days(p.split.train);
    require(static_cast<int>(days.size()) > n_val, "not enough training days");
    pool.train_days.assign(days.begin(), days.end() - n_val);
    pool.val_days.assign(days.end() - n_val, days.end());
    pool.fleet = cfg.fleet;
    pool.betas_per_eu = p.betas_per_eu;
    pool.capacity = p.capacity;
    pool.env_cfg = env_config(cfg);
    return pool;
}

// ---------------------------------------------------------------------------
// Forecast plumbing
// ---------------------------------------------------------------------------

struct ForecastModels {
    forecast::Forecaster price;
    std::vector<forecast::Forecaster> loads;  // one per EU
};

// Rolls the day's price and per-EU load forecasts into environment inputs.
inline data::DayData forecast_day_data(const ForecastModels& models,
                                       const data::HourlySeries& history,
                                       const data::HourStamp& day_start,
                                       const data::HolidayCalendar& holidays) {
    data::DayData day;
    day.day_start = data::HourStamp{day_start.year, day_start.month, day_start.day, 0};
    day.price = forecast::forecast_day(models.price, history, forecast::Target::price(), day_start,
                                       holidays);
    for (std::size_t n = 0; n < models.loads.size(); ++n) {
        Vec f = forecast::forecast_day(models.loads[n], history,
                                       forecast::Target::load(static_cast<int>(n)), day_start,
                                       holidays);
        for (double& v : f) v = std::max(0.0, v);
        day.eu_loads.push_back(std::move(f));
    }
    return day;
}

// Replaces each pool day by its forecast counterpart (days without enough
// lag history are dropped).
inline void apply_forecasts(agent::EpisodePool& pool, const ForecastModels& models,
                            const data::HourlySeries& full_series,
                            const data::HolidayCalendar& holidays) {
    auto replace = [&](std::vector<data::DayData>& days) {
        std::vector<data::DayData> out;
        for (const auto& d : days) {
            const long offset = data::hours_since_epoch(d.day_start) -
                                data::hours_since_epoch(full_series.start);
            if (offset < forecast::kLags.back() + models.price.config().window - 1) continue;
            out.push_back(forecast_day_data(models, full_series, d.day_start, holidays));
        }
        days = std::move(out);
    };
    replace(pool.train_days);
    replace(pool.val_days);
}

// ---------------------------------------------------------------------------
// Day lookup and comparison runs
// ---------------------------------------------------------------------------

inline data::DayData find_day(const data::HourlySeries& series, const data::HourStamp& date) {
    for (const auto& d : data::slice_days(series))
        if (d.day_start.year == date.year && d.day_start.month == date.month &&
            d.day_start.day == date.day)
            return d;
    throw DataError("day " + data::format_stamp(date) + " not found in series");
}

struct CompareResult {
    metrics::LoadStats no_dr;
    metrics::LoadStats eblr_stats;
    metrics::LoadStats ccrl;
    eblr::DayResult eblr_day;
    agent::EvalResult ccrl_eval;
};

// No-DR / EBLR / CCRL-DR on the same day with the same inputs.
inline CompareResult compare_day(const data::DayData& day, const neural::DenseNet& q_net,
                                 const Prepared& p, const config::RunConfig& cfg) {
    CompareResult out;
    Vec agg(kHoursPerDay, 0.0);
    for (int t = 0; t < kHoursPerDay; ++t) agg[t] = day.aggregate(t);
    out.no_dr = metrics::load_stats(agg);

    out.eblr_day = eblr::eblr_run_day(day, eblr::default_eu_params(day.eu_loads.size()), {},
                                      cfg.rho, cfg.eblr_relative_band);
    out.eblr_stats = metrics::load_stats(out.eblr_day.aggregate_post);

    env::Environment e = env::make_environment(day, cfg.fleet, p.betas_per_eu, p.capacity,
                                               env_config(cfg));
    out.ccrl_eval = agent::evaluate(q_net, e);
    out.ccrl = metrics::load_stats(out.ccrl_eval.realized);
    return out;
}

// A Q-network that always prefers action 0 (the all-zero incentive vector).
inline neural::DenseNet zero_policy(int n_actions) {
    neural::DenseNet net;
    neural::DenseLayer layer;
    layer.w = neural::Matrix(n_actions, env::EnvState::dimension);
    layer.b.assign(n_actions, 0.0);
    layer.b[0] = 1.0;
    layer.relu = false;
    net.layers.push_back(std::move(layer));
    return net;
}

}  // namespace ccdr::pipeline
