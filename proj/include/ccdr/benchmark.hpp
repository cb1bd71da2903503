#pragma once

#include "ccdr/common.hpp"
#include "ccdr/data.hpp"
#include "ccdr/market_env.hpp"

namespace ccdr::eblr {

// Hourly demand elasticity: off-peak hours 1-6 and 22-24, mid-peak 7-16,
// on-peak 17-21 (1-based clock slots).
struct ElasticitySchedule {
    double off_peak = 0.5;
    double mid_peak = 0.3;
    double on_peak = 0.1;

    double at_hour(int hour0) const {
        require(hour0 >= 0 && hour0 < kHoursPerDay, "hour out of range");
        const int h = hour0 + 1;
        if (h >= 17 && h <= 21) return on_peak;
        if (h >= 7 && h <= 16) return mid_peak;
        return off_peak;
    }
};

struct EuParams {
    double mu = 0.3;     // position of the incentive within its band
    double omega = 0.1;  // carried in the parameter set; unused by the response formula
    double k_min = 0.0;
    double k_max_fraction = 0.3;       // K_max = fraction * E_{n,h}
    double lambda_min_fraction = 0.3;  // of the daily minimum price
    double lambda_max_fraction = 1.0;  // of the daily minimum price
};

inline std::vector<EuParams> default_eu_params(std::size_t n_eu) {
    std::vector<EuParams> params(n_eu);
    const double mus[3] = {0.3, 0.6, 0.9};
    for (std::size_t n = 0; n < n_eu; ++n) params[n].mu = mus[n % 3];
    return params;
}

// Elasticity response: E * xi * (lambda - lambda_min) / lambda_min, clamped
// to [k_min, k_max]. `relative_band` divides by (lambda_max - lambda_min)
// instead of lambda_min.
inline double eblr_reduction(double energy, double xi, double lambda, double lambda_min,
                             double k_min, double k_max, double lambda_max = 0.0,
                             bool relative_band = false) {
    require(lambda_min > 0.0, "lambda_min must be positive");
    if (lambda < lambda_min) throw std::invalid_argument("lambda below lambda_min");
    const double denom = relative_band ? (lambda_max - lambda_min) : lambda_min;
    require(denom > 0.0, "empty incentive band");
    const double raw = energy * xi * (lambda - lambda_min) / denom;
    return clamp(raw, k_min, k_max);
}

struct DayResult {
    std::vector<Vec> pre;   // per EU, 24
    std::vector<Vec> post;  // per EU, 24
    std::vector<Vec> reduction;
    Vec aggregate_pre;
    Vec aggregate_post;
    std::vector<env::StepInfo> trace;
};

// Open-loop elasticity benchmark over one day: each EU's incentive sits at
// its mu-position inside [0.3 p_min, p_min]; reductions follow the hourly
// elasticity with no capacity feedback and no load shifting.
inline DayResult eblr_run_day(const data::DayData& day, const std::vector<EuParams>& params,
                              const ElasticitySchedule& schedule = {}, double rho = 0.9,
                              bool relative_band = false) {
    require(day.price.size() == kHoursPerDay, "day must provide 24 prices");
    require(params.size() == day.eu_loads.size(), "one parameter set per EU required");

    double p_min = day.price[0];
    for (double p : day.price) p_min = std::min(p_min, p);

    DayResult result;
    result.aggregate_pre.assign(kHoursPerDay, 0.0);
    result.aggregate_post.assign(kHoursPerDay, 0.0);
    for (std::size_t n = 0; n < params.size(); ++n) {
        result.pre.push_back(day.eu_loads[n]);
        result.post.emplace_back(kHoursPerDay, 0.0);
        result.reduction.emplace_back(kHoursPerDay, 0.0);
    }

    for (int t = 0; t < kHoursPerDay; ++t) {
        env::StepInfo info;
        info.hour = t;
        info.price = day.price[t];
        const double xi = schedule.at_hour(t);
        double agg_pre = 0.0, agg_post = 0.0, reward = 0.0;
        for (std::size_t n = 0; n < params.size(); ++n) {
            const EuParams& eu = params[n];
            const double lambda_min = eu.lambda_min_fraction * p_min;
            const double lambda_max = eu.lambda_max_fraction * p_min;
            const double lambda = lambda_min + eu.mu * (lambda_max - lambda_min);
            const double energy = day.eu_loads[n][t];
            const double k_max = eu.k_max_fraction * energy;
            const double de = eblr_reduction(energy, xi, lambda, lambda_min, eu.k_min, k_max,
                                             lambda_max, relative_band);
            result.reduction[n][t] = de;
            result.post[n][t] = energy - de;
            agg_pre += energy;
            agg_post += energy - de;
            info.rates.push_back(lambda);
            info.delta_e.push_back(de);
            info.dis_cost.push_back(0.0);
            reward += (day.price[t] - lambda) * de + rho * lambda * de;
        }
        result.aggregate_pre[t] = agg_pre;
        result.aggregate_post[t] = agg_post;
        info.load_before = agg_pre;
        info.load_after = agg_post;
        info.required = 0.0;
        info.phi = 0.0;
        info.reward = reward;
        result.trace.push_back(std::move(info));
    }
    return result;
}

}  // namespace ccdr::eblr
