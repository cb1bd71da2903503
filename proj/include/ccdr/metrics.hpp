#pragma once

#include <fstream>
#include <functional>

#include "ccdr/common.hpp"
#include "ccdr/market_env.hpp"

namespace ccdr::metrics {

// ---------------------------------------------------------------------------
// Load statistics
// ---------------------------------------------------------------------------

struct LoadStats {
    double peak = 0.0;
    double mean = 0.0;
    double par = 0.0;

    static LoadStats from_peak_mean(double peak, double mean) {
        require(mean > 0.0, "mean load must be positive");
        return LoadStats{peak, mean, peak / mean};
    }
};

inline LoadStats load_stats(std::span<const double> hourly) {
    require(!hourly.empty(), "load_stats needs at least one value");
    double peak = 0.0, sum = 0.0;
    for (double v : hourly) {
        require(v >= 0.0, "loads must be nonnegative");
        peak = std::max(peak, v);
        sum += v;
    }
    const double mean = sum / static_cast<double>(hourly.size());
    if (mean <= 0.0) throw std::invalid_argument("mean load is zero");
    return LoadStats{peak, mean, peak / mean};
}

// Percentage drop of the peak-to-average ratio; negative when it worsens.
inline double par_improvement(const LoadStats& base, const LoadStats& treated) {
    require(base.par > 0.0, "base PAR must be positive");
    return 100.0 * (base.par - treated.par) / base.par;
}

// Mean of per-day statistics over a multi-day profile.
inline LoadStats daily_mean_stats(std::span<const double> hourly) {
    require(hourly.size() % kHoursPerDay == 0, "profile must cover whole days");
    const std::size_t days = hourly.size() / kHoursPerDay;
    LoadStats acc{0.0, 0.0, 0.0};
    for (std::size_t d = 0; d < days; ++d) {
        LoadStats s = load_stats(hourly.subspan(d * kHoursPerDay, kHoursPerDay));
        acc.peak += s.peak;
        acc.mean += s.mean;
        acc.par += s.par;
    }
    acc.peak /= static_cast<double>(days);
    acc.mean /= static_cast<double>(days);
    acc.par /= static_cast<double>(days);
    return acc;
}

// ---------------------------------------------------------------------------
// Financial ledger
// ---------------------------------------------------------------------------

struct EuLedger {
    double reduction_kwh = 0.0;
    double income = 0.0;      // cents
    double discomfort = 0.0;  // cents
    double profit = 0.0;      // rho-weighted income minus (1-rho)-weighted discomfort
};

struct FinancialLedger {
    std::vector<EuLedger> eus;
    double sp_gross = 0.0;  // wholesale savings, cents
    double sp_cost = 0.0;   // incentive payments, cents
    double sp_profit = 0.0;
    double rho = 0.9;

    double eu_profit_sum() const {
        double s = 0.0;
        for (const auto& eu : eus) s += eu.profit;
        return s;
    }
};

inline FinancialLedger ledger(const std::vector<env::StepInfo>& trace, double rho) {
    require(!trace.empty(), "ledger needs a complete trace");
    const std::size_t n = trace.front().rates.size();
    FinancialLedger led;
    led.rho = rho;
    led.eus.assign(n, EuLedger{});
    for (const auto& row : trace) {
        require(row.rates.size() == n && row.delta_e.size() == n && row.dis_cost.size() == n,
                "trace row has inconsistent EU count");
        for (std::size_t i = 0; i < n; ++i) {
            led.eus[i].reduction_kwh += row.delta_e[i];
            led.eus[i].income += row.rates[i] * row.delta_e[i];
            led.eus[i].discomfort += row.dis_cost[i];
            led.sp_gross += row.price * row.delta_e[i];
            led.sp_cost += row.rates[i] * row.delta_e[i];
        }
    }
    for (auto& eu : led.eus) eu.profit = rho * eu.income - (1.0 - rho) * eu.discomfort;
    led.sp_profit = led.sp_gross - led.sp_cost;
    return led;
}

// ---------------------------------------------------------------------------
// Sweeps and exports
// ---------------------------------------------------------------------------

// Runs the supplied train+evaluate pipeline once per rho and assembles the
// per-rho ledgers.
inline std::vector<FinancialLedger> rho_sweep(
    const std::vector<double>& rhos,
    const std::function<std::vector<env::StepInfo>(double)>& pipeline) {
    std::vector<FinancialLedger> out;
    for (double rho : rhos) {
        require(rho >= 0.0 && rho <= 1.0, "rho must be in [0,1]");
        out.push_back(ledger(pipeline(rho), rho));
    }
    return out;
}

inline void write_table6_csv(const LoadStats& no_dr, const LoadStats& eblr_stats,
                             const LoadStats& ccrl, std::ostream& out) {
    char buf[160];
    out << "metric,no_dr,eblr,ccrl_dr\n";
    std::snprintf(buf, sizeof(buf), "peak_kw,%.9f,%.9f,%.9f\n", no_dr.peak, eblr_stats.peak, ccrl.peak);
    out << buf;
    std::snprintf(buf, sizeof(buf), "mean_kw,%.9f,%.9f,%.9f\n", no_dr.mean, eblr_stats.mean, ccrl.mean);
    out << buf;
    std::snprintf(buf, sizeof(buf), "par,%.9f,%.9f,%.9f\n", no_dr.par, eblr_stats.par, ccrl.par);
    out << buf;
}

inline void write_table7_csv(const std::vector<FinancialLedger>& ledgers, std::ostream& out) {
    out << "metric";
    char buf[64];
    for (const auto& led : ledgers) {
        std::snprintf(buf, sizeof(buf), ",rho_%.2f", led.rho);
        out << buf;
    }
    out << '\n';
    const std::size_t n = ledgers.empty() ? 0 : ledgers.front().eus.size();
    auto row = [&](const std::string& name, auto getter) {
        out << name;
        for (const auto& led : ledgers) {
            std::snprintf(buf, sizeof(buf), ",%.9f", getter(led));
            out << buf;
        }
        out << '\n';
    };
    for (std::size_t i = 0; i < n; ++i) {
        const std::string tag = "eu" + std::to_string(i + 1);
        row(tag + "_reduction_kwh", [i](const FinancialLedger& l) { return l.eus[i].reduction_kwh; });
        row(tag + "_income_cents", [i](const FinancialLedger& l) { return l.eus[i].income; });
        row(tag + "_discomfort_cents", [i](const FinancialLedger& l) { return l.eus[i].discomfort; });
        row(tag + "_profit_cents", [i](const FinancialLedger& l) { return l.eus[i].profit; });
    }
    row("eu_profit_sum_cents", [](const FinancialLedger& l) { return l.eu_profit_sum(); });
    row("sp_gross_cents", [](const FinancialLedger& l) { return l.sp_gross; });
    row("sp_cost_cents", [](const FinancialLedger& l) { return l.sp_cost; });
    row("sp_profit_cents", [](const FinancialLedger& l) { return l.sp_profit; });
}

// Bar-chart data behind the three-way comparison.
inline void write_fig13_csv(const LoadStats& no_dr, const LoadStats& eblr_stats,
                            const LoadStats& ccrl, std::ostream& out) {
    char buf[128];
    out << "series,peak_kw,mean_kw,par\n";
    std::snprintf(buf, sizeof(buf), "no_dr,%.9f,%.9f,%.9f\n", no_dr.peak, no_dr.mean, no_dr.par);
    out << buf;
    std::snprintf(buf, sizeof(buf), "eblr,%.9f,%.9f,%.9f\n", eblr_stats.peak, eblr_stats.mean,
                  eblr_stats.par);
    out << buf;
    std::snprintf(buf, sizeof(buf), "ccrl_dr,%.9f,%.9f,%.9f\n", ccrl.peak, ccrl.mean, ccrl.par);
    out << buf;
}

}  // namespace ccdr::metrics
