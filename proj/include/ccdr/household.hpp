#pragma once

#include <array>
#include <numeric>

#include "ccdr/common.hpp"

namespace ccdr::household {

enum class ApplianceType { PC, TS_I, TS_NI, NS };

inline const char* type_name(ApplianceType t) {
    switch (t) {
        case ApplianceType::PC: return "PC";
        case ApplianceType::TS_I: return "TS-I";
        case ApplianceType::TS_NI: return "TS-NI";
        default: return "NS";
    }
}

// Device descriptor. Hours are 0-based slot indices within the day; the
// scheduling window [window_start, window_end] is inclusive.
struct Appliance {
    std::string id;
    ApplianceType type = ApplianceType::NS;
    double beta = 0.0;  // cents/(kWh)^2 for PC, cents/hour^2 for TS

    // PC
    int levels = 0;

    // TS-NI
    int block_length = 0;
    double block_energy = 0.0;  // kWh per block hour

    // TS-I
    double daily_energy = 0.0;
    double max_rate = 0.0;

    int window_start = 0;
    int window_end = kHoursPerDay - 1;

    void validate() const {
        if (type == ApplianceType::NS) return;
        require(beta > 0.0, "appliance " + id + ": beta must be > 0");
        if (type == ApplianceType::PC) require(levels >= 1, "appliance " + id + ": levels must be >= 1");
        if (type == ApplianceType::TS_NI) {
            require(block_length >= 1, "appliance " + id + ": block length must be >= 1");
            require(window_end >= window_start + block_length - 1,
                    "appliance " + id + ": window cannot fit operating block");
        }
        if (type == ApplianceType::TS_I) {
            require(max_rate > 0.0, "appliance " + id + ": max_rate must be > 0");
            const double deliverable = max_rate * (window_end - window_start + 1);
            require(daily_energy <= deliverable + 1e-12,
                    "appliance " + id + ": daily energy exceeds window capacity");
        }
    }
};

// ---------------------------------------------------------------------------
// Power-controllable appliances (discrete curtailment levels)
// ---------------------------------------------------------------------------

inline double pc_delta(int q, int m, double energy) {
    require(q >= 0 && q <= m, "curtailment level out of range");
    return static_cast<double>(q) / static_cast<double>(m) * energy;
}

inline double pc_cost(double beta, int q, int m, double energy) {
    const double d = pc_delta(q, m, energy);
    return beta * d * d;
}

// argmax over q in {0..m} of lambda*delta(q) - cost(q); ties break low.
inline int pc_best_response(double lambda, double beta, int m, double energy) {
    require(lambda >= 0.0, "incentive rate must be >= 0");
    int best_q = 0;
    double best_u = 0.0;
    for (int q = 1; q <= m; ++q) {
        const double u = lambda * pc_delta(q, m, energy) - pc_cost(beta, q, m, energy);
        if (u > best_u) {
            best_u = u;
            best_q = q;
        }
    }
    return best_q;
}

// ---------------------------------------------------------------------------
// Time-shiftable appliances
// ---------------------------------------------------------------------------

inline double ts_cost(double beta, double delay_hours) {
    require(delay_hours >= 0.0, "delay must be >= 0");
    return beta * delay_hours * delay_hours;
}

struct TsNiPlan {
    int start = 0;
    std::array<double, kHoursPerDay> removed{};  // vacated energy per hour, kWh
    double dis_cost = 0.0;
    bool moved = false;
};

// Reschedules a non-interruptible operating block. `aggregate` is the current
// planned aggregate load including this block at `preferred_start`. Candidate
// starts lie in [max(window_start, decision_hour), deadline - L + 1] and must
// keep the aggregate at or below capacity over the whole relocated block.
// Moves only when the lambda-weighted relief of over-capacity hours beats
// the quadratic delay cost.
inline TsNiPlan schedule_ts_ni(const Appliance& app, double lambda,
                               std::span<const double> aggregate, double capacity,
                               int preferred_start, int decision_hour = 0) {
    require(app.type == ApplianceType::TS_NI, "schedule_ts_ni needs a TS-NI appliance");
    app.validate();
    const int len = app.block_length;
    require(preferred_start >= app.window_start &&
                preferred_start + len - 1 <= app.window_end,
            "appliance " + app.id + ": preferred block must fit inside its window");

    TsNiPlan plan;
    plan.start = preferred_start;

    // Base load without this block.
    std::array<double, kHoursPerDay> base{};
    for (int t = 0; t < kHoursPerDay; ++t) base[t] = aggregate[t];
    for (int t = preferred_start; t < preferred_start + len; ++t) base[t] -= app.block_energy;

    // Relief of a candidate: energy vacated from over-capacity preferred
    // hours that the relocated block no longer covers.
    auto relief = [&](int s) {
        double r = 0.0;
        for (int t = preferred_start; t < preferred_start + len; ++t)
            if ((t < s || t >= s + len) && aggregate[t] > capacity) r += app.block_energy;
        return r;
    };

    double best_gain = 0.0;  // stay-put baseline
    int best_start = preferred_start;
    const int first = std::max(app.window_start, decision_hour);
    for (int s = first; s + len - 1 <= app.window_end; ++s) {
        if (s == preferred_start) continue;
        bool fits = true;
        for (int t = s; t < s + len; ++t) {
            if (base[t] + app.block_energy > capacity + 1e-12) {
                fits = false;
                break;
            }
        }
        if (!fits) continue;
        const double delay = std::abs(s - preferred_start);
        const double gain = lambda * relief(s) - ts_cost(app.beta, delay);
        bool take = gain > best_gain + 1e-12;
        if (!take && best_start != preferred_start && std::abs(gain - best_gain) <= 1e-12) {
            const int cur = std::abs(best_start - preferred_start);
            const int alt = std::abs(s - preferred_start);
            take = alt < cur || (alt == cur && s < best_start);
        }
        if (take) {
            best_gain = gain;
            best_start = s;
        }
    }

    if (best_start != preferred_start) {
        plan.start = best_start;
        plan.moved = true;
        for (int t = preferred_start; t < preferred_start + len; ++t)
            if (t < best_start || t >= best_start + len) plan.removed[t] = app.block_energy;
        plan.dis_cost = ts_cost(app.beta, std::abs(best_start - preferred_start));
    }
    return plan;
}

struct TsIPlan {
    std::array<double, kHoursPerDay> profile{};  // full-day delivery, kWh per hour
    std::array<double, kHoursPerDay> removed{};  // reductions vs preferred at over-capacity hours
    double dis_cost = 0.0;
    bool moved = false;
};

// Replans an interruptible appliance (e.g. EV charging) from `decision_hour`
// onward. Greedy water-filling: remaining energy goes to future window hours
// in ascending order of underlying load, capped by max_rate and by the
// capacity headroom. Keeps the preferred profile when the replanned schedule
// does not pay for its delay or cannot deliver the energy under the capacity
// limit.
inline TsIPlan schedule_ts_i(const Appliance& app, double lambda,
                             std::span<const double> aggregate, double capacity,
                             std::span<const double> preferred, int decision_hour = 0) {
    require(app.type == ApplianceType::TS_I, "schedule_ts_i needs a TS-I appliance");
    app.validate();

    TsIPlan plan;
    for (int t = 0; t < kHoursPerDay; ++t) plan.profile[t] = preferred[t];

    double remaining = 0.0;
    for (int t = std::max(app.window_start, decision_hour); t <= app.window_end; ++t)
        remaining += preferred[t];
    if (remaining <= 1e-12) return plan;

    std::array<double, kHoursPerDay> base{};
    for (int t = 0; t < kHoursPerDay; ++t) base[t] = aggregate[t] - preferred[t];

    // Fill order: future window hours, lowest underlying load first.
    std::vector<int> order;
    for (int t = std::max(app.window_start, decision_hour); t <= app.window_end; ++t) order.push_back(t);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return base[a] < base[b]; });

    std::array<double, kHoursPerDay> alloc{};
    double left = remaining;
    for (int t : order) {
        const double headroom = capacity - base[t];
        const double cap = std::min(app.max_rate, headroom);
        if (cap <= 0.0) continue;
        const double take = std::min(cap, left);
        alloc[t] = take;
        left -= take;
        if (left <= 1e-12) break;
    }
    if (left > 1e-9) return plan;  // undeliverable under the capacity limit; stay put

    // Candidate schedule: past hours keep preferred, future hours replanned.
    std::array<double, kHoursPerDay> candidate{};
    for (int t = 0; t < kHoursPerDay; ++t)
        candidate[t] = t < decision_hour ? preferred[t] : alloc[t];

    // Energy-weighted mean delivery hour, floored at zero delay.
    auto mean_hour = [](const std::array<double, kHoursPerDay>& p) {
        double e = 0.0, m = 0.0;
        for (int t = 0; t < kHoursPerDay; ++t) {
            e += p[t];
            m += p[t] * (t + 0.5);
        }
        return e > 0.0 ? m / e : 0.0;
    };
    std::array<double, kHoursPerDay> pref_arr{};
    for (int t = 0; t < kHoursPerDay; ++t) pref_arr[t] = preferred[t];
    const double delay = std::max(0.0, mean_hour(candidate) - mean_hour(pref_arr));
    const double dis = ts_cost(app.beta, delay);

    double overcap_removed = 0.0;
    std::array<double, kHoursPerDay> removed{};
    for (int t = decision_hour; t < kHoursPerDay; ++t) {
        const double r = preferred[t] - candidate[t];
        if (r > 1e-12 && aggregate[t] > capacity) {
            removed[t] = r;
            overcap_removed += r;
        }
    }

    if (lambda * overcap_removed - dis > 1e-12) {
        plan.profile = candidate;
        plan.removed = removed;
        plan.dis_cost = dis;
        plan.moved = true;
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Household day simulation
// ---------------------------------------------------------------------------

struct HourOutcome {
    double delta_e = 0.0;   // paid reduction, kWh
    double dis_cost = 0.0;  // cents
    double realized = 0.0;  // consumption after response, kWh
    double preferred = 0.0;
};

struct ApplianceState {
    Appliance spec;
    std::array<double, kHoursPerDay> preferred{};
    std::array<double, kHoursPerDay> planned{};
    int preferred_start = -1;  // TS-NI only
    int planned_start = -1;
};

// Per-day response state of one end user. Preferred appliance profiles are
// carved out of the household's hourly demand; respond() applies curtailment
// and shifting hour by hour.
class HouseholdDay {
  public:
    std::string eu_id;
    std::vector<ApplianceState> appliances;

    static HouseholdDay from_appliances(std::string id, std::vector<ApplianceState> apps) {
        HouseholdDay hh;
        hh.eu_id = std::move(id);
        hh.appliances = std::move(apps);
        for (auto& a : hh.appliances) {
            a.planned = a.preferred;
            a.planned_start = a.preferred_start;
        }
        return hh;
    }

    double preferred_load(int t) const {
        double s = 0.0;
        for (const auto& a : appliances) s += a.preferred[t];
        return s;
    }

    // Current plan (curtailments and shifts applied as decided so far).
    double planned_load(int t) const {
        double s = 0.0;
        for (const auto& a : appliances) s += a.planned[t];
        return s;
    }

    bool ts_decided() const {
        return ts_decided_;
    }

    // Advances the household through hour `hour` under incentive rate
    // `lambda`. `aggregate` is the planned aggregate load of all households
    // for the day (snapshot taken before any response this hour).
    HourOutcome respond(int hour, double lambda, std::span<const double> aggregate,
                        double capacity) {
        require(hour >= 0 && hour < kHoursPerDay, "hour out of range");
        HourOutcome out;
        out.preferred = preferred_load(hour);

        // One-shot TS rescheduling at the first over-capacity hour with a
        // nonzero incentive.
        if (!ts_decided_ && lambda > 0.0 && aggregate[hour] > capacity) {
            decide_ts(hour, lambda, aggregate, capacity);
            ts_decided_ = true;
        }

        // PC curtailment is an hourly decision.
        for (auto& a : appliances) {
            if (a.spec.type != ApplianceType::PC) continue;
            const double energy = a.preferred[hour];
            if (energy <= 0.0 || lambda <= 0.0) continue;
            const int q = pc_best_response(lambda, a.spec.beta, a.spec.levels, energy);
            if (q == 0) continue;
            const double d = pc_delta(q, a.spec.levels, energy);
            a.planned[hour] = energy - d;
            out.delta_e += d;
            out.dis_cost += pc_cost(a.spec.beta, q, a.spec.levels, energy);
        }

        out.delta_e += pending_delta_[hour];
        out.dis_cost += pending_dis_[hour];
        out.realized = planned_load(hour);
        return out;
    }

  private:
    void decide_ts(int hour, double lambda, std::span<const double> aggregate, double capacity) {
        // Local working copy so this household's own moves are visible to its
        // later appliances within the same decision.
        std::array<double, kHoursPerDay> agg{};
        for (int t = 0; t < kHoursPerDay; ++t) agg[t] = aggregate[t];

        for (auto& a : appliances) {
            if (a.spec.type == ApplianceType::TS_NI) {
                if (a.preferred_start < 0 || a.preferred_start < hour) continue;  // started or absent
                TsNiPlan plan = schedule_ts_ni(a.spec, lambda, agg, capacity, a.preferred_start, hour);
                if (!plan.moved) continue;
                for (int t = a.preferred_start; t < a.preferred_start + a.spec.block_length; ++t) {
                    a.planned[t] = 0.0;
                    agg[t] -= a.spec.block_energy;
                }
                for (int t = plan.start; t < plan.start + a.spec.block_length; ++t) {
                    a.planned[t] = a.spec.block_energy;
                    agg[t] += a.spec.block_energy;
                }
                a.planned_start = plan.start;
                for (int t = 0; t < kHoursPerDay; ++t) pending_delta_[t] += plan.removed[t];
                const int first_dev = std::min(a.preferred_start, plan.start);
                pending_dis_[first_dev] += plan.dis_cost;
            } else if (a.spec.type == ApplianceType::TS_I) {
                std::array<double, kHoursPerDay> pref{};
                for (int t = 0; t < kHoursPerDay; ++t) pref[t] = a.preferred[t];
                TsIPlan plan = schedule_ts_i(a.spec, lambda, agg, capacity, pref, hour);
                if (!plan.moved) continue;
                for (int t = 0; t < kHoursPerDay; ++t) {
                    agg[t] += plan.profile[t] - a.planned[t];
                    a.planned[t] = plan.profile[t];
                    pending_delta_[t] += plan.removed[t];
                }
                int first_dev = hour;
                for (int t = 0; t < kHoursPerDay; ++t)
                    if (std::abs(plan.profile[t] - a.preferred[t]) > 1e-12) {
                        first_dev = t;
                        break;
                    }
                pending_dis_[first_dev] += plan.dis_cost;
            }
        }
    }

    bool ts_decided_ = false;
    std::array<double, kHoursPerDay> pending_delta_{};
    std::array<double, kHoursPerDay> pending_dis_{};
};

// ---------------------------------------------------------------------------
// Fleet construction
// ---------------------------------------------------------------------------

// Appliance template with the dissatisfaction-coefficient distribution the
// per-household betas are drawn from.
struct ApplianceTemplate {
    Appliance spec;
    double beta_mean = 0.0;
    double beta_std = 0.0;
    double load_fraction = 0.0;  // PC: curtailable share of demand inside the window
    int preferred_start = -1;    // TS-NI
};

// Default residential fleet: AC (power-controllable), washing machine, dish
// washer and dryer (non-interruptible blocks), EV charging (interruptible).
inline std::vector<ApplianceTemplate> default_fleet() {
    std::vector<ApplianceTemplate> fleet;
    {
        ApplianceTemplate ac;
        ac.spec.id = "ac";
        ac.spec.type = ApplianceType::PC;
        ac.spec.levels = 4;
        ac.spec.window_start = 10;
        ac.spec.window_end = 21;
        ac.beta_mean = 3.5;
        ac.beta_std = 2.0;
        ac.load_fraction = 0.45;
        fleet.push_back(ac);
    }
    {
        ApplianceTemplate wm;
        wm.spec.id = "wm";
        wm.spec.type = ApplianceType::TS_NI;
        wm.spec.block_length = 2;
        wm.spec.block_energy = 0.5;
        wm.spec.window_start = 8;
        wm.spec.window_end = 21;
        wm.preferred_start = 13;
        wm.beta_mean = 0.4;
        wm.beta_std = 0.1;
        fleet.push_back(wm);
    }
    {
        ApplianceTemplate dw;
        dw.spec.id = "dw";
        dw.spec.type = ApplianceType::TS_NI;
        dw.spec.block_length = 2;
        dw.spec.block_energy = 0.6;
        dw.spec.window_start = 10;
        dw.spec.window_end = 23;
        dw.preferred_start = 14;
        dw.beta_mean = 0.2;
        dw.beta_std = 0.1;
        fleet.push_back(dw);
    }
    {
        ApplianceTemplate dr;
        dr.spec.id = "dryer";
        dr.spec.type = ApplianceType::TS_NI;
        dr.spec.block_length = 1;
        dr.spec.block_energy = 1.0;
        dr.spec.window_start = 8;
        dr.spec.window_end = 21;
        dr.preferred_start = 15;
        dr.beta_mean = 0.1;
        dr.beta_std = 0.1;
        fleet.push_back(dr);
    }
    {
        ApplianceTemplate ev;
        ev.spec.id = "ev";
        ev.spec.type = ApplianceType::TS_I;
        ev.spec.daily_energy = 4.0;
        ev.spec.max_rate = 2.0;
        ev.spec.window_start = 13;
        ev.spec.window_end = 23;
        ev.beta_mean = 0.05;
        ev.beta_std = 0.1;
        fleet.push_back(ev);
    }
    return fleet;
}

// Draws per-household dissatisfaction coefficients, truncated below at 0.01.
inline std::vector<double> sample_betas(const std::vector<ApplianceTemplate>& fleet, Rng& rng) {
    std::vector<double> betas;
    for (const auto& t : fleet) betas.push_back(std::max(0.01, rng.normal(t.beta_mean, t.beta_std)));
    return betas;
}

// Carves per-appliance preferred profiles out of an end user's hourly demand.
// Flexible appliances never claim more than what the demand at their hours
// supports; the remainder is the non-shiftable base load.
inline HouseholdDay build_household(const std::string& eu_id, std::span<const double> demand,
                                    const std::vector<ApplianceTemplate>& fleet,
                                    const std::vector<double>& betas) {
    require(demand.size() == kHoursPerDay, "household demand must cover 24 hours");
    require(betas.size() == fleet.size(), "one beta per fleet appliance required");

    std::array<double, kHoursPerDay> remaining{};
    for (int t = 0; t < kHoursPerDay; ++t) remaining[t] = demand[t];

    std::vector<ApplianceState> states;
    for (std::size_t k = 0; k < fleet.size(); ++k) {
        const auto& tpl = fleet[k];
        ApplianceState st;
        st.spec = tpl.spec;
        st.spec.beta = betas[k];

        if (tpl.spec.type == ApplianceType::PC) {
            for (int t = tpl.spec.window_start; t <= tpl.spec.window_end; ++t) {
                st.preferred[t] = tpl.load_fraction * remaining[t];
                remaining[t] -= st.preferred[t];
            }
        } else if (tpl.spec.type == ApplianceType::TS_NI) {
            int s = std::clamp(tpl.preferred_start, tpl.spec.window_start,
                               tpl.spec.window_end - tpl.spec.block_length + 1);
            double energy = tpl.spec.block_energy;
            for (int t = s; t < s + tpl.spec.block_length; ++t)
                energy = std::min(energy, 0.9 * remaining[t]);
            if (energy < 1e-3) continue;  // demand too small to host this appliance today
            st.spec.block_energy = energy;
            st.preferred_start = s;
            for (int t = s; t < s + tpl.spec.block_length; ++t) {
                st.preferred[t] = energy;
                remaining[t] -= energy;
            }
        } else if (tpl.spec.type == ApplianceType::TS_I) {
            double left = tpl.spec.daily_energy;
            for (int t = tpl.spec.window_start; t <= tpl.spec.window_end && left > 1e-12; ++t) {
                const double take = std::min({tpl.spec.max_rate, 0.9 * remaining[t], left});
                if (take <= 0.0) continue;
                st.preferred[t] = take;
                remaining[t] -= take;
                left -= take;
            }
            const double delivered = tpl.spec.daily_energy - left;
            if (delivered < 1e-3) continue;
            st.spec.daily_energy = delivered;
        }
        states.push_back(std::move(st));
    }

    // Non-shiftable remainder.
    ApplianceState ns;
    ns.spec.id = "base";
    ns.spec.type = ApplianceType::NS;
    for (int t = 0; t < kHoursPerDay; ++t) ns.preferred[t] = std::max(0.0, remaining[t]);
    states.push_back(std::move(ns));

    return HouseholdDay::from_appliances(eu_id, std::move(states));
}

}  // namespace ccdr::household
