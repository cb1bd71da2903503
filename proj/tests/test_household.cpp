#include <array>

#include "ccdr/data.hpp"
#include "ccdr/household.hpp"

#include "doctest.h"

using namespace ccdr;
using namespace ccdr::household;

namespace {

// Exhaustive argmax over curtailment levels; independent of the production
// decision rule.
int brute_force_best_q(double lambda, double beta, int m, double energy) {
    int best = 0;
    double best_u = 0.0;
    for (int q = 0; q <= m; ++q) {
        const double d = static_cast<double>(q) / m * energy;
        const double u = lambda * d - beta * d * d;
        if (u > best_u) {
            best_u = u;
            best = q;
        }
    }
    return best;
}

Appliance make_ts_ni(double beta, int block_length, double block_energy, int w0, int w1) {
    Appliance a;
    a.id = "block";
    a.type = ApplianceType::TS_NI;
    a.beta = beta;
    a.block_length = block_length;
    a.block_energy = block_energy;
    a.window_start = w0;
    a.window_end = w1;
    return a;
}

Appliance make_ts_i(double beta, double daily, double rate, int w0, int w1) {
    Appliance a;
    a.id = "ev";
    a.type = ApplianceType::TS_I;
    a.beta = beta;
    a.daily_energy = daily;
    a.max_rate = rate;
    a.window_start = w0;
    a.window_end = w1;
    return a;
}

}  // namespace

TEST_CASE("pc cost and reduction formulas") {
    CHECK(pc_cost(3.5, 0, 4, 2.0) == 0.0);
    CHECK(pc_cost(3.5, 4, 4, 2.0) == doctest::Approx(14.0));
    CHECK(pc_cost(3.5, 2, 4, 2.0) == doctest::Approx(3.5));
    CHECK(pc_delta(0, 4, 2.0) == 0.0);
    CHECK(pc_delta(4, 4, 2.0) == doctest::Approx(2.0));
    CHECK(pc_delta(1, 4, 2.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(pc_cost(3.5, 5, 4, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(pc_delta(-1, 4, 2.0), std::invalid_argument);
}

TEST_CASE("pc best response") {
    SUBCASE("zero incentive never curtails") {
        CHECK(pc_best_response(0.0, 3.5, 4, 2.0) == 0);
    }
    SUBCASE("vanishing discomfort curtails fully") {
        CHECK(pc_best_response(5.0, 1e-9, 4, 2.0) == 4);
    }
    SUBCASE("hand-checked level selection") {
        // beta=3.5, m=4, E=2, lambda=7: utilities are 0, 2.625, 3.5, 2.625, 0
        CHECK(pc_best_response(7.0, 3.5, 4, 2.0) == 2);
        CHECK(pc_best_response(7.0, 3.5, 4, 2.0) == brute_force_best_q(7.0, 3.5, 4, 2.0));
    }
    SUBCASE("matches the exhaustive oracle over a parameter grid") {
        const double betas[] = {0.05, 0.4, 1.0, 3.5, 8.0};
        const double lambdas[] = {0.0, 0.5, 2.0, 5.0, 9.5};
        const double energies[] = {0.2, 1.0, 2.5, 4.0};
        const int ms[] = {1, 3, 4, 10};
        int points = 0;
        for (double b : betas)
            for (double l : lambdas)
                for (double e : energies)
                    for (int m : ms) {
                        CHECK(pc_best_response(l, b, m, e) == brute_force_best_q(l, b, m, e));
                        ++points;
                    }
        CHECK(points >= 200);
    }
    SUBCASE("response level is non-decreasing in lambda") {
        const double betas[] = {0.3, 1.2, 3.5};
        for (double b : betas) {
            int prev = 0;
            for (double l = 0.0; l <= 12.0; l += 0.1) {
                const int q = pc_best_response(l, b, 4, 2.0);
                CHECK(q >= prev);
                prev = q;
            }
        }
    }
}

TEST_CASE("ts delay cost") {
    CHECK(ts_cost(0.4, 0.0) == 0.0);
    CHECK(ts_cost(0.4, 3.0) == doctest::Approx(3.6));
    CHECK(ts_cost(0.7, 4.0) == doctest::Approx(4.0 * ts_cost(0.7, 2.0)));
    CHECK_THROWS_AS(ts_cost(0.4, -1.0), std::invalid_argument);
}

TEST_CASE("ts-ni rescheduling") {
    std::array<double, 24> agg{};
    SUBCASE("zero incentive stays put") {
        for (int t = 0; t < 24; ++t) agg[t] = 3.0;
        agg[10] = 9.0;
        Appliance a = make_ts_ni(0.4, 2, 0.5, 8, 20);
        TsNiPlan plan = schedule_ts_ni(a, 0.0, agg, 4.0, 10);
        CHECK_FALSE(plan.moved);
        CHECK(plan.start == 10);
        for (double r : plan.removed) CHECK(r == 0.0);
        CHECK(plan.dis_cost == 0.0);
    }
    SUBCASE("congested block moves to the only feasible low-load slot") {
        // capacity exceeded during the preferred block; only 18-19 has room
        for (int t = 0; t < 24; ++t) agg[t] = 5.5;
        agg[10] = agg[11] = 8.0;  // block sits here, over capacity 6
        agg[18] = agg[19] = 2.0;
        Appliance a = make_ts_ni(0.1, 2, 1.0, 9, 20);
        TsNiPlan plan = schedule_ts_ni(a, 8.0, agg, 6.0, 10);
        CHECK(plan.moved);
        CHECK(plan.start == 18);
        CHECK(plan.removed[10] == doctest::Approx(1.0));
        CHECK(plan.removed[11] == doctest::Approx(1.0));
        CHECK(plan.removed[12] == 0.0);
        CHECK(plan.dis_cost == doctest::Approx(0.1 * 64.0));
    }
    SUBCASE("tight deadline forces the preferred slot") {
        for (int t = 0; t < 24; ++t) agg[t] = 9.0;
        Appliance a = make_ts_ni(0.4, 3, 0.5, 10, 12);  // deadline = start + len - 1
        TsNiPlan plan = schedule_ts_ni(a, 9.0, agg, 4.0, 10);
        CHECK_FALSE(plan.moved);
        CHECK(plan.start == 10);
    }
    SUBCASE("move must pay for its delay") {
        for (int t = 0; t < 24; ++t) agg[t] = 2.0;
        agg[10] = 8.0;
        Appliance a = make_ts_ni(50.0, 1, 1.0, 8, 20);  // huge discomfort coefficient
        TsNiPlan plan = schedule_ts_ni(a, 1.0, agg, 6.0, 10);
        CHECK_FALSE(plan.moved);
    }
    SUBCASE("candidates before the decision hour are excluded") {
        for (int t = 0; t < 24; ++t) agg[t] = 2.0;
        agg[12] = 8.0;
        Appliance a = make_ts_ni(0.01, 1, 1.0, 8, 20);
        TsNiPlan plan = schedule_ts_ni(a, 5.0, agg, 6.0, 12, 12);
        CHECK(plan.moved);
        CHECK(plan.start >= 12);
        CHECK(plan.start == 13);  // closest feasible future slot
    }
}

TEST_CASE("ts-i water filling") {
    std::array<double, 24> agg{};
    std::array<double, 24> pref{};
    SUBCASE("no congestion and zero incentive keep the preferred profile") {
        for (int t = 0; t < 24; ++t) agg[t] = 2.0;
        pref[10] = 1.0;
        pref[11] = 1.0;
        Appliance a = make_ts_i(0.05, 2.0, 1.0, 8, 20);
        TsIPlan plan = schedule_ts_i(a, 0.0, agg, 6.0, pref);
        CHECK_FALSE(plan.moved);
        for (int t = 0; t < 24; ++t) {
            CHECK(plan.profile[t] == pref[t]);
            CHECK(plan.removed[t] == 0.0);
        }
    }
    SUBCASE("energy lands in the two low-load hours (matches exhaustive enumeration)") {
        // 4-hour window, loads [5,1,1,5], capacity 4, daily 2, rate 1
        agg.fill(0.0);
        agg[0] = 5.0;
        agg[1] = 1.0;
        agg[2] = 1.0;
        agg[3] = 5.0;
        pref.fill(0.0);
        pref[0] = 1.0;
        pref[3] = 1.0;
        Appliance a = make_ts_i(0.05, 2.0, 1.0, 0, 3);
        TsIPlan plan = schedule_ts_i(a, 5.0, agg, 4.0, pref);
        CHECK(plan.moved);
        CHECK(plan.profile[0] == doctest::Approx(0.0));
        CHECK(plan.profile[1] == doctest::Approx(1.0));
        CHECK(plan.profile[2] == doctest::Approx(1.0));
        CHECK(plan.profile[3] == doctest::Approx(0.0));
        CHECK(plan.removed[0] == doctest::Approx(1.0));
        CHECK(plan.removed[3] == doctest::Approx(1.0));

        // exhaustive enumeration at 0.5 kWh granularity: minimal load-weighted
        // placement delivering 2.0 kWh at <=1.0 kWh/hour under capacity
        double best_cost = 1e18;
        std::array<double, 4> best{};
        for (int a0 = 0; a0 <= 2; ++a0)
            for (int a1 = 0; a1 <= 2; ++a1)
                for (int a2 = 0; a2 <= 2; ++a2)
                    for (int a3 = 0; a3 <= 2; ++a3) {
                        const std::array<double, 4> alloc = {0.5 * a0, 0.5 * a1, 0.5 * a2,
                                                             0.5 * a3};
                        if (alloc[0] + alloc[1] + alloc[2] + alloc[3] != 2.0) continue;
                        bool ok = true;
                        double cost = 0.0;
                        const double base[4] = {4.0, 1.0, 1.0, 4.0};
                        for (int t = 0; t < 4; ++t) {
                            if (base[t] + alloc[t] > 4.0 + 1e-12) ok = false;
                            cost += alloc[t] * base[t];
                        }
                        if (ok && cost < best_cost) {
                            best_cost = cost;
                            best = alloc;
                        }
                    }
        for (int t = 0; t < 4; ++t) CHECK(plan.profile[t] == doctest::Approx(best[t]));
    }
    SUBCASE("no slack means a flat profile regardless of incentive") {
        agg.fill(0.0);
        for (int t = 8; t <= 11; ++t) {
            agg[t] = 3.0;
            pref[t] = 1.0;
        }
        agg[8] = 9.0;  // congested but nothing can move
        Appliance a = make_ts_i(0.05, 4.0, 1.0, 8, 11);
        TsIPlan plan = schedule_ts_i(a, 9.0, agg, 6.0, pref);
        for (int t = 8; t <= 11; ++t) CHECK(plan.profile[t] == doctest::Approx(1.0));
    }
    SUBCASE("daily energy is conserved") {
        Rng rng(4);
        for (int rep = 0; rep < 50; ++rep) {
            for (int t = 0; t < 24; ++t) {
                agg[t] = rng.uniform(0.5, 9.0);
                pref[t] = 0.0;
            }
            const int w0 = static_cast<int>(rng.uniform_index(10));
            const int w1 = w0 + 4 + static_cast<int>(rng.uniform_index(8));
            double total = 0.0;
            for (int t = w0; t <= w1; ++t) {
                pref[t] = rng.uniform(0.0, 1.0);
                total += pref[t];
            }
            Appliance a = make_ts_i(0.05, total, 1.5, w0, w1);
            if (total > 1.5 * (w1 - w0 + 1)) continue;
            TsIPlan plan = schedule_ts_i(a, rng.uniform(0.0, 8.0), agg, 6.5, pref);
            double realized = 0.0;
            for (int t = 0; t < 24; ++t) realized += plan.profile[t];
            CHECK(realized == doctest::Approx(total).epsilon(1e-9));
            for (int t = 0; t < 24; ++t)
                if (t < w0 || t > w1) CHECK(plan.profile[t] == 0.0);
        }
    }
}

TEST_CASE("household day response") {
    data::HourlySeries s = data::synth_generate(21, 1, 3);
    auto day = data::slice_days(s)[0];

    SUBCASE("ns-only household never responds") {
        ApplianceState ns;
        ns.spec.id = "base";
        ns.spec.type = ApplianceType::NS;
        for (int t = 0; t < 24; ++t) ns.preferred[t] = 1.5;
        HouseholdDay hh = HouseholdDay::from_appliances("eu1", {ns});
        Vec agg(24, 10.0);
        for (int t = 0; t < 24; ++t) {
            HourOutcome out = hh.respond(t, 9.0, agg, 4.0);
            CHECK(out.delta_e == 0.0);
            CHECK(out.dis_cost == 0.0);
            CHECK(out.realized == doctest::Approx(1.5));
        }
    }

    SUBCASE("single PC appliance equals the direct best response") {
        ApplianceState ac;
        ac.spec.id = "ac";
        ac.spec.type = ApplianceType::PC;
        ac.spec.beta = 2.0;
        ac.spec.levels = 4;
        for (int t = 0; t < 24; ++t) ac.preferred[t] = 1.2;
        HouseholdDay hh = HouseholdDay::from_appliances("eu1", {ac});
        Vec agg(24, 3.0);
        const double lambda = 6.0;
        const int q = pc_best_response(lambda, 2.0, 4, 1.2);
        HourOutcome out = hh.respond(7, lambda, agg, 9.0);
        CHECK(out.delta_e == doctest::Approx(pc_delta(q, 4, 1.2)));
        CHECK(out.dis_cost == doctest::Approx(pc_cost(2.0, q, 4, 1.2)));
        CHECK(out.realized == doctest::Approx(1.2 - out.delta_e));
    }

    SUBCASE("build_household conserves the preferred demand") {
        auto fleet = default_fleet();
        Rng rng(9);
        auto betas = sample_betas(fleet, rng);
        HouseholdDay hh = build_household("eu1", day.eu_loads[0], fleet, betas);
        for (int t = 0; t < 24; ++t)
            CHECK(hh.preferred_load(t) == doctest::Approx(day.eu_loads[0][t]).epsilon(1e-9));
        for (const auto& a : hh.appliances)
            for (int t = 0; t < 24; ++t) CHECK(a.preferred[t] >= 0.0);
    }

    SUBCASE("full day: conservation, deadlines, NS invariance, dominance") {
        auto fleet = default_fleet();
        Rng rng(17);
        for (int rep = 0; rep < 10; ++rep) {
            auto betas = sample_betas(fleet, rng);
            HouseholdDay hh = build_household("eu1", day.eu_loads[0], fleet, betas);
            Vec agg(24, 0.0);
            for (int t = 0; t < 24; ++t) agg[t] = day.aggregate(t);
            const double capacity = 5.0;

            // constant incentive over the day: the chosen response must then
            // dominate doing nothing in unweighted terms
            const double lambda = rep % 3 == 0 ? 0.0 : rng.uniform(0.5, 9.0);
            double income = 0.0, discomfort = 0.0;
            Vec realized(24, 0.0);
            for (int t = 0; t < 24; ++t) {
                HourOutcome out = hh.respond(t, lambda, agg, capacity);
                realized[t] = out.realized;
                income += lambda * out.delta_e;
                discomfort += out.dis_cost;
            }

            // TS conservation: realized totals equal preferred totals per appliance
            for (const auto& a : hh.appliances) {
                if (a.spec.type != ApplianceType::TS_I && a.spec.type != ApplianceType::TS_NI)
                    continue;
                double pref_total = 0.0, plan_total = 0.0;
                for (int t = 0; t < 24; ++t) {
                    pref_total += a.preferred[t];
                    plan_total += a.planned[t];
                }
                CHECK(plan_total == doctest::Approx(pref_total).epsilon(1e-9));
                // window safety
                for (int t = 0; t < 24; ++t)
                    if (t < a.spec.window_start || t > a.spec.window_end)
                        CHECK(a.planned[t] == 0.0);
                if (a.spec.type == ApplianceType::TS_NI && a.planned_start >= 0)
                    CHECK(a.planned_start + a.spec.block_length - 1 <= a.spec.window_end);
            }
            // NS invariance
            for (const auto& a : hh.appliances)
                if (a.spec.type == ApplianceType::NS)
                    for (int t = 0; t < 24; ++t) CHECK(a.planned[t] == a.preferred[t]);
            // unweighted dominance of the chosen response over doing nothing
            CHECK(income - discomfort >= -1e-9);
        }
    }

    SUBCASE("EU objective is affine and non-decreasing in rho for a fixed response") {
        const double income = 7.0, discomfort = 3.0;
        double prev = -1e18;
        for (double rho = 0.0; rho <= 1.0001; rho += 0.1) {
            const double objective = rho * income - (1.0 - rho) * discomfort;
            CHECK(objective >= prev - 1e-12);
            CHECK(objective ==
                  doctest::Approx(rho * (income + discomfort) - discomfort).epsilon(1e-12));
            prev = objective;
        }
    }
}

TEST_CASE("table-5 mix dominance at high incentives") {
    // best-response dominance: at rho = 0.9 the chosen response beats the
    // null response on the synthetic peak day
    data::HourlySeries s = data::synth_generate(42, 3, 3);
    auto day = data::slice_days(s)[1];
    auto fleet = default_fleet();
    Rng rng(23);
    auto betas = sample_betas(fleet, rng);
    HouseholdDay hh = build_household("eu1", day.eu_loads[0], fleet, betas);
    Vec agg(24, 0.0);
    for (int t = 0; t < 24; ++t) agg[t] = day.aggregate(t);
    const double capacity = 7.0;
    const double rho = 0.9;
    double objective = 0.0;
    for (int t = 0; t < 24; ++t) {
        const double lambda = 0.95 * day.price[t];
        HourOutcome out = hh.respond(t, lambda, agg, capacity);
        objective += rho * lambda * out.delta_e - (1.0 - rho) * out.dis_cost;
    }
    CHECK(objective >= 0.0);  // null response scores exactly zero
}
