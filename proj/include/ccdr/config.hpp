#pragma once

#include <fstream>

#include "ccdr/agent.hpp"
#include "ccdr/benchmark.hpp"
#include "ccdr/common.hpp"
#include "ccdr/data.hpp"
#include "ccdr/forecast.hpp"
#include "ccdr/household.hpp"
#include "ccdr/market_env.hpp"

#include "json.hpp"

namespace ccdr::config {

// Full run configuration. Every field has a compiled-in default; a JSON file
// overrides fields and the CLI overrides the file.
struct RunConfig {
    std::uint64_t seed = 42;

    // synthetic data
    int synth_days = 122;
    int synth_households = 3;
    std::string synth_start = "2018-04-01";

    // split
    std::string test_start = "2018-07-01";
    int test_days = 31;
    std::string eval_day = "2018-07-27";

    // environment
    double rho = 0.9;
    int incentive_levels = 4;
    double max_incentive_fraction = 0.95;
    double capacity_fraction = 0.75;
    double capacity_override = 0.0;  // >0 forces the threshold
    std::string holidays_file;       // empty: built-in 2018 US federal list

    forecast::ForecasterConfig forecaster;
    agent::AgentConfig agent;
    std::vector<household::ApplianceTemplate> fleet = household::default_fleet();
    bool eblr_relative_band = false;

    data::HolidayCalendar holidays() const {
        return holidays_file.empty() ? data::HolidayCalendar::us_federal_2018()
                                     : data::HolidayCalendar::from_file(holidays_file);
    }

    data::HourStamp parse_date(const std::string& d) const {
        return data::parse_stamp(d + "T00:00:00");
    }
};

inline nlohmann::json fleet_to_json(const std::vector<household::ApplianceTemplate>& fleet) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : fleet) {
        arr.push_back({{"id", t.spec.id},
                       {"type", household::type_name(t.spec.type)},
                       {"beta_mean", t.beta_mean},
                       {"beta_std", t.beta_std},
                       {"levels", t.spec.levels},
                       {"load_fraction", t.load_fraction},
                       {"block_length", t.spec.block_length},
                       {"block_energy", t.spec.block_energy},
                       {"daily_energy", t.spec.daily_energy},
                       {"max_rate", t.spec.max_rate},
                       {"window_start", t.spec.window_start},
                       {"window_end", t.spec.window_end},
                       {"preferred_start", t.preferred_start}});
    }
    return arr;
}

inline std::vector<household::ApplianceTemplate> fleet_from_json(const nlohmann::json& arr) {
    std::vector<household::ApplianceTemplate> fleet;
    for (const auto& j : arr) {
        household::ApplianceTemplate t;
        t.spec.id = j.at("id").get<std::string>();
        const std::string type = j.at("type").get<std::string>();
        if (type == "PC")
            t.spec.type = household::ApplianceType::PC;
        else if (type == "TS-I")
            t.spec.type = household::ApplianceType::TS_I;
        else if (type == "TS-NI")
            t.spec.type = household::ApplianceType::TS_NI;
        else if (type == "NS")
            t.spec.type = household::ApplianceType::NS;
        else
            throw ConfigError("unknown appliance type '" + type + "'");
        t.beta_mean = j.at("beta_mean").get<double>();
        t.beta_std = j.at("beta_std").get<double>();
        t.spec.levels = j.at("levels").get<int>();
        t.load_fraction = j.at("load_fraction").get<double>();
        t.spec.block_length = j.at("block_length").get<int>();
        t.spec.block_energy = j.at("block_energy").get<double>();
        t.spec.daily_energy = j.at("daily_energy").get<double>();
        t.spec.max_rate = j.at("max_rate").get<double>();
        t.spec.window_start = j.at("window_start").get<int>();
        t.spec.window_end = j.at("window_end").get<int>();
        t.preferred_start = j.at("preferred_start").get<int>();
        fleet.push_back(std::move(t));
    }
    return fleet;
}

inline nlohmann::json to_json(const RunConfig& c) {
    return {{"seed", c.seed},
            {"synth", {{"days", c.synth_days}, {"households", c.synth_households}, {"start", c.synth_start}}},
            {"split", {{"test_start", c.test_start}, {"test_days", c.test_days}, {"eval_day", c.eval_day}}},
            {"env",
             {{"rho", c.rho},
              {"incentive_levels", c.incentive_levels},
              {"max_incentive_fraction", c.max_incentive_fraction},
              {"capacity_fraction", c.capacity_fraction},
              {"capacity_override", c.capacity_override},
              {"holidays_file", c.holidays_file}}},
            {"forecaster",
             {{"hidden", c.forecaster.hidden},
              {"dropout", c.forecaster.dropout},
              {"window", c.forecaster.window},
              {"epochs", c.forecaster.epochs},
              {"patience", c.forecaster.patience},
              {"lr", c.forecaster.lr},
              {"batch", c.forecaster.batch},
              {"val_fraction", c.forecaster.val_fraction}}},
            {"agent",
             {{"gamma", c.agent.gamma},
              {"lr", c.agent.lr},
              {"batch", c.agent.batch},
              {"eps_start", c.agent.eps_start},
              {"eps_min", c.agent.eps_min},
              {"eps_decay", c.agent.eps_decay},
              {"tau", c.agent.tau},
              {"hidden", c.agent.hidden},
              {"episodes", c.agent.episodes},
              {"buffer_capacity", c.agent.buffer_capacity},
              {"min_buffer", c.agent.min_buffer},
              {"val_every", c.agent.val_every},
              {"grad_clip", c.agent.grad_clip},
              {"huber_delta", c.agent.huber_delta}}},
            {"eblr", {{"relative_band", c.eblr_relative_band}}},
            {"fleet", fleet_to_json(c.fleet)}};
}

inline RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        if (s.contains("days")) c.synth_days = s.at("days").get<int>();
        if (s.contains("households")) c.synth_households = s.at("households").get<int>();
        if (s.contains("start")) c.synth_start = s.at("start").get<std::string>();
    }
    if (j.contains("split")) {
        const auto& s = j.at("split");
        if (s.contains("test_start")) c.test_start = s.at("test_start").get<std::string>();
        if (s.contains("test_days")) c.test_days = s.at("test_days").get<int>();
        if (s.contains("eval_day")) c.eval_day = s.at("eval_day").get<std::string>();
    }
    if (j.contains("env")) {
        const auto& e = j.at("env");
        if (e.contains("rho")) c.rho = e.at("rho").get<double>();
        if (e.contains("incentive_levels")) c.incentive_levels = e.at("incentive_levels").get<int>();
        if (e.contains("max_incentive_fraction"))
            c.max_incentive_fraction = e.at("max_incentive_fraction").get<double>();
        if (e.contains("capacity_fraction")) c.capacity_fraction = e.at("capacity_fraction").get<double>();
        if (e.contains("capacity_override")) c.capacity_override = e.at("capacity_override").get<double>();
        if (e.contains("holidays_file")) c.holidays_file = e.at("holidays_file").get<std::string>();
    }
    if (j.contains("forecaster")) {
        const auto& f = j.at("forecaster");
        if (f.contains("hidden")) c.forecaster.hidden = f.at("hidden").get<int>();
        if (f.contains("dropout")) c.forecaster.dropout = f.at("dropout").get<double>();
        if (f.contains("window")) c.forecaster.window = f.at("window").get<int>();
        if (f.contains("epochs")) c.forecaster.epochs = f.at("epochs").get<int>();
        if (f.contains("patience")) c.forecaster.patience = f.at("patience").get<int>();
        if (f.contains("lr")) c.forecaster.lr = f.at("lr").get<double>();
        if (f.contains("batch")) c.forecaster.batch = f.at("batch").get<int>();
        if (f.contains("val_fraction")) c.forecaster.val_fraction = f.at("val_fraction").get<double>();
    }
    if (j.contains("agent")) {
        const auto& a = j.at("agent");
        if (a.contains("gamma")) c.agent.gamma = a.at("gamma").get<double>();
        if (a.contains("lr")) c.agent.lr = a.at("lr").get<double>();
        if (a.contains("batch")) c.agent.batch = a.at("batch").get<int>();
        if (a.contains("eps_start")) c.agent.eps_start = a.at("eps_start").get<double>();
        if (a.contains("eps_min")) c.agent.eps_min = a.at("eps_min").get<double>();
        if (a.contains("eps_decay")) c.agent.eps_decay = a.at("eps_decay").get<double>();
        if (a.contains("tau")) c.agent.tau = a.at("tau").get<double>();
        if (a.contains("hidden")) c.agent.hidden = a.at("hidden").get<std::vector<int>>();
        if (a.contains("episodes")) c.agent.episodes = a.at("episodes").get<int>();
        if (a.contains("buffer_capacity"))
            c.agent.buffer_capacity = a.at("buffer_capacity").get<std::size_t>();
        if (a.contains("min_buffer")) c.agent.min_buffer = a.at("min_buffer").get<std::size_t>();
        if (a.contains("val_every")) c.agent.val_every = a.at("val_every").get<int>();
        if (a.contains("grad_clip")) c.agent.grad_clip = a.at("grad_clip").get<double>();
        if (a.contains("huber_delta")) c.agent.huber_delta = a.at("huber_delta").get<double>();
    }
    if (j.contains("eblr") && j.at("eblr").contains("relative_band"))
        c.eblr_relative_band = j.at("eblr").at("relative_band").get<bool>();
    if (j.contains("fleet")) c.fleet = fleet_from_json(j.at("fleet"));
    return c;
}

inline RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse failure in " + path + ": " + e.what());
    }
    return from_json(j);
}

inline void save(const RunConfig& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << to_json(c).dump(2) << '\n';
}

}  // namespace ccdr::config
