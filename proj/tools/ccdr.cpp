// Command-line front end: data preparation, forecaster and agent training,
// evaluation, benchmark comparison and the rho sensitivity sweep.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "ccdr/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ccdr;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string config_key_help() {
    return R"(Config file keys (JSON; defaults in parentheses):
  seed                         master RNG seed (42)
  synth.days                   synthetic days to generate (122)
  synth.households             synthetic households (3)
  synth.start                  first synthetic day (2018-04-01)
  split.test_start             first test day (2018-07-01)
  split.test_days              test window length in days (31)
  split.eval_day               representative evaluation day (2018-07-27)
  env.rho                      EU income/discomfort weight (0.9)
  env.incentive_levels         discrete incentive levels per EU (4)
  env.max_incentive_fraction   lambda_max as a fraction of price (0.95)
  env.capacity_fraction        threshold as a fraction of avg daily peak (0.75)
  env.capacity_override        fixed capacity in kW, 0 = derive (0)
  env.holidays_file            holiday list file, empty = built-in 2018 US federal
  forecaster.hidden            LSTM hidden units per layer (64)
  forecaster.dropout           dropout between layers / before head (0.2)
  forecaster.window            input window length in hours (24)
  forecaster.epochs            max training epochs (100)
  forecaster.patience          early-stop plateau epochs (10)
  forecaster.lr                Adam learning rate (0.001)
  forecaster.batch             mini-batch size (32)
  forecaster.val_fraction      tail fraction held out for early stop (0.1)
  agent.gamma                  discount factor (0.99)
  agent.lr                     Adam learning rate (0.0001)
  agent.batch                  replay mini-batch (256)
  agent.eps_start/eps_min      epsilon-greedy range (1.0 / 0.01)
  agent.eps_decay              per-episode epsilon decay (0.998)
  agent.tau                    target-network soft-update rate (0.003)
  agent.hidden                 Q-network hidden sizes ([128,64])
  agent.episodes               training episodes (2500)
  agent.buffer_capacity        replay buffer size (50000)
  agent.min_buffer             transitions before updates start (1000)
  agent.val_every              validation cadence in episodes (50)
  agent.grad_clip              global gradient-norm clip (10)
  agent.huber_delta            Huber loss threshold (1.0)
  eblr.relative_band           divide the elasticity response by the band
                               width instead of lambda_min (false)
  fleet                        appliance list: id, type (PC/TS-I/TS-NI/NS),
                               beta_mean/std, levels, load_fraction,
                               block_length/energy, daily_energy, max_rate,
                               window_start/end, preferred_start
)";
}

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;

    config::RunConfig resolve() const {
        config::RunConfig cfg = config_path.empty() ? config::RunConfig{} : config::load(config_path);
        if (seed_set) cfg.seed = seed;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file; flags override its values");
    cmd->add_option("--seed", opts.seed, "override the config seed")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
}

nlohmann::json agent_checkpoint(const neural::DenseNet& net, const pipeline::Prepared& prep,
                                const config::RunConfig& cfg) {
    return {{"format", 1},
            {"kind", "agent"},
            {"qnet", neural::dense_to_json(net)},
            {"capacity", prep.capacity},
            {"rho", cfg.rho},
            {"incentive_levels", cfg.incentive_levels},
            {"max_incentive_fraction", cfg.max_incentive_fraction},
            {"betas", prep.betas_per_eu},
            {"fleet", config::fleet_to_json(cfg.fleet)},
            {"seed", cfg.seed}};
}

// Restores the exact evaluation context the agent was trained in.
void apply_agent_checkpoint(const nlohmann::json& j, pipeline::Prepared& prep,
                            config::RunConfig& cfg, neural::DenseNet& net) {
    if (j.at("kind") != "agent")
        throw DataError("checkpoint is not an agent network (run `ccdr agent-train` to produce one)");
    net = neural::dense_from_json(j.at("qnet"));
    prep.capacity = j.at("capacity").get<double>();
    prep.betas_per_eu = j.at("betas").get<std::vector<std::vector<double>>>();
    cfg.rho = j.at("rho").get<double>();
    cfg.incentive_levels = j.at("incentive_levels").get<int>();
    cfg.max_incentive_fraction = j.at("max_incentive_fraction").get<double>();
    cfg.fleet = config::fleet_from_json(j.at("fleet"));
}

pipeline::ForecastModels load_forecast_models(const std::string& dir, std::size_t n_eu) {
    pipeline::ForecastModels models;
    const fs::path base(dir);
    const fs::path price = base / "price.json";
    if (!fs::exists(price))
        throw DataError("missing forecaster checkpoint " + price.string() +
                        " (run `ccdr forecast-train --target all` first)");
    models.price = forecast::Forecaster::from_json(neural::load_json(price.string()));
    for (std::size_t n = 0; n < n_eu; ++n) {
        const fs::path p = base / ("load_eu" + std::to_string(n + 1) + ".json");
        if (!fs::exists(p))
            throw DataError("missing forecaster checkpoint " + p.string() +
                            " (run `ccdr forecast-train --target all` first)");
        models.loads.push_back(forecast::Forecaster::from_json(neural::load_json(p.string())));
    }
    return models;
}

void write_stats_csv(const metrics::LoadStats& no_dr, const metrics::LoadStats& post,
                     const metrics::FinancialLedger& led, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    char buf[256];
    out << "metric,value\n";
    std::snprintf(buf, sizeof(buf), "no_dr_peak_kw,%.9f\nno_dr_mean_kw,%.9f\nno_dr_par,%.9f\n",
                  no_dr.peak, no_dr.mean, no_dr.par);
    out << buf;
    std::snprintf(buf, sizeof(buf), "post_peak_kw,%.9f\npost_mean_kw,%.9f\npost_par,%.9f\n",
                  post.peak, post.mean, post.par);
    out << buf;
    std::snprintf(buf, sizeof(buf), "par_improvement_pct,%.9f\n",
                  metrics::par_improvement(no_dr, post));
    out << buf;
    std::snprintf(buf, sizeof(buf), "sp_gross_cents,%.9f\nsp_cost_cents,%.9f\nsp_profit_cents,%.9f\n",
                  led.sp_gross, led.sp_cost, led.sp_profit);
    out << buf;
    for (std::size_t i = 0; i < led.eus.size(); ++i) {
        std::snprintf(buf, sizeof(buf),
                      "eu%zu_reduction_kwh,%.9f\neu%zu_income_cents,%.9f\n"
                      "eu%zu_discomfort_cents,%.9f\neu%zu_profit_cents,%.9f\n",
                      i + 1, led.eus[i].reduction_kwh, i + 1, led.eus[i].income, i + 1,
                      led.eus[i].discomfort, i + 1, led.eus[i].profit);
        out << buf;
    }
}

// ---------------------------------------------------------------------------

int cmd_synth(const CommonOpts& common, int days, int households, const std::string& start,
              const std::string& out) {
    config::RunConfig cfg = common.resolve();
    if (days > 0) cfg.synth_days = days;
    if (households > 0) cfg.synth_households = households;
    data::SynthOptions opt;
    opt.start = cfg.parse_date(start.empty() ? cfg.synth_start : start);
    data::HourlySeries s = data::synth_generate(cfg.seed, cfg.synth_days, cfg.synth_households, opt);
    data::write_series(s, out);
    std::cout << "wrote " << s.size() << " rows (" << s.full_days() << " days, "
              << s.num_households() << " households) to " << out << "\n";
    return 0;
}

int cmd_ingest(const std::string& in, const std::string& out) {
    data::HourlySeries s = data::load_series(in);
    std::size_t interpolated = 0;
    for (bool f : s.interpolated) interpolated += f ? 1 : 0;
    data::write_series(s, out);
    std::cout << "ingested " << s.size() << " rows, interpolated " << interpolated
              << " missing hours, wrote " << out << "\n";
    return 0;
}

int cmd_forecast_train(const CommonOpts& common, const std::string& data_path,
                       const std::string& target, const std::string& out_dir, int epochs,
                       int hidden) {
    config::RunConfig cfg = common.resolve();
    if (epochs > 0) cfg.forecaster.epochs = epochs;
    if (hidden > 0) cfg.forecaster.hidden = hidden;
    data::HourlySeries series = data::load_series(data_path);
    pipeline::Prepared prep = pipeline::prepare(series, cfg);
    fs::create_directories(out_dir);

    std::vector<std::pair<std::string, forecast::Target>> jobs;
    if (target == "price" || target == "all")
        jobs.emplace_back("price", forecast::Target::price());
    if (target.rfind("load:", 0) == 0) {
        const int n = std::stoi(target.substr(5));
        jobs.emplace_back("load_eu" + std::to_string(n), forecast::Target::load(n - 1));
    }
    if (target == "all")
        for (std::size_t n = 0; n < series.num_households(); ++n)
            jobs.emplace_back("load_eu" + std::to_string(n + 1),
                              forecast::Target::load(static_cast<int>(n)));
    if (jobs.empty()) throw ConfigError("unknown --target '" + target + "'");

    std::ofstream acc(fs::path(out_dir) / "accuracy.csv");
    acc << "target,mae,mape,excluded_zeros,epochs_run\n";
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const auto& [name, tgt] = jobs[j];
        auto [model, report] = forecast::train_forecaster(prep.split.train, tgt, cfg.forecaster,
                                                          cfg.seed + j, prep.holidays);
        neural::save_json(model.to_json(), (fs::path(out_dir) / (name + ".json")).string());

        // Rolled day-ahead accuracy over the test window.
        Vec pred, actual;
        const Vec& col = forecast::target_column(series, tgt);
        for (std::size_t d = 0; d < prep.split.test.full_days(); ++d) {
            const data::HourStamp day = data::add_hours(prep.split.test.start,
                                                        static_cast<long>(d) * kHoursPerDay);
            Vec f = forecast::forecast_day(model, series, tgt, day, prep.holidays);
            const long offset = data::hours_since_epoch(day) - data::hours_since_epoch(series.start);
            for (int h = 0; h < kHoursPerDay; ++h) {
                pred.push_back(f[h]);
                actual.push_back(col[offset + h]);
            }
        }
        forecast::AccuracyReport rep = forecast::evaluate_forecast(pred, actual);
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%d,%d\n", name.c_str(), rep.mae, rep.mape,
                      rep.excluded_zeros, report.epochs_run);
        acc << buf;
        std::cout << name << ": MAE " << rep.mae << ", MAPE " << rep.mape << "% ("
                  << report.epochs_run << " epochs)\n";
    }
    return 0;
}

int cmd_agent_train(const CommonOpts& common, const std::string& data_path,
                    const std::string& out_path, const std::string& log_path, bool use_actuals,
                    const std::string& forecast_dir, int episodes, double rho) {
    config::RunConfig cfg = common.resolve();
    if (episodes > 0) cfg.agent.episodes = episodes;
    if (rho >= 0.0) cfg.rho = rho;
    data::HourlySeries series = data::load_series(data_path);
    pipeline::Prepared prep = pipeline::prepare(series, cfg);
    agent::EpisodePool pool = pipeline::make_pool(prep, cfg);

    if (!use_actuals) {
        if (forecast_dir.empty())
            throw ConfigError("agent-train needs --forecast-dir (checkpoints from "
                              "`ccdr forecast-train`) or --use-actuals");
        pipeline::ForecastModels models =
            load_forecast_models(forecast_dir, series.num_households());
        pipeline::apply_forecasts(pool, models, series, prep.holidays);
    }

    agent::TrainResult result = agent::train(pool, cfg.agent, cfg.seed);
    neural::save_json(agent_checkpoint(result.q_net, prep, cfg), out_path);
    if (!log_path.empty()) {
        std::ofstream log(log_path);
        if (!log) throw DataError("cannot write " + log_path);
        agent::write_train_log_csv(result.log, log);
    }
    if (result.aborted()) {
        std::cerr << "numeric failure: " << result.abort_reason
                  << "; checkpoint of the failing state saved to " << out_path << "\n";
        return kExitNumeric;
    }
    double last_val = 0.0;
    for (const auto& row : result.log)
        if (!std::isnan(row.val_reward)) last_val = row.val_reward;
    std::cout << "trained " << cfg.agent.episodes << " episodes; final validation reward "
              << last_val << "; checkpoint " << out_path << "\n";
    return 0;
}

int cmd_evaluate(const CommonOpts& common, const std::string& data_path, const std::string& ckpt,
                 const std::string& policy, const std::string& day_str,
                 const std::string& trace_path, const std::string& stats_path,
                 const std::string& forecast_dir) {
    config::RunConfig cfg = common.resolve();
    data::HourlySeries series = data::load_series(data_path);
    pipeline::Prepared prep = pipeline::prepare(series, cfg);

    neural::DenseNet net;
    if (policy == "zero") {
        env::ActionCodec codec{static_cast<int>(series.num_households()), cfg.incentive_levels};
        net = pipeline::zero_policy(codec.num_actions());
    } else {
        if (ckpt.empty())
            throw ConfigError("evaluate needs --ckpt (from `ccdr agent-train`) or --policy zero");
        apply_agent_checkpoint(neural::load_json(ckpt), prep, cfg, net);
    }

    const data::HourStamp day_date = cfg.parse_date(day_str.empty() ? cfg.eval_day : day_str);
    data::DayData day;
    if (!forecast_dir.empty()) {
        pipeline::ForecastModels models =
            load_forecast_models(forecast_dir, series.num_households());
        day = pipeline::forecast_day_data(models, series, day_date, prep.holidays);
    } else {
        day = pipeline::find_day(series, day_date);
    }

    env::Environment e = env::make_environment(day, cfg.fleet, prep.betas_per_eu, prep.capacity,
                                               pipeline::env_config(cfg));
    agent::EvalResult eval = agent::evaluate(net, e);
    if (!trace_path.empty()) env::write_trace_csv(eval.trace, trace_path);

    metrics::LoadStats no_dr = metrics::load_stats(eval.preferred);
    metrics::LoadStats post = metrics::load_stats(eval.realized);
    metrics::FinancialLedger led = metrics::ledger(eval.trace, cfg.rho);
    if (!stats_path.empty()) write_stats_csv(no_dr, post, led, stats_path);

    std::cout << "day " << data::format_stamp(day.day_start) << ": PAR " << no_dr.par << " -> "
              << post.par << " (" << metrics::par_improvement(no_dr, post)
              << "% improvement), episode reward " << eval.total_reward << "\n";
    return 0;
}

int cmd_compare(const CommonOpts& common, const std::string& data_path, const std::string& ckpt,
                const std::string& day_str, const std::string& out_dir) {
    config::RunConfig cfg = common.resolve();
    data::HourlySeries series = data::load_series(data_path);
    pipeline::Prepared prep = pipeline::prepare(series, cfg);
    if (ckpt.empty()) throw ConfigError("compare needs --ckpt (from `ccdr agent-train`)");
    neural::DenseNet net;
    apply_agent_checkpoint(neural::load_json(ckpt), prep, cfg, net);

    const data::HourStamp day_date = cfg.parse_date(day_str.empty() ? cfg.eval_day : day_str);
    const data::DayData day = pipeline::find_day(series, day_date);
    pipeline::CompareResult cmp = pipeline::compare_day(day, net, prep, cfg);

    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "table6.csv");
        metrics::write_table6_csv(cmp.no_dr, cmp.eblr_stats, cmp.ccrl, out);
    }
    {
        std::ofstream out(fs::path(out_dir) / "fig13.csv");
        metrics::write_fig13_csv(cmp.no_dr, cmp.eblr_stats, cmp.ccrl, out);
    }
    env::write_trace_csv(cmp.ccrl_eval.trace, (fs::path(out_dir) / "ccrl_trace.csv").string());
    env::write_trace_csv(cmp.eblr_day.trace, (fs::path(out_dir) / "eblr_trace.csv").string());

    std::cout << "PAR no-DR " << cmp.no_dr.par << ", EBLR " << cmp.eblr_stats.par << ", CCRL-DR "
              << cmp.ccrl.par << "; outputs in " << out_dir << "\n";
    return 0;
}

int cmd_sweep_rho(const CommonOpts& common, const std::string& data_path,
                  const std::vector<double>& rhos, int episodes, const std::string& out_dir,
                  bool use_actuals, const std::string& forecast_dir) {
    config::RunConfig cfg = common.resolve();
    if (episodes > 0) cfg.agent.episodes = episodes;
    data::HourlySeries series = data::load_series(data_path);
    fs::create_directories(out_dir);

    std::vector<metrics::FinancialLedger> ledgers = metrics::rho_sweep(
        rhos, [&](double rho) -> std::vector<env::StepInfo> {
            config::RunConfig run_cfg = cfg;
            run_cfg.rho = rho;
            pipeline::Prepared prep = pipeline::prepare(series, run_cfg);
            agent::EpisodePool pool = pipeline::make_pool(prep, run_cfg);
            if (!use_actuals) {
                if (forecast_dir.empty())
                    throw ConfigError("sweep-rho needs --forecast-dir or --use-actuals");
                pipeline::ForecastModels models =
                    load_forecast_models(forecast_dir, series.num_households());
                pipeline::apply_forecasts(pool, models, series, prep.holidays);
            }
            agent::TrainResult result = agent::train(pool, run_cfg.agent, run_cfg.seed);
            const data::DayData day =
                pipeline::find_day(series, run_cfg.parse_date(run_cfg.eval_day));
            env::Environment e = env::make_environment(day, run_cfg.fleet, prep.betas_per_eu,
                                                       prep.capacity, pipeline::env_config(run_cfg));
            agent::EvalResult eval = agent::evaluate(result.q_net, e);
            std::cout << "rho " << rho << ": SP cost "
                      << metrics::ledger(eval.trace, rho).sp_cost << " cents\n";
            return eval.trace;
        });

    std::ofstream out(fs::path(out_dir) / "table7.csv");
    if (!out) throw DataError("cannot write table7.csv");
    metrics::write_table7_csv(ledgers, out);
    std::cout << "wrote " << (fs::path(out_dir) / "table7.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Capacity-constrained incentive-based demand response simulator"};
    app.footer(config_key_help());
    app.require_subcommand(1);

    CommonOpts common;

    auto* synth = app.add_subcommand("synth", "generate a synthetic load/price dataset");
    int synth_days = 0, synth_households = 0;
    std::string synth_start, synth_out = "synth.csv";
    add_common(synth, common);
    synth->add_option("--days", synth_days, "days to generate (default from config: 122)")
        ->check(CLI::PositiveNumber);
    synth->add_option("--households", synth_households, "household count (default 3)")
        ->check(CLI::PositiveNumber);
    synth->add_option("--start", synth_start, "first day, YYYY-MM-DD (default 2018-04-01)");
    synth->add_option("--out", synth_out, "output CSV path");

    auto* ingest = app.add_subcommand("ingest", "validate, gap-fill and normalize a CSV");
    std::string ingest_in, ingest_out;
    ingest->add_option("--in", ingest_in, "input CSV")->required();
    ingest->add_option("--out", ingest_out, "output CSV")->required();

    auto* ftrain = app.add_subcommand("forecast-train", "train price/load forecasters");
    std::string ft_data, ft_target = "all", ft_out = "checkpoints";
    int ft_epochs = 0, ft_hidden = 0;
    add_common(ftrain, common);
    ftrain->add_option("--data", ft_data, "series CSV")->required();
    ftrain->add_option("--target", ft_target, "price | load:<n> | all");
    ftrain->add_option("--out", ft_out, "checkpoint directory");
    ftrain->add_option("--epochs", ft_epochs, "override max epochs");
    ftrain->add_option("--hidden", ft_hidden, "override LSTM hidden units");

    auto* atrain = app.add_subcommand("agent-train", "train the DDQN incentive policy");
    std::string at_data, at_out = "agent.json", at_log = "train_log.csv", at_fdir;
    bool at_actuals = false;
    int at_episodes = 0;
    double at_rho = -1.0;
    add_common(atrain, common);
    atrain->add_option("--data", at_data, "series CSV")->required();
    atrain->add_option("--out", at_out, "agent checkpoint path");
    atrain->add_option("--log", at_log, "training log CSV");
    atrain->add_option("--forecast-dir", at_fdir, "forecaster checkpoints for episode inputs");
    atrain->add_flag("--use-actuals", at_actuals, "train on actual instead of forecast trajectories");
    atrain->add_option("--episodes", at_episodes, "override episode count");
    atrain->add_option("--rho", at_rho, "override the EU weighting factor");

    auto* eval = app.add_subcommand("evaluate", "greedy rollout of a policy on one day");
    std::string ev_data, ev_ckpt, ev_policy = "ckpt", ev_day, ev_trace = "trace.csv",
                ev_stats = "stats.csv", ev_fdir;
    add_common(eval, common);
    eval->add_option("--data", ev_data, "series CSV")->required();
    eval->add_option("--ckpt", ev_ckpt, "agent checkpoint");
    eval->add_option("--policy", ev_policy, "ckpt | zero (all-zero incentive stub)");
    eval->add_option("--day", ev_day, "day to evaluate, YYYY-MM-DD (default config eval_day)");
    eval->add_option("--trace", ev_trace, "episode trace CSV output");
    eval->add_option("--stats", ev_stats, "summary statistics CSV output");
    eval->add_option("--forecast-dir", ev_fdir, "evaluate on forecast trajectories");

    auto* compare = app.add_subcommand("compare", "No-DR / EBLR / CCRL-DR on the same day");
    std::string cp_data, cp_ckpt, cp_day, cp_out = "compare_out";
    add_common(compare, common);
    compare->add_option("--data", cp_data, "series CSV")->required();
    compare->add_option("--ckpt", cp_ckpt, "agent checkpoint")->required();
    compare->add_option("--day", cp_day, "day to compare, YYYY-MM-DD");
    compare->add_option("--out", cp_out, "output directory");

    auto* sweep = app.add_subcommand("sweep-rho", "train and evaluate across rho values");
    std::string sw_data, sw_out = "sweep_out", sw_fdir;
    std::vector<double> sw_rhos = {0.1, 0.3, 0.5, 0.7, 0.9};
    int sw_episodes = 0;
    bool sw_actuals = false;
    add_common(sweep, common);
    sweep->add_option("--data", sw_data, "series CSV")->required();
    sweep->add_option("--rhos", sw_rhos, "rho grid")->delimiter(',');
    sweep->add_option("--episodes", sw_episodes, "override episode count per rho");
    sweep->add_option("--out", sw_out, "output directory");
    sweep->add_option("--forecast-dir", sw_fdir, "forecaster checkpoints for episode inputs");
    sweep->add_flag("--use-actuals", sw_actuals, "train on actual instead of forecast trajectories");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (synth->parsed())
            return cmd_synth(common, synth_days, synth_households, synth_start, synth_out);
        if (ingest->parsed()) return cmd_ingest(ingest_in, ingest_out);
        if (ftrain->parsed())
            return cmd_forecast_train(common, ft_data, ft_target, ft_out, ft_epochs, ft_hidden);
        if (atrain->parsed())
            return cmd_agent_train(common, at_data, at_out, at_log, at_actuals, at_fdir,
                                   at_episodes, at_rho);
        if (eval->parsed())
            return cmd_evaluate(common, ev_data, ev_ckpt, ev_policy, ev_day, ev_trace, ev_stats,
                                ev_fdir);
        if (compare->parsed()) return cmd_compare(common, cp_data, cp_ckpt, cp_day, cp_out);
        if (sweep->parsed())
            return cmd_sweep_rho(common, sw_data, sw_rhos, sw_episodes, sw_out, sw_actuals,
                                 sw_fdir);
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitData;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
