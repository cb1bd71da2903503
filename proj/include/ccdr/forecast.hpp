#pragma once

#include <array>
#include <functional>
#include <limits>

#include "ccdr/common.hpp"
#include "ccdr/data.hpp"
#include "ccdr/neural.hpp"

namespace ccdr::forecast {

// ---------------------------------------------------------------------------
// Feature vectors
// ---------------------------------------------------------------------------

constexpr int kFeatureDim = 14;
constexpr std::array<int, 9> kLags = {1, 2, 3, 24, 25, 26, 48, 49, 50};

struct Target {
    enum class Kind { Price, Load } kind = Kind::Price;
    int eu_index = 0;

    static Target price() {
        return Target{Kind::Price, 0};
    }
    static Target load(int eu) {
        return Target{Kind::Load, eu};
    }
};

inline const Vec& target_column(const data::HourlySeries& series, const Target& target) {
    if (target.kind == Target::Kind::Price) return series.price;
    require(target.eu_index >= 0 &&
                target.eu_index < static_cast<int>(series.num_households()),
            "no such household column");
    return series.loads[target.eu_index];
}

// Feature layout: month, day-of-week, hour-of-day, holiday flag, weekend
// flag, then the nine lagged target values (h-1 .. h-50).
inline Vec build_features_from(std::span<const double> values, const data::HourStamp& start,
                               long t, const data::HolidayCalendar& holidays) {
    if (t - kLags.back() < 0)
        throw DataError("insufficient history: hour index " + std::to_string(t) +
                        " needs lag h-" + std::to_string(kLags.back()));
    require(t < static_cast<long>(values.size()) + 1, "feature hour beyond known values");
    const data::CalendarFeatures cal =
        data::calendar_features(data::add_hours(start, t), holidays);
    Vec f;
    f.reserve(kFeatureDim);
    f.push_back(cal.month_of_year);
    f.push_back(cal.day_of_week);
    f.push_back(cal.hour_of_day);
    f.push_back(cal.is_holiday);
    f.push_back(cal.is_weekend);
    for (int lag : kLags) f.push_back(values[static_cast<std::size_t>(t - lag)]);
    return f;
}

inline Vec build_features(const data::HourlySeries& series, const Target& target, long t,
                          const data::HolidayCalendar& holidays) {
    require(t >= 0 && t < static_cast<long>(series.size()), "hour index outside series");
    return build_features_from(target_column(series, target), series.start, t, holidays);
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

// Per-feature min-max onto [0,1]; constant features map to 0. Fitted on the
// training split only.
struct MinMaxNorm {
    Vec lo, hi;

    void fit(const std::vector<Vec>& rows) {
        require(!rows.empty(), "cannot fit normalizer on empty data");
        lo = rows.front();
        hi = rows.front();
        for (const auto& r : rows)
            for (std::size_t i = 0; i < r.size(); ++i) {
                lo[i] = std::min(lo[i], r[i]);
                hi[i] = std::max(hi[i], r[i]);
            }
    }

    Vec apply(const Vec& x) const {
        Vec out(x.size(), 0.0);
        for (std::size_t i = 0; i < x.size(); ++i)
            out[i] = hi[i] > lo[i] ? (x[i] - lo[i]) / (hi[i] - lo[i]) : 0.0;
        return out;
    }
};

struct ScalarNorm {
    double lo = 0.0;
    double hi = 1.0;

    double apply(double v) const {
        return hi > lo ? (v - lo) / (hi - lo) : 0.0;
    }
    double invert(double v) const {
        return hi > lo ? lo + v * (hi - lo) : lo;
    }
};

// ---------------------------------------------------------------------------
// Forecaster
// ---------------------------------------------------------------------------

struct ForecasterConfig {
    int hidden = 64;
    double dropout = 0.2;
    int window = 24;
    int epochs = 100;
    int patience = 10;  // epochs of validation plateau before stopping
    double lr = 1e-3;
    int batch = 32;
    double val_fraction = 0.1;
};

struct AccuracyReport {
    double mae = 0.0;
    double mape = 0.0;         // percent
    int excluded_zeros = 0;    // actual==0 terms left out of MAPE
};

struct TrainReport {
    Vec epoch_loss;      // training MSE per epoch (normalized units)
    Vec epoch_val_loss;  // validation MSE per epoch
    int epochs_run = 0;
};

class Forecaster;
std::pair<Forecaster, TrainReport> train_forecaster(const data::HourlySeries&, const Target&,
                                                    const ForecasterConfig&, std::uint64_t,
                                                    const data::HolidayCalendar&);

// Two stacked LSTM layers with dropout between them and before the linear
// output head.
class Forecaster {
  public:
    Forecaster() = default;

    Forecaster(const ForecasterConfig& cfg, Rng& rng) : cfg_(cfg) {
        l1_ = neural::LstmCell(kFeatureDim, cfg.hidden, rng);
        l2_ = neural::LstmCell(cfg.hidden, cfg.hidden, rng);
        head_ = neural::DenseNet({cfg.hidden, 1}, rng);
    }

    const ForecasterConfig& config() const {
        return cfg_;
    }

    // Denormalized one-step prediction from a window of raw feature vectors.
    double predict_window(std::span<const Vec> window) const {
        require(static_cast<int>(window.size()) == cfg_.window, "window length mismatch");
        Vec h1(cfg_.hidden, 0.0), c1(cfg_.hidden, 0.0);
        Vec h2(cfg_.hidden, 0.0), c2(cfg_.hidden, 0.0);
        Vec h1n, c1n, h2n, c2n;
        for (const Vec& raw : window) {
            const Vec x = feature_norm_.apply(raw);
            neural::lstm_step(l1_, x, h1, c1, h1n, c1n);
            neural::lstm_step(l2_, h1n, h2, c2, h2n, c2n);
            h1 = h1n;
            c1 = c1n;
            h2 = h2n;
            c2 = c2n;
        }
        const double y = head_.forward(h2)[0];
        return target_norm_.invert(y);
    }

    nlohmann::json to_json() const {
        return {{"format", 1},
                {"kind", "forecaster"},
                {"config",
                 {{"hidden", cfg_.hidden},
                  {"dropout", cfg_.dropout},
                  {"window", cfg_.window},
                  {"epochs", cfg_.epochs},
                  {"patience", cfg_.patience},
                  {"lr", cfg_.lr},
                  {"batch", cfg_.batch},
                  {"val_fraction", cfg_.val_fraction}}},
                {"l1", neural::lstm_to_json(l1_)},
                {"l2", neural::lstm_to_json(l2_)},
                {"head", neural::dense_to_json(head_)},
                {"feature_lo", feature_norm_.lo},
                {"feature_hi", feature_norm_.hi},
                {"target_lo", target_norm_.lo},
                {"target_hi", target_norm_.hi}};
    }

    static Forecaster from_json(const nlohmann::json& j) {
        if (j.at("kind") != "forecaster") throw DataError("checkpoint is not a forecaster");
        Forecaster f;
        const auto& c = j.at("config");
        f.cfg_.hidden = c.at("hidden").get<int>();
        f.cfg_.dropout = c.at("dropout").get<double>();
        f.cfg_.window = c.at("window").get<int>();
        f.cfg_.epochs = c.at("epochs").get<int>();
        f.cfg_.patience = c.at("patience").get<int>();
        f.cfg_.lr = c.at("lr").get<double>();
        f.cfg_.batch = c.at("batch").get<int>();
        f.cfg_.val_fraction = c.at("val_fraction").get<double>();
        f.l1_ = neural::lstm_from_json(j.at("l1"));
        f.l2_ = neural::lstm_from_json(j.at("l2"));
        f.head_ = neural::dense_from_json(j.at("head"));
        f.feature_norm_.lo = j.at("feature_lo").get<Vec>();
        f.feature_norm_.hi = j.at("feature_hi").get<Vec>();
        f.target_norm_.lo = j.at("target_lo").get<double>();
        f.target_norm_.hi = j.at("target_hi").get<double>();
        return f;
    }

    friend struct Trainer;
    friend std::pair<Forecaster, TrainReport> train_forecaster(const data::HourlySeries&,
                                                               const Target&,
                                                               const ForecasterConfig&,
                                                               std::uint64_t,
                                                               const data::HolidayCalendar&);

    const MinMaxNorm& feature_norm() const {
        return feature_norm_;
    }
    const ScalarNorm& target_norm() const {
        return target_norm_;
    }

  private:
    ForecasterConfig cfg_;
    neural::LstmCell l1_, l2_;
    neural::DenseNet head_;
    MinMaxNorm feature_norm_;
    ScalarNorm target_norm_;
};

// ---------------------------------------------------------------------------
// Training (backprop through the full window)
// ---------------------------------------------------------------------------

struct Trainer {
    Forecaster& model;
    neural::AdamParams opt;
    neural::AdamState st_l1[3], st_l2[3], st_head[2];

    explicit Trainer(Forecaster& m) : model(m) {
        opt.lr = m.cfg_.lr;
    }

    struct SampleGrads {
        neural::LstmGrads g1, g2;
        neural::DenseGrads gh;
        SampleGrads(const Forecaster& f)
            : g1(f.l1_), g2(f.l2_), gh(f.head_.zero_grads()) {}
    };

    // Forward (and, when grads is given, backward through the whole window)
    // for one sample; returns the squared error in normalized units.
    double accumulate(const std::vector<Vec>& window_norm, double target_norm, SampleGrads* grads,
                      Rng* dropout_rng) {
        Forecaster& f = model;
        const int W = f.cfg_.window;
        const int H = f.cfg_.hidden;
        std::vector<neural::LstmStepCache> c1(W), c2(W);
        std::vector<Vec> mask1(W, Vec(H, 1.0));
        Vec mask2(H, 1.0);
        const double keep = 1.0 - f.cfg_.dropout;
        Vec h1(H, 0.0), cc1(H, 0.0), h2(H, 0.0), cc2(H, 0.0);
        Vec h1n, c1n, h2n, c2n;
        for (int t = 0; t < W; ++t) {
            neural::lstm_step(f.l1_, window_norm[t], h1, cc1, h1n, c1n, grads ? &c1[t] : nullptr);
            Vec h1d = h1n;
            if (dropout_rng && f.cfg_.dropout > 0.0) {
                for (int k = 0; k < H; ++k) {
                    mask1[t][k] = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
                    h1d[k] *= mask1[t][k];
                }
            }
            neural::lstm_step(f.l2_, h1d, h2, cc2, h2n, c2n, grads ? &c2[t] : nullptr);
            h1 = h1n;
            cc1 = c1n;
            h2 = h2n;
            cc2 = c2n;
        }
        Vec h2d = h2;
        if (dropout_rng && f.cfg_.dropout > 0.0) {
            for (int k = 0; k < H; ++k) {
                mask2[k] = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
                h2d[k] *= mask2[k];
            }
        }
        neural::DenseCache head_cache;
        const Vec out = f.head_.forward(h2d, &head_cache);
        const double err = out[0] - target_norm;
        if (!grads) return err * err;

        Vec dout = {2.0 * err};
        Vec dh2d;
        grads->gh.add(f.head_.backward(head_cache, dout, &dh2d));
        for (int k = 0; k < H; ++k) dh2d[k] *= mask2[k];

        Vec dh2 = dh2d, dc2(H, 0.0), dh1(H, 0.0), dc1(H, 0.0);
        Vec dh2_prev, dc2_prev, dh1_prev, dc1_prev, dx2;
        for (int t = W - 1; t >= 0; --t) {
            neural::lstm_step_backward(f.l2_, c2[t], dh2, dc2, grads->g2, dh2_prev, dc2_prev, &dx2);
            for (int k = 0; k < H; ++k) dh1[k] += dx2[k] * mask1[t][k];
            neural::lstm_step_backward(f.l1_, c1[t], dh1, dc1, grads->g1, dh1_prev, dc1_prev);
            dh2 = dh2_prev;
            dc2 = dc2_prev;
            dh1 = dh1_prev;
            dc1 = dc1_prev;
        }
        return err * err;
    }

    void apply(SampleGrads& grads, double scale) {
        grads.g1.scale(scale);
        grads.g2.scale(scale);
        grads.gh.scale(scale);
        auto p1 = model.l1_.parameter_blobs();
        auto b1 = grads.g1.blobs();
        for (int i = 0; i < 3; ++i) neural::adam_update(p1[i], b1[i], st_l1[i], opt);
        auto p2 = model.l2_.parameter_blobs();
        auto b2 = grads.g2.blobs();
        for (int i = 0; i < 3; ++i) neural::adam_update(p2[i], b2[i], st_l2[i], opt);
        auto ph = model.head_.parameter_blobs();
        auto bh = neural::DenseNet::grad_blobs(grads.gh);
        for (int i = 0; i < 2; ++i) neural::adam_update(ph[i], bh[i], st_head[i], opt);
    }
};

// Sliding-window samples over a series for one target quantity.
struct SampleSet {
    std::vector<std::vector<Vec>> windows;  // raw feature windows
    Vec targets;                            // raw target values
};

inline SampleSet build_samples(const data::HourlySeries& series, const Target& target, int window,
                               const data::HolidayCalendar& holidays) {
    SampleSet set;
    const Vec& col = target_column(series, target);
    const long first = kLags.back() + window - 1;  // first predictable hour
    for (long t = first; t < static_cast<long>(series.size()); ++t) {
        std::vector<Vec> win;
        win.reserve(window);
        for (long k = t - window + 1; k <= t; ++k)
            win.push_back(build_features_from(col, series.start, k, holidays));
        set.windows.push_back(std::move(win));
        set.targets.push_back(col[t]);
    }
    return set;
}

// Trains with Adam on MSE over sliding windows; stops early when validation
// loss has not improved for `patience` epochs and restores the best weights.
inline std::pair<Forecaster, TrainReport> train_forecaster(const data::HourlySeries& train,
                                                           const Target& target,
                                                           const ForecasterConfig& cfg,
                                                           std::uint64_t seed,
                                                           const data::HolidayCalendar& holidays) {
    require(train.size() >= static_cast<std::size_t>(kLags.back() + cfg.window + 8),
            "training series shorter than window plus deepest lag");
    Rng rng(seed);
    Forecaster model(cfg, rng);

    SampleSet samples = build_samples(train, target, cfg.window, holidays);
    const std::size_t n = samples.windows.size();
    const std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.val_fraction * n));
    const std::size_t n_train = n - n_val;
    require(n_train >= 1, "not enough samples to train");

    // Fit normalization on the training part only.
    {
        std::vector<Vec> rows;
        for (std::size_t i = 0; i < n_train; ++i)
            for (const auto& f : samples.windows[i]) rows.push_back(f);
        model.feature_norm_.fit(rows);
        double lo = samples.targets[0], hi = samples.targets[0];
        for (std::size_t i = 0; i < n_train; ++i) {
            lo = std::min(lo, samples.targets[i]);
            hi = std::max(hi, samples.targets[i]);
        }
        model.target_norm_ = ScalarNorm{lo, hi};
    }

    // Pre-normalize windows once.
    std::vector<std::vector<Vec>> norm_windows(n);
    Vec norm_targets(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& f : samples.windows[i]) norm_windows[i].push_back(model.feature_norm_.apply(f));
        norm_targets[i] = model.target_norm_.apply(samples.targets[i]);
    }

    Trainer trainer(model);
    TrainReport report;
    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

    auto val_loss = [&]() {
        double s = 0.0;
        for (std::size_t i = n_train; i < n; ++i)
            s += trainer.accumulate(norm_windows[i], norm_targets[i], nullptr, nullptr);
        return s / static_cast<double>(n - n_train);
    };

    nlohmann::json best_snapshot;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // deterministic shuffle
        for (std::size_t i = n_train; i > 1; --i) {
            const std::size_t j = rng.uniform_index(i);
            std::swap(order[i - 1], order[j]);
        }
        double loss_sum = 0.0;
        std::size_t done = 0;
        while (done < n_train) {
            const std::size_t take = std::min<std::size_t>(cfg.batch, n_train - done);
            Trainer::SampleGrads grads(model);
            for (std::size_t b = 0; b < take; ++b) {
                const std::size_t i = order[done + b];
                loss_sum += trainer.accumulate(norm_windows[i], norm_targets[i], &grads, &rng);
            }
            trainer.apply(grads, 1.0 / static_cast<double>(take));
            done += take;
        }
        const double train_loss = loss_sum / static_cast<double>(n_train);
        if (!std::isfinite(train_loss))
            throw NumericError("forecaster training diverged (non-finite loss) at epoch " +
                               std::to_string(epoch + 1));
        report.epoch_loss.push_back(train_loss);
        const double v = val_loss();
        report.epoch_val_loss.push_back(v);
        report.epochs_run = epoch + 1;
        if (v < best_val - 1e-12) {
            best_val = v;
            best_snapshot = model.to_json();
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    if (!best_snapshot.is_null()) model = Forecaster::from_json(best_snapshot);
    return {std::move(model), std::move(report)};
}

// ---------------------------------------------------------------------------
// Rolling day-ahead forecast
// ---------------------------------------------------------------------------

using WindowModel = std::function<double(std::span<const Vec>)>;

// Rolls one-step-ahead forecasts over a day: hour h's forecast feeds the lag
// features of hour h+1. Only series values strictly before the day are read.
inline Vec forecast_day_with(const WindowModel& model, int window,
                             const data::HourlySeries& history, const Target& target,
                             const data::HourStamp& day_start,
                             const data::HolidayCalendar& holidays) {
    data::HourStamp d0{day_start.year, day_start.month, day_start.day, 0};
    const long offset = data::hours_since_epoch(d0) - data::hours_since_epoch(history.start);
    require(offset >= kLags.back() + window - 1,
            "history does not cover the lags required for the first hour of the day");
    require(offset <= static_cast<long>(history.size()), "day starts beyond known history");

    const Vec& col = target_column(history, target);
    Vec working(col.begin(), col.begin() + offset);
    Vec out;
    for (int h = 0; h < kHoursPerDay; ++h) {
        const long t = offset + h;
        std::vector<Vec> win;
        win.reserve(window);
        for (long k = t - window + 1; k <= t; ++k)
            win.push_back(build_features_from(working, history.start, k, holidays));
        const double y = model(win);
        out.push_back(y);
        working.push_back(y);
    }
    return out;
}

inline Vec forecast_day(const Forecaster& model, const data::HourlySeries& history,
                        const Target& target, const data::HourStamp& day_start,
                        const data::HolidayCalendar& holidays) {
    return forecast_day_with(
        [&model](std::span<const Vec> w) { return model.predict_window(w); },
        model.config().window, history, target, day_start, holidays);
}

// ---------------------------------------------------------------------------
// Accuracy
// ---------------------------------------------------------------------------

inline AccuracyReport evaluate_forecast(std::span<const double> pred,
                                        std::span<const double> actual) {
    require(pred.size() == actual.size() && !pred.empty(), "prediction/actual shape mismatch");
    AccuracyReport rep;
    double abs_sum = 0.0, pct_sum = 0.0;
    int pct_terms = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - actual[i];
        abs_sum += std::abs(e);
        if (actual[i] != 0.0) {
            pct_sum += std::abs(e / actual[i]) * 100.0;
            ++pct_terms;
        } else {
            ++rep.excluded_zeros;
        }
    }
    rep.mae = abs_sum / static_cast<double>(pred.size());
    if (pct_terms == 0) throw NumericError("MAPE undefined: every actual value is zero");
    rep.mape = pct_sum / static_cast<double>(pct_terms);
    return rep;
}

}  // namespace ccdr::forecast
