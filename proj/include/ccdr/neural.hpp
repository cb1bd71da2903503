#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <utility>

#include "ccdr/common.hpp"

#include "json.hpp"

namespace ccdr::neural {

// ---------------------------------------------------------------------------
// Dense matrix, row-major
// ---------------------------------------------------------------------------

struct Matrix {
    int rows = 0;
    int cols = 0;
    Vec a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) {
        return a[static_cast<std::size_t>(r) * cols + c];
    }
    double at(int r, int c) const {
        return a[static_cast<std::size_t>(r) * cols + c];
    }
    double* row(int r) {
        return a.data() + static_cast<std::size_t>(r) * cols;
    }
    const double* row(int r) const {
        return a.data() + static_cast<std::size_t>(r) * cols;
    }
};

// y = W x + b
inline void matvec(const Matrix& w, const Vec& x, const Vec& b, Vec& y) {
    if (static_cast<int>(x.size()) != w.cols) throw ShapeError("matvec: input length mismatch");
    y.assign(w.rows, 0.0);
    for (int r = 0; r < w.rows; ++r) {
        const double* wr = w.row(r);
        double acc = b.empty() ? 0.0 : b[r];
        for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
        y[r] = acc;
    }
}

inline double sigmoid(double z) {
    return 1.0 / (1.0 + std::exp(-z));
}

// Symmetric uniform init in +/- sqrt(6 / (fan_in + fan_out)).
inline void glorot_init(Matrix& w, Rng& rng) {
    const double bound = std::sqrt(6.0 / (w.rows + w.cols));
    for (double& v : w.a) v = rng.uniform(-bound, bound);
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
    Vec m;
    Vec v;
    long step = 0;

    void ensure(std::size_t n) {
        if (m.size() != n) {
            m.assign(n, 0.0);
            v.assign(n, 0.0);
        }
    }
};

struct AdamParams {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One bias-corrected Adam update for a parameter blob; advances the blob's
// step counter.
inline void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state,
                        const AdamParams& opt) {
    if (params.size() != grads.size()) throw ShapeError("adam_update: size mismatch");
    state.ensure(params.size());
    ++state.step;
    const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = opt.beta1 * state.m[i] + (1.0 - opt.beta1) * grads[i];
        state.v[i] = opt.beta2 * state.v[i] + (1.0 - opt.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        params[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
    }
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

struct LossResult {
    double loss = 0.0;
    Vec grad;  // d loss / d pred
};

// Mean squared error over elements.
inline LossResult mse_loss(const Vec& pred, const Vec& target) {
    if (pred.size() != target.size()) throw ShapeError("mse_loss: length mismatch");
    LossResult r;
    r.grad.assign(pred.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - target[i];
        r.loss += e * e * inv_n;
        r.grad[i] = 2.0 * e * inv_n;
    }
    return r;
}

// Mean Huber loss: quadratic for |e| <= delta, linear beyond.
inline LossResult huber_loss(const Vec& pred, const Vec& target, double delta) {
    if (pred.size() != target.size()) throw ShapeError("huber_loss: length mismatch");
    LossResult r;
    r.grad.assign(pred.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - target[i];
        if (std::abs(e) <= delta) {
            r.loss += 0.5 * e * e * inv_n;
            r.grad[i] = e * inv_n;
        } else {
            r.loss += delta * (std::abs(e) - 0.5 * delta) * inv_n;
            r.grad[i] = (e > 0.0 ? delta : -delta) * inv_n;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Fully connected network (ReLU hidden layers, linear output)
// ---------------------------------------------------------------------------

struct DenseLayer {
    Matrix w;
    Vec b;
    bool relu = false;
};

struct DenseCache {
    Vec input;
    std::vector<Vec> pre;   // pre-activation per layer
    std::vector<Vec> post;  // post-activation per layer
};

struct DenseGrads {
    std::vector<Matrix> w;
    std::vector<Vec> b;

    void add(const DenseGrads& o) {
        for (std::size_t l = 0; l < w.size(); ++l) {
            for (std::size_t i = 0; i < w[l].a.size(); ++i) w[l].a[i] += o.w[l].a[i];
            for (std::size_t i = 0; i < b[l].size(); ++i) b[l][i] += o.b[l][i];
        }
    }
    void scale(double s) {
        for (auto& m : w)
            for (double& v : m.a) v *= s;
        for (auto& bv : b)
            for (double& v : bv) v *= s;
    }
};

class DenseNet {
  public:
    DenseNet() = default;

    // dims = {in, h1, ..., out}; hidden layers ReLU, output linear
    DenseNet(const std::vector<int>& dims, Rng& rng) {
        require(dims.size() >= 2, "DenseNet needs at least one layer");
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            DenseLayer layer;
            layer.w = Matrix(dims[l + 1], dims[l]);
            layer.b.assign(dims[l + 1], 0.0);
            layer.relu = l + 2 < dims.size();
            glorot_init(layer.w, rng);
            layers.push_back(std::move(layer));
        }
    }

    int input_dim() const {
        return layers.front().w.cols;
    }
    int output_dim() const {
        return layers.back().w.rows;
    }

    Vec forward(const Vec& x, DenseCache* cache = nullptr) const {
        if (static_cast<int>(x.size()) != input_dim())
            throw ShapeError("DenseNet: input dim " + std::to_string(x.size()) + " != " +
                             std::to_string(input_dim()));
        if (cache) {
            cache->input = x;
            cache->pre.clear();
            cache->post.clear();
        }
        Vec cur = x;
        Vec next;
        for (const auto& layer : layers) {
            matvec(layer.w, cur, layer.b, next);
            if (cache) cache->pre.push_back(next);
            if (layer.relu)
                for (double& v : next) v = v > 0.0 ? v : 0.0;
            if (cache) cache->post.push_back(next);
            cur = next;
        }
        return cur;
    }

    // Backpropagates d loss / d output; returns parameter gradients and,
    // optionally, d loss / d input.
    DenseGrads backward(const DenseCache& cache, const Vec& out_grad, Vec* input_grad = nullptr) const {
        if (cache.post.size() != layers.size()) throw ShapeError("DenseNet: stale cache");
        if (static_cast<int>(out_grad.size()) != output_dim())
            throw ShapeError("DenseNet: output grad dim mismatch");
        DenseGrads g = zero_grads();
        Vec delta = out_grad;
        for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
            const auto& layer = layers[l];
            if (layer.relu)
                for (int r = 0; r < layer.w.rows; ++r)
                    if (cache.pre[l][r] <= 0.0) delta[r] = 0.0;
            const Vec& in = l == 0 ? cache.input : cache.post[l - 1];
            for (int r = 0; r < layer.w.rows; ++r) {
                double* gr = g.w[l].row(r);
                const double dr = delta[r];
                for (int c = 0; c < layer.w.cols; ++c) gr[c] += dr * in[c];
                g.b[l][r] += dr;
            }
            if (l > 0 || input_grad) {
                Vec prev(layer.w.cols, 0.0);
                for (int r = 0; r < layer.w.rows; ++r) {
                    const double* wr = layer.w.row(r);
                    const double dr = delta[r];
                    for (int c = 0; c < layer.w.cols; ++c) prev[c] += wr[c] * dr;
                }
                if (l == 0) {
                    *input_grad = prev;
                } else {
                    delta = std::move(prev);
                }
            }
        }
        return g;
    }

    DenseGrads zero_grads() const {
        DenseGrads g;
        for (const auto& layer : layers) {
            g.w.emplace_back(layer.w.rows, layer.w.cols);
            g.b.emplace_back(layer.b.size(), 0.0);
        }
        return g;
    }

    std::vector<std::span<double>> parameter_blobs() {
        std::vector<std::span<double>> blobs;
        for (auto& layer : layers) {
            blobs.emplace_back(layer.w.a);
            blobs.emplace_back(layer.b);
        }
        return blobs;
    }

    std::vector<std::span<const double>> parameter_blobs() const {
        std::vector<std::span<const double>> blobs;
        for (const auto& layer : layers) {
            blobs.emplace_back(layer.w.a);
            blobs.emplace_back(layer.b);
        }
        return blobs;
    }

    static std::vector<std::span<const double>> grad_blobs(const DenseGrads& g) {
        std::vector<std::span<const double>> blobs;
        for (std::size_t l = 0; l < g.w.size(); ++l) {
            blobs.emplace_back(g.w[l].a);
            blobs.emplace_back(g.b[l]);
        }
        return blobs;
    }

    std::vector<DenseLayer> layers;
};

// Optimizer state covering every blob of one DenseNet.
struct DenseAdam {
    std::vector<AdamState> states;

    void apply(DenseNet& net, const DenseGrads& grads, const AdamParams& opt) {
        auto params = net.parameter_blobs();
        auto gblobs = DenseNet::grad_blobs(grads);
        states.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i)
            adam_update(params[i], gblobs[i], states[i], opt);
    }
};

// ---------------------------------------------------------------------------
// LSTM cell
// ---------------------------------------------------------------------------

// Gate order throughout: input, forget, candidate, output.
struct LstmCell {
    int input_dim = 0;
    int hidden_dim = 0;
    Matrix wx;  // (4H x D)
    Matrix wh;  // (4H x H)
    Vec b;      // 4H

    LstmCell() = default;
    LstmCell(int in_dim, int hid_dim, Rng& rng)
        : input_dim(in_dim), hidden_dim(hid_dim), wx(4 * hid_dim, in_dim), wh(4 * hid_dim, hid_dim),
          b(static_cast<std::size_t>(4) * hid_dim, 0.0) {
        glorot_init(wx, rng);
        glorot_init(wh, rng);
    }

    std::vector<std::span<double>> parameter_blobs() {
        return {std::span<double>(wx.a), std::span<double>(wh.a), std::span<double>(b)};
    }
};

struct LstmStepCache {
    Vec x, h_prev, c_prev;
    Vec i, f, g, o;  // post-activation gates
    Vec c, tanh_c;
};

struct LstmGrads {
    Matrix wx, wh;
    Vec b;

    explicit LstmGrads(const LstmCell& cell)
        : wx(cell.wx.rows, cell.wx.cols), wh(cell.wh.rows, cell.wh.cols), b(cell.b.size(), 0.0) {}

    std::vector<std::span<const double>> blobs() const {
        return {std::span<const double>(wx.a), std::span<const double>(wh.a),
                std::span<const double>(b)};
    }
    void scale(double s) {
        for (double& v : wx.a) v *= s;
        for (double& v : wh.a) v *= s;
        for (double& v : b) v *= s;
    }
};

inline void lstm_step(const LstmCell& cell, const Vec& x, const Vec& h_prev, const Vec& c_prev,
                      Vec& h_out, Vec& c_out, LstmStepCache* cache = nullptr) {
    const int H = cell.hidden_dim;
    if (static_cast<int>(x.size()) != cell.input_dim ||
        static_cast<int>(h_prev.size()) != H || static_cast<int>(c_prev.size()) != H)
        throw ShapeError("lstm_step: dimension mismatch");

    Vec z(static_cast<std::size_t>(4) * H, 0.0);
    for (int r = 0; r < 4 * H; ++r) {
        const double* wxr = cell.wx.row(r);
        const double* whr = cell.wh.row(r);
        double acc = cell.b[r];
        for (int c = 0; c < cell.input_dim; ++c) acc += wxr[c] * x[c];
        for (int c = 0; c < H; ++c) acc += whr[c] * h_prev[c];
        z[r] = acc;
    }

    Vec i(H), f(H), g(H), o(H);
    for (int k = 0; k < H; ++k) {
        i[k] = sigmoid(z[k]);
        f[k] = sigmoid(z[H + k]);
        g[k] = std::tanh(z[2 * H + k]);
        o[k] = sigmoid(z[3 * H + k]);
    }
    c_out.assign(H, 0.0);
    h_out.assign(H, 0.0);
    Vec tanh_c(H);
    for (int k = 0; k < H; ++k) {
        c_out[k] = f[k] * c_prev[k] + i[k] * g[k];
        tanh_c[k] = std::tanh(c_out[k]);
        h_out[k] = o[k] * tanh_c[k];
    }
    if (cache) {
        cache->x = x;
        cache->h_prev = h_prev;
        cache->c_prev = c_prev;
        cache->i = std::move(i);
        cache->f = std::move(f);
        cache->g = std::move(g);
        cache->o = std::move(o);
        cache->c = c_out;
        cache->tanh_c = std::move(tanh_c);
    }
}

// One step of backprop through time. dh/dc are gradients flowing into this
// step's outputs; dh_prev/dc_prev/dx receive the propagated gradients and
// parameter gradients accumulate into grads.
inline void lstm_step_backward(const LstmCell& cell, const LstmStepCache& cache, const Vec& dh,
                               const Vec& dc, LstmGrads& grads, Vec& dh_prev, Vec& dc_prev,
                               Vec* dx = nullptr) {
    const int H = cell.hidden_dim;
    Vec dz(static_cast<std::size_t>(4) * H, 0.0);
    dc_prev.assign(H, 0.0);
    for (int k = 0; k < H; ++k) {
        const double do_ = dh[k] * cache.tanh_c[k];
        const double dct = dc[k] + dh[k] * cache.o[k] * (1.0 - cache.tanh_c[k] * cache.tanh_c[k]);
        const double di = dct * cache.g[k];
        const double df = dct * cache.c_prev[k];
        const double dg = dct * cache.i[k];
        dc_prev[k] = dct * cache.f[k];
        dz[k] = di * cache.i[k] * (1.0 - cache.i[k]);
        dz[H + k] = df * cache.f[k] * (1.0 - cache.f[k]);
        dz[2 * H + k] = dg * (1.0 - cache.g[k] * cache.g[k]);
        dz[3 * H + k] = do_ * cache.o[k] * (1.0 - cache.o[k]);
    }
    dh_prev.assign(H, 0.0);
    if (dx) dx->assign(cell.input_dim, 0.0);
    for (int r = 0; r < 4 * H; ++r) {
        const double dzr = dz[r];
        if (dzr == 0.0) continue;
        double* gwx = grads.wx.row(r);
        double* gwh = grads.wh.row(r);
        const double* wxr = cell.wx.row(r);
        const double* whr = cell.wh.row(r);
        for (int c = 0; c < cell.input_dim; ++c) {
            gwx[c] += dzr * cache.x[c];
            if (dx) (*dx)[c] += wxr[c] * dzr;
        }
        for (int c = 0; c < H; ++c) {
            gwh[c] += dzr * cache.h_prev[c];
            dh_prev[c] += whr[c] * dzr;
        }
        grads.b[r] += dzr;
    }
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

struct GradCheckReport {
    double max_rel_err = 0.0;
    long worst_index = -1;
};

// Central finite differences against analytic gradients. `loss` must evaluate
// the model at the current parameter values; `params`/`analytic` must refer to
// the same blobs in the same order.
inline GradCheckReport grad_check(const std::function<double()>& loss,
                                  std::vector<std::span<double>> params,
                                  std::vector<std::span<const double>> analytic,
                                  double step = 1e-5) {
    GradCheckReport report;
    long flat = 0;
    for (std::size_t blob = 0; blob < params.size(); ++blob) {
        for (std::size_t k = 0; k < params[blob].size(); ++k, ++flat) {
            double& p = params[blob][k];
            const double saved = p;
            p = saved + step;
            const double up = loss();
            p = saved - step;
            const double down = loss();
            p = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic[blob][k];
            const double denom = std::max(1.0, std::abs(a) + std::abs(numeric));
            const double rel = std::abs(a - numeric) / denom;
            if (!(rel <= report.max_rel_err)) {
                report.max_rel_err = rel;
                report.worst_index = flat;
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

inline nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.a}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
    m.a = j.at("data").get<Vec>();
    if (m.a.size() != static_cast<std::size_t>(m.rows) * m.cols)
        throw DataError("checkpoint matrix size mismatch");
    return m;
}

inline nlohmann::json dense_to_json(const DenseNet& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : net.layers)
        layers.push_back({{"w", matrix_to_json(layer.w)}, {"b", layer.b}, {"relu", layer.relu}});
    return {{"format", 1}, {"kind", "dense"}, {"layers", layers}};
}

inline DenseNet dense_from_json(const nlohmann::json& j) {
    if (j.at("kind") != "dense") throw DataError("checkpoint is not a dense network");
    DenseNet net;
    for (const auto& jl : j.at("layers")) {
        DenseLayer layer;
        layer.w = matrix_from_json(jl.at("w"));
        layer.b = jl.at("b").get<Vec>();
        layer.relu = jl.at("relu").get<bool>();
        net.layers.push_back(std::move(layer));
    }
    return net;
}

inline nlohmann::json lstm_to_json(const LstmCell& cell) {
    return {{"format", 1},
            {"kind", "lstm"},
            {"input_dim", cell.input_dim},
            {"hidden_dim", cell.hidden_dim},
            {"wx", matrix_to_json(cell.wx)},
            {"wh", matrix_to_json(cell.wh)},
            {"b", cell.b}};
}

inline LstmCell lstm_from_json(const nlohmann::json& j) {
    if (j.at("kind") != "lstm") throw DataError("checkpoint is not an lstm cell");
    LstmCell cell;
    cell.input_dim = j.at("input_dim").get<int>();
    cell.hidden_dim = j.at("hidden_dim").get<int>();
    cell.wx = matrix_from_json(j.at("wx"));
    cell.wh = matrix_from_json(j.at("wh"));
    cell.b = j.at("b").get<Vec>();
    return cell;
}

inline void save_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << '\n';
}

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace ccdr::neural
