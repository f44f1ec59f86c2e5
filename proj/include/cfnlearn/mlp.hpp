#pragma once

// Residual multi-layer perceptron with reverse-mode gradients and Adam.
//
// Layout (one column per example):
//   H_0 = relu(W_in X + b_in)
//   A_l = relu(W_l H_{l-1} + b_l)                        l = 1..hidden_layers
//   H_l = A_l + H_{l-p}   when p > 0 and l % p == 0, else A_l
//   O   = W_out H_L + b_out                              (linear)
// where p is the residual period.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cfnlearn/cost.hpp"
#include "cfnlearn/rng.hpp"

namespace cfnlearn {

struct MlpConfig {
    int input_dim = 0;
    int hidden_width = 128;
    int hidden_layers = 10;
    int residual_period = 2;
    int output_dim = 0;

    friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

/// One named weight or bias tensor inside the flat parameter vector.
struct ParamSegment {
    std::string name;
    std::size_t offset = 0;
    int rows = 0;
    int cols = 0;
    std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }

    friend bool operator==(const ParamSegment&, const ParamSegment&) = default;
};

template <typename Scalar = double>
struct ParamStore {
    std::vector<ParamSegment> segments;
    std::vector<Scalar> values;
    std::vector<Scalar> first_moment;
    std::vector<Scalar> second_moment;
    std::uint64_t step = 0;
    std::uint64_t version = 0; ///< bumped on every update; caches record it

    std::size_t size() const { return values.size(); }

    const ParamSegment& segment_at(std::size_t flat_index) const {
        for (const auto& s : segments)
            if (flat_index >= s.offset && flat_index < s.offset + s.size()) return s;
        throw StructuralError("parameter index out of range");
    }

    friend bool operator==(const ParamStore&, const ParamStore&) = default;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    bool decoupled_decay = true; ///< false: decay is added to the gradient (L2)
};

/// Adam with bias correction. Decoupled decay shrinks parameters directly by
/// lr * weight_decay; coupled decay adds weight_decay * w to the gradient.
template <typename Scalar>
void adam_step(ParamStore<Scalar>& store, const std::vector<Scalar>& grad, const AdamConfig& cfg) {
    if (grad.size() != store.values.size()) throw StructuralError("gradient size does not match parameters");
    for (std::size_t k = 0; k < grad.size(); ++k)
        if (!std::isfinite(static_cast<double>(grad[k])))
            throw StructuralError("non-finite gradient in tensor " + store.segment_at(k).name);
    if (store.first_moment.size() != store.values.size()) {
        store.first_moment.assign(store.values.size(), Scalar(0));
        store.second_moment.assign(store.values.size(), Scalar(0));
    }
    ++store.step;
    ++store.version;
    const double t = static_cast<double>(store.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t k = 0; k < grad.size(); ++k) {
        double w = store.values[k];
        double g = grad[k];
        if (!cfg.decoupled_decay) g += cfg.weight_decay * w;
        const double m = cfg.beta1 * store.first_moment[k] + (1.0 - cfg.beta1) * g;
        const double v = cfg.beta2 * store.second_moment[k] + (1.0 - cfg.beta2) * g * g;
        store.first_moment[k] = static_cast<Scalar>(m);
        store.second_moment[k] = static_cast<Scalar>(v);
        if (cfg.decoupled_decay) w -= cfg.lr * cfg.weight_decay * w;
        w -= cfg.lr * (m / c1) / (std::sqrt(v / c2) + cfg.eps);
        store.values[k] = static_cast<Scalar>(w);
    }
}

template <typename Scalar = double>
class Mlp {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using MatrixMap = Eigen::Map<Matrix>;
    using ConstMatrixMap = Eigen::Map<const Matrix>;
    using ConstVectorMap = Eigen::Map<const Vector>;

    /// Activations kept by forward() for the matching backward().
    struct Cache {
        std::uint64_t version = 0;
        const void* owner = nullptr;
        Matrix input;
        std::vector<Matrix> pre;  ///< pre-activations of layers 0..L
        std::vector<Matrix> post; ///< H_0..H_L
    };

    explicit Mlp(MlpConfig cfg) : cfg_(cfg) {
        if (cfg_.input_dim < 1 || cfg_.output_dim < 1 || cfg_.hidden_width < 1 || cfg_.hidden_layers < 0 ||
            cfg_.residual_period < 0)
            throw StructuralError("invalid MLP configuration");
        std::size_t offset = 0;
        auto add = [&](std::string name, int rows, int cols) {
            segments_.push_back({std::move(name), offset, rows, cols});
            offset += segments_.back().size();
        };
        add("input.weight", cfg_.hidden_width, cfg_.input_dim);
        add("input.bias", cfg_.hidden_width, 1);
        for (int l = 1; l <= cfg_.hidden_layers; ++l) {
            add("hidden" + std::to_string(l) + ".weight", cfg_.hidden_width, cfg_.hidden_width);
            add("hidden" + std::to_string(l) + ".bias", cfg_.hidden_width, 1);
        }
        add("output.weight", cfg_.output_dim, cfg_.hidden_width);
        add("output.bias", cfg_.output_dim, 1);
        param_count_ = offset;
    }

    const MlpConfig& config() const { return cfg_; }
    std::size_t parameter_count() const { return param_count_; }
    int layer_count() const { return cfg_.hidden_layers + 2; }

    ParamStore<Scalar> zeros() const {
        ParamStore<Scalar> p;
        p.segments = segments_;
        p.values.assign(param_count_, Scalar(0));
        p.first_moment.assign(param_count_, Scalar(0));
        p.second_moment.assign(param_count_, Scalar(0));
        return p;
    }

    /// He-uniform fan-in initialization for weights, zero biases. The output
    /// layer bound is multiplied by `output_gain`.
    ParamStore<Scalar> init(std::uint64_t seed, double output_gain = 1.0) const {
        ParamStore<Scalar> p = zeros();
        Rng rng(derive_seed(seed, "init"));
        for (std::size_t s = 0; s < segments_.size(); s += 2) {
            const auto& w = segments_[s];
            const double gain = s + 2 == segments_.size() ? output_gain : 1.0;
            const double bound = gain * std::sqrt(6.0 / w.cols);
            for (std::size_t k = 0; k < w.size(); ++k)
                p.values[w.offset + k] = static_cast<Scalar>(rng.uniform(-bound, bound));
        }
        return p;
    }

    /// Batched forward pass; `features` has one column per example.
    Matrix forward(const ParamStore<Scalar>& params, const Matrix& features, Cache* cache = nullptr) const {
        check(params);
        if (features.rows() != cfg_.input_dim)
            throw StructuralError("feature length " + std::to_string(features.rows()) + " != input_dim " +
                                  std::to_string(cfg_.input_dim));
        const int L = cfg_.hidden_layers;
        std::vector<Matrix> pre(static_cast<std::size_t>(L) + 1), post(static_cast<std::size_t>(L) + 1);
        pre[0] = weight(params, 0) * features;
        pre[0].colwise() += bias(params, 0);
        post[0] = pre[0].cwiseMax(Scalar(0));
        for (int l = 1; l <= L; ++l) {
            const auto ul = static_cast<std::size_t>(l);
            pre[ul] = weight(params, l) * post[ul - 1];
            pre[ul].colwise() += bias(params, l);
            post[ul] = pre[ul].cwiseMax(Scalar(0));
            if (residual_at(l)) post[ul] += post[ul - static_cast<std::size_t>(cfg_.residual_period)];
        }
        Matrix out = weight(params, L + 1) * post[static_cast<std::size_t>(L)];
        out.colwise() += bias(params, L + 1);
        if (cache) {
            cache->version = params.version;
            cache->owner = &params;
            cache->input = features;
            cache->pre = std::move(pre);
            cache->post = std::move(post);
        }
        return out;
    }

    /// Single-example convenience overload.
    std::vector<Scalar> forward(const ParamStore<Scalar>& params, const std::vector<Scalar>& features) const {
        Matrix x = ConstVectorMap(features.data(), static_cast<Eigen::Index>(features.size()));
        Matrix out = forward(params, x);
        return std::vector<Scalar>(out.data(), out.data() + out.size());
    }

    /// Gradient of sum(upstream .* output) with respect to every parameter,
    /// in the flat layout of `params`.
    std::vector<Scalar> backward(const ParamStore<Scalar>& params, const Cache& cache, const Matrix& upstream) const {
        check(params);
        if (cache.owner != &params || cache.version != params.version || cache.pre.empty())
            throw StructuralError("stale activation cache: parameters changed since forward()");
        if (upstream.rows() != cfg_.output_dim || upstream.cols() != cache.input.cols())
            throw StructuralError("upstream gradient shape mismatch");
        std::vector<Scalar> grad(param_count_, Scalar(0));
        const int L = cfg_.hidden_layers;
        const auto uL = static_cast<std::size_t>(L);

        weight_grad(grad, L + 1).noalias() = upstream * cache.post[uL].transpose();
        bias_grad(grad, L + 1) = upstream.rowwise().sum();

        std::vector<Matrix> dpost(uL + 1);
        dpost[uL].noalias() = weight(params, L + 1).transpose() * upstream;
        for (int l = L; l >= 0; --l) {
            const auto ul = static_cast<std::size_t>(l);
            if (dpost[ul].size() == 0) dpost[ul] = Matrix::Zero(cfg_.hidden_width, cache.input.cols());
            if (l >= 1 && residual_at(l)) {
                auto& skip = dpost[ul - static_cast<std::size_t>(cfg_.residual_period)];
                if (skip.size() == 0) skip = dpost[ul];
                else skip += dpost[ul];
            }
            Matrix dpre = dpost[ul].cwiseProduct(relu_mask(cache.pre[ul]));
            const Matrix& below = l == 0 ? cache.input : cache.post[ul - 1];
            weight_grad(grad, l).noalias() = dpre * below.transpose();
            bias_grad(grad, l) = dpre.rowwise().sum();
            if (l >= 1) {
                Matrix back = weight(params, l).transpose() * dpre;
                if (dpost[ul - 1].size() == 0) dpost[ul - 1] = std::move(back);
                else dpost[ul - 1] += back;
            }
        }
        return grad;
    }

    const std::vector<ParamSegment>& segments() const { return segments_; }

private:
    bool residual_at(int l) const { return cfg_.residual_period > 0 && l % cfg_.residual_period == 0; }

    static Matrix relu_mask(const Matrix& pre) { return (pre.array() > Scalar(0)).template cast<Scalar>().matrix(); }

    void check(const ParamStore<Scalar>& params) const {
        if (params.values.size() != param_count_) throw StructuralError("parameter count mismatch");
    }

    ConstMatrixMap weight(const ParamStore<Scalar>& p, int layer) const {
        const auto& s = segments_[2 * static_cast<std::size_t>(layer)];
        return ConstMatrixMap(p.values.data() + s.offset, s.rows, s.cols);
    }
    ConstVectorMap bias(const ParamStore<Scalar>& p, int layer) const {
        const auto& s = segments_[2 * static_cast<std::size_t>(layer) + 1];
        return ConstVectorMap(p.values.data() + s.offset, s.rows);
    }
    MatrixMap weight_grad(std::vector<Scalar>& g, int layer) const {
        const auto& s = segments_[2 * static_cast<std::size_t>(layer)];
        return MatrixMap(g.data() + s.offset, s.rows, s.cols);
    }
    Eigen::Map<Vector> bias_grad(std::vector<Scalar>& g, int layer) const {
        const auto& s = segments_[2 * static_cast<std::size_t>(layer) + 1];
        return Eigen::Map<Vector>(g.data() + s.offset, s.rows);
    }

    MlpConfig cfg_;
    std::vector<ParamSegment> segments_;
    std::size_t param_count_ = 0;
};

} // namespace cfnlearn
