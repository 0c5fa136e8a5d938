#pragma once

#include "tssd/rng.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace tssd {

/// Two affine layers with a rectifier in between: out = W2^T relu(W1^T x + b1) + b2.
/// All parameters live in one flat vector ordered W1 (in x hidden, row-major), b1,
/// W2 (hidden x out, row-major), b2. The output is left pre-activation; callers apply
/// sigmoid or softmax.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::size_t in, std::size_t hidden, std::size_t out);

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for each layer's weights and bias.
    static Mlp random(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng);

    std::size_t in_dim() const { return in_; }
    std::size_t hidden_dim() const { return hidden_; }
    std::size_t out_dim() const { return out_; }

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    double& w1(std::size_t i, std::size_t h) { return params_[i * hidden_ + h]; }
    double& b1(std::size_t h) { return params_[off_b1() + h]; }
    double& w2(std::size_t h, std::size_t k) { return params_[off_w2() + h * out_ + k]; }
    double& b2(std::size_t k) { return params_[off_b2() + k]; }

    struct Activations {
        std::vector<double> hidden;  // post-rectifier
        std::vector<double> output;  // pre-activation
    };

    void forward(std::span<const double> x, Activations& acts) const;

    /// Adds dLoss/dparams into grad given dLoss/d(output).
    void backward(std::span<const double> x, const Activations& acts, std::span<const double> d_output,
                  std::span<double> grad) const;

    bool finite() const;

    /// First line "in hidden out", then one parameter per line in shortest round-trip form.
    void save(std::ostream& out) const;
    static Mlp load(std::istream& in);

    bool operator==(const Mlp&) const = default;

private:
    std::size_t off_b1() const { return in_ * hidden_; }
    std::size_t off_w2() const { return off_b1() + hidden_; }
    std::size_t off_b2() const { return off_w2() + hidden_ * out_; }

    std::size_t in_ = 0;
    std::size_t hidden_ = 0;
    std::size_t out_ = 0;
    std::vector<double> params_;
};

}  // namespace tssd
