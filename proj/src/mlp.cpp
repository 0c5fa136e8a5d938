#include "tssd/mlp.hpp"

#include "tssd/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace tssd {

Mlp::Mlp(std::size_t in, std::size_t hidden, std::size_t out)
    : in_(in), hidden_(hidden), out_(out), params_(in * hidden + hidden + hidden * out + out, 0.0) {
    if (in == 0 || hidden == 0 || out == 0) throw InvalidSpec("MLP dimensions must be positive");
}

Mlp Mlp::random(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
    Mlp net(in, hidden, out);
    const double a1 = 1.0 / std::sqrt(static_cast<double>(in));
    const double a2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    std::uniform_real_distribution<double> u1(-a1, a1);
    std::uniform_real_distribution<double> u2(-a2, a2);
    const std::size_t first_layer = net.off_w2();
    for (std::size_t i = 0; i < net.params_.size(); ++i)
        net.params_[i] = i < first_layer ? u1(rng) : u2(rng);
    return net;
}

void Mlp::forward(std::span<const double> x, Activations& acts) const {
    if (x.size() != in_) throw ContractViolation("MLP input length mismatch");
    acts.hidden.assign(params_.begin() + static_cast<std::ptrdiff_t>(off_b1()),
                       params_.begin() + static_cast<std::ptrdiff_t>(off_w2()));
    for (std::size_t i = 0; i < in_; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* row = params_.data() + i * hidden_;
        for (std::size_t h = 0; h < hidden_; ++h) acts.hidden[h] += xi * row[h];
    }
    for (double& v : acts.hidden) v = std::max(v, 0.0);

    acts.output.assign(params_.begin() + static_cast<std::ptrdiff_t>(off_b2()), params_.end());
    for (std::size_t h = 0; h < hidden_; ++h) {
        const double a = acts.hidden[h];
        if (a == 0.0) continue;
        const double* row = params_.data() + off_w2() + h * out_;
        for (std::size_t k = 0; k < out_; ++k) acts.output[k] += a * row[k];
    }
}

void Mlp::backward(std::span<const double> x, const Activations& acts, std::span<const double> d_output,
                   std::span<double> grad) const {
    if (grad.size() != params_.size()) throw ContractViolation("gradient buffer has wrong size");
    for (std::size_t k = 0; k < out_; ++k) grad[off_b2() + k] += d_output[k];

    std::vector<double> d_hidden(hidden_, 0.0);
    for (std::size_t h = 0; h < hidden_; ++h) {
        const double a = acts.hidden[h];
        const double* w_row = params_.data() + off_w2() + h * out_;
        double* g_row = grad.data() + off_w2() + h * out_;
        double acc = 0.0;
        for (std::size_t k = 0; k < out_; ++k) {
            g_row[k] += a * d_output[k];
            acc += w_row[k] * d_output[k];
        }
        d_hidden[h] = a > 0.0 ? acc : 0.0;
    }
    for (std::size_t h = 0; h < hidden_; ++h) grad[off_b1() + h] += d_hidden[h];
    for (std::size_t i = 0; i < in_; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        double* g_row = grad.data() + i * hidden_;
        for (std::size_t h = 0; h < hidden_; ++h) g_row[h] += xi * d_hidden[h];
    }
}

bool Mlp::finite() const {
    return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

void Mlp::save(std::ostream& out) const {
    out << in_ << ' ' << hidden_ << ' ' << out_ << '\n';
    char buf[32];
    for (double v : params_) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, ptr - buf);
        out << '\n';
    }
}

Mlp Mlp::load(std::istream& in) {
    std::size_t a = 0, b = 0, c = 0;
    if (!(in >> a >> b >> c)) throw ParseError("checkpoint header must be 'in hidden out'", 1);
    Mlp net(a, b, c);
    std::string token;
    for (std::size_t i = 0; i < net.params_.size(); ++i) {
        if (!(in >> token)) throw ParseError("checkpoint ends after " + std::to_string(i) + " parameters");
        double v = 0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v))
            throw ParseError("bad parameter '" + token + "'", i + 2);
        net.params_[i] = v;
    }
    if (in >> token) throw ParseError("trailing data in checkpoint");
    return net;
}

}  // namespace tssd
