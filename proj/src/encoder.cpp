#include "ssrc/encoder.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ssrc/rng.hpp"

namespace ssrc {
namespace {

// h = W^T x
Vec project(const Matrix& w, std::span<const double> x) {
    if (x.size() != w.rows()) throw std::invalid_argument("Encoder: raw dimension mismatch");
    Vec h(w.cols(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        auto wr = w.row(r);
        for (std::size_t c = 0; c < h.size(); ++c) h[c] += xr * wr[c];
    }
    return h;
}

}  // namespace

Encoder Encoder::random(std::size_t raw_dim, std::size_t d, std::uint64_t seed) {
    Rng rng = derive_rng(seed, 0xE4C0DE);
    std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(raw_dim)));
    Matrix w(raw_dim, d);
    for (double& x : w.data()) x = g(rng);
    return Encoder(std::move(w));
}

Vec Encoder::encode(std::span<const double> raw) const {
    Vec h = project(weights_, raw);
    if (!(norm(h) > 0.0)) throw std::domain_error("encode: frame maps to the zero vector");
    normalize_in_place(h);
    return h;
}

Matrix Encoder::encode_frames(const Matrix& raw_frames) const {
    Matrix out(raw_frames.rows(), dim());
    for (std::size_t i = 0; i < raw_frames.rows(); ++i) out.set_row(i, encode(raw_frames.row(i)));
    return out;
}

Vec Encoder::embed(const Matrix& raw_frames, std::span<const std::size_t> rows) const {
    if (rows.empty()) throw std::invalid_argument("embed: no frames");
    Vec u(dim(), 0.0);
    for (std::size_t r : rows) {
        const Vec f = encode(raw_frames.row(r));
        for (std::size_t c = 0; c < u.size(); ++c) u[c] += f[c];
    }
    for (double& x : u) x /= static_cast<double>(rows.size());
    return normalized(u);
}

void Encoder::embed_backward(const Matrix& raw_frames, std::span<const std::size_t> rows, std::span<const double> grad_v,
                             Matrix& grad_w) const {
    const std::size_t d = dim();
    const auto M = static_cast<double>(rows.size());

    std::vector<Vec> h(rows.size()), f(rows.size());
    Vec u(d, 0.0);
    for (std::size_t m = 0; m < rows.size(); ++m) {
        h[m] = project(weights_, raw_frames.row(rows[m]));
        f[m] = normalized(h[m]);
        for (std::size_t c = 0; c < d; ++c) u[c] += f[m][c] / M;
    }
    const double un = norm(u);
    const Vec v = normalized(u);

    // Through v = u / |u|.
    const double vg = dot(v, grad_v);
    Vec grad_f(d);
    for (std::size_t c = 0; c < d; ++c) grad_f[c] = (grad_v[c] - v[c] * vg) / un / M;

    for (std::size_t m = 0; m < rows.size(); ++m) {
        // Through f = h / |h|, then h = W^T x.
        const double hn = norm(h[m]);
        const double fg = dot(f[m], grad_f);
        Vec grad_h(d);
        for (std::size_t c = 0; c < d; ++c) grad_h[c] = (grad_f[c] - f[m][c] * fg) / hn;
        auto x = raw_frames.row(rows[m]);
        for (std::size_t r = 0; r < x.size(); ++r) {
            if (x[r] == 0.0) continue;
            auto gw = grad_w.row(r);
            for (std::size_t c = 0; c < d; ++c) gw[c] += x[r] * grad_h[c];
        }
    }
}

void AdamW::step(Matrix& weights, const Matrix& grad, double lr) {
    if (m.rows() != weights.rows() || m.cols() != weights.cols()) {
        m = Matrix(weights.rows(), weights.cols());
        v = Matrix(weights.rows(), weights.cols());
    }
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    auto& w = weights.data();
    const auto& g = grad.data();
    auto& mm = m.data();
    auto& vv = v.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] -= lr * weight_decay * w[i];
        mm[i] = beta1 * mm[i] + (1.0 - beta1) * g[i];
        vv[i] = beta2 * vv[i] + (1.0 - beta2) * g[i] * g[i];
        w[i] -= lr * (mm[i] / bc1) / (std::sqrt(vv[i] / bc2) + epsilon);
    }
}

std::uint64_t weights_fingerprint(const Encoder& enc) {
    std::uint64_t h = 1469598103934665603ULL;
    for (double x : enc.weights().data()) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &x, sizeof x);
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

}  // namespace ssrc
