#pragma once
// Desk-scale embedding model: raw descriptor -> linear map -> L2 normalization,
// with backpropagation through the frame mean used for sub-tracklet embeddings.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssrc/core.hpp"

namespace ssrc {

class Encoder {
public:
    Encoder() = default;
    explicit Encoder(Matrix weights) : weights_(std::move(weights)) {}

    // Gaussian init, entries N(0, 1/raw_dim).
    static Encoder random(std::size_t raw_dim, std::size_t d, std::uint64_t seed);

    std::size_t raw_dim() const { return weights_.rows(); }
    std::size_t dim() const { return weights_.cols(); }
    const Matrix& weights() const { return weights_; }
    Matrix& weights() { return weights_; }

    /// Unit-norm embedding of one raw frame. Throws std::domain_error if the
    /// linear map sends it to zero.
    Vec encode(std::span<const double> raw) const;

    /// Embeds every row of `raw_frames`.
    Matrix encode_frames(const Matrix& raw_frames) const;

    /// normalize(mean_m encode(raw_frames[rows[m]])).
    Vec embed(const Matrix& raw_frames, std::span<const std::size_t> rows) const;

    /// Adds d loss / d weights to `grad_w` for the embedding `embed` produces
    /// from the same rows, given d loss / d embedding.
    void embed_backward(const Matrix& raw_frames, std::span<const std::size_t> rows, std::span<const double> grad_v,
                        Matrix& grad_w) const;

    friend bool operator==(const Encoder&, const Encoder&) = default;

private:
    Matrix weights_;  // raw_dim x d
};

// Decoupled-weight-decay Adam with beta = (0.9, 0.999), eps = 1e-8.
struct AdamW {
    Matrix m;
    Matrix v;
    std::size_t step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 5e-4;

    void step(Matrix& weights, const Matrix& grad, double lr);
};

// FNV-1a over the raw weight bytes; used to check that a phase left the
// weights untouched.
std::uint64_t weights_fingerprint(const Encoder& enc);

}  // namespace ssrc
