#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "deepiv/matrix.hpp"
#include "deepiv/rng.hpp"

namespace deepiv {

// Fully connected ReLU network
//
//   f(z) = v_{L+1} + A_{L+1} relu(A_L ... relu(A_1 z - v_1) ... - v_L)
//
// with L hidden layers of width W: hidden layers subtract their shift
// inside the activation, the output layer adds its shift.
struct MlpNetwork {
    std::size_t d = 0;  // input dim
    std::size_t q = 0;  // output dim
    std::size_t L = 0;  // hidden layers
    std::size_t W = 0;  // width
    std::vector<Matrix> weights;              // A_1: W×d, A_2..A_L: W×W, A_{L+1}: q×W
    std::vector<std::vector<double>> shifts;  // v_1..v_L: length W, v_{L+1}: length q

    // W(L+d+q) + (L-1)W^2 — the count used in the width/depth theory; the
    // output shift v_{L+1} is trained but not part of this tally.
    std::size_t parameter_count() const { return W * (L + d + q) + (L - 1) * W * W; }

    // Throws ShapeMismatch / DomainError when layer shapes or finiteness
    // are violated.
    void check() const;
};

// Per-parameter gradient, same shapes as the network it came from.
struct MlpGradient {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> shifts;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 500;
    std::size_t patience = 25;     // epochs without test improvement before stopping
    double train_fraction = 0.8;   // remainder is the held-out test split
    enum class Optimizer { sgd, adam };
    Optimizer optimizer = Optimizer::adam;
    // When true (default) the returned network is the snapshot with the
    // lowest test loss seen; otherwise the final-epoch parameters.
    bool return_best = true;
    std::uint64_t seed = 0;
};

struct TrainReport {
    std::size_t epochs_run = 0;
    double final_train_loss = 0.0;
    double final_test_loss = 0.0;
    double best_test_loss = 0.0;
    // (train, test) loss after each epoch
    std::vector<std::pair<double, double>> loss_history;
};

// Fresh network with Uniform(±sqrt(6/(fan_in+fan_out))) weights and zero
// shifts. Deterministic in the rng state.
MlpNetwork init_network(std::size_t d, std::size_t q, std::size_t L, std::size_t W,
                        RngStream& rng);

// Single-input evaluation of the composition above.
std::vector<double> forward(const MlpNetwork& net, std::span<const double> z);

// Batched evaluation: row i of the result is forward(net, Z.row(i)).
Matrix forward_batch(const MlpNetwork& net, const Matrix& z);

// Mean over rows of ||X_i - f(Z_i)||^2.
double loss(const MlpNetwork& net, const Matrix& x, const Matrix& z);

// Backpropagated gradient of `loss` on the given batch with respect to
// every weight and shift.
MlpGradient gradient(const MlpNetwork& net, const Matrix& x_batch, const Matrix& z_batch);

// Minibatch first-order training on squared loss with an early-stopping
// test split. The split permutation is drawn from cfg.seed before any
// batching, so split and batch order are independently reproducible.
std::pair<MlpNetwork, TrainReport> train(const MlpNetwork& net, const Matrix& x,
                                         const Matrix& z, const TrainConfig& cfg);

}  // namespace deepiv
