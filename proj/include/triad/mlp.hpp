#pragma once

#include <optional>
#include <string>
#include <vector>

#include "triad/protocols.hpp"

namespace triad {
namespace mlp {

/// layer_sizes runs input -> hidden... -> classes, e.g. {4, 16, 16, 3}.
/// Hidden layers use ReLU, the output layer Softmax.
struct MlpConfig {
    std::vector<std::size_t> layer_sizes;
    std::size_t batch_size = 16;
    double learning_rate = 0.05;
    std::size_t epochs = 5;
    std::uint64_t init_seed = 1;
    std::uint64_t shuffle_seed = 1; // public: batch composition is metadata
    std::optional<RandomRange> softmax_reshare_range; // default: session config
    /// Activations and gradients are re-shared narrowly between layers: the
    /// parts coming out of a secure multiplication scale with the product of
    /// the operand part widths, and chained layers would otherwise compound
    /// that geometrically past double precision.
    RandomRange chain_reshare_range = RandomRange::symmetric(16.0);

    std::size_t classes() const { return layer_sizes.back(); }
    void validate() const;
};

// --- plaintext provider-side data ------------------------------------------------

struct Dataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;

    std::size_t rows() const { return features.rows(); }
    int num_classes() const;
};

/// Header row required; numeric cells; the label column is named "label".
/// Errors carry 1-based line numbers.
Dataset load_csv(const std::string& path);
/// Headered all-numeric CSV (a "label" column, if present, is dropped).
Matrix load_matrix_csv(const std::string& path);
/// Per-column z-score in place (columns with zero variance are left centered).
void standardize_columns(Matrix& m);
Matrix one_hot(const std::vector<int>& labels, std::size_t classes);

/// Public train/test split drawn from a seed all parties agree on.
struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};
Split make_split(std::size_t rows, std::size_t test_count, std::uint64_t seed);

// --- shared dataset ----------------------------------------------------------------

struct SharedDataset {
    AdditiveShare features; // samples x total features
    AdditiveShare labels;   // samples x classes, one-hot
    Split split;
};

/// Column layout of a vertically partitioned dataset. cols[p] may be zero.
struct VerticalSchema {
    std::size_t rows = 0;
    std::array<std::size_t, 3> cols = {0, 0, 0};
    PartyId label_provider;
    std::size_t classes = 0;
    bool standardize = true;
};

/// What this party contributes: its feature block (standardized before
/// sharing when the schema says so) and, for the label provider, the labels.
struct LocalBlock {
    std::optional<Matrix> features;
    std::optional<std::vector<int>> labels;
};

/// Each provider shares its block column-wise; blocks are concatenated in
/// provider order into the full shared feature matrix. Labels are one-hot
/// encoded by their provider and shared.
SharedDataset ingest_vertical(Session& s, const VerticalSchema& schema, const LocalBlock& own,
                              std::size_t test_count, std::uint64_t split_seed);

AdditiveShare slice_rows(const AdditiveShare& sh, const std::vector<std::size_t>& rows);

// --- model -----------------------------------------------------------------------------

struct SharedModel {
    std::vector<AdditiveShare> weights; // layer_sizes[i] x layer_sizes[i+1]
    std::vector<AdditiveShare> biases;  // 1 x layer_sizes[i+1]
};

/// He-style scaled-uniform weights generated from init_seed by P0 and shared;
/// biases start at zero.
SharedModel init_model(Session& s, const MlpConfig& cfg);

struct ForwardCache {
    AdditiveShare input;
    std::vector<AdditiveShare> activations; // post-ReLU, per hidden layer
    std::vector<AdditiveShare> relu_derivs;
    AdditiveShare prediction; // softmax output
};

ForwardCache forward(Session& s, const SharedModel& model, const AdditiveShare& batch,
                     const MlpConfig& cfg);

struct Gradients {
    std::vector<AdditiveShare> weights;
    std::vector<AdditiveShare> biases;
};

/// Output gradient is prediction - labels (local); hidden gradients flow
/// through transposed weights and the stored ReLU derivatives.
Gradients backward(Session& s, const SharedModel& model, const ForwardCache& cache,
                   const AdditiveShare& batch_labels, const MlpConfig& cfg);
/// W <- W - lr * dW with dW summed over the batch; the stock learning rates
/// assume this scaling.
void sgd_step(Session& s, SharedModel& model, const Gradients& g, double learning_rate);

struct EpochMetrics {
    std::size_t epoch = 0;
    double loss = 0.0;     // evaluator only
    double accuracy = 0.0; // evaluator only
    std::uint64_t bytes_total = 0;
    std::uint64_t rounds_total = 0;
    double wall_ms = 0.0;
};

struct TrainResult {
    SharedModel model;
    std::vector<EpochMetrics> metrics; // populated at the evaluator (P0)
};

/// Mini-batch SGD over publicly shuffled rows. Loss (per-sample true-class
/// probability) and test accuracy are reconstructed to the evaluator P0 only.
TrainResult train(Session& s, const SharedDataset& data, const MlpConfig& cfg);

/// Argmax class indices, reconstructed at `user` only (lowest index wins
/// ties). Other parties receive an empty vector.
std::vector<int> predict(Session& s, const SharedModel& model, const AdditiveShare& features,
                         const MlpConfig& cfg, PartyId user);

int argmax_row(const Matrix& m, std::size_t row);

// --- checkpoints -------------------------------------------------------------------------

/// Per-party PRSS1 share files plus a JSON manifest (written by P0).
void save_model(Session& s, const SharedModel& model, const MlpConfig& cfg,
                const std::string& dir);
SharedModel load_model(Session& s, const std::string& dir, MlpConfig& cfg_out);

} // namespace mlp
} // namespace triad
