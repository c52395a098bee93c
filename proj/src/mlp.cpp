#include "triad/mlp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace triad {
namespace mlp {

void MlpConfig::validate() const {
    if (layer_sizes.size() < 2) throw ConfigError("need at least input and output layer");
    for (auto v : layer_sizes)
        if (v == 0) throw ConfigError("layer sizes must be positive");
    if (batch_size == 0 || epochs == 0) throw ConfigError("batch_size and epochs must be positive");
    if (learning_rate <= 0) throw ConfigError("learning_rate must be positive");
}

int Dataset::num_classes() const {
    int m = -1;
    for (int l : labels) m = std::max(m, l);
    return m + 1;
}

Dataset load_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw FormatError(path + ": empty file");

    auto split_fields = [](const std::string& l) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : l) {
            if (c == ',') {
                out.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur.push_back(c);
            }
        }
        out.push_back(cur);
        return out;
    };

    const auto header = split_fields(line);
    int label_col = -1;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "label")
            label_col = static_cast<int>(i);
        else
            names.push_back(header[i]);
    }
    if (label_col < 0) throw FormatError(path + ": no column named 'label'");

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t rows = 0, lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw FormatError(path + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(header.size()) + " fields, got " +
                              std::to_string(fields.size()));
        for (std::size_t i = 0; i < fields.size(); ++i) {
            char* end = nullptr;
            const double v = std::strtod(fields[i].c_str(), &end);
            if (end == fields[i].c_str() || *end != '\0')
                throw FormatError(path + ":" + std::to_string(lineno) + ": non-numeric cell '" +
                                  fields[i] + "'");
            if (static_cast<int>(i) == label_col) {
                if (v != std::floor(v) || v < 0)
                    throw FormatError(path + ":" + std::to_string(lineno) + ": unknown label '" +
                                      fields[i] + "'");
                labels.push_back(static_cast<int>(v));
            } else {
                values.push_back(v);
            }
        }
        ++rows;
    }
    if (rows == 0) throw FormatError(path + ": no data rows");
    Dataset d;
    d.features = Matrix(rows, names.size(), std::move(values));
    d.labels = std::move(labels);
    d.feature_names = std::move(names);
    return d;
}

Matrix load_matrix_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw FormatError(path + ": empty file");

    auto fields_of = [](const std::string& l) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : l) {
            if (c == ',') {
                out.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur.push_back(c);
            }
        }
        out.push_back(cur);
        return out;
    };

    const auto header = fields_of(line);
    int label_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == "label") label_col = static_cast<int>(i);
    const std::size_t cols = header.size() - (label_col >= 0 ? 1 : 0);

    std::vector<double> values;
    std::size_t rows = 0, lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = fields_of(line);
        if (fields.size() != header.size())
            throw FormatError(path + ":" + std::to_string(lineno) + ": ragged row");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (static_cast<int>(i) == label_col) continue;
            char* end = nullptr;
            const double v = std::strtod(fields[i].c_str(), &end);
            if (end == fields[i].c_str() || *end != '\0')
                throw FormatError(path + ":" + std::to_string(lineno) + ": non-numeric cell '" +
                                  fields[i] + "'");
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw FormatError(path + ": no data rows");
    return Matrix(rows, cols, std::move(values));
}

void standardize_columns(Matrix& m) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) mean += m(r, c);
        mean /= static_cast<double>(m.rows());
        double var = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            const double d = m(r, c) - mean;
            var += d * d;
        }
        var /= static_cast<double>(m.rows());
        const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
        for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = (m(r, c) - mean) / sd;
    }
}

Matrix one_hot(const std::vector<int>& labels, std::size_t classes) {
    Matrix out(labels.size(), classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
            throw FormatError("unknown label " + std::to_string(labels[i]));
        out(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return out;
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    PrgSeed rng{seed, 0};
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = rng.next_u64() % (i + 1);
        std::swap(idx[i], idx[j]);
    }
    return idx;
}

} // namespace

Split make_split(std::size_t rows, std::size_t test_count, std::uint64_t seed) {
    if (test_count >= rows) throw ConfigError("test split larger than dataset");
    const auto idx = shuffled_indices(rows, seed);
    Split s;
    s.train.assign(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(test_count));
    s.test.assign(idx.end() - static_cast<std::ptrdiff_t>(test_count), idx.end());
    return s;
}

namespace {

AdditiveShare hconcat(Session& s, const std::vector<AdditiveShare>& blocks) {
    std::size_t cols = 0;
    for (const auto& b : blocks) cols += b.cols();
    const std::size_t rows = blocks.front().rows();
    AdditiveShare out;
    out.owner = s.id();
    out.part_a = Matrix(rows, cols);
    out.part_b = Matrix(rows, cols);
    std::size_t at = 0;
    for (const auto& b : blocks) {
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < b.cols(); ++c) {
                out.part_a(r, at + c) = b.part_a(r, c);
                out.part_b(r, at + c) = b.part_b(r, c);
            }
        at += b.cols();
    }
    return out;
}

} // namespace

SharedDataset ingest_vertical(Session& s, const VerticalSchema& schema, const LocalBlock& own,
                              std::size_t test_count, std::uint64_t split_seed) {
    if (schema.rows == 0 || schema.classes == 0) throw ConfigError("bad vertical schema");
    const std::size_t own_cols = schema.cols[s.id().index];
    if (own_cols > 0) {
        if (!own.features) throw ProtocolError("this provider owes a feature block");
        if (own.features->rows() != schema.rows || own.features->cols() != own_cols)
            throw FormatError("feature block shape does not match schema (row-count mismatch?)");
    }
    if (s.id() == schema.label_provider && !own.labels)
        throw ProtocolError("label provider owes the labels");

    std::vector<AdditiveShare> blocks;
    for (int p = 0; p < 3; ++p) {
        if (schema.cols[p] == 0) continue;
        Matrix prepared;
        const bool mine = (s.id().index == p);
        if (mine) {
            prepared = *own.features;
            if (schema.standardize) standardize_columns(prepared);
        }
        blocks.push_back(share_secret(s, PartyId(p), mine ? &prepared : nullptr, schema.rows,
                                      schema.cols[p]));
    }
    if (blocks.empty()) throw ConfigError("schema has no feature columns");

    Matrix labels_hot;
    const bool labeler = (s.id() == schema.label_provider);
    if (labeler) {
        if (own.labels->size() != schema.rows)
            throw FormatError("label row-count mismatch");
        labels_hot = one_hot(*own.labels, schema.classes);
    }
    AdditiveShare labels = share_secret(s, schema.label_provider, labeler ? &labels_hot : nullptr,
                                        schema.rows, schema.classes);

    SharedDataset out;
    out.features = blocks.size() == 1 ? std::move(blocks.front()) : hconcat(s, blocks);
    out.labels = std::move(labels);
    out.split = make_split(schema.rows, test_count, split_seed);
    return out;
}

AdditiveShare slice_rows(const AdditiveShare& sh, const std::vector<std::size_t>& rows) {
    AdditiveShare out;
    out.owner = sh.owner;
    out.part_a = Matrix(rows.size(), sh.cols());
    out.part_b = Matrix(rows.size(), sh.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < sh.cols(); ++c) {
            out.part_a(i, c) = sh.part_a(rows[i], c);
            out.part_b(i, c) = sh.part_b(rows[i], c);
        }
    return out;
}

SharedModel init_model(Session& s, const MlpConfig& cfg) {
    cfg.validate();
    SharedModel m;
    PrgSeed init{cfg.init_seed, 0};
    for (std::size_t l = 0; l + 1 < cfg.layer_sizes.size(); ++l) {
        const std::size_t in = cfg.layer_sizes[l], out = cfg.layer_sizes[l + 1];
        Matrix w;
        if (s.id().index == 0) {
            const double limit = 0.5 * std::sqrt(6.0 / static_cast<double>(in));
            w = prg_draw(init, in, out, RandomRange{-limit, limit, 0.0});
        } else {
            // advance the public stream identically even though only P0 shares
            (void)prg_draw(init, in, out, RandomRange{-1.0, 1.0, 0.0});
        }
        m.weights.push_back(
            share_secret(s, PartyId(0), s.id().index == 0 ? &w : nullptr, in, out));
        Matrix zero(1, out);
        m.biases.push_back(
            share_secret(s, PartyId(0), s.id().index == 0 ? &zero : nullptr, 1, out));
    }
    return m;
}

ForwardCache forward(Session& s, const SharedModel& model, const AdditiveShare& batch,
                     const MlpConfig& cfg) {
    ForwardCache cache;
    cache.input = batch;
    AdditiveShare act = batch;
    const std::size_t layers = model.weights.size();
    for (std::size_t l = 0; l < layers; ++l) {
        AdditiveShare z = mul(s, act, model.weights[l], MulKind::matmul);
        z = add_row_broadcast(s, z, model.biases[l]);
        if (l + 1 < layers) {
            ReluResult r = relu(s, z);
            cache.relu_derivs.push_back(r.deriv);
            // narrow parts before feeding the next layer
            cache.activations.push_back(
                reshare_narrow(s, r.value, false, cfg.chain_reshare_range));
            act = cache.activations.back();
        } else {
            const AdditiveShare narrow =
                reshare_narrow(s, z, /*center=*/true, cfg.softmax_reshare_range);
            cache.prediction = softmax(s, narrow);
        }
    }
    return cache;
}

namespace {

AdditiveShare colsum_shares(Session& s, const AdditiveShare& a) {
    return {s.id(), colsum(a.part_a), colsum(a.part_b)};
}

} // namespace

Gradients backward(Session& s, const SharedModel& model, const ForwardCache& cache,
                   const AdditiveShare& batch_labels, const MlpConfig& cfg) {
    const std::size_t layers = model.weights.size();
    Gradients g;
    g.weights.resize(layers);
    g.biases.resize(layers);

    // cross-entropy + softmax: output gradient is prediction - labels, local
    AdditiveShare grad = sub_shares(s, cache.prediction, batch_labels);
    for (std::size_t l = layers; l-- > 0;) {
        const AdditiveShare& layer_in = (l == 0) ? cache.input : cache.activations[l - 1];
        const AdditiveShare dw = mul(s, transpose_shares(s, layer_in), grad, MulKind::matmul);
        // keep gradient parts narrow so weight parts stay bounded across steps
        g.weights[l] = reshare_narrow(s, dw, false, cfg.chain_reshare_range);
        g.biases[l] = reshare_narrow(s, colsum_shares(s, grad), false, cfg.chain_reshare_range);
        if (l > 0) {
            grad = mul(s, grad, transpose_shares(s, model.weights[l]), MulKind::matmul);
            grad = mul(s, grad, cache.relu_derivs[l - 1], MulKind::hadamard);
            grad = reshare_narrow(s, grad, false, cfg.chain_reshare_range);
        }
    }
    return g;
}

void sgd_step(Session& s, SharedModel& model, const Gradients& g, double learning_rate) {
    const double step = learning_rate;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        model.weights[l] = sub_shares(s, model.weights[l], mul_public(s, g.weights[l], step));
        model.biases[l] = sub_shares(s, model.biases[l], mul_public(s, g.biases[l], step));
    }
}

int argmax_row(const Matrix& m, std::size_t row) {
    int best = 0;
    for (std::size_t c = 1; c < m.cols(); ++c)
        if (m(row, c) > m(row, best)) best = static_cast<int>(c);
    return best;
}

std::vector<int> predict(Session& s, const SharedModel& model, const AdditiveShare& features,
                         const MlpConfig& cfg, PartyId user) {
    const ForwardCache cache = forward(s, model, features, cfg);
    const auto plain = reconstruct_to(s, cache.prediction, user, "predict");
    std::vector<int> out;
    if (plain) {
        out.reserve(plain->rows());
        for (std::size_t r = 0; r < plain->rows(); ++r) out.push_back(argmax_row(*plain, r));
    }
    return out;
}

namespace {

/// True-class probability per sample, revealed to the evaluator only.
std::optional<Matrix> reveal_true_class_prob(Session& s, const AdditiveShare& prediction,
                                             const AdditiveShare& labels) {
    const AdditiveShare picked = mul(s, prediction, labels, MulKind::hadamard);
    const AdditiveShare rs = rowsum_broadcast_shares(s, picked);
    // first column of the broadcast row-sum is the per-sample probability
    AdditiveShare col;
    col.owner = s.id();
    col.part_a = Matrix(rs.rows(), 1);
    col.part_b = Matrix(rs.rows(), 1);
    for (std::size_t r = 0; r < rs.rows(); ++r) {
        col.part_a(r, 0) = rs.part_a(r, 0);
        col.part_b(r, 0) = rs.part_b(r, 0);
    }
    return reconstruct_to(s, col, PartyId(0), "loss");
}

} // namespace

TrainResult train(Session& s, const SharedDataset& data, const MlpConfig& cfg) {
    cfg.validate();
    if (cfg.layer_sizes.front() != data.features.cols())
        throw ConfigError("input layer size does not match feature count");
    if (cfg.classes() != data.labels.cols())
        throw ConfigError("output layer size does not match class count");

    TrainResult result;
    result.model = init_model(s, cfg);

    const AdditiveShare test_x = slice_rows(data.features, data.split.test);
    // test labels go to the evaluator once, for the accuracy metric
    const AdditiveShare test_y_share = slice_rows(data.labels, data.split.test);
    const auto test_y = reconstruct_to(s, test_y_share, PartyId(0), "eval_labels");

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::uint64_t bytes0 = s.total_bytes();
        const std::uint64_t rounds0 = s.total_rounds();

        auto order = data.split.train;
        {
            PrgSeed rng{cfg.shuffle_seed + epoch, 0};
            for (std::size_t i = order.size() - 1; i > 0; --i)
                std::swap(order[i], order[rng.next_u64() % (i + 1)]);
        }

        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (std::size_t at = 0; at < order.size(); at += cfg.batch_size) {
            const std::size_t take = std::min(cfg.batch_size, order.size() - at);
            const std::vector<std::size_t> rows(order.begin() + at, order.begin() + at + take);
            const AdditiveShare bx = slice_rows(data.features, rows);
            const AdditiveShare by = slice_rows(data.labels, rows);

            const ForwardCache cache = forward(s, result.model, bx, cfg);
            const auto probs = reveal_true_class_prob(s, cache.prediction, by);
            if (probs) {
                for (std::size_t r = 0; r < probs->rows(); ++r) {
                    loss_sum += -std::log(std::max((*probs)(r, 0), 1e-12));
                    ++loss_count;
                }
            }

            const Gradients g = backward(s, result.model, cache, by, cfg);
            sgd_step(s, result.model, g, cfg.learning_rate);
        }

        const std::vector<int> pred = predict(s, result.model, test_x, cfg, PartyId(0));

        EpochMetrics m;
        m.epoch = epoch;
        if (s.id().index == 0) {
            m.loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
            std::size_t hits = 0;
            for (std::size_t r = 0; r < pred.size(); ++r)
                if (pred[r] == argmax_row(*test_y, r)) ++hits;
            m.accuracy = pred.empty() ? 0.0
                                      : static_cast<double>(hits) / static_cast<double>(pred.size());
        }
        m.bytes_total = s.total_bytes() - bytes0;
        m.rounds_total = s.total_rounds() - rounds0;
        m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                        .count();
        result.metrics.push_back(m);
    }
    return result;
}

// --- checkpoints ----------------------------------------------------------------------

void save_model(Session& s, const SharedModel& model, const MlpConfig& cfg,
                const std::string& dir) {
    const int p = s.id().index;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        save_share(dir + "/w" + std::to_string(l) + ".p" + std::to_string(p) + ".prss",
                   model.weights[l]);
        save_share(dir + "/b" + std::to_string(l) + ".p" + std::to_string(p) + ".prss",
                   model.biases[l]);
    }
    // one manifest per party: each party's checkpoint directory is
    // self-contained and concurrent saves into a shared directory cannot race
    nlohmann::json manifest;
    manifest["layer_sizes"] = cfg.layer_sizes;
    manifest["epochs"] = cfg.epochs;
    manifest["init_seed"] = cfg.init_seed;
    manifest["shuffle_seed"] = cfg.shuffle_seed;
    std::ofstream f(dir + "/manifest.p" + std::to_string(p) + ".json");
    if (!f) throw FormatError("cannot write manifest in " + dir);
    f << manifest.dump(2) << "\n";
}

SharedModel load_model(Session& s, const std::string& dir, MlpConfig& cfg_out) {
    std::ifstream f(dir + "/manifest.p" + std::to_string(s.id().index) + ".json");
    if (!f) throw FormatError("cannot open manifest in " + dir);
    nlohmann::json manifest;
    f >> manifest;
    cfg_out.layer_sizes = manifest.at("layer_sizes").get<std::vector<std::size_t>>();
    cfg_out.epochs = manifest.value("epochs", std::size_t{5});
    cfg_out.init_seed = manifest.value("init_seed", std::uint64_t{1});
    cfg_out.shuffle_seed = manifest.value("shuffle_seed", std::uint64_t{1});

    SharedModel m;
    const int p = s.id().index;
    for (std::size_t l = 0; l + 1 < cfg_out.layer_sizes.size(); ++l) {
        m.weights.push_back(
            load_share(dir + "/w" + std::to_string(l) + ".p" + std::to_string(p) + ".prss"));
        m.biases.push_back(
            load_share(dir + "/b" + std::to_string(l) + ".p" + std::to_string(p) + ".prss"));
    }
    return m;
}

} // namespace mlp
} // namespace triad
