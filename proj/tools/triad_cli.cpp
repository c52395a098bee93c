// triad: three-party replicated-sharing compute engine.
//
// Subcommands: share, bench, train, predict, analyze, serve. Inprocess mode
// drives all three parties in one process; socket mode runs one party per
// process against peer endpoints.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "triad/bench.hpp"
#include "triad/mlp.hpp"
#include "triad/secanalysis.hpp"
#include "triad/session.hpp"

using namespace triad;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string mode = "inprocess";
    int party = 0;
    std::string peers; // "h:p,h:p,h:p"
    std::uint64_t seed = 1;
    double rtt_ms = 0.0;
    double bandwidth_bps = 0.0;
    std::string rand_range; // "LO:HI"
    std::string config_path;
    bool csv = false;
    bool no_timing = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--mode", o.mode, "inprocess or socket")
        ->check(CLI::IsMember({"inprocess", "socket"}));
    cmd->add_option("--party", o.party, "party index in socket mode")->check(CLI::Range(0, 2));
    cmd->add_option("--peers", o.peers, "host:port,host:port,host:port (socket mode)");
    cmd->add_option("--seed", o.seed, "base seed; parties use seed, seed+1, seed+2");
    cmd->add_option("--rtt-ms", o.rtt_ms, "symmetric round-trip time to emulate");
    cmd->add_option("--bandwidth-bps", o.bandwidth_bps, "link bandwidth (0 = unlimited)");
    cmd->add_option("--rand-range", o.rand_range, "mask range LO:HI");
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_flag("--csv", o.csv, "emit CSV instead of JSON lines");
    cmd->add_flag("--no-timing", o.no_timing, "zero wall-time fields for bit-identical reports");
}

json load_config(const CommonOpts& o) {
    if (o.config_path.empty()) return json::object();
    std::ifstream f(o.config_path);
    if (!f) throw ConfigError("cannot open config " + o.config_path);
    json j;
    f >> j;
    return j;
}

SessionConfig session_config(const CommonOpts& o, const json& cfg) {
    SessionConfig sc;
    sc.seeds = {o.seed, o.seed + 1, o.seed + 2};
    if (cfg.contains("seeds")) {
        auto v = cfg["seeds"].get<std::vector<std::uint64_t>>();
        if (v.size() != 3) throw ConfigError("config seeds must have 3 entries");
        sc.seeds = {v[0], v[1], v[2]};
    }
    if (!o.rand_range.empty()) {
        const auto colon = o.rand_range.find(':');
        if (colon == std::string::npos) throw ConfigError("--rand-range wants LO:HI");
        sc.randomness_range.low = std::stod(o.rand_range.substr(0, colon));
        sc.randomness_range.high = std::stod(o.rand_range.substr(colon + 1));
        sc.randomness_range.validate();
    } else if (cfg.contains("rand_range")) {
        auto v = cfg["rand_range"].get<std::vector<double>>();
        sc.randomness_range = RandomRange{v.at(0), v.at(1), 0.0};
    }
    if (cfg.contains("softmax_reshare")) {
        auto v = cfg["softmax_reshare"].get<std::vector<double>>();
        sc.softmax_reshare_range = RandomRange{v.at(0), v.at(1), 0.0};
    }
    return sc;
}

NetProfile net_profile(const CommonOpts& o) { return NetProfile{o.rtt_ms, o.bandwidth_bps}; }

std::array<std::string, 3> peer_endpoints(const CommonOpts& o) {
    std::array<std::string, 3> eps;
    std::size_t at = 0;
    int i = 0;
    while (i < 3) {
        const auto comma = o.peers.find(',', at);
        eps[i++] = o.peers.substr(at, comma == std::string::npos ? comma : comma - at);
        if (comma == std::string::npos) break;
        at = comma + 1;
    }
    if (i != 3 || eps[2].empty())
        throw ConfigError("--peers needs three host:port entries in socket mode");
    return eps;
}

mlp::MlpConfig mlp_config(const json& cfg, const std::string& preset, std::size_t features) {
    mlp::MlpConfig mc;
    if (preset == "iris") {
        mc.layer_sizes = {features ? features : 4, 16, 16, 3};
        mc.batch_size = 16;
        mc.learning_rate = 0.05;
        mc.epochs = 5;
    } else if (preset == "wine") {
        mc.layer_sizes = {features ? features : 13, 16, 16, 3};
        mc.batch_size = 16;
        mc.learning_rate = 0.05;
        mc.epochs = 5;
    } else if (preset == "mnist") {
        mc.layer_sizes = {features ? features : 784, 128, 128, 10};
        mc.batch_size = 128;
        mc.learning_rate = 0.01;
        mc.epochs = 5;
    }
    if (cfg.contains("layer_sizes"))
        mc.layer_sizes = cfg["layer_sizes"].get<std::vector<std::size_t>>();
    if (cfg.contains("batch_size")) mc.batch_size = cfg["batch_size"].get<std::size_t>();
    if (cfg.contains("learning_rate")) mc.learning_rate = cfg["learning_rate"].get<double>();
    if (cfg.contains("epochs")) mc.epochs = cfg["epochs"].get<std::size_t>();
    if (cfg.contains("init_seed")) mc.init_seed = cfg["init_seed"].get<std::uint64_t>();
    if (cfg.contains("shuffle_seed")) mc.shuffle_seed = cfg["shuffle_seed"].get<std::uint64_t>();
    return mc;
}

// --- share: dealer-side conversion of a CSV block into PRSS1 files ------------------

int cmd_share(const std::string& input, const std::string& out_prefix, std::uint64_t seed) {
    const Matrix x = mlp::load_matrix_csv(input);
    deal_share_files(x, out_prefix, seed, RandomRange::symmetric(1048576.0));
    std::cout << "{\"rows\":" << x.rows() << ",\"cols\":" << x.cols() << ",\"files\":3}"
              << std::endl;
    return 0;
}

// --- bench ------------------------------------------------------------------------

void print_bench_rows(std::vector<bench::BenchRow> rows, const CommonOpts& o) {
    if (o.no_timing)
        for (auto& r : rows) r.mean_ms = 0.0;
    if (o.csv) {
        std::cout << bench::csv_header() << "\n";
        for (const auto& r : rows) std::cout << bench::to_csv_line(r) << "\n";
    } else {
        for (const auto& r : rows) std::cout << bench::to_json_line(r) << "\n";
    }
}

int cmd_bench(const CommonOpts& o, const json& cfg) {
    bench::BenchSpec spec;
    if (cfg.contains("bench")) {
        const auto& b = cfg["bench"];
        if (b.contains("protocol"))
            spec.protocol = bench::protocol_from_name(b["protocol"].get<std::string>());
        if (b.contains("sizes")) spec.sizes = b["sizes"].get<std::vector<std::size_t>>();
        if (b.contains("repetitions")) spec.repetitions = b["repetitions"].get<std::size_t>();
        if (b.contains("exponent_span")) spec.exponent_span = b["exponent_span"].get<int>();
    }
    const SessionConfig sc = session_config(o, cfg);
    if (o.mode == "inprocess") {
        SessionTrio trio = make_inprocess_trio(sc, net_profile(o));
        std::array<std::vector<bench::BenchRow>, 3> rows;
        run3(trio, [&](Session& s) { rows[s.id().index] = bench::run_bench(s, spec, o.seed); });
        print_bench_rows(rows[0], o);
    } else {
        auto session = make_socket_session(o.party, sc, peer_endpoints(o), net_profile(o));
        auto rows = bench::run_bench(*session, spec, o.seed);
        session->close_checkpoint();
        if (o.party == 0) print_bench_rows(rows, o);
    }
    return 0;
}

// --- train / predict -----------------------------------------------------------------

std::array<std::size_t, 3> parse_split(const std::string& split, std::size_t total) {
    if (split.empty()) {
        const std::size_t a = (total + 2) / 3, b = (total - a + 1) / 2;
        return {a, b, total - a - b};
    }
    std::array<std::size_t, 3> out{};
    if (std::sscanf(split.c_str(), "%zu,%zu,%zu", &out[0], &out[1], &out[2]) != 3 ||
        out[0] + out[1] + out[2] != total)
        throw ConfigError("--split must be c0,c1,c2 summing to the feature count");
    return out;
}

void print_metrics(const std::vector<mlp::EpochMetrics>& metrics, const CommonOpts& o) {
    for (const auto& m : metrics) {
        json j{{"epoch", m.epoch},        {"loss", m.loss},
               {"accuracy", m.accuracy},  {"bytes_total", m.bytes_total},
               {"rounds_total", m.rounds_total}, {"wall_ms", o.no_timing ? 0.0 : m.wall_ms}};
        std::cout << j.dump() << "\n";
    }
}

int cmd_train(const CommonOpts& o, const json& cfg, const std::string& dataset,
              const std::string& preset, const std::string& split_arg, std::size_t test_count,
              const std::string& save_dir) {
    const mlp::Dataset ds = mlp::load_csv(dataset);
    mlp::MlpConfig mc = mlp_config(cfg, preset, ds.features.cols());
    mc.init_seed = o.seed;
    mc.shuffle_seed = o.seed;
    if (cfg.contains("init_seed")) mc.init_seed = cfg["init_seed"].get<std::uint64_t>();
    if (cfg.contains("shuffle_seed")) mc.shuffle_seed = cfg["shuffle_seed"].get<std::uint64_t>();
    if (test_count == 0) {
        if (preset == "iris") test_count = 30;
        else if (preset == "wine") test_count = 36;
        else test_count = ds.rows() / 5;
    }
    if (cfg.contains("test_count")) test_count = cfg["test_count"].get<std::size_t>();

    mlp::VerticalSchema schema;
    schema.rows = ds.rows();
    schema.cols = parse_split(split_arg, ds.features.cols());
    schema.label_provider = PartyId(0);
    schema.classes = static_cast<std::size_t>(ds.num_classes());
    if (mc.layer_sizes.empty() || mc.layer_sizes.front() != ds.features.cols())
        mc.layer_sizes = {ds.features.cols(), 16, 16, schema.classes};

    auto block_for = [&](int p) {
        mlp::LocalBlock blk;
        std::size_t start = 0;
        for (int q = 0; q < p; ++q) start += schema.cols[q];
        if (schema.cols[p] > 0) {
            Matrix b(schema.rows, schema.cols[p]);
            for (std::size_t r = 0; r < schema.rows; ++r)
                for (std::size_t c = 0; c < schema.cols[p]; ++c)
                    b(r, c) = ds.features(r, start + c);
            blk.features = std::move(b);
        }
        if (PartyId(p) == schema.label_provider) blk.labels = ds.labels;
        return blk;
    };

    SessionConfig sc = session_config(o, cfg);
    auto run_party = [&](Session& s) {
        const mlp::SharedDataset shared =
            mlp::ingest_vertical(s, schema, block_for(s.id().index), test_count, mc.shuffle_seed);
        mlp::TrainResult res = mlp::train(s, shared, mc);
        if (!save_dir.empty()) mlp::save_model(s, res.model, mc, save_dir);
        return res.metrics;
    };

    if (o.mode == "inprocess") {
        SessionTrio trio = make_inprocess_trio(sc, net_profile(o));
        std::array<std::vector<mlp::EpochMetrics>, 3> all;
        run3(trio, [&](Session& s) { all[s.id().index] = run_party(s); });
        print_metrics(all[0], o);
    } else {
        auto session = make_socket_session(o.party, sc, peer_endpoints(o), net_profile(o));
        auto metrics = run_party(*session);
        session->close_checkpoint();
        if (o.party == 0) print_metrics(metrics, o);
    }
    return 0;
}

int cmd_predict(const CommonOpts& o, const json& cfg, const std::string& model_dir,
                const std::string& input) {
    // features must already be in the model's input space (same
    // standardization the providers applied before training)
    Matrix x = mlp::load_matrix_csv(input);
    SessionConfig sc = session_config(o, cfg);

    auto run_party = [&](Session& s) {
        mlp::MlpConfig mc;
        mlp::SharedModel model = mlp::load_model(s, model_dir, mc);
        const AdditiveShare xs = share_secret(s, PartyId(0), s.id().index == 0 ? &x : nullptr,
                                              x.rows(), x.cols());
        return mlp::predict(s, model, xs, mc, PartyId(0));
    };

    std::vector<int> labels;
    if (o.mode == "inprocess") {
        SessionTrio trio = make_inprocess_trio(sc, net_profile(o));
        std::array<std::vector<int>, 3> all;
        run3(trio, [&](Session& s) { all[s.id().index] = run_party(s); });
        labels = all[0];
    } else {
        auto session = make_socket_session(o.party, sc, peer_endpoints(o), net_profile(o));
        labels = run_party(*session);
        session->close_checkpoint();
        if (o.party != 0) return 0;
    }
    json j = json::array();
    for (int l : labels) j.push_back(l);
    std::cout << j.dump() << std::endl;
    return 0;
}

// --- analyze -----------------------------------------------------------------------

int cmd_analyze(double lx, double rx, double lr, double rr, std::uint64_t trials,
                std::uint64_t seed) {
    using namespace secanalysis;
    const PriorInterval x{lx, rx};
    const PriorInterval alpha = alpha_prior_from_prg({lr, rr});
    const PriorInterval safe = safe_interval(x, alpha);
    const double th = theta(x, alpha);
    const double closed = non_narrowing_probability(x, alpha);
    const auto mc = monte_carlo_narrowing(x, alpha, trials, SamplingModel::uniform_masked_value,
                                          seed);
    const auto joint = monte_carlo_narrowing(x, alpha, trials, SamplingModel::joint_draw, seed);
    json j{{"theta", th},
           {"closed_form", closed},
           {"empirical", mc.fraction},
           {"ci95", {mc.ci_low, mc.ci_high}},
           {"empirical_joint", joint.fraction},
           {"safe_interval", {safe.low, safe.high}}};
    std::cout << j.dump() << std::endl;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-party replicated-sharing compute engine"};
    app.require_subcommand(1);

    CommonOpts common;

    // share
    auto* share_cmd = app.add_subcommand("share", "split a provider CSV block into PRSS1 files");
    std::string share_input, share_out = "block";
    share_cmd->add_option("--input", share_input, "CSV block")->required();
    share_cmd->add_option("--out-prefix", share_out, "output prefix");
    share_cmd->add_option("--seed", common.seed, "mask seed");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "run protocol benchmarks");
    add_common(bench_cmd, common);
    std::string bench_protocol;
    std::vector<std::size_t> bench_sizes;
    std::size_t bench_reps = 0;
    int bench_span = -1;
    bench_cmd->add_option("--protocol", bench_protocol, "matmul|hadamard|relu|softmax");
    bench_cmd->add_option("--sizes", bench_sizes, "square sizes");
    bench_cmd->add_option("--repetitions", bench_reps, "trials per size");
    bench_cmd->add_option("--span", bench_span, "exponent span x (delta in [-x, x])");

    // train
    auto* train_cmd = app.add_subcommand("train", "secure MLP training");
    add_common(train_cmd, common);
    std::string train_dataset, train_preset = "none", train_split, train_save;
    std::size_t train_test_count = 0;
    train_cmd->add_option("--dataset", train_dataset, "CSV with a 'label' column")->required();
    train_cmd->add_option("--preset", train_preset, "iris|wine|mnist|none");
    train_cmd->add_option("--split", train_split, "feature columns per provider, e.g. 2,1,1");
    train_cmd->add_option("--test-count", train_test_count, "held-out rows");
    train_cmd->add_option("--save-model", train_save, "checkpoint directory");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "secure inference");
    add_common(predict_cmd, common);
    std::string predict_model, predict_input;
    predict_cmd->add_option("--model", predict_model, "checkpoint directory")->required();
    predict_cmd->add_option("--input", predict_input, "feature CSV")->required();

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "range-inference analysis");
    double lx = 0, rx = 1, lr = 0, rr = 50;
    std::uint64_t trials = 1000000, an_seed = 1;
    analyze_cmd->add_option("--lx", lx, "prior low of x");
    analyze_cmd->add_option("--rx", rx, "prior high of x");
    analyze_cmd->add_option("--lr", lr, "PRG range low");
    analyze_cmd->add_option("--rr", rr, "PRG range high");
    analyze_cmd->add_option("--trials", trials, "Monte Carlo trials");
    analyze_cmd->add_option("--seed", an_seed, "Monte Carlo seed");

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "run one party as a socket endpoint");
    add_common(serve_cmd, common);
    std::string serve_program = "bench";
    bool serve_loop = false;
    std::string serve_dataset, serve_preset = "none", serve_model, serve_input;
    serve_cmd->add_option("--program", serve_program, "bench|train|predict");
    serve_cmd->add_flag("--loop", serve_loop, "keep serving sessions until killed");
    serve_cmd->add_option("--dataset", serve_dataset, "CSV for --program train");
    serve_cmd->add_option("--preset", serve_preset, "preset for --program train");
    serve_cmd->add_option("--model", serve_model, "checkpoint dir for --program predict");
    serve_cmd->add_option("--input", serve_input, "feature CSV for --program predict");

    CLI11_PARSE(app, argc, argv);

    try {
        const json cfg = load_config(common);
        if (share_cmd->parsed()) return cmd_share(share_input, share_out, common.seed);
        if (bench_cmd->parsed()) {
            json merged = cfg;
            if (!merged.contains("bench")) merged["bench"] = json::object();
            if (!bench_protocol.empty()) merged["bench"]["protocol"] = bench_protocol;
            if (!bench_sizes.empty()) merged["bench"]["sizes"] = bench_sizes;
            if (bench_reps) merged["bench"]["repetitions"] = bench_reps;
            if (bench_span >= 0) merged["bench"]["exponent_span"] = bench_span;
            return cmd_bench(common, merged);
        }
        if (train_cmd->parsed())
            return cmd_train(common, cfg, train_dataset, train_preset, train_split,
                             train_test_count, train_save);
        if (predict_cmd->parsed()) return cmd_predict(common, cfg, predict_model, predict_input);
        if (analyze_cmd->parsed()) return cmd_analyze(lx, rx, lr, rr, trials, an_seed);
        if (serve_cmd->parsed()) {
            common.mode = "socket";
            do {
                if (serve_program == "bench") {
                    cmd_bench(common, cfg);
                } else if (serve_program == "train") {
                    cmd_train(common, cfg, serve_dataset, serve_preset, "", 0, "");
                } else if (serve_program == "predict") {
                    cmd_predict(common, cfg, serve_model, serve_input);
                } else {
                    throw ConfigError("unknown --program " + serve_program);
                }
            } while (serve_loop);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
