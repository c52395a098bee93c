#include "triad/bench.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace triad {
namespace bench {

const char* protocol_name(Protocol p) {
    switch (p) {
        case Protocol::matmul: return "matmul";
        case Protocol::hadamard: return "hadamard";
        case Protocol::relu: return "relu";
        case Protocol::softmax: return "softmax";
    }
    return "?";
}

Protocol protocol_from_name(const std::string& name) {
    if (name == "matmul") return Protocol::matmul;
    if (name == "hadamard") return Protocol::hadamard;
    if (name == "relu") return Protocol::relu;
    if (name == "softmax") return Protocol::softmax;
    throw ConfigError("unknown protocol '" + name + "'");
}

void BenchSpec::validate() const {
    if (sizes.empty()) throw ConfigError("bench: sizes must be non-empty");
    if (repetitions == 0) throw ConfigError("bench: repetitions must be >= 1");
    if (exponent_span < 0) throw ConfigError("bench: exponent_span must be >= 0");
}

double mre(const Matrix& secure, const Matrix& plain) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < plain.size(); ++i) {
        if (plain.at(i) == 0.0) continue;
        sum += std::fabs(secure.at(i) - plain.at(i)) / std::fabs(plain.at(i));
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

namespace {

Matrix span_matrix(std::mt19937_64& rng, std::size_t n, int span) {
    std::uniform_real_distribution<double> mantissa(1.0, 10.0);
    std::uniform_int_distribution<int> expo(-span, span);
    Matrix out(n, n);
    for (double& v : out.data()) {
        const std::uint64_t bits = rng();
        v = mantissa(rng) * std::pow(10.0, expo(rng));
        if (bits & 1) v = -v;
    }
    return out;
}

/// Rows with centered spread beyond the bound are scaled down into softmax's
/// usable domain; softmax compares secure vs plaintext on this exact input.
void guard_softmax_rows(Matrix& m, double bound) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double mean = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) mean += m(r, c);
        mean /= static_cast<double>(m.cols());
        double spread = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c)
            spread = std::max(spread, std::fabs(m(r, c) - mean));
        if (spread > bound) {
            const double k = bound / spread;
            for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) *= k;
        }
    }
}

Matrix softmax_plain(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) sum += std::exp(x(r, c));
        for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = std::exp(x(r, c)) / sum;
    }
    return out;
}

} // namespace

std::uint64_t gather_total_bytes(Session& s, std::uint64_t invocation) {
    const std::uint64_t local = s.stats_for(invocation).bytes_total;
    auto scope = s.open(ProtocolTag::checkpoint, "stats_gather");
    const auto r0 = s.alloc_round();
    if (s.id().index != 0) s.send_u64(PartyId(0), r0, local);
    s.finish_round(r0);
    std::uint64_t total = local;
    if (s.id().index == 0) {
        total += s.recv_u64(PartyId(1), r0);
        total += s.recv_u64(PartyId(2), r0);
    }
    const auto r1 = s.alloc_round();
    if (s.id().index == 0) {
        s.send_u64(PartyId(1), r1, total);
        s.send_u64(PartyId(2), r1, total);
    }
    s.finish_round(r1);
    if (s.id().index != 0) total = s.recv_u64(PartyId(0), r1);
    return total;
}

std::vector<BenchRow> run_bench(Session& s, const BenchSpec& spec, std::uint64_t data_seed) {
    spec.validate();
    std::vector<BenchRow> rows;
    for (const std::size_t n : spec.sizes) {
        BenchRow row;
        row.protocol = protocol_name(spec.protocol);
        row.n = n;
        double ms_sum = 0.0, mre_sum = 0.0;
        for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
            std::mt19937_64 rng(data_seed + 7919 * n + rep);
            Matrix x = span_matrix(rng, n, spec.exponent_span);

            Matrix plain, secure;
            if (spec.protocol == Protocol::matmul || spec.protocol == Protocol::hadamard) {
                const Matrix y = span_matrix(rng, n, spec.exponent_span);
                const AdditiveShare xs =
                    share_secret(s, PartyId(0), s.id().index == 0 ? &x : nullptr, n, n);
                const AdditiveShare ys =
                    share_secret(s, PartyId(1), s.id().index == 1 ? &y : nullptr, n, n);
                const auto t0 = std::chrono::steady_clock::now();
                const AdditiveShare z =
                    mul(s, xs, ys,
                        spec.protocol == Protocol::matmul ? MulKind::matmul : MulKind::hadamard);
                ms_sum += std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
                const std::uint64_t inv = s.last_invocation();
                row.rounds = s.stats_for(inv).rounds;
                row.bytes = gather_total_bytes(s, inv);
                secure = reconstruct(s, z, "bench");
                plain = spec.protocol == Protocol::matmul ? matmul_plain(x, y) : hadamard(x, y);
            } else if (spec.protocol == Protocol::relu) {
                const AdditiveShare xs =
                    share_secret(s, PartyId(0), s.id().index == 0 ? &x : nullptr, n, n);
                const auto t0 = std::chrono::steady_clock::now();
                const ReluResult r = relu(s, xs);
                ms_sum += std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
                const std::uint64_t inv = s.last_invocation();
                row.rounds = s.stats_for(inv).rounds;
                row.bytes = gather_total_bytes(s, inv);
                secure = reconstruct(s, r.value, "bench");
                plain = x;
                for (double& v : plain.data()) v = v > 0.0 ? v : 0.0;
            } else {
                guard_softmax_rows(x, kSoftmaxRowBound);
                const AdditiveShare xs =
                    share_secret(s, PartyId(0), s.id().index == 0 ? &x : nullptr, n, n);
                const AdditiveShare narrow = reshare_narrow(s, xs, /*center=*/true);
                const auto t0 = std::chrono::steady_clock::now();
                const AdditiveShare y = softmax(s, narrow);
                ms_sum += std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
                const std::uint64_t inv = s.last_invocation();
                row.rounds = s.stats_for(inv).rounds;
                row.bytes = gather_total_bytes(s, inv);
                secure = reconstruct(s, y, "bench");
                plain = softmax_plain(x);
            }
            mre_sum += mre(secure, plain);
        }
        row.mean_ms = ms_sum / static_cast<double>(spec.repetitions);
        row.mre = mre_sum / static_cast<double>(spec.repetitions);
        rows.push_back(row);
    }
    return rows;
}

std::string to_json_line(const BenchRow& r) {
    std::ostringstream os;
    os << "{\"protocol\":\"" << r.protocol << "\",\"n\":" << r.n << ",\"mean_ms\":" << r.mean_ms
       << ",\"bytes\":" << r.bytes << ",\"bits\":" << r.bytes * 8 << ",\"rounds\":" << r.rounds
       << ",\"mre\":" << r.mre << "}";
    return os.str();
}

std::string csv_header() { return "protocol,n,mean_ms,bytes,bits,rounds,mre"; }

std::string to_csv_line(const BenchRow& r) {
    std::ostringstream os;
    os << r.protocol << ',' << r.n << ',' << r.mean_ms << ',' << r.bytes << ',' << r.bytes * 8
       << ',' << r.rounds << ',' << r.mre;
    return os.str();
}

} // namespace bench
} // namespace triad
