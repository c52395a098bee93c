#pragma once

#include <string>
#include <vector>

#include "triad/protocols.hpp"

namespace triad {
namespace bench {

enum class Protocol { matmul, hadamard, relu, softmax };

const char* protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& name);

/// Square n x n inputs with elements +/- a0.a1..a15 * 10^delta, delta an
/// integer uniform in [-exponent_span, exponent_span].
struct BenchSpec {
    Protocol protocol = Protocol::matmul;
    std::vector<std::size_t> sizes = {10, 20, 30, 40, 50};
    std::size_t repetitions = 100;
    int exponent_span = 0;

    void validate() const;
};

struct BenchRow {
    std::string protocol;
    std::size_t n = 0;
    double mean_ms = 0.0;
    std::uint64_t bytes = 0; // merged over parties, protocol invocation only
    std::uint64_t rounds = 0;
    double mre = 0.0;
};

/// Softmax rows whose centered spread exceeds this bound are rescaled to it
/// before sharing (softmax only accepts narrow sharings); the oracle is
/// evaluated on the same rescaled input.
constexpr double kSoftmaxRowBound = 6.0;

/// SPMD: every party calls this and obtains identical rows (local byte counts
/// are gathered to P0 and the totals broadcast back).
std::vector<BenchRow> run_bench(Session& s, const BenchSpec& spec, std::uint64_t data_seed);

/// Mean relative error, zero-plaintext elements excluded.
double mre(const Matrix& secure, const Matrix& plain);

std::string to_json_line(const BenchRow& r);
std::string csv_header();
std::string to_csv_line(const BenchRow& r);

/// Sum of the three parties' payload bytes for one invocation, known to all.
std::uint64_t gather_total_bytes(Session& s, std::uint64_t invocation);

} // namespace bench
} // namespace triad
