#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "triad/tensor.hpp"

namespace triad {

/// Party index in {0,1,2}; all index arithmetic is modulo 3.
struct PartyId {
    int index = 0;

    PartyId() = default;
    explicit PartyId(int i) : index(((i % 3) + 3) % 3) {}
    PartyId next() const { return PartyId(index + 1); }
    PartyId prev() const { return PartyId(index + 2); }
    bool operator==(const PartyId& o) const { return index == o.index; }
    bool operator!=(const PartyId& o) const { return index != o.index; }
};

/// Per-party PRSS state after setup. Party i holds seed_prev = s_i (shared
/// with party i-1) and seed_next = s_{i+1} (shared with party i+1). Every
/// protocol performs its draws on both seeds in a statically known order, so
/// counters stay pairwise synchronized without communication.
struct PartyContext {
    PartyId id;
    PrgSeed seed_prev; // s_i
    PrgSeed seed_next; // s_{i+1}
    RandomRange randomness_range; // masks and zero-sharings

    /// alpha_i = r_i - r_{i+1}; both seed counters advance by rows*cols.
    Matrix zero_share(std::size_t rows, std::size_t cols);
    /// Integer-valued variant; the three alphas cancel exactly.
    Matrix zero_share_integer(std::size_t rows, std::size_t cols, std::int64_t magnitude);
    /// Zero-sharing from an explicit range instead of randomness_range.
    Matrix zero_share_ranged(std::size_t rows, std::size_t cols, const RandomRange& range);
};

/// Additive replicated sharing: the secret is x0+x1+x2 and party i holds
/// (x_i, x_{i+1}) as (part_a, part_b). Across parties, part_b of P_i equals
/// part_a of P_{i+1} bit for bit.
struct AdditiveShare {
    PartyId owner;
    Matrix part_a;
    Matrix part_b;

    std::size_t rows() const { return part_a.rows(); }
    std::size_t cols() const { return part_a.cols(); }
};

/// Multiplicative replicated sharing: the secret is the Hadamard product of
/// the three parts. Parts are non-zero except where a zero-tolerant
/// conversion explicitly allowed a zero in part 2.
struct MultiplicativeShare {
    PartyId owner;
    Matrix part_a;
    Matrix part_b;

    std::size_t rows() const { return part_a.rows(); }
    std::size_t cols() const { return part_a.cols(); }
};

/// Test/debug view of all three parties' shares of one secret.
template <typename ShareT>
using ShareTrio = std::array<ShareT, 3>;

/// Sum of the three distinct parts in index order 0,1,2 (the fixed order all
/// reconstructing parties use, so results are bit-identical everywhere).
Matrix reconstruct_local(const ShareTrio<AdditiveShare>& t);
Matrix reconstruct_mul_local(const ShareTrio<MultiplicativeShare>& t);

/// Checks part_b of P_i == part_a of P_{i+1} bit for bit; throws IntegrityError.
template <typename ShareT>
void audit_replication(const ShareTrio<ShareT>& t) {
    for (int i = 0; i < 3; ++i) {
        if (!bit_equal(t[i].part_b, t[(i + 1) % 3].part_a))
            throw IntegrityError("replication mismatch between P" + std::to_string(i) +
                                 " and P" + std::to_string((i + 1) % 3));
    }
}

// --- share-at-rest file format (PRSS1) ---------------------------------------
//
// Header: magic "PRSS1", u8 party, u32 rows, u32 cols, u16 element bits (64),
// then row-major little-endian f64 for part_a, then part_b.

void save_share(const std::string& path, const AdditiveShare& share);
AdditiveShare load_share(const std::string& path);

/// Dealer-side split for the data-provider role: writes
/// <prefix>.p{0,1,2}.prss whose parts reconstruct to x. The payload sits in
/// part 0; masks come from a seeded zero-sharing over `range`.
void deal_share_files(const Matrix& x, const std::string& prefix, std::uint64_t seed,
                      const RandomRange& range);

} // namespace triad
