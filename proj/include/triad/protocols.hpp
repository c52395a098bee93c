#pragma once

#include <optional>

#include "triad/session.hpp"

namespace triad {

/// Mask source for a protocol's zero-sharings. Integer masks cancel exactly
/// in floating point; the sign-conversion path depends on that.
struct MaskSpec {
    enum class Kind { ranged, integer } kind = Kind::ranged;
    RandomRange range;
    std::int64_t magnitude = 16;

    static MaskSpec ranged(const RandomRange& r) { return {Kind::ranged, r, 0}; }
    static MaskSpec integer(std::int64_t mag) { return {Kind::integer, {}, mag}; }
};

Matrix draw_zero_mask(Session& s, std::size_t rows, std::size_t cols, const MaskSpec& mask);

// --- sharing and reconstruction -------------------------------------------------

/// Shr_owner(x): the owner supplies x, everyone else passes nullptr and the
/// shape. One round, three output-shaped messages.
AdditiveShare share_secret(Session& s, PartyId owner, const Matrix* x, std::size_t rows,
                           std::size_t cols, const std::optional<MaskSpec>& mask = {});

/// Rec: every party learns the secret (fixed summation order 0,1,2; all
/// parties obtain bit-identical plaintext). Three messages, one round.
Matrix reconstruct(Session& s, const AdditiveShare& sh, const char* audit_label = "rec");

/// Rec_target: only `target` learns the secret (P_{target+2} sends one
/// message). Returns a value only at the target.
std::optional<Matrix> reconstruct_to(Session& s, const AdditiveShare& sh, PartyId target,
                                     const char* audit_label = "rec");

/// Rec of a multiplicative sharing (fixed multiplication order 0,1,2).
/// Throws IntegrityError if any part contains a zero unless zero_tolerant.
Matrix reconstruct_mul(Session& s, const MultiplicativeShare& sh, bool zero_tolerant = false,
                       const char* audit_label = "rec_mul");

// --- linear (local) operations ---------------------------------------------------

AdditiveShare add_shares(Session& s, const AdditiveShare& a, const AdditiveShare& b);
AdditiveShare sub_shares(Session& s, const AdditiveShare& a, const AdditiveShare& b);
AdditiveShare mul_public(Session& s, const AdditiveShare& a, double c);
AdditiveShare mul_public(Session& s, const AdditiveShare& a, const Matrix& c);
/// a*x + b on the sharing (b is absorbed into part 0).
AdditiveShare affine_public(Session& s, const AdditiveShare& x, double a, double b);
/// Broadcast-add a shared 1 x cols row vector to every row.
AdditiveShare add_row_broadcast(Session& s, const AdditiveShare& a, const AdditiveShare& row);
/// Row-sum broadcast / row centering / transpose, applied part-wise (linear).
AdditiveShare rowsum_broadcast_shares(Session& s, const AdditiveShare& a);
AdditiveShare transpose_shares(Session& s, const AdditiveShare& a);

// --- multiplication ---------------------------------------------------------------

enum class MulKind { scalar, hadamard, matmul };

/// z_i = x_i * (y_i + y_{i+1}) + x_{i+1} * y_i + alpha_i, sent to P_{i-1}.
/// One round, three output-shaped messages.
AdditiveShare mul(Session& s, const AdditiveShare& a, const AdditiveShare& b, MulKind kind,
                  const std::optional<MaskSpec>& mask = {});

// --- share conversion ---------------------------------------------------------------

struct Add2MulOptions {
    bool zero_tolerant = false;
    std::optional<MaskSpec> mask;
    /// Test hook: force the PRG-drawn parts.
    const Matrix* forced_part0 = nullptr;
    const Matrix* forced_part1 = nullptr;
};

/// Two rounds, 7 output-shaped messages: Shr_0(t) plus the fused
/// Hadamard-and-reveal of part 2 to P1 and P2.
MultiplicativeShare add2mul(Session& s, const AdditiveShare& a, const Add2MulOptions& opt = {});

struct Mul2AddOptions {
    std::optional<MaskSpec> mask;
};

/// Two rounds, 9 messages: Shr_0(x0*x1) and Shr_2(x2) in parallel, then one
/// secure Hadamard.
AdditiveShare mul2add(Session& s, const MultiplicativeShare& m, const Mul2AddOptions& opt = {});

// --- non-linear -----------------------------------------------------------------------

struct ReluResult {
    AdditiveShare deriv; // reconstructs to {0,1}, 1 where x >= 0
    AdditiveShare value; // reconstructs to max(0, x)
};

/// Five rounds, 19 output-shaped messages. The derivative path uses integer
/// masks so the reconstructed derivative is exactly 0 or 1.
ReluResult relu(Session& s, const AdditiveShare& a);

/// Row-wise softmax, six rounds, 25 output-shaped messages. Every local part
/// must satisfy |part| <= exp_guard; callers narrow wide sharings with
/// reshare_narrow first.
AdditiveShare softmax(Session& s, const AdditiveShare& a);

/// Produces a fresh sharing of the same secret whose parts are
/// secret +/- O(range): part 1 and part 2 become pairwise-seed draws and
/// P1 sends the compensating part-0 payload to P0 and P2. One round, two
/// messages. With center_rows, each row of the secret is mean-centered first
/// (softmax is invariant under that shift).
AdditiveShare reshare_narrow(Session& s, const AdditiveShare& a, bool center = false,
                             const std::optional<RandomRange>& range = {});

} // namespace triad
