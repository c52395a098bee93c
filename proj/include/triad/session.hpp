#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "triad/sharing.hpp"
#include "triad/transport.hpp"

namespace triad {

/// Per-invocation communication accounting. bytes_total covers matrix payload
/// only (frame headers excluded) and, once merged across parties, matches the
/// closed-form per-protocol cost exactly.
struct RoundStats {
    std::string protocol_name;
    std::uint64_t invocation = 0;
    std::uint64_t rounds = 0;
    std::uint64_t bytes_total = 0;
    int element_bits = 64;

    std::uint64_t bits() const { return bytes_total * 8; }
};

/// Merge the same invocation's stats from the three parties (bytes summed,
/// rounds must agree).
RoundStats merge_stats(const std::array<RoundStats, 3>& per_party);

struct SessionConfig {
    std::array<std::uint64_t, 3> seeds = {1, 2, 3};
    RandomRange randomness_range = RandomRange::symmetric(1048576.0); // +/- 2^20
    /// Masks used inside softmax sub-protocols; kept O(1) so the huge dynamic
    /// range of exponentiated parts is not swamped by mask products.
    RandomRange softmax_mask_range = RandomRange::symmetric(0.5);
    /// Zero-sharing range for the narrowing reshare ahead of softmax.
    RandomRange softmax_reshare_range = RandomRange::symmetric(4.0);
    /// Reject exponentiation when any local part exceeds this magnitude.
    double exp_guard = 700.0;
    /// Integer mask magnitude on the sign-conversion path (exact arithmetic).
    std::int64_t sign_mask_magnitude = 16;
    double recv_timeout_ms = 30000.0;
    bool audit_reveals = false;

    std::uint64_t session_id() const;
};

/// Targets of an audited reconstruction.
struct RevealRecord {
    std::string label;
    int target; // -1 = all parties
};

/// One party's engine: PRSS state, transport, invocation/round bookkeeping,
/// stats and reveal audit. Single-threaded use by that party only.
class Session {
public:
    Session(SessionConfig cfg, PartyContext ctx, std::unique_ptr<Transport> transport);

    PartyId id() const { return ctx_.id; }
    PartyContext& ctx() { return ctx_; }
    const SessionConfig& config() const { return cfg_; }

    // --- invocation scoping ---
    // Top-level protocols open a scope; nested sub-protocols share the parent
    // scope and its round cursor, so e.g. the two parallel Shr calls inside
    // Mul2Add land on one round index.
    struct Scope {
        Session* s = nullptr;
        bool top = false;
        ~Scope();
        Scope(Scope&& o) noexcept : s(o.s), top(o.top) { o.s = nullptr; }
        Scope(Session* s_, bool top_) : s(s_), top(top_) {}
        Scope(const Scope&) = delete;
    };
    Scope open(ProtocolTag tag, const char* name);
    /// Allocates the next round index of the current invocation.
    std::uint16_t alloc_round();
    /// Declares this party's sends for `round` complete (round barrier).
    void finish_round(std::uint16_t round);

    void send_matrix(PartyId to, std::uint16_t round, const Matrix& m);
    Matrix recv_matrix(PartyId from, std::uint16_t round, std::size_t rows, std::size_t cols);
    void send_u64(PartyId to, std::uint16_t round, std::uint64_t v);
    std::uint64_t recv_u64(PartyId from, std::uint16_t round);

    /// Matrix drawn from the pairwise seed named s_k (k = seed owner index);
    /// only the two holders of that seed may call this.
    enum class DrawKind { uniform, mulshare, integer };
    Matrix draw_pair_seed(int seed_name, std::size_t rows, std::size_t cols, DrawKind kind,
                          const RandomRange& range, std::int64_t int_magnitude = 0);
    bool holds_seed(int seed_name) const;

    // --- stats / audit ---
    const std::vector<RoundStats>& stats() const { return stats_; }
    RoundStats
    stats_for(std::uint64_t invocation) const;
    std::uint64_t last_invocation() const { return invocation_counter_; }
    std::uint64_t total_bytes() const;
    std::uint64_t total_rounds() const;
    void note_reveal(const std::string& label, int target);
    const std::vector<RevealRecord>& reveals() const { return reveals_; }

    /// End-of-session seed-counter checkpoint with both neighbours; throws
    /// IntegrityError on desynchronization. One extra round.
    void close_checkpoint();

private:
    friend struct Scope;
    SessionConfig cfg_;
    PartyContext ctx_;
    std::unique_ptr<Transport> transport_;
    std::uint64_t session_id_;

    int scope_depth_ = 0;
    std::uint64_t invocation_counter_ = 0;
    ProtocolTag cur_tag_ = ProtocolTag::setup;
    std::string cur_name_;
    std::uint16_t round_cursor_ = 0;
    std::uint64_t cur_bytes_ = 0;

    std::vector<RoundStats> stats_;
    std::vector<RevealRecord> reveals_;
};

/// The three sessions of one logical run plus shared infrastructure.
struct SessionTrio {
    std::array<std::unique_ptr<Session>, 3> party;
    std::shared_ptr<InprocessHub> hub; // null in socket mode
    std::shared_ptr<FrameLog> log;
};

/// In-process trio: transports wired through a hub, PRSS setup executed.
SessionTrio make_inprocess_trio(const SessionConfig& cfg, NetProfile profile = {},
                                bool with_log = false);

/// One socket-mode party session (PRSS setup included). Blocks until the mesh
/// is connected.
std::unique_ptr<Session> make_socket_session(int party, const SessionConfig& cfg,
                                             const std::array<std::string, 3>& endpoints,
                                             NetProfile profile = {}, FrameLog* log = nullptr);

/// Runs fn concurrently as each of the three parties; rethrows the first
/// failure after poisoning the hub so no party blocks forever.
void run3(SessionTrio& trio, const std::function<void(Session&)>& fn);

/// Per-party results variant.
template <typename T>
std::array<T, 3> run3_collect(SessionTrio& trio, const std::function<T(Session&)>& fn) {
    std::array<std::optional<T>, 3> slots;
    run3(trio, [&](Session& s) { slots[s.id().index].emplace(fn(s)); });
    return {std::move(*slots[0]), std::move(*slots[1]), std::move(*slots[2])};
}

} // namespace triad
