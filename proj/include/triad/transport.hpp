#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "triad/errors.hpp"

namespace triad {

/// Symmetric link shaping applied to all three links. bandwidth_bps == 0
/// means unlimited. Per-hop delay is rtt_ms/2 plus payload serialization time.
struct NetProfile {
    double rtt_ms = 0.0;
    double bandwidth_bps = 0.0;

    double hop_delay_ms(std::size_t payload_bytes) const {
        double d = rtt_ms / 2.0;
        if (bandwidth_bps > 0.0)
            d += static_cast<double>(payload_bytes) * 8.0 * 1000.0 / bandwidth_bps;
        return d;
    }
};

enum class ProtocolTag : std::uint16_t {
    setup = 1,
    shr = 2,
    rec = 3,
    mul = 4,
    add2mul = 5,
    mul2add = 6,
    relu = 7,
    softmax = 8,
    reshare = 9,
    checkpoint = 10,
};

const char* tag_name(ProtocolTag t);

/// Wire frame. Header layout (little-endian): magic "PMLP", u8 version=1,
/// u64 session_id, u16 protocol_tag, u16 round_index, u8 sender, u8 receiver,
/// u32 payload_len, then payload (multiples of 8 bytes, LE 64-bit reals).
struct Frame {
    std::uint64_t session_id = 0;
    std::uint16_t protocol_tag = 0;
    std::uint16_t round_index = 0;
    std::uint8_t sender = 0;
    std::uint8_t receiver = 0;
    std::vector<std::uint8_t> payload;

    static constexpr std::size_t kHeaderSize = 23;
    static constexpr std::uint8_t kVersion = 1;

    std::vector<std::uint8_t> serialize() const;
    /// Parses a header; returns payload_len. Throws FormatError on bad
    /// magic/version or payload_len not a multiple of 8.
    static std::uint32_t parse_header(const std::uint8_t* buf, Frame& out);
};

/// 64-bit FNV-1a over the payload; used by the frame log.
std::uint64_t payload_hash(const std::vector<std::uint8_t>& payload);

/// JSON-lines frame log sink, one header per line, payload by hash only.
/// dump() renders in the canonical order (invocation, round, sender,
/// receiver) so transcripts compare reproducibly across scheduler
/// interleavings.
class FrameLog {
public:
    void record(const Frame& f, std::uint64_t invocation);
    std::string dump() const;
    std::size_t count() const;
    /// Recomputes per-invocation byte/round totals from the log lines.
    struct ReplayEntry {
        std::uint64_t invocation;
        std::uint64_t bytes;
        std::uint16_t max_round;
        std::size_t frames;
    };
    static std::vector<ReplayEntry> replay(const std::string& json_lines);

private:
    struct Entry {
        std::uint64_t session, invocation, hash;
        std::uint16_t tag, round;
        std::uint8_t from, to;
        std::uint32_t len;
    };
    mutable std::mutex mu_;
    std::vector<Entry> entries_;
};

/// One party's view of the mesh. recv_raw matches frames per sender in FIFO
/// order; the blocking wait respects the shaped delivery time and the session
/// receive timeout.
class Transport {
public:
    virtual ~Transport() = default;

    virtual void send_raw(const Frame& f, std::uint64_t invocation) = 0;
    virtual Frame recv_raw(int from, double timeout_ms) = 0;
    /// Declares this party's sends for `round` of `invocation` complete.
    /// The in-process hub uses this for its round barrier; socket transports
    /// treat it as a no-op.
    virtual void round_done(std::uint64_t /*invocation*/, std::uint16_t /*round*/) {}
    virtual int party() const = 0;
};

namespace detail {

struct Delivered {
    Frame frame;
    std::chrono::steady_clock::time_point deliver_at;
};

/// Per-party inbox with per-sender FIFO queues.
class Mailbox {
public:
    void push(Frame f, std::chrono::steady_clock::time_point deliver_at);
    Frame pop(int from, double timeout_ms);
    void poison(const std::string& why);

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::array<std::deque<Delivered>, 3> queues_;
    std::string poison_;
};

} // namespace detail

/// Shared state for the three in-process transports: mailboxes, the shaping
/// profile, the frame log, and the round-barrier monitor.
class InprocessHub {
public:
    explicit InprocessHub(NetProfile profile = {}, FrameLog* log = nullptr);

    std::unique_ptr<Transport> endpoint(int party);
    void poison(const std::string& why);

    /// Round-barrier safety: no frame of round k+1 enters any mailbox before
    /// every party has completed its round-k sends for that invocation.
    void note_round_done(std::uint64_t invocation, int party, std::uint16_t round);
    void barrier_send(const Frame& f, std::uint64_t invocation);

private:
    friend class InprocessEndpoint;
    NetProfile profile_;
    FrameLog* log_;
    std::array<detail::Mailbox, 3> boxes_;
    std::mutex barrier_mu_;
    std::condition_variable barrier_cv_;
    // per invocation: per-party highest round declared done (-1 none)
    struct BarrierState {
        std::array<int, 3> done = {-1, -1, -1};
        int max_round_sent = -1;
    };
    std::unordered_map<std::uint64_t, BarrierState> barrier_;
    bool poisoned_ = false;
};

/// TCP mesh transport: party i listens on endpoints[i]; for each pair (i,j)
/// with i<j, j connects to i. Frames are shaped on the receive path.
class SocketTransport : public Transport {
public:
    SocketTransport(int party, const std::array<std::string, 3>& endpoints, NetProfile profile,
                    double connect_timeout_ms = 10000, FrameLog* log = nullptr);
    ~SocketTransport() override;

    void send_raw(const Frame& f, std::uint64_t invocation) override;
    Frame recv_raw(int from, double timeout_ms) override;
    int party() const override { return party_; }

private:
    void reader_loop(int peer, int fd);

    int party_;
    NetProfile profile_;
    FrameLog* log_;
    std::array<int, 3> fds_ = {-1, -1, -1};
    std::array<std::mutex, 3> write_mu_;
    detail::Mailbox inbox_;
    std::vector<std::thread> readers_;
    std::atomic<bool> closing_{false};
};

/// Parses "host:port"; throws ConfigError.
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& ep);

} // namespace triad
