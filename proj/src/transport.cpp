#include "triad/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <sstream>
#include <tuple>

namespace triad {

const char* tag_name(ProtocolTag t) {
    switch (t) {
        case ProtocolTag::setup: return "setup";
        case ProtocolTag::shr: return "shr";
        case ProtocolTag::rec: return "rec";
        case ProtocolTag::mul: return "mul";
        case ProtocolTag::add2mul: return "add2mul";
        case ProtocolTag::mul2add: return "mul2add";
        case ProtocolTag::relu: return "relu";
        case ProtocolTag::softmax: return "softmax";
        case ProtocolTag::reshare: return "reshare";
        case ProtocolTag::checkpoint: return "checkpoint";
    }
    return "?";
}

namespace {

constexpr char kMagic[4] = {'P', 'M', 'L', 'P'};

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v & 0xff));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

} // namespace

std::vector<std::uint8_t> Frame::serialize() const {
    std::vector<std::uint8_t> b;
    b.reserve(kHeaderSize + payload.size());
    b.insert(b.end(), kMagic, kMagic + 4);
    b.push_back(kVersion);
    put_u64(b, session_id);
    put_u16(b, protocol_tag);
    put_u16(b, round_index);
    b.push_back(sender);
    b.push_back(receiver);
    put_u32(b, static_cast<std::uint32_t>(payload.size()));
    b.insert(b.end(), payload.begin(), payload.end());
    return b;
}

std::uint32_t Frame::parse_header(const std::uint8_t* buf, Frame& out) {
    if (std::memcmp(buf, kMagic, 4) != 0) throw FormatError("frame: bad magic");
    if (buf[4] != kVersion)
        throw FormatError("frame: version mismatch (got " + std::to_string(buf[4]) + ")");
    out.session_id = get_u64(buf + 5);
    out.protocol_tag = get_u16(buf + 13);
    out.round_index = get_u16(buf + 15);
    out.sender = buf[17];
    out.receiver = buf[18];
    const std::uint32_t len = get_u32(buf + 19);
    if (len % 8 != 0) throw FormatError("frame: payload_len not a multiple of 8");
    return len;
}

std::uint64_t payload_hash(const std::vector<std::uint8_t>& payload) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : payload) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void FrameLog::record(const Frame& f, std::uint64_t invocation) {
    Entry e{f.session_id,     invocation, payload_hash(f.payload),          f.protocol_tag,
            f.round_index,    f.sender,   f.receiver,
            static_cast<std::uint32_t>(f.payload.size())};
    std::lock_guard<std::mutex> lk(mu_);
    entries_.push_back(e);
}

std::string FrameLog::dump() const {
    std::vector<Entry> sorted;
    {
        std::lock_guard<std::mutex> lk(mu_);
        sorted = entries_;
    }
    // parallel sub-protocols can put two frames on one (invocation, round,
    // from, to) key; the hash completes a canonical total order
    std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
        return std::tie(a.invocation, a.round, a.from, a.to, a.tag, a.len, a.hash) <
               std::tie(b.invocation, b.round, b.from, b.to, b.tag, b.len, b.hash);
    });
    std::ostringstream os;
    for (const auto& e : sorted) {
        os << "{\"session\":" << e.session << ",\"invocation\":" << e.invocation
           << ",\"tag\":" << e.tag << ",\"round\":" << e.round << ",\"from\":" << int(e.from)
           << ",\"to\":" << int(e.to) << ",\"len\":" << e.len << ",\"hash\":\"" << std::hex
           << e.hash << std::dec << "\"}\n";
    }
    return os.str();
}

std::size_t FrameLog::count() const {
    std::lock_guard<std::mutex> lk(mu_);
    return entries_.size();
}

namespace {

// minimal field scanner for our own fixed log format
std::uint64_t scan_u64(const std::string& line, const std::string& key) {
    auto pos = line.find("\"" + key + "\":");
    if (pos == std::string::npos) throw FormatError("frame log: missing " + key);
    pos += key.size() + 3;
    return std::strtoull(line.c_str() + pos, nullptr, 10);
}

} // namespace

std::vector<FrameLog::ReplayEntry> FrameLog::replay(const std::string& json_lines) {
    std::vector<ReplayEntry> out;
    std::istringstream is(json_lines);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const std::uint64_t inv = scan_u64(line, "invocation");
        const std::uint64_t len = scan_u64(line, "len");
        const std::uint16_t round = static_cast<std::uint16_t>(scan_u64(line, "round"));
        auto it = std::find_if(out.rbegin(), out.rend(),
                               [&](const ReplayEntry& e) { return e.invocation == inv; });
        if (it == out.rend()) {
            out.push_back({inv, len, round, 1});
        } else {
            it->bytes += len;
            it->max_round = std::max(it->max_round, round);
            it->frames += 1;
        }
    }
    return out;
}

// --- mailbox -------------------------------------------------------------------

namespace detail {

void Mailbox::push(Frame f, std::chrono::steady_clock::time_point deliver_at) {
    {
        std::lock_guard<std::mutex> lk(mu_);
        queues_[f.sender].push_back({std::move(f), deliver_at});
    }
    cv_.notify_all();
}

Frame Mailbox::pop(int from, double timeout_ms) {
    std::unique_lock<std::mutex> lk(mu_);
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double, std::milli>(timeout_ms));
    for (;;) {
        auto& q = queues_[from];
        if (!q.empty()) {
            // already-delivered frames outrank poisoning: a clean disconnect
            // after the peer's last send must not lose data
            const auto now = std::chrono::steady_clock::now();
            if (q.front().deliver_at <= now) {
                Frame f = std::move(q.front().frame);
                q.pop_front();
                return f;
            }
            cv_.wait_until(lk, std::min(q.front().deliver_at, deadline));
        } else {
            if (!poison_.empty()) throw SessionError(poison_);
            if (cv_.wait_until(lk, deadline) == std::cv_status::timeout &&
                std::chrono::steady_clock::now() >= deadline)
                throw SessionError("receive timeout waiting for P" + std::to_string(from));
        }
        if (std::chrono::steady_clock::now() >= deadline && queues_[from].empty())
            throw SessionError("receive timeout waiting for P" + std::to_string(from));
    }
}

void Mailbox::poison(const std::string& why) {
    {
        std::lock_guard<std::mutex> lk(mu_);
        poison_ = why;
    }
    cv_.notify_all();
}

} // namespace detail

// --- in-process hub --------------------------------------------------------------

class InprocessEndpoint : public Transport {
public:
    InprocessEndpoint(InprocessHub& hub, int party) : hub_(hub), party_(party) {}

    void send_raw(const Frame& f, std::uint64_t invocation) override {
        hub_.barrier_send(f, invocation);
    }

    Frame recv_raw(int from, double timeout_ms) override {
        return hub_.boxes_[party_].pop(from, timeout_ms);
    }

    void round_done(std::uint64_t invocation, std::uint16_t round) override {
        hub_.note_round_done(invocation, party_, round);
    }

    int party() const override { return party_; }

private:
    InprocessHub& hub_;
    int party_;
};

InprocessHub::InprocessHub(NetProfile profile, FrameLog* log) : profile_(profile), log_(log) {}

std::unique_ptr<Transport> InprocessHub::endpoint(int party) {
    return std::make_unique<InprocessEndpoint>(*this, party);
}

void InprocessHub::poison(const std::string& why) {
    {
        std::lock_guard<std::mutex> lk(barrier_mu_);
        poisoned_ = true;
    }
    barrier_cv_.notify_all();
    for (auto& b : boxes_) b.poison(why);
}

void InprocessHub::note_round_done(std::uint64_t invocation, int party, std::uint16_t round) {
    {
        std::lock_guard<std::mutex> lk(barrier_mu_);
        auto& st = barrier_[invocation];
        st.done[party] = std::max(st.done[party], static_cast<int>(round));
    }
    barrier_cv_.notify_all();
}

void InprocessHub::barrier_send(const Frame& f, std::uint64_t invocation) {
    {
        std::unique_lock<std::mutex> lk(barrier_mu_);
        auto& st = barrier_[invocation];
        if (f.round_index > 0) {
            const int need = static_cast<int>(f.round_index) - 1;
            barrier_cv_.wait(lk, [&] {
                if (poisoned_) return true;
                const auto& d = barrier_[invocation].done;
                return d[0] >= need && d[1] >= need && d[2] >= need;
            });
            if (poisoned_) throw SessionError("session aborted");
        }
        // round-barrier safety assert: layers close in order
        if (static_cast<int>(f.round_index) < st.max_round_sent)
            throw IntegrityError("round barrier violated: round " +
                                 std::to_string(f.round_index) + " after round " +
                                 std::to_string(st.max_round_sent));
        st.max_round_sent = std::max(st.max_round_sent, static_cast<int>(f.round_index));
    }
    if (log_) log_->record(f, invocation);
    const auto deliver_at = std::chrono::steady_clock::now() +
                            std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                std::chrono::duration<double, std::milli>(
                                    profile_.hop_delay_ms(f.payload.size())));
    boxes_[f.receiver].push(f, deliver_at);
}

// --- sockets ---------------------------------------------------------------------

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& ep) {
    const auto colon = ep.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= ep.size())
        throw ConfigError("endpoint must be host:port, got '" + ep + "'");
    const long port = std::strtol(ep.c_str() + colon + 1, nullptr, 10);
    if (port <= 0 || port > 65535) throw ConfigError("bad port in '" + ep + "'");
    return {ep.substr(0, colon), static_cast<std::uint16_t>(port)};
}

namespace {

void write_all(int fd, const std::uint8_t* p, std::size_t n) {
    while (n > 0) {
        const ssize_t w = ::send(fd, p, n, MSG_NOSIGNAL);
        if (w <= 0) throw SessionError("peer disconnect on write");
        p += w;
        n -= static_cast<std::size_t>(w);
    }
}

bool read_all(int fd, std::uint8_t* p, std::size_t n) {
    while (n > 0) {
        const ssize_t r = ::recv(fd, p, n, 0);
        if (r <= 0) return false;
        p += r;
        n -= static_cast<std::size_t>(r);
    }
    return true;
}

int listen_on(const std::string& host, std::uint16_t port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw SessionError("socket() failed");
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = host == "0.0.0.0" ? INADDR_ANY : inet_addr(host.c_str());
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw SessionError("bind failed on " + host + ":" + std::to_string(port));
    }
    if (::listen(fd, 4) != 0) {
        ::close(fd);
        throw SessionError("listen failed");
    }
    return fd;
}

int connect_to(const std::string& host, std::uint16_t port, double timeout_ms) {
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double, std::milli>(timeout_ms);
    for (;;) {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw SessionError("socket() failed");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        addr.sin_addr.s_addr = inet_addr(host.c_str());
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) return fd;
        ::close(fd);
        if (std::chrono::steady_clock::now() >= deadline)
            throw SessionError("connection failure to " + host + ":" + std::to_string(port));
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
}

} // namespace

SocketTransport::SocketTransport(int party, const std::array<std::string, 3>& endpoints,
                                 NetProfile profile, double connect_timeout_ms, FrameLog* log)
    : party_(party), profile_(profile), log_(log) {
    const auto [host, port] = parse_endpoint(endpoints[party]);
    int listener = -1;
    if (party < 2) listener = listen_on(host == "localhost" ? "127.0.0.1" : host, port);

    // pair rule: for i < j, party j connects to party i
    for (int peer = party + 1; peer < 3; ++peer) {
        sockaddr_in cli{};
        socklen_t len = sizeof(cli);
        const int fd = ::accept(listener, reinterpret_cast<sockaddr*>(&cli), &len);
        if (fd < 0) {
            ::close(listener);
            throw SessionError("accept failed");
        }
        std::uint8_t hello = 0;
        if (!read_all(fd, &hello, 1) || hello > 2) {
            ::close(fd);
            ::close(listener);
            throw SessionError("bad peer hello");
        }
        const int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        fds_[hello] = fd;
    }
    if (listener >= 0) ::close(listener);

    for (int peer = 0; peer < party; ++peer) {
        auto [phost, pport] = parse_endpoint(endpoints[peer]);
        if (phost == "localhost" || phost == "0.0.0.0") phost = "127.0.0.1";
        const int fd = connect_to(phost, pport, connect_timeout_ms);
        const std::uint8_t hello = static_cast<std::uint8_t>(party);
        write_all(fd, &hello, 1);
        const int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        fds_[peer] = fd;
    }

    for (int peer = 0; peer < 3; ++peer) {
        if (peer == party) continue;
        readers_.emplace_back([this, peer] { reader_loop(peer, fds_[peer]); });
    }
}

SocketTransport::~SocketTransport() {
    closing_ = true;
    for (int fd : fds_)
        if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
    for (auto& t : readers_)
        if (t.joinable()) t.join();
    for (int fd : fds_)
        if (fd >= 0) ::close(fd);
}

void SocketTransport::reader_loop(int peer, int fd) {
    try {
        std::uint8_t header[Frame::kHeaderSize];
        for (;;) {
            if (!read_all(fd, header, Frame::kHeaderSize)) {
                if (!closing_) inbox_.poison("peer disconnect from P" + std::to_string(peer));
                return;
            }
            Frame f;
            const std::uint32_t len = Frame::parse_header(header, f);
            f.payload.resize(len);
            if (len > 0 && !read_all(fd, f.payload.data(), len)) {
                inbox_.poison("peer disconnect mid-frame from P" + std::to_string(peer));
                return;
            }
            // shaping approximated at the receiver: the frame becomes visible
            // one hop delay after its bytes arrive
            const auto deliver_at =
                std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double, std::milli>(
                        profile_.hop_delay_ms(f.payload.size())));
            inbox_.push(std::move(f), deliver_at);
        }
    } catch (const std::exception& e) {
        inbox_.poison(e.what());
    }
}

void SocketTransport::send_raw(const Frame& f, std::uint64_t invocation) {
    if (log_) log_->record(f, invocation);
    const auto bytes = f.serialize();
    std::lock_guard<std::mutex> lk(write_mu_[f.receiver]);
    write_all(fds_[f.receiver], bytes.data(), bytes.size());
}

Frame SocketTransport::recv_raw(int from, double timeout_ms) {
    return inbox_.pop(from, timeout_ms);
}

} // namespace triad
