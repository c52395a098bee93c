#include "triad/session.hpp"

#include <cstring>
#include <future>
#include <thread>

namespace triad {

namespace {

std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

std::vector<std::uint8_t> pack_doubles(const Matrix& m) {
    std::vector<std::uint8_t> out(m.size() * 8);
    static_assert(sizeof(double) == 8);
    std::memcpy(out.data(), m.data().data(), out.size());
    return out;
}

} // namespace

std::uint64_t SessionConfig::session_id() const {
    return mix(seeds[0] + mix(seeds[1] + mix(seeds[2] + 0x5851f42d4c957f2dULL)));
}

RoundStats merge_stats(const std::array<RoundStats, 3>& per_party) {
    RoundStats out = per_party[0];
    for (int i = 1; i < 3; ++i) {
        if (per_party[i].invocation != out.invocation ||
            per_party[i].protocol_name != out.protocol_name)
            throw IntegrityError("stats merge: invocation mismatch");
        if (per_party[i].rounds != out.rounds)
            throw IntegrityError("stats merge: round count disagreement");
        out.bytes_total += per_party[i].bytes_total;
    }
    return out;
}

Session::Session(SessionConfig cfg, PartyContext ctx, std::unique_ptr<Transport> transport)
    : cfg_(std::move(cfg)), ctx_(std::move(ctx)), transport_(std::move(transport)),
      session_id_(cfg_.session_id()) {}

Session::Scope::~Scope() {
    if (!s) return;
    s->scope_depth_--;
    if (top) {
        RoundStats st;
        st.protocol_name = s->cur_name_;
        st.invocation = s->invocation_counter_;
        st.rounds = s->round_cursor_;
        st.bytes_total = s->cur_bytes_;
        s->stats_.push_back(std::move(st));
    }
}

Session::Scope Session::open(ProtocolTag tag, const char* name) {
    const bool top = (scope_depth_ == 0);
    scope_depth_++;
    if (top) {
        invocation_counter_++;
        cur_tag_ = tag;
        cur_name_ = name;
        round_cursor_ = 0;
        cur_bytes_ = 0;
    }
    return Scope(this, top);
}

std::uint16_t Session::alloc_round() { return round_cursor_++; }

void Session::finish_round(std::uint16_t round) {
    transport_->round_done(invocation_counter_, round);
}

void Session::send_matrix(PartyId to, std::uint16_t round, const Matrix& m) {
    Frame f;
    f.session_id = session_id_;
    f.protocol_tag = static_cast<std::uint16_t>(cur_tag_);
    f.round_index = round;
    f.sender = static_cast<std::uint8_t>(ctx_.id.index);
    f.receiver = static_cast<std::uint8_t>(to.index);
    f.payload = pack_doubles(m);
    cur_bytes_ += f.payload.size();
    transport_->send_raw(f, invocation_counter_);
}

Matrix Session::recv_matrix(PartyId from, std::uint16_t round, std::size_t rows,
                            std::size_t cols) {
    Frame f = transport_->recv_raw(from.index, cfg_.recv_timeout_ms);
    if (f.session_id != session_id_) throw ProtocolError("frame from foreign session");
    if (f.protocol_tag != static_cast<std::uint16_t>(cur_tag_))
        throw ProtocolError(std::string("unexpected protocol tag in ") + cur_name_);
    if (f.round_index != round)
        throw ProtocolError("round mismatch: got " + std::to_string(f.round_index) +
                            ", want " + std::to_string(round));
    if (f.payload.size() != rows * cols * 8)
        throw ProtocolError("payload size mismatch in " + cur_name_);
    Matrix m(rows, cols);
    std::memcpy(m.data().data(), f.payload.data(), f.payload.size());
    return m;
}

void Session::send_u64(PartyId to, std::uint16_t round, std::uint64_t v) {
    Frame f;
    f.session_id = session_id_;
    f.protocol_tag = static_cast<std::uint16_t>(cur_tag_);
    f.round_index = round;
    f.sender = static_cast<std::uint8_t>(ctx_.id.index);
    f.receiver = static_cast<std::uint8_t>(to.index);
    f.payload.resize(8);
    std::memcpy(f.payload.data(), &v, 8);
    cur_bytes_ += 8;
    transport_->send_raw(f, invocation_counter_);
}

std::uint64_t Session::recv_u64(PartyId from, std::uint16_t round) {
    Frame f = transport_->recv_raw(from.index, cfg_.recv_timeout_ms);
    if (f.round_index != round || f.payload.size() != 8)
        throw ProtocolError("bad control frame");
    std::uint64_t v;
    std::memcpy(&v, f.payload.data(), 8);
    return v;
}

bool Session::holds_seed(int seed_name) const {
    return seed_name == ctx_.id.index || seed_name == ctx_.id.next().index;
}

Matrix Session::draw_pair_seed(int seed_name, std::size_t rows, std::size_t cols, DrawKind kind,
                               const RandomRange& range, std::int64_t int_magnitude) {
    PrgSeed* seed = nullptr;
    if (seed_name == ctx_.id.index)
        seed = &ctx_.seed_prev;
    else if (seed_name == ctx_.id.next().index)
        seed = &ctx_.seed_next;
    else
        throw ProtocolError("P" + std::to_string(ctx_.id.index) + " does not hold seed s" +
                            std::to_string(seed_name));
    switch (kind) {
        case DrawKind::uniform: return prg_draw(*seed, rows, cols, range);
        case DrawKind::mulshare: return prg_draw_mulshare(*seed, rows, cols);
        case DrawKind::integer: return prg_draw_integer(*seed, rows, cols, int_magnitude);
    }
    throw ProtocolError("bad draw kind");
}

RoundStats Session::stats_for(std::uint64_t invocation) const {
    for (const auto& st : stats_)
        if (st.invocation == invocation) return st;
    throw ProtocolError("no stats for invocation " + std::to_string(invocation));
}

std::uint64_t Session::total_bytes() const {
    std::uint64_t b = 0;
    for (const auto& st : stats_) b += st.bytes_total;
    return b;
}

std::uint64_t Session::total_rounds() const {
    std::uint64_t r = 0;
    for (const auto& st : stats_) r += st.rounds;
    return r;
}

void Session::note_reveal(const std::string& label, int target) {
    if (cfg_.audit_reveals) reveals_.push_back({label, target});
}

void Session::close_checkpoint() {
    auto scope = open(ProtocolTag::checkpoint, "checkpoint");
    const auto r = alloc_round();
    // seed s_i lives on P_i (seed_prev) and P_{i-1} (seed_next)
    send_u64(ctx_.id.prev(), r, ctx_.seed_prev.counter);
    send_u64(ctx_.id.next(), r, ctx_.seed_next.counter);
    finish_round(r);
    const std::uint64_t from_next = recv_u64(ctx_.id.next(), r);  // their s_{i+1} view
    const std::uint64_t from_prev = recv_u64(ctx_.id.prev(), r);  // their s_i view
    if (from_next != ctx_.seed_next.counter)
        throw IntegrityError("seed counter desync on s" + std::to_string(ctx_.id.next().index));
    if (from_prev != ctx_.seed_prev.counter)
        throw IntegrityError("seed counter desync on s" + std::to_string(ctx_.id.index));
}

namespace {

/// Cyclic seed exchange: P_i keeps its own seed as s_i and receives s_{i+1}.
void run_setup(Session& s, std::uint64_t own_seed) {
    auto scope = s.open(ProtocolTag::setup, "setup");
    const auto r = s.alloc_round();
    s.send_u64(s.id().prev(), r, own_seed);
    s.finish_round(r);
    const std::uint64_t next_seed = s.recv_u64(s.id().next(), r);
    s.ctx().seed_prev = PrgSeed{own_seed, 0};
    s.ctx().seed_next = PrgSeed{next_seed, 0};
}

} // namespace

SessionTrio make_inprocess_trio(const SessionConfig& cfg, NetProfile profile, bool with_log) {
    SessionTrio trio;
    if (with_log) trio.log = std::make_shared<FrameLog>();
    trio.hub = std::make_shared<InprocessHub>(profile, trio.log.get());
    for (int i = 0; i < 3; ++i) {
        PartyContext ctx;
        ctx.id = PartyId(i);
        ctx.randomness_range = cfg.randomness_range;
        trio.party[i] = std::make_unique<Session>(cfg, ctx, trio.hub->endpoint(i));
    }
    run3(trio, [&](Session& s) { run_setup(s, cfg.seeds[s.id().index]); });
    return trio;
}

std::unique_ptr<Session> make_socket_session(int party, const SessionConfig& cfg,
                                             const std::array<std::string, 3>& endpoints,
                                             NetProfile profile, FrameLog* log) {
    PartyContext ctx;
    ctx.id = PartyId(party);
    ctx.randomness_range = cfg.randomness_range;
    auto transport = std::make_unique<SocketTransport>(party, endpoints, profile, 10000, log);
    auto session = std::make_unique<Session>(cfg, ctx, std::move(transport));
    run_setup(*session, cfg.seeds[party]);
    return session;
}

void run3(SessionTrio& trio, const std::function<void(Session&)>& fn) {
    std::array<std::exception_ptr, 3> errors{};
    std::array<std::thread, 3> threads;
    for (int i = 0; i < 3; ++i) {
        threads[i] = std::thread([&, i] {
            try {
                fn(*trio.party[i]);
            } catch (...) {
                errors[i] = std::current_exception();
                if (trio.hub) trio.hub->poison("P" + std::to_string(i) + " failed");
            }
        });
    }
    for (auto& t : threads) t.join();
    for (int i = 0; i < 3; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]);
}

} // namespace triad
