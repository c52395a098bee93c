#include "triad/protocols.hpp"

namespace triad {

namespace {

MaskSpec session_mask(Session& s, const std::optional<MaskSpec>& mask) {
    return mask ? *mask : MaskSpec::ranged(s.ctx().randomness_range);
}

/// Shr in two phases so parallel sharings can share one round index.
struct PendingShare {
    PartyId owner;
    Matrix my_part;
    std::size_t rows, cols;
    std::uint16_t round;
};

PendingShare shr_begin(Session& s, PartyId owner, const Matrix* x, std::size_t rows,
                       std::size_t cols, std::uint16_t round, const MaskSpec& mask) {
    if ((s.id() == owner) != (x != nullptr))
        throw ProtocolError("exactly the owner must supply the secret");
    if (x && (x->rows() != rows || x->cols() != cols))
        throw ProtocolError("share: shape disagreement");
    Matrix part = draw_zero_mask(s, rows, cols, mask);
    if (x) part = add(part, *x);
    s.send_matrix(s.id().prev(), round, part);
    return {owner, std::move(part), rows, cols, round};
}

AdditiveShare shr_finish(Session& s, PendingShare&& p) {
    AdditiveShare out;
    out.owner = s.id();
    out.part_a = std::move(p.my_part);
    out.part_b = s.recv_matrix(s.id().next(), p.round, p.rows, p.cols);
    return out;
}

Matrix mul_partial(const AdditiveShare& a, const AdditiveShare& b, MulKind kind) {
    switch (kind) {
        case MulKind::scalar:
        case MulKind::hadamard:
            return add(hadamard(a.part_a, add(b.part_a, b.part_b)),
                       hadamard(a.part_b, b.part_a));
        case MulKind::matmul:
            return add(matmul_plain(a.part_a, add(b.part_a, b.part_b)),
                       matmul_plain(a.part_b, b.part_a));
    }
    throw ProtocolError("bad mul kind");
}

/// One secure multiplication round on an already-open scope.
AdditiveShare mul_rounds(Session& s, const AdditiveShare& a, const AdditiveShare& b, MulKind kind,
                         std::uint16_t round, const MaskSpec& mask) {
    if (kind != MulKind::matmul && !a.part_a.same_shape(b.part_a))
        throw DimensionError("mul: shape mismatch");
    if (kind == MulKind::matmul && a.cols() != b.rows())
        throw DimensionError("matmul: inner dimension mismatch");
    const std::size_t out_rows = a.rows();
    const std::size_t out_cols = (kind == MulKind::matmul) ? b.cols() : a.cols();

    Matrix z = add(mul_partial(a, b, kind), draw_zero_mask(s, out_rows, out_cols, mask));
    s.send_matrix(s.id().prev(), round, z);
    s.finish_round(round);
    AdditiveShare out;
    out.owner = s.id();
    out.part_a = std::move(z); // own z_i
    out.part_b = s.recv_matrix(s.id().next(), round, out_rows, out_cols); // z_{i+1}
    return out;
}

} // namespace

Matrix draw_zero_mask(Session& s, std::size_t rows, std::size_t cols, const MaskSpec& mask) {
    if (mask.kind == MaskSpec::Kind::integer)
        return s.ctx().zero_share_integer(rows, cols, mask.magnitude);
    return s.ctx().zero_share_ranged(rows, cols, mask.range);
}

AdditiveShare share_secret(Session& s, PartyId owner, const Matrix* x, std::size_t rows,
                           std::size_t cols, const std::optional<MaskSpec>& mask) {
    auto scope = s.open(ProtocolTag::shr, "shr");
    const auto r = s.alloc_round();
    auto pending = shr_begin(s, owner, x, rows, cols, r, session_mask(s, mask));
    s.finish_round(r);
    return shr_finish(s, std::move(pending));
}

Matrix reconstruct(Session& s, const AdditiveShare& sh, const char* audit_label) {
    auto scope = s.open(ProtocolTag::rec, "rec");
    const auto r = s.alloc_round();
    s.send_matrix(s.id().next(), r, sh.part_a);
    s.finish_round(r);
    const Matrix missing = s.recv_matrix(s.id().prev(), r, sh.rows(), sh.cols());
    s.note_reveal(audit_label, -1);
    // index-ordered parts: part_a has index i, part_b index i+1, missing i+2
    const int i = s.id().index;
    const Matrix* parts[3];
    parts[i] = &sh.part_a;
    parts[(i + 1) % 3] = &sh.part_b;
    parts[(i + 2) % 3] = &missing;
    return add(add(*parts[0], *parts[1]), *parts[2]);
}

std::optional<Matrix> reconstruct_to(Session& s, const AdditiveShare& sh, PartyId target,
                                     const char* audit_label) {
    auto scope = s.open(ProtocolTag::rec, "rec");
    const auto r = s.alloc_round();
    // P_{target+2} holds the part the target lacks (index target+2) as part_a
    const PartyId sender = PartyId(target.index + 2);
    if (s.id() == sender) s.send_matrix(target, r, sh.part_a);
    s.finish_round(r);
    if (s.id() != target) return std::nullopt;
    const Matrix missing = s.recv_matrix(sender, r, sh.rows(), sh.cols());
    s.note_reveal(audit_label, target.index);
    const int i = s.id().index;
    const Matrix* parts[3];
    parts[i] = &sh.part_a;
    parts[(i + 1) % 3] = &sh.part_b;
    parts[(i + 2) % 3] = &missing;
    return add(add(*parts[0], *parts[1]), *parts[2]);
}

namespace {

void check_nonzero(const Matrix& m, const char* what) {
    for (double v : m.data())
        if (v == 0.0) throw IntegrityError(std::string(what) + " contains a zero element");
}

} // namespace

Matrix reconstruct_mul(Session& s, const MultiplicativeShare& sh, bool zero_tolerant,
                       const char* audit_label) {
    auto scope = s.open(ProtocolTag::rec, "rec_mul");
    if (!zero_tolerant) {
        check_nonzero(sh.part_a, "multiplicative share");
        check_nonzero(sh.part_b, "multiplicative share");
    }
    const auto r = s.alloc_round();
    s.send_matrix(s.id().next(), r, sh.part_a);
    s.finish_round(r);
    const Matrix missing = s.recv_matrix(s.id().prev(), r, sh.rows(), sh.cols());
    if (!zero_tolerant) check_nonzero(missing, "multiplicative share");
    s.note_reveal(audit_label, -1);
    const int i = s.id().index;
    const Matrix* parts[3];
    parts[i] = &sh.part_a;
    parts[(i + 1) % 3] = &sh.part_b;
    parts[(i + 2) % 3] = &missing;
    return hadamard(hadamard(*parts[0], *parts[1]), *parts[2]);
}

AdditiveShare add_shares(Session& s, const AdditiveShare& a, const AdditiveShare& b) {
    auto scope = s.open(ProtocolTag::shr, "add");
    if (!a.part_a.same_shape(b.part_a)) throw DimensionError("add: shape mismatch");
    return {s.id(), add(a.part_a, b.part_a), add(a.part_b, b.part_b)};
}

AdditiveShare sub_shares(Session& s, const AdditiveShare& a, const AdditiveShare& b) {
    auto scope = s.open(ProtocolTag::shr, "sub");
    if (!a.part_a.same_shape(b.part_a)) throw DimensionError("sub: shape mismatch");
    return {s.id(), sub(a.part_a, b.part_a), sub(a.part_b, b.part_b)};
}

AdditiveShare mul_public(Session& s, const AdditiveShare& a, double c) {
    auto scope = s.open(ProtocolTag::shr, "mul_public");
    return {s.id(), scale(a.part_a, c), scale(a.part_b, c)};
}

AdditiveShare mul_public(Session& s, const AdditiveShare& a, const Matrix& c) {
    auto scope = s.open(ProtocolTag::shr, "mul_public");
    return {s.id(), hadamard(a.part_a, c), hadamard(a.part_b, c)};
}

AdditiveShare affine_public(Session& s, const AdditiveShare& x, double a, double b) {
    auto scope = s.open(ProtocolTag::shr, "affine_public");
    AdditiveShare out{s.id(), scale(x.part_a, a), scale(x.part_b, a)};
    // the constant term lives in part 0, held by P0 (part_a) and P2 (part_b)
    if (s.id().index == 0) out.part_a = add_scalar(out.part_a, b);
    if (s.id().index == 2) out.part_b = add_scalar(out.part_b, b);
    return out;
}

AdditiveShare add_row_broadcast(Session& s, const AdditiveShare& a, const AdditiveShare& row) {
    auto scope = s.open(ProtocolTag::shr, "add_row");
    if (row.rows() != 1 || row.cols() != a.cols())
        throw DimensionError("add_row_broadcast: need 1 x cols row vector");
    AdditiveShare out = a;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) {
            out.part_a(r, c) += row.part_a(0, c);
            out.part_b(r, c) += row.part_b(0, c);
        }
    out.owner = s.id();
    return out;
}

AdditiveShare rowsum_broadcast_shares(Session& s, const AdditiveShare& a) {
    auto scope = s.open(ProtocolTag::shr, "rowsum");
    return {s.id(), rowsum_broadcast(a.part_a), rowsum_broadcast(a.part_b)};
}

AdditiveShare transpose_shares(Session& s, const AdditiveShare& a) {
    auto scope = s.open(ProtocolTag::shr, "transpose");
    return {s.id(), transpose(a.part_a), transpose(a.part_b)};
}

AdditiveShare mul(Session& s, const AdditiveShare& a, const AdditiveShare& b, MulKind kind,
                  const std::optional<MaskSpec>& mask) {
    auto scope = s.open(ProtocolTag::mul, "mul");
    return mul_rounds(s, a, b, kind, s.alloc_round(), session_mask(s, mask));
}

MultiplicativeShare add2mul(Session& s, const AdditiveShare& a, const Add2MulOptions& opt) {
    auto scope = s.open(ProtocolTag::add2mul, "add2mul");
    const MaskSpec mask = session_mask(s, opt.mask);
    const std::size_t rows = a.rows(), cols = a.cols();

    // part 0 from s0 (held by P2, P0), part 1 from s1 (held by P0, P1)
    Matrix hat0, hat1;
    if (s.holds_seed(0)) {
        hat0 = s.draw_pair_seed(0, rows, cols, Session::DrawKind::mulshare, {});
        if (opt.forced_part0) hat0 = *opt.forced_part0;
    }
    if (s.holds_seed(1)) {
        hat1 = s.draw_pair_seed(1, rows, cols, Session::DrawKind::mulshare, {});
        if (opt.forced_part1) hat1 = *opt.forced_part1;
    }

    // round 0: P0 shares t = 1 / (hat0 . hat1)
    const auto r0 = s.alloc_round();
    Matrix t_plain;
    if (s.id().index == 0) t_plain = div(Matrix(rows, cols, 1.0), hadamard(hat0, hat1));
    auto pending_t =
        shr_begin(s, PartyId(0), s.id().index == 0 ? &t_plain : nullptr, rows, cols, r0, mask);
    s.finish_round(r0);
    const AdditiveShare t = shr_finish(s, std::move(pending_t));

    // round 1: fused Hadamard [[x]] . [[t]] with the partial products sent
    // straight to P1 and P2, which reconstruct part 2
    const auto r1 = s.alloc_round();
    Matrix w = add(mul_partial(a, t, MulKind::hadamard), draw_zero_mask(s, rows, cols, mask));
    Matrix hat2;
    switch (s.id().index) {
        case 0:
            s.send_matrix(PartyId(1), r1, w);
            s.send_matrix(PartyId(2), r1, w);
            s.finish_round(r1);
            break;
        case 1: {
            s.send_matrix(PartyId(2), r1, w);
            s.finish_round(r1);
            const Matrix w0 = s.recv_matrix(PartyId(0), r1, rows, cols);
            const Matrix w2 = s.recv_matrix(PartyId(2), r1, rows, cols);
            hat2 = add(add(w0, w), w2);
            break;
        }
        case 2: {
            s.send_matrix(PartyId(1), r1, w);
            s.finish_round(r1);
            const Matrix w0 = s.recv_matrix(PartyId(0), r1, rows, cols);
            const Matrix w1 = s.recv_matrix(PartyId(1), r1, rows, cols);
            hat2 = add(add(w0, w1), w);
            break;
        }
    }
    if (!opt.zero_tolerant && (s.id().index == 1 || s.id().index == 2))
        check_nonzero(hat2, "add2mul part 2 (zero secret element?)");

    MultiplicativeShare out;
    out.owner = s.id();
    switch (s.id().index) {
        case 0: out.part_a = std::move(hat0); out.part_b = std::move(hat1); break;
        case 1: out.part_a = std::move(hat1); out.part_b = std::move(hat2); break;
        case 2: out.part_a = std::move(hat2); out.part_b = std::move(hat0); break;
    }
    return out;
}

AdditiveShare mul2add(Session& s, const MultiplicativeShare& m, const Mul2AddOptions& opt) {
    auto scope = s.open(ProtocolTag::mul2add, "mul2add");
    const MaskSpec mask = session_mask(s, opt.mask);
    const std::size_t rows = m.rows(), cols = m.cols();

    // round 0: Shr_0(x0 . x1) and Shr_2(x2) in parallel
    const auto r0 = s.alloc_round();
    Matrix t_plain;
    if (s.id().index == 0) t_plain = hadamard(m.part_a, m.part_b); // P0 holds (x0, x1)
    auto pending_t =
        shr_begin(s, PartyId(0), s.id().index == 0 ? &t_plain : nullptr, rows, cols, r0, mask);
    const Matrix* hat2 = (s.id().index == 2) ? &m.part_a : nullptr; // P2 holds (x2, x0)
    auto pending_x2 = shr_begin(s, PartyId(2), hat2, rows, cols, r0, mask);
    s.finish_round(r0);
    const AdditiveShare t = shr_finish(s, std::move(pending_t));
    const AdditiveShare x2 = shr_finish(s, std::move(pending_x2));

    // round 1: one secure Hadamard completes the conversion
    return mul_rounds(s, t, x2, MulKind::hadamard, s.alloc_round(), mask);
}

namespace {

/// +1 / -1 with the sign bit deciding zeros, so a zero-tolerant part 2 keeps
/// the sign information carried by IEEE signed zero.
Matrix sign_parts(const Matrix& m) {
    Matrix out = m;
    for (double& v : out.data()) v = std::signbit(v) ? -1.0 : 1.0;
    return out;
}

} // namespace

ReluResult relu(Session& s, const AdditiveShare& a) {
    auto scope = s.open(ProtocolTag::relu, "relu");

    // normalize -0.0 parts so an exactly-zero secret keeps Sign(0) = +1
    AdditiveShare x = a;
    x.part_a = add_scalar(x.part_a, 0.0);
    x.part_b = add_scalar(x.part_b, 0.0);

    Add2MulOptions a2m;
    a2m.zero_tolerant = true;
    const MultiplicativeShare xm = add2mul(s, x, a2m);

    MultiplicativeShare ym;
    ym.owner = s.id();
    ym.part_a = sign_parts(xm.part_a);
    ym.part_b = sign_parts(xm.part_b);

    // integer masks keep the +/-1 arithmetic exact end to end
    Mul2AddOptions m2a;
    m2a.mask = MaskSpec::integer(s.config().sign_mask_magnitude);
    const AdditiveShare yhat = mul2add(s, ym, m2a);

    ReluResult out;
    out.deriv = affine_public(s, yhat, 0.5, 0.5);
    out.value = mul_rounds(s, out.deriv, x, MulKind::hadamard, s.alloc_round(),
                           session_mask(s, {}));
    return out;
}

AdditiveShare softmax(Session& s, const AdditiveShare& a) {
    auto scope = s.open(ProtocolTag::softmax, "softmax");
    const double guard = s.config().exp_guard;
    const double worst = std::max(max_abs(a.part_a), max_abs(a.part_b));
    if (worst > guard)
        throw OverflowError("softmax: local share magnitude " + std::to_string(worst) +
                            " exceeds exp_guard; narrow the sharing with reshare_narrow first");
    const MaskSpec mask = MaskSpec::ranged(s.config().softmax_mask_range);
    Mul2AddOptions m2a;
    m2a.mask = mask;

    // exponentiate parts locally: a multiplicative sharing of e^x
    MultiplicativeShare xm;
    xm.owner = s.id();
    xm.part_a = exp(a.part_a);
    xm.part_b = exp(a.part_b);
    if (!xm.part_a.all_finite() || !xm.part_b.all_finite())
        throw OverflowError("softmax: exponentiated share overflowed");

    const AdditiveShare xhat = mul2add(s, xm, m2a);
    const AdditiveShare trow = rowsum_broadcast_shares(s, xhat);

    Add2MulOptions a2m;
    a2m.mask = mask;
    const MultiplicativeShare tm = add2mul(s, trow, a2m);

    MultiplicativeShare ym;
    ym.owner = s.id();
    ym.part_a = div(xm.part_a, tm.part_a);
    ym.part_b = div(xm.part_b, tm.part_b);

    return mul2add(s, ym, m2a);
}

AdditiveShare reshare_narrow(Session& s, const AdditiveShare& a, bool center,
                             const std::optional<RandomRange>& range) {
    auto scope = s.open(ProtocolTag::reshare, "reshare");
    const RandomRange rr = range ? *range : s.config().softmax_reshare_range;
    const std::size_t rows = a.rows(), cols = a.cols();

    AdditiveShare x = a;
    if (center) {
        x.part_a = center_rows(x.part_a);
        x.part_b = center_rows(x.part_b);
    }

    // fresh narrow parts: part 1 = d1 (seed s1), part 2 = d2 (seed s2);
    // P1, the holder of both old parts x1 and x2, sends the compensation
    // m = x1 + x2 - d1 - d2, and part 0 becomes x0 + m = x - d1 - d2
    Matrix d1, d2;
    if (s.holds_seed(1)) d1 = s.draw_pair_seed(1, rows, cols, Session::DrawKind::uniform, rr);
    if (s.holds_seed(2)) d2 = s.draw_pair_seed(2, rows, cols, Session::DrawKind::uniform, rr);

    const auto r = s.alloc_round();
    AdditiveShare out;
    out.owner = s.id();
    switch (s.id().index) {
        case 0: {
            s.finish_round(r);
            const Matrix m = s.recv_matrix(PartyId(1), r, rows, cols);
            out.part_a = add(x.part_a, m); // part 0
            out.part_b = std::move(d1);    // part 1
            break;
        }
        case 1: {
            const Matrix m = sub(sub(add(x.part_a, x.part_b), d1), d2);
            s.send_matrix(PartyId(0), r, m);
            s.send_matrix(PartyId(2), r, m);
            s.finish_round(r);
            out.part_a = std::move(d1); // part 1
            out.part_b = std::move(d2); // part 2
            break;
        }
        case 2: {
            s.finish_round(r);
            const Matrix m = s.recv_matrix(PartyId(1), r, rows, cols);
            out.part_a = std::move(d2);    // part 2
            out.part_b = add(x.part_b, m); // part 0 (P2 holds x0 as part_b)
            break;
        }
    }
    return out;
}

} // namespace triad
