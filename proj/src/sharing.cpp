#include "triad/sharing.hpp"

#include <cstring>
#include <fstream>

namespace triad {

Matrix PartyContext::zero_share(std::size_t rows, std::size_t cols) {
    return zero_share_ranged(rows, cols, randomness_range);
}

Matrix PartyContext::zero_share_ranged(std::size_t rows, std::size_t cols,
                                       const RandomRange& range) {
    Matrix r_i = prg_draw(seed_prev, rows, cols, range);
    Matrix r_next = prg_draw(seed_next, rows, cols, range);
    return sub(r_i, r_next);
}

Matrix PartyContext::zero_share_integer(std::size_t rows, std::size_t cols,
                                        std::int64_t magnitude) {
    Matrix r_i = prg_draw_integer(seed_prev, rows, cols, magnitude);
    Matrix r_next = prg_draw_integer(seed_next, rows, cols, magnitude);
    return sub(r_i, r_next);
}

Matrix reconstruct_local(const ShareTrio<AdditiveShare>& t) {
    audit_replication(t);
    return add(add(t[0].part_a, t[1].part_a), t[2].part_a);
}

Matrix reconstruct_mul_local(const ShareTrio<MultiplicativeShare>& t) {
    audit_replication(t);
    return hadamard(hadamard(t[0].part_a, t[1].part_a), t[2].part_a);
}

namespace {

constexpr char kMagic[5] = {'P', 'R', 'S', 'S', '1'};

void write_exact(std::ofstream& f, const void* p, std::size_t n) {
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_exact(std::ifstream& f, void* p, std::size_t n) {
    f.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(f.gcount()) != n) throw FormatError("truncated share file");
}

static_assert(sizeof(double) == 8);

} // namespace

void save_share(const std::string& path, const AdditiveShare& share) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot open " + path + " for writing");
    write_exact(f, kMagic, sizeof(kMagic));
    const std::uint8_t party = static_cast<std::uint8_t>(share.owner.index);
    const std::uint32_t rows = static_cast<std::uint32_t>(share.rows());
    const std::uint32_t cols = static_cast<std::uint32_t>(share.cols());
    const std::uint16_t bits = 64;
    write_exact(f, &party, 1);
    write_exact(f, &rows, 4);
    write_exact(f, &cols, 4);
    write_exact(f, &bits, 2);
    write_exact(f, share.part_a.data().data(), 8 * share.part_a.size());
    write_exact(f, share.part_b.data().data(), 8 * share.part_b.size());
    if (!f) throw FormatError("short write to " + path);
}

void deal_share_files(const Matrix& x, const std::string& prefix, std::uint64_t seed,
                      const RandomRange& range) {
    PrgSeed r0{seed, 0}, r1{seed + 1, 0}, r2{seed + 2, 0};
    const Matrix m0 = prg_draw(r0, x.rows(), x.cols(), range);
    const Matrix m1 = prg_draw(r1, x.rows(), x.cols(), range);
    const Matrix m2 = prg_draw(r2, x.rows(), x.cols(), range);
    const Matrix parts[3] = {add(sub(m0, m1), x), sub(m1, m2), sub(m2, m0)};
    for (int p = 0; p < 3; ++p) {
        AdditiveShare sh;
        sh.owner = PartyId(p);
        sh.part_a = parts[p];
        sh.part_b = parts[(p + 1) % 3];
        save_share(prefix + ".p" + std::to_string(p) + ".prss", sh);
    }
}

AdditiveShare load_share(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open " + path);
    char magic[5];
    read_exact(f, magic, 5);
    if (std::memcmp(magic, kMagic, 5) != 0) throw FormatError(path + ": bad magic");
    std::uint8_t party;
    std::uint32_t rows, cols;
    std::uint16_t bits;
    read_exact(f, &party, 1);
    read_exact(f, &rows, 4);
    read_exact(f, &cols, 4);
    read_exact(f, &bits, 2);
    if (party > 2) throw FormatError(path + ": bad party id");
    if (bits != 64) throw FormatError(path + ": unsupported element width");
    if (rows == 0 || cols == 0) throw FormatError(path + ": empty matrix");
    AdditiveShare s;
    s.owner = PartyId(static_cast<int>(party));
    s.part_a = Matrix(rows, cols);
    s.part_b = Matrix(rows, cols);
    read_exact(f, s.part_a.data().data(), 8 * s.part_a.size());
    read_exact(f, s.part_b.data().data(), 8 * s.part_b.size());
    return s;
}

} // namespace triad
