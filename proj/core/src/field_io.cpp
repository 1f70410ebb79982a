#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <vector>

#include <zlib.h>

#include "dfield/errors.hpp"
#include "dfield/field.hpp"

static_assert(std::endian::native == std::endian::little,
              "field snapshots are little-endian; big-endian hosts are unsupported");

namespace dfield {

namespace {

constexpr char kMagic[4] = {'D', 'F', 'L', 'D'};
constexpr std::uint32_t kVersion = 1;

class PayloadWriter {
public:
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u8(std::uint8_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void f64_array(std::span<const double> v) { raw(v.data(), v.size() * sizeof(double)); }
    const std::vector<char>& bytes() const { return buf_; }

private:
    void raw(const void* p, std::size_t len) {
        const char* c = static_cast<const char*>(p);
        buf_.insert(buf_.end(), c, c + len);
    }
    std::vector<char> buf_;
};

class PayloadReader {
public:
    explicit PayloadReader(const std::vector<char>& buf) : buf_(buf) {}
    std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
    std::uint8_t u8() { std::uint8_t v; raw(&v, sizeof v); return v; }
    double f64() { double v; raw(&v, sizeof v); return v; }
    void f64_array(std::vector<double>& out, std::size_t count) {
        out.resize(count);
        raw(out.data(), count * sizeof(double));
    }
    bool exhausted() const { return pos_ == buf_.size(); }

private:
    void raw(void* p, std::size_t len) {
        if (pos_ + len > buf_.size())
            throw FieldIoError("truncated field snapshot");
        std::memcpy(p, buf_.data() + pos_, len);
        pos_ += len;
    }
    const std::vector<char>& buf_;
    std::size_t pos_ = 0;
};

std::uint32_t payload_crc(const std::vector<char>& payload) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
                static_cast<uInt>(payload.size())));
}

} // namespace

void save_field(const DecouplingFieldApprox& field, const std::string& path) {
    PayloadWriter w;
    w.u32(static_cast<std::uint32_t>(field.n));
    w.u32(static_cast<std::uint32_t>(field.m));
    w.u32(static_cast<std::uint32_t>(field.d));
    w.f64(field.T);
    for (int a = 0; a < field.grid.dim(); ++a) {
        const GridAxis& ax = field.grid.axis(a);
        w.f64(ax.lo);
        w.f64(ax.hi);
        w.u32(static_cast<std::uint32_t>(ax.count));
    }
    w.u32(static_cast<std::uint32_t>(field.slices.size()));
    for (const auto& s : field.slices) {
        w.f64(s.t);
        w.u8(s.has_z() ? 1 : 0);
        w.f64_array(s.u);
        if (s.has_z())
            w.f64_array(s.z);
    }

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw FieldIoError("cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    std::uint32_t version = kVersion;
    os.write(reinterpret_cast<const char*>(&version), sizeof version);
    os.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    std::uint32_t crc = payload_crc(w.bytes());
    os.write(reinterpret_cast<const char*>(&crc), sizeof crc);
    if (!os)
        throw FieldIoError("write failure on '" + path + "'");
}

DecouplingFieldApprox load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw FieldIoError("cannot open '" + path + "'");
    std::vector<char> all((std::istreambuf_iterator<char>(is)),
                          std::istreambuf_iterator<char>());

    if (all.size() < 4 + sizeof(std::uint32_t) * 2)
        throw FieldIoError("truncated field snapshot");
    if (std::memcmp(all.data(), kMagic, 4) != 0)
        throw FieldIoError("bad magic: not a field snapshot");
    std::uint32_t version;
    std::memcpy(&version, all.data() + 4, sizeof version);
    if (version != kVersion)
        throw FieldIoError("unsupported snapshot version " + std::to_string(version));

    std::vector<char> payload(all.begin() + 8, all.end() - 4);
    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, all.data() + all.size() - 4, sizeof stored_crc);
    if (payload_crc(payload) != stored_crc)
        throw FieldIoError("checksum failure in field snapshot");

    PayloadReader r(payload);
    DecouplingFieldApprox f;
    f.n = static_cast<int>(r.u32());
    f.m = static_cast<int>(r.u32());
    f.d = static_cast<int>(r.u32());
    f.T = r.f64();
    if (f.n < 1 || f.n > 3 || f.m < 1 || f.m > 9 || f.d < 1 || f.d > 8)
        throw FieldIoError("snapshot header has implausible dimensions");
    std::vector<GridAxis> axes(static_cast<std::size_t>(f.n));
    for (auto& ax : axes) {
        ax.lo = r.f64();
        ax.hi = r.f64();
        ax.count = static_cast<int>(r.u32());
    }
    f.grid = SpatialGrid(std::move(axes));
    std::size_t nodes = f.grid.node_count();

    std::uint32_t slice_count = r.u32();
    if (slice_count == 0)
        throw FieldIoError("snapshot has no slices");
    f.slices.resize(slice_count);
    for (auto& s : f.slices) {
        s.t = r.f64();
        bool has_z = r.u8() != 0;
        r.f64_array(s.u, nodes * static_cast<std::size_t>(f.m));
        if (has_z)
            r.f64_array(s.z, nodes * static_cast<std::size_t>(f.m) *
                                 static_cast<std::size_t>(f.d));
        s.lip_estimate = slice_lipschitz_estimate(f.grid, s.u, f.m);
    }
    if (!r.exhausted())
        throw FieldIoError("trailing bytes in field snapshot");
    return f;
}

} // namespace dfield
