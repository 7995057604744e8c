#include "ctsev/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "ctsev/errors.hpp"

namespace ctsev {

namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kDataOffset = 352;

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;

// Field offsets in the 348-byte header.
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffXyztUnits = 123;
constexpr std::size_t kOffDescrip = 148;
constexpr std::size_t kOffQformCode = 252;
constexpr std::size_t kOffSformCode = 254;
constexpr std::size_t kOffQuatern = 256;
constexpr std::size_t kOffSrowX = 280;
constexpr std::size_t kOffSrowY = 296;
constexpr std::size_t kOffSrowZ = 312;
constexpr std::size_t kOffMagic = 344;

constexpr std::string_view kUnitKey = "unit=";

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (!f) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes;
    unsigned char buf[1 << 16];
    for (;;) {
        int n = gzread(f, buf, sizeof buf);
        if (n < 0) {
            int err = 0;
            std::string msg = gzerror(f, &err);
            std::size_t at = bytes.size();
            gzclose(f);
            throw FormatError(path.string(), at, "decompression failed: " + msg);
        }
        if (n == 0) break;
        bytes.insert(bytes.end(), buf, buf + n);
    }
    gzclose(f);
    return bytes;
}

/// float -> double via the shortest decimal that round-trips the float, so
/// a spacing written as 0.7 reads back as 0.7 rather than 0.699999988.
double decimal_widen(float f) {
    if (!std::isfinite(f)) return f;
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, f);
    double d = 0.0;
    std::from_chars(buf, res.ptr, d);
    return d;
}

class HeaderReader {
  public:
    HeaderReader(const std::vector<unsigned char>& bytes, bool swap) : bytes_(bytes), swap_(swap) {}

    template <typename T>
    T get(std::size_t offset) const {
        std::array<unsigned char, sizeof(T)> raw;
        std::memcpy(raw.data(), bytes_.data() + offset, sizeof(T));
        if (swap_) std::reverse(raw.begin(), raw.end());
        return std::bit_cast<T>(raw);
    }

  private:
    const std::vector<unsigned char>& bytes_;
    bool swap_;
};

template <typename T>
T load(const unsigned char* p, bool swap) {
    std::array<unsigned char, sizeof(T)> raw;
    std::memcpy(raw.data(), p, sizeof(T));
    if (swap) std::reverse(raw.begin(), raw.end());
    return std::bit_cast<T>(raw);
}

Unit unit_from_descrip(const unsigned char* descrip) {
    std::string text(reinterpret_cast<const char*>(descrip), strnlen(reinterpret_cast<const char*>(descrip), 80));
    auto at = text.find(kUnitKey);
    if (at == std::string::npos) return Unit::HU;
    auto value = text.substr(at + kUnitKey.size());
    value = value.substr(0, value.find(' '));
    try {
        return unit_from_string(value);
    } catch (const InvalidArgument&) {
        return Unit::HU;
    }
}

} // namespace

NiftiImage read_nifti(const std::filesystem::path& path) {
    const std::string where = path.string();
    auto bytes = slurp(path);
    if (bytes.size() < kHeaderSize) throw FormatError(where, bytes.size(), "truncated header");

    std::int32_t sizeof_hdr = load<std::int32_t>(bytes.data(), false);
    bool swap = false;
    if (sizeof_hdr != static_cast<std::int32_t>(kHeaderSize)) {
        if (load<std::int32_t>(bytes.data(), true) != static_cast<std::int32_t>(kHeaderSize))
            throw FormatError(where, 0, "sizeof_hdr is not 348");
        swap = true;
    }
    if (std::memcmp(bytes.data() + kOffMagic, "n+1\0", 4) != 0) {
        if (std::memcmp(bytes.data() + kOffMagic, "ni1\0", 4) == 0)
            throw FormatError(where, kOffMagic, "two-file NIfTI (magic \"ni1\") is not supported");
        throw FormatError(where, kOffMagic, "bad magic, expected \"n+1\"");
    }

    HeaderReader h(bytes, swap);
    std::int16_t ndim = h.get<std::int16_t>(kOffDim);
    if (ndim < 1 || ndim > 7) throw FormatError(where, kOffDim, "dim[0] out of range");
    int dims[3] = {1, 1, 1};
    for (int a = 0; a < 3; ++a) {
        if (a < ndim) dims[a] = h.get<std::int16_t>(kOffDim + 2 * (a + 1));
        if (dims[a] < 1) throw FormatError(where, kOffDim + 2 * (a + 1), "non-positive dimension");
    }
    for (int a = 3; a < ndim; ++a) {
        if (h.get<std::int16_t>(kOffDim + 2 * (a + 1)) > 1)
            throw FormatError(where, kOffDim + 2 * (a + 1), "only 3D images are supported");
    }

    std::int16_t datatype = h.get<std::int16_t>(kOffDatatype);
    std::size_t bytes_per_voxel = 0;
    switch (datatype) {
    case kDtUint8: bytes_per_voxel = 1; break;
    case kDtInt16: bytes_per_voxel = 2; break;
    case kDtFloat32: bytes_per_voxel = 4; break;
    default:
        throw FormatError(where, kOffDatatype, "unsupported datatype code " + std::to_string(datatype));
    }
    if (static_cast<std::size_t>(h.get<std::int16_t>(kOffBitpix)) != 8 * bytes_per_voxel)
        throw FormatError(where, kOffBitpix, "bitpix does not match datatype");

    Spacing spacing{decimal_widen(std::abs(h.get<float>(kOffPixdim + 4))),
                    decimal_widen(std::abs(h.get<float>(kOffPixdim + 8))),
                    decimal_widen(std::abs(h.get<float>(kOffPixdim + 12)))};
    for (int a = 0; a < 3; ++a) {
        double* c = a == 0 ? &spacing.dx : a == 1 ? &spacing.dy : &spacing.dz;
        if (a >= ndim || *c == 0.0) *c = 1.0;
        if (!std::isfinite(*c)) throw FormatError(where, kOffPixdim + 4 * (a + 1), "non-finite pixdim");
    }

    float vox_offset_f = h.get<float>(kOffVoxOffset);
    if (!(vox_offset_f >= static_cast<float>(kDataOffset)))
        throw FormatError(where, kOffVoxOffset, "vox_offset below 352");
    auto vox_offset = static_cast<std::size_t>(vox_offset_f);

    Shape shape{dims[2], dims[1], dims[0]};
    std::size_t n = shape.voxels();
    std::size_t need = vox_offset + n * bytes_per_voxel;
    if (bytes.size() < need)
        throw FormatError(where, bytes.size(),
                          "truncated payload: need " + std::to_string(need) + " bytes, have " +
                              std::to_string(bytes.size()));

    NiftiOrientation o;
    o.qform_code = h.get<std::int16_t>(kOffQformCode);
    o.sform_code = h.get<std::int16_t>(kOffSformCode);
    o.qfac = h.get<float>(kOffPixdim);
    o.quatern_b = h.get<float>(kOffQuatern);
    o.quatern_c = h.get<float>(kOffQuatern + 4);
    o.quatern_d = h.get<float>(kOffQuatern + 8);
    o.qoffset_x = h.get<float>(kOffQuatern + 12);
    o.qoffset_y = h.get<float>(kOffQuatern + 16);
    o.qoffset_z = h.get<float>(kOffQuatern + 20);
    for (int i = 0; i < 4; ++i) {
        o.srow_x[i] = h.get<float>(kOffSrowX + 4 * i);
        o.srow_y[i] = h.get<float>(kOffSrowY + 4 * i);
        o.srow_z[i] = h.get<float>(kOffSrowZ + 4 * i);
    }

    float slope = h.get<float>(kOffSclSlope);
    float inter = h.get<float>(kOffSclInter);
    bool scaled = slope != 0.0f && std::isfinite(slope);
    if (!std::isfinite(inter)) inter = 0.0f;

    const unsigned char* payload = bytes.data() + vox_offset;
    if (datatype == kDtUint8) {
        if (scaled && (slope != 1.0f || inter != 0.0f))
            throw FormatError(where, kOffSclSlope, "label masks must not carry intensity scaling");
        std::vector<std::uint8_t> labels(payload, payload + n);
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] > 2)
                throw FormatError(where, vox_offset + i, "label " + std::to_string(labels[i]) + " outside {0,1,2}");
        }
        return {LabelMask(shape, spacing, std::move(labels)), o};
    }

    std::vector<float> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        double raw = datatype == kDtInt16 ? load<std::int16_t>(payload + 2 * i, swap)
                                          : static_cast<double>(load<float>(payload + 4 * i, swap));
        if (scaled) raw = static_cast<double>(slope) * raw + static_cast<double>(inter);
        if (!std::isfinite(raw)) throw FormatError(where, vox_offset + i * bytes_per_voxel, "non-finite voxel");
        values[i] = static_cast<float>(raw);
    }
    Unit unit = datatype == kDtInt16 ? Unit::HU : unit_from_descrip(bytes.data() + kOffDescrip);
    try {
        return {Volume(shape, spacing, unit, std::move(values)), o};
    } catch (const InvalidArgument& e) {
        throw FormatError(where, vox_offset, e.what());
    }
}

Volume read_nifti_volume(const std::filesystem::path& path) {
    auto img = read_nifti(path);
    if (auto* v = std::get_if<Volume>(&img.image)) return std::move(*v);
    throw FormatError(path.string(), kOffDatatype, "expected an int16/float32 volume, found a uint8 mask");
}

LabelMask read_nifti_mask(const std::filesystem::path& path) {
    auto img = read_nifti(path);
    if (auto* m = std::get_if<LabelMask>(&img.image)) return std::move(*m);
    throw FormatError(path.string(), kOffDatatype, "expected a uint8 label mask");
}

namespace {

template <typename T>
void store(std::vector<unsigned char>& buf, std::size_t offset, T value) {
    std::memcpy(buf.data() + offset, &value, sizeof(T));
}

std::vector<unsigned char> make_header(const Shape& shape, const Spacing& spacing, std::int16_t datatype,
                                       std::int16_t bitpix, const NiftiOrientation& o, const std::string& descrip) {
    static_assert(std::endian::native == std::endian::little, "writer assumes a little-endian host");
    std::vector<unsigned char> hdr(kDataOffset, 0);
    store<std::int32_t>(hdr, 0, static_cast<std::int32_t>(kHeaderSize));
    hdr[38] = 'r';
    std::int16_t dim[8] = {3,
                           static_cast<std::int16_t>(shape.nx),
                           static_cast<std::int16_t>(shape.ny),
                           static_cast<std::int16_t>(shape.nz),
                           1, 1, 1, 1};
    for (int i = 0; i < 8; ++i) store(hdr, kOffDim + 2 * i, dim[i]);
    store(hdr, kOffDatatype, datatype);
    store(hdr, kOffBitpix, bitpix);
    float pixdim[8] = {o.qfac == 0.0f ? 1.0f : o.qfac,
                       static_cast<float>(spacing.dx),
                       static_cast<float>(spacing.dy),
                       static_cast<float>(spacing.dz),
                       1.0f, 1.0f, 1.0f, 1.0f};
    for (int i = 0; i < 8; ++i) store(hdr, kOffPixdim + 4 * i, pixdim[i]);
    store(hdr, kOffVoxOffset, static_cast<float>(kDataOffset));
    store(hdr, kOffSclSlope, 1.0f);
    store(hdr, kOffSclInter, 0.0f);
    hdr[kOffXyztUnits] = 2; // mm
    std::memcpy(hdr.data() + kOffDescrip, descrip.data(), std::min<std::size_t>(descrip.size(), 79));
    store(hdr, kOffQformCode, o.qform_code);
    store(hdr, kOffSformCode, o.sform_code);
    float quat[6] = {o.quatern_b, o.quatern_c, o.quatern_d, o.qoffset_x, o.qoffset_y, o.qoffset_z};
    for (int i = 0; i < 6; ++i) store(hdr, kOffQuatern + 4 * i, quat[i]);
    for (int i = 0; i < 4; ++i) {
        store(hdr, kOffSrowX + 4 * i, o.srow_x[i]);
        store(hdr, kOffSrowY + 4 * i, o.srow_y[i]);
        store(hdr, kOffSrowZ + 4 * i, o.srow_z[i]);
    }
    std::memcpy(hdr.data() + kOffMagic, "n+1\0", 4);
    return hdr;
}

void check_writable(const Shape& s, const std::filesystem::path& path) {
    constexpr int kMax = 32767;
    if (s.nz > kMax || s.ny > kMax || s.nx > kMax)
        throw InvalidArgument("cannot write " + path.string() + ": dimension exceeds NIfTI-1 int16 range");
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& header, const void* payload,
                 std::size_t payload_bytes) {
    bool gz = path.extension() == ".gz";
    gzFile f = gzopen(path.string().c_str(), gz ? "wb6" : "wbT");
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    auto put = [&](const void* p, std::size_t len) {
        const auto* c = static_cast<const unsigned char*>(p);
        while (len > 0) {
            auto chunk = static_cast<unsigned>(std::min<std::size_t>(len, 1u << 30));
            if (gzwrite(f, c, chunk) != static_cast<int>(chunk)) {
                gzclose(f);
                throw IoError("write failed for " + path.string());
            }
            c += chunk;
            len -= chunk;
        }
    };
    put(header.data(), header.size());
    put(payload, payload_bytes);
    if (gzclose(f) != Z_OK) throw IoError("close failed for " + path.string());
}

} // namespace

void write_nifti(const Volume& v, const std::filesystem::path& path, const NiftiOrientation& orientation) {
    check_writable(v.shape(), path);
    auto header = make_header(v.shape(), v.spacing(), kDtFloat32, 32, orientation,
                              "ctsev " + std::string(kUnitKey) + std::string(to_string(v.unit())));
    write_bytes(path, header, v.data().data(), v.data().size_bytes());
}

void write_nifti(const LabelMask& m, const std::filesystem::path& path, const NiftiOrientation& orientation) {
    check_writable(m.shape(), path);
    auto header = make_header(m.shape(), m.spacing(), kDtUint8, 8, orientation, "ctsev labels");
    write_bytes(path, header, m.data().data(), m.data().size_bytes());
}

} // namespace ctsev
