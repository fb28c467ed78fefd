#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>

namespace giantpair::detail {

inline std::uint64_t to_little(std::uint64_t bits) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r = (r << 8) | ((bits >> (8 * i)) & 0xffu);
        return r;
    }
    return bits;
}

inline void put_f64(std::ostream& out, double v) {
    const auto bits = to_little(std::bit_cast<std::uint64_t>(v));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
}

inline double get_f64(std::istream& in) {
    char buf[8];
    in.read(buf, 8);
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    return std::bit_cast<double>(to_little(bits));
}

inline void put_complex(std::ostream& out, std::span<const std::complex<double>> v) {
    for (const auto& z : v) {
        put_f64(out, z.real());
        put_f64(out, z.imag());
    }
}

inline void put_real(std::ostream& out, std::span<const double> v) {
    for (double x : v) put_f64(out, x);
}

}  // namespace giantpair::detail
