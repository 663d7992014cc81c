#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

namespace cstab {

// FNV-1a, 64-bit. Used for config/structure/file hashes throughout; not
// cryptographic, just a stable fingerprint.
class Fnv1a {
public:
    static constexpr uint64_t kOffset = 1469598103934665603ull;
    static constexpr uint64_t kPrime = 1099511628211ull;

    Fnv1a() : state_(kOffset) {}

    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            state_ ^= p[i];
            state_ *= kPrime;
        }
    }
    void update(std::string_view s) { update(s.data(), s.size()); }
    void update_u64(uint64_t v) {
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
        update(buf, 8);
    }
    void update_i64(int64_t v) { update_u64(static_cast<uint64_t>(v)); }
    void update_double(double d) {
        uint64_t bits;
        std::memcpy(&bits, &d, 8);
        update_u64(bits);
    }

    uint64_t digest() const { return state_; }

private:
    uint64_t state_;
};

inline uint64_t fnv1a(std::string_view s) {
    Fnv1a h;
    h.update(s);
    return h.digest();
}

inline uint64_t fnv1a(std::span<const unsigned char> bytes) {
    Fnv1a h;
    h.update(bytes.data(), bytes.size());
    return h.digest();
}

inline std::string hash_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace cstab
