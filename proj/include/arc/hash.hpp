#pragma once

#include <cstdint>
#include <string_view>

namespace arc {

// FNV-1a 64-bit. Used for feature hashing and config fingerprints; pinned here
// (instead of std::hash) so outputs are stable across platforms and stdlibs.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace arc
