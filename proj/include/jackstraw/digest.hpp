#ifndef JACKSTRAW_DIGEST_HPP
#define JACKSTRAW_DIGEST_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <string_view>

#include "matrix.hpp"

namespace jackstraw {

/// 64-bit FNV-1a. Used to key provenance records and checkpoints, not for security.
class Fnv1a {
public:
    void update(const void* data, std::size_t size) noexcept {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
    }
    void update(std::string_view s) noexcept {
        update(s.data(), s.size());
        update_value(static_cast<std::uint64_t>(s.size()));
    }
    template <typename T>
    void update_value(const T& v) noexcept {
        update(&v, sizeof(T));
    }
    std::uint64_t value() const noexcept { return state_; }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
        return buf;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string digest(std::string_view text) {
    Fnv1a h;
    h.update(text);
    return h.hex();
}

/// Digest over dimensions, ids and the exact bit patterns of the values.
inline std::string digest(const DataMatrix& mat) {
    Fnv1a h;
    h.update_value(static_cast<std::int64_t>(mat.rows()));
    h.update_value(static_cast<std::int64_t>(mat.cols()));
    for (const auto& id : mat.row_ids) h.update(id);
    for (const auto& id : mat.col_ids) h.update(id);
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
            h.update_value(mat.values(i, j));
        }
    }
    return h.hex();
}

} // namespace jackstraw

#endif
