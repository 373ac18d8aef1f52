#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace qkdo {

// 128-slot occupancy bitmap. Slot 0 maps to the most significant bit of the
// first byte, so a hex dump reads left-to-right in slot order.
class ResourceBitmap {
public:
    static constexpr std::size_t slot_count = 128;
    static constexpr std::size_t byte_count = 16;

    ResourceBitmap() = default;

    bool test(std::size_t slot) const {
        return (bytes_[slot / 8] >> (7 - slot % 8)) & 1u;
    }
    void set(std::size_t slot) { bytes_[slot / 8] |= mask(slot); }
    void clear(std::size_t slot) { bytes_[slot / 8] &= static_cast<std::uint8_t>(~mask(slot)); }

    bool any() const {
        for (auto b : bytes_)
            if (b != 0) return true;
        return false;
    }

    // Lowest-index free slot, if one exists.
    std::optional<std::size_t> first_free() const {
        for (std::size_t i = 0; i < slot_count; ++i)
            if (!test(i)) return i;
        return std::nullopt;
    }

    // Lowest-index occupied slot, if one exists.
    std::optional<std::size_t> first_set() const {
        for (std::size_t i = 0; i < slot_count; ++i)
            if (test(i)) return i;
        return std::nullopt;
    }

    const std::array<std::uint8_t, byte_count>& bytes() const { return bytes_; }
    std::array<std::uint8_t, byte_count>& bytes() { return bytes_; }

    friend bool operator==(const ResourceBitmap&, const ResourceBitmap&) = default;

    // Bitmap with exactly one slot set.
    static ResourceBitmap single(std::size_t slot) {
        ResourceBitmap m;
        m.set(slot);
        return m;
    }

    std::string to_hex() const;

private:
    static std::uint8_t mask(std::size_t slot) {
        return static_cast<std::uint8_t>(1u << (7 - slot % 8));
    }

    std::array<std::uint8_t, byte_count> bytes_{};
};

}  // namespace qkdo
