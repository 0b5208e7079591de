#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vra/errors.hpp"

namespace vra::detail {

/// Little-endian encoder, independent of host byte order.
class ByteWriter {
public:
    void put_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        m_buf.insert(m_buf.end(), p, p + n);
    }
    void put_u16(std::uint16_t v) { put_le(v, 2); }
    void put_u32(std::uint32_t v) { put_le(v, 4); }
    void put_u64(std::uint64_t v) { put_le(v, 8); }
    void put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }
    void put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

    void reserve(std::size_t n) { m_buf.reserve(n); }
    const std::vector<std::uint8_t>& bytes() const noexcept { return m_buf; }

private:
    void put_le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) {
            m_buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }

    std::vector<std::uint8_t> m_buf;
};

/// Bounds-checked little-endian decoder; overruns raise CorruptionError.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> data, std::string context)
        : m_data(data), m_context(std::move(context)) {}

    void get_bytes(void* out, std::size_t n) {
        require(n);
        std::memcpy(out, m_data.data() + m_pos, n);
        m_pos += n;
    }
    std::uint16_t get_u16() { return static_cast<std::uint16_t>(get_le(2)); }
    std::uint32_t get_u32() { return static_cast<std::uint32_t>(get_le(4)); }
    std::uint64_t get_u64() { return get_le(8); }
    float get_f32() { return std::bit_cast<float>(get_u32()); }
    double get_f64() { return std::bit_cast<double>(get_u64()); }

    std::size_t position() const noexcept { return m_pos; }
    std::size_t remaining() const noexcept { return m_data.size() - m_pos; }

private:
    void require(std::size_t n) const {
        if (remaining() < n) {
            throw CorruptionError(m_context + ": unexpected end of data");
        }
    }
    std::uint64_t get_le(int n) {
        require(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(m_data[m_pos + i]) << (8 * i);
        }
        m_pos += static_cast<std::size_t>(n);
        return v;
    }

    std::span<const std::uint8_t> m_data;
    std::string m_context;
    std::size_t m_pos = 0;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace vra::detail
