#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>

#include "bff/errors.hpp"

namespace bff::detail {

template <typename T>
T to_little(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    } else {
        return value;
    }
}

class ByteWriter {
public:
    void magic(std::string_view m) { out_.append(m); }

    template <typename T>
    void put(T value) {
        const T le = to_little(value);
        char buf[sizeof(T)];
        std::memcpy(buf, &le, sizeof(T));
        out_.append(buf, sizeof(T));
    }

    void raw(std::string_view bytes) { out_.append(bytes); }

    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class ByteReader {
public:
    ByteReader(std::string_view data, std::string_view what) : data_(data), what_(what) {}

    void expect_magic(std::string_view m) {
        if (data_.substr(pos_, m.size()) != m) {
            throw InputError(std::string(what_) + ": bad magic, expected '" + std::string(m) + "'");
        }
        pos_ += m.size();
    }

    template <typename T>
    T get() {
        need(sizeof(T));
        T value;
        std::memcpy(&value, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return to_little(value);
    }

    std::string_view raw(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const noexcept { return data_.size() - pos_; }

    void need(std::size_t n) const {
        if (remaining() < n) {
            throw InputError(std::string(what_) + ": truncated file");
        }
    }

private:
    std::string_view data_;
    std::string_view what_;
    std::size_t pos_ = 0;
};

}  // namespace bff::detail
