#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace chainsim {

/// Append-only array stored in fixed-size chunks. Growth never moves
/// elements, so there is no reallocation spike and memory follows the
/// element count instead of the next power of two.
template <class T>
class ChunkedArray {
public:
    static constexpr std::size_t kChunkBits = 16;
    static constexpr std::size_t kChunk = std::size_t{1} << kChunkBits;

    std::size_t size() const { return size_; }

    T& operator[](std::size_t i) { return chunks_[i >> kChunkBits][i & (kChunk - 1)]; }
    const T& operator[](std::size_t i) const { return chunks_[i >> kChunkBits][i & (kChunk - 1)]; }

    /// Contiguous view of [first, first + count); valid for ranges made by append().
    std::span<const T> range(std::size_t first, std::size_t count) const
    {
        if (count == 0) return {};
        return {chunks_[first >> kChunkBits].data() + (first & (kChunk - 1)), count};
    }

    void push_back(const T& v)
    {
        if ((size_ >> kChunkBits) == chunks_.size()) {
            chunks_.emplace_back();
            chunks_.back().reserve(kChunk);
        }
        chunks_.back().push_back(v);
        ++size_;
    }

    /// Grows to `n` elements with value-initialized padding.
    void resize(std::size_t n)
    {
        while (size_ < n) push_back(T{});
    }

    /// Appends `items` so they share one chunk and returns the index of the first.
    std::size_t append(std::span<const T> items)
    {
        assert(items.size() <= kChunk);
        if ((size_ & (kChunk - 1)) + items.size() > kChunk) resize((size_ | (kChunk - 1)) + 1);
        const std::size_t first = size_;
        for (const T& v : items) push_back(v);
        return first;
    }

    std::size_t memory_bytes() const
    {
        return chunks_.size() * kChunk * sizeof(T) + chunks_.capacity() * sizeof(std::vector<T>);
    }

private:
    std::vector<std::vector<T>> chunks_;
    std::size_t size_ = 0;
};

} // namespace chainsim
