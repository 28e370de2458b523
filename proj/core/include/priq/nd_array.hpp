#pragma once

#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <vector>

#include "priq/errors.hpp"

namespace priq {

// Dense row-major K-dimensional array.  Axis 0 is the slowest-varying
// (outermost) dimension.  Rank and shape are runtime values; element
// type is double or complex<double> in practice.
template <typename T>
class NdArray {
public:
    NdArray() = default;

    explicit NdArray(std::vector<std::size_t> shape, T fill = T{})
        : shape_(std::move(shape)) {
        if (shape_.empty())
            throw ValidationError("EmptyShape", "array rank must be >= 1");
        stride_.resize(shape_.size());
        std::size_t s = 1;
        for (std::size_t a = shape_.size(); a-- > 0;) {
            if (shape_[a] == 0)
                throw ValidationError("EmptyShape", "zero extent along an axis");
            stride_[a] = s;
            s *= shape_[a];
        }
        data_.assign(s, fill);
    }

    // Hypercube of the given rank, `extent` cells per axis.
    static NdArray cube(std::size_t rank, std::size_t extent, T fill = T{}) {
        return NdArray(std::vector<std::size_t>(rank, extent), fill);
    }

    std::size_t rank() const noexcept { return shape_.size(); }
    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    const std::vector<std::size_t>& strides() const noexcept { return stride_; }
    std::size_t size() const noexcept { return data_.size(); }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }

    T& operator[](std::size_t flat) {
        assert(flat < data_.size());
        return data_[flat];
    }
    const T& operator[](std::size_t flat) const {
        assert(flat < data_.size());
        return data_[flat];
    }

    std::size_t flat_index(std::span<const std::size_t> idx) const {
        assert(idx.size() == shape_.size());
        std::size_t f = 0;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            assert(idx[a] < shape_[a]);
            f += idx[a] * stride_[a];
        }
        return f;
    }

    T& at(std::span<const std::size_t> idx) { return data_[flat_index(idx)]; }
    const T& at(std::span<const std::size_t> idx) const { return data_[flat_index(idx)]; }

    T& at(std::initializer_list<std::size_t> idx) {
        return data_[flat_index({idx.begin(), idx.size()})];
    }
    const T& at(std::initializer_list<std::size_t> idx) const {
        return data_[flat_index({idx.begin(), idx.size()})];
    }

    void fill(T v) { data_.assign(data_.size(), v); }

    std::vector<T>& storage() noexcept { return data_; }
    const std::vector<T>& storage() const noexcept { return data_; }

private:
    std::vector<std::size_t> shape_;
    std::vector<std::size_t> stride_;
    std::vector<T> data_;
};

// Odometer step over a rectangular index box, last axis fastest.
// Returns false when the index wraps back to all zeros.
inline bool advance_index(std::span<std::size_t> idx, std::span<const std::size_t> shape) {
    for (std::size_t a = idx.size(); a-- > 0;) {
        if (++idx[a] < shape[a]) return true;
        idx[a] = 0;
    }
    return false;
}

inline std::size_t element_count(std::span<const std::size_t> shape) {
    std::size_t n = 1;
    for (auto e : shape) n *= e;
    return n;
}

}  // namespace priq
