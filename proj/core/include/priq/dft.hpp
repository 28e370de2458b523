#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace priq {

// Normalized multi-dimensional inverse DFT (positive-exponent transform
// divided by the element count), executed in place.  Backed by FFTW with
// deterministic (estimate-only) planning; one instance holds one plan and
// can be executed repeatedly on any buffer of matching shape.
class InverseDft {
public:
    explicit InverseDft(std::vector<std::size_t> shape);
    ~InverseDft();

    InverseDft(const InverseDft&) = delete;
    InverseDft& operator=(const InverseDft&) = delete;

    void run(std::complex<double>* data) const;

    std::size_t count() const noexcept { return count_; }
    const std::vector<std::size_t>& shape() const noexcept { return shape_; }

private:
    std::vector<std::size_t> shape_;
    std::size_t count_ = 0;
    void* plan_ = nullptr;  // fftw_plan, kept opaque here
};

}  // namespace priq
