#include "priq/dft.hpp"

#include <fftw3.h>

#include "priq/errors.hpp"

namespace priq {

InverseDft::InverseDft(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    if (shape_.empty())
        throw ValidationError("EmptyShape", "transform rank must be >= 1");
    std::vector<int> dims(shape_.size());
    count_ = 1;
    for (std::size_t a = 0; a < shape_.size(); ++a) {
        if (shape_[a] < 1 || shape_[a] > static_cast<std::size_t>(1) << 30)
            throw ValidationError("BadTransformSize", "axis extent out of range");
        dims[a] = static_cast<int>(shape_[a]);
        count_ *= shape_[a];
    }
    // Plan on a scratch buffer; executions use the new-array interface.
    // FFTW_UNALIGNED lifts the alignment restriction that interface carries.
    std::vector<std::complex<double>> scratch(count_);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    plan_ = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), p, p,
                          FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan_ == nullptr)
        throw NumericError("PlanFailure", "FFTW refused the requested transform");
}

InverseDft::~InverseDft() {
    if (plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void InverseDft::run(std::complex<double>* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(plan_), p, p);
    const double scale = 1.0 / static_cast<double>(count_);
    for (std::size_t i = 0; i < count_; ++i) data[i] *= scale;
}

}  // namespace priq
