// 2-D DFT backed by FFTW. Plans are cached per (width, height, direction);
// the planner is not thread-safe, so planning is serialized while execution
// runs on caller-owned buffers.
#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "sslt/imaging.hpp"

namespace sslt {
namespace {

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {
        if (!ptr) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* ptr;
};

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(int width, int height, int sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(width, height, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        const auto n = static_cast<std::size_t>(width) * height;
        FftwBuffer in(n), out(n);
        fftw_plan plan = fftw_plan_dft_2d(height, width, in.ptr, out.ptr, sign, FFTW_ESTIMATE);
        if (!plan) throw std::runtime_error("fftw: failed to create plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

ComplexGrid transform(const ComplexGrid& grid, int sign) {
    ComplexGrid out(grid.width(), grid.height());
    if (grid.empty()) return out;
    const std::size_t n = grid.size();
    FftwBuffer in(n), res(n);
    std::copy(grid.data().begin(), grid.data().end(), reinterpret_cast<std::complex<double>*>(in.ptr));
    fftw_execute_dft(plan_cache().get(grid.width(), grid.height(), sign), in.ptr, res.ptr);
    const auto* r = reinterpret_cast<const std::complex<double>*>(res.ptr);
    std::copy(r, r + n, out.data().begin());
    return out;
}

}  // namespace

ComplexGrid dft2(const ComplexGrid& grid) { return transform(grid, FFTW_FORWARD); }

ComplexGrid dft2(const ScalarMap& map) {
    ComplexGrid g(map.width(), map.height());
    std::copy(map.data().begin(), map.data().end(), g.data().begin());
    return dft2(g);
}

ComplexGrid idft2_complex(const ComplexGrid& grid) {
    ComplexGrid out = transform(grid, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(std::max<std::size_t>(1, grid.size()));
    for (auto& v : out.data()) v *= scale;
    return out;
}

ScalarMap idft2(const ComplexGrid& grid) {
    const ComplexGrid c = idft2_complex(grid);
    ScalarMap out(grid.width(), grid.height());
    for (std::size_t i = 0; i < c.size(); ++i) out.data()[i] = c.data()[i].real();
    return out;
}

}  // namespace sslt
