#include "pbr/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace pbr::fft {
namespace {

// Plans are created once per (size, direction) and executed through the
// new-array interface, which FFTW documents as safe for concurrent use.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        CVec in(n), out(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                          reinterpret_cast<fftw_complex*>(out.data()), sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr) throw NumericError("fftw: could not create plan of size " + std::to_string(n));
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

CVec execute(std::span<const cplx> x, int sign) {
    detail::require(!x.empty(), "fft: empty input");
    CVec in(x.begin(), x.end());
    CVec out(x.size());
    fftw_execute_dft(cache().get(x.size(), sign), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

}  // namespace

CVec forward(std::span<const cplx> x) { return execute(x, FFTW_FORWARD); }

CVec inverse(std::span<const cplx> x) {
    CVec out = execute(x, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(out.size());
    for (auto& v : out) v *= scale;
    return out;
}

double bin_frequency(std::size_t k, std::size_t n, double sample_rate_hz) {
    const auto signed_k = k < (n + 1) / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
    return signed_k * sample_rate_hz / static_cast<double>(n);
}

}  // namespace pbr::fft
