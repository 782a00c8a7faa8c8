#include "cotdr/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace cotdr::fft {

namespace {

// FFTW plan creation is not thread-safe and is expensive; plans are cached per
// size and reused through the new-array execute interface (FFTW_UNALIGNED makes
// that legal for arbitrary buffers).
struct PlanCache {
    std::mutex mu;
    std::map<std::size_t, fftw_plan> fwd;
    std::map<std::size_t, fftw_plan> inv;

    fftw_plan get(std::size_t n, bool forward) {
        std::lock_guard<std::mutex> lock(mu);
        auto& table = forward ? fwd : inv;
        auto it = table.find(n);
        if (it != table.end()) return it->second;
        std::vector<double> re(n);
        std::vector<fftw_complex> cx(n / 2 + 1);
        fftw_plan p = forward
            ? fftw_plan_dft_r2c_1d(static_cast<int>(n), re.data(), cx.data(),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED)
            : fftw_plan_dft_c2r_1d(static_cast<int>(n), cx.data(), re.data(),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
        table.emplace(n, p);
        return p;
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t nfft) {
    if (nfft < x.size()) throw std::invalid_argument("rfft: nfft smaller than input");
    std::vector<double> in(nfft, 0.0);
    std::memcpy(in.data(), x.data(), x.size() * sizeof(double));
    std::vector<std::complex<double>> out(nfft / 2 + 1);
    fftw_plan p = cache().get(nfft, true);
    fftw_execute_dft_r2c(p, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t nfft) {
    if (spectrum.size() != nfft / 2 + 1)
        throw std::invalid_argument("irfft: spectrum size does not match nfft");
    // c2r destroys its input; work on a copy.
    std::vector<std::complex<double>> in(spectrum.begin(), spectrum.end());
    std::vector<double> out(nfft);
    fftw_plan p = cache().get(nfft, false);
    fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(in.data()), out.data());
    const double scale = 1.0 / static_cast<double>(nfft);
    for (auto& v : out) v *= scale;
    return out;
}

void add_delayed_copy(std::span<const std::complex<double>> source,
                      std::span<std::complex<double>> dest, std::size_t nfft,
                      double sample_rate, double delay_seconds, double amplitude) {
    if (source.size() != dest.size() || source.size() != nfft / 2 + 1)
        throw std::invalid_argument("add_delayed_copy: size mismatch");
    // Phase per bin in cycles: f_k * tau = k * (fs * tau / nfft). Only the
    // fractional part of the per-bin increment matters; keeping it reduced
    // avoids evaluating sin/cos at huge arguments.
    const double cycles_per_bin = sample_rate * delay_seconds / static_cast<double>(nfft);
    const double frac = cycles_per_bin - std::floor(cycles_per_bin);
    const std::size_t nbins = source.size();
    for (std::size_t k = 0; k < nbins; ++k) {
        double cyc = std::fmod(static_cast<double>(k) * frac, 1.0);
        double ph = -2.0 * std::numbers::pi * cyc;
        std::complex<double> rot(std::cos(ph), std::sin(ph));
        dest[k] += amplitude * rot * source[k];
    }
    // Real signal constraint: Nyquist bin must stay real.
    if (nfft % 2 == 0) dest[nbins - 1] = std::complex<double>(dest[nbins - 1].real(), 0.0);
}

AnalogTrace delay_trace(const AnalogTrace& in, double delay_seconds) {
    const std::size_t n = in.samples.size();
    if (n == 0) return in;
    const std::size_t nfft = next_pow2(n);
    auto spec = rfft(in.samples, nfft);
    std::vector<std::complex<double>> shifted(spec.size(), {0.0, 0.0});
    add_delayed_copy(spec, shifted, nfft, in.sample_rate, delay_seconds, 1.0);
    auto full = irfft(shifted, nfft);
    AnalogTrace out = in;
    out.samples.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

}  // namespace cotdr::fft
