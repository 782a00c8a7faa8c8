#include "cotdr/peak_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cotdr {

namespace {

double robust_noise_floor(const std::vector<double>& x) {
    std::vector<double> tmp(x);
    const std::size_t mid = tmp.size() / 2;
    std::nth_element(tmp.begin(), tmp.begin() + mid, tmp.end());
    const double median = tmp[mid];
    for (auto& v : tmp) v = std::abs(v - median);
    std::nth_element(tmp.begin(), tmp.begin() + mid, tmp.end());
    return 1.4826 * tmp[mid];
}

// Gaussian elimination with partial pivoting; false on (near-)singular systems.
bool solve4(double a[4][4], double b[4], double x[4]) {
    int piv[4] = {0, 1, 2, 3};
    for (int col = 0; col < 4; ++col) {
        int best = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[piv[r]][col]) > std::abs(a[piv[best]][col])) best = r;
        std::swap(piv[col], piv[best]);
        const double p = a[piv[col]][col];
        if (std::abs(p) < 1e-300) return false;
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[piv[r]][col] / p;
            for (int c = col; c < 4; ++c) a[piv[r]][c] -= f * a[piv[col]][c];
            b[piv[r]] -= f * b[piv[col]];
        }
    }
    for (int col = 3; col >= 0; --col) {
        double s = b[piv[col]];
        for (int c = col + 1; c < 4; ++c) s -= a[piv[col]][c] * x[c];
        x[col] = s / a[piv[col]][col];
    }
    return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]) &&
           std::isfinite(x[3]);
}

struct ParabolaEstimate {
    double mu;     // samples, relative to the center sample
    double sigma;  // samples
};

// Log-parabola through the maximum and its neighbours, on values already
// shifted to a ~zero baseline. Requires negative curvature in log space.
std::optional<ParabolaEstimate> log_parabola(double ym, double y0, double yp) {
    constexpr double tiny = 1e-12;
    if (y0 <= tiny) return std::nullopt;
    const double lm = std::log(std::max(ym, tiny));
    const double l0 = std::log(y0);
    const double lp = std::log(std::max(yp, tiny));
    const double d = lm + lp - 2.0 * l0;
    if (!(d < 0.0)) return std::nullopt;
    ParabolaEstimate est;
    est.mu = 0.5 * (lm - lp) / d;
    est.sigma = std::sqrt(-1.0 / d);
    return est;
}

}  // namespace

std::vector<std::size_t> detect_peaks(const AnalogTrace& corr, double threshold,
                                      double min_separation_s) {
    if (!(threshold > 0.0)) throw std::invalid_argument("peak threshold must be > 0");
    if (min_separation_s < 0.0)
        throw std::invalid_argument("min_separation must be >= 0");
    const auto& x = corr.samples;
    if (x.size() < 3) return {};

    const double floor_level = threshold * robust_noise_floor(x);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        // Plateaus count once, at their first sample.
        if (x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] > floor_level)
            candidates.push_back(i);
    }

    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] > x[b];
        return a < b;
    });
    const double min_sep_samples = min_separation_s * corr.sample_rate;
    std::vector<std::size_t> accepted;
    for (std::size_t c : candidates) {
        bool keep = true;
        for (std::size_t a : accepted) {
            const double d = std::abs(static_cast<double>(c) - static_cast<double>(a));
            if (d < min_sep_samples) {
                keep = false;
                break;
            }
        }
        if (keep) accepted.push_back(c);
    }
    std::sort(accepted.begin(), accepted.end());
    return accepted;
}

ReflectionPeak fit_gaussian(const AnalogTrace& corr, std::size_t center_index,
                            std::size_t half_window) {
    const auto& x = corr.samples;
    const double fs = corr.sample_rate;
    if (center_index == 0 || center_index + 1 >= x.size())
        throw std::invalid_argument("fit window outside trace");

    // Default half window: apex-focused, 1.5x the parabola sigma estimate,
    // never below 3 samples. Wide windows drag the Gaussian onto the flanks
    // of the (roughly triangular) true peak and bias the position.
    if (half_window == 0) {
        const std::size_t lo = center_index >= 8 ? center_index - 8 : 0;
        const std::size_t hi = std::min(x.size(), center_index + 9);
        const double local_min = *std::min_element(x.begin() + lo, x.begin() + hi);
        auto est = log_parabola(x[center_index - 1] - local_min,
                                x[center_index] - local_min,
                                x[center_index + 1] - local_min);
        half_window = 3;
        if (est)
            half_window = std::max<std::size_t>(
                3, static_cast<std::size_t>(std::llround(1.5 * est->sigma)));
    }

    if (center_index < half_window || center_index + half_window >= x.size())
        throw std::invalid_argument("fit window outside trace");
    if (2 * half_window + 1 < 5)
        throw std::invalid_argument("fit window must span at least 5 samples");

    const std::size_t first = center_index - half_window;
    const std::size_t last = center_index + half_window;
    const std::size_t npts = 2 * half_window + 1;

    double wmin = x[first], wmax = x[first];
    for (std::size_t i = first; i <= last; ++i) {
        wmin = std::min(wmin, x[i]);
        if (x[i] > wmax) wmax = x[i];
    }
    if (x[center_index] < wmax)
        throw std::invalid_argument("center sample is not the window maximum");
    const double scale = wmax - wmin;
    if (!(scale > 0.0))
        throw FitError("flat fit window", std::nullopt);

    // Normalized ordinates: peak ~1, baseline ~0.
    std::vector<double> z(npts);
    for (std::size_t i = 0; i < npts; ++i) z[i] = (x[first + i] - wmin) / scale;

    auto est = log_parabola(z[half_window - 1], z[half_window], z[half_window + 1]);
    if (!est)
        throw FitError("negative-curvature window: no peak to fit", std::nullopt);

    auto make_peak = [&](double amp, double mu_rel, double sig, double rms) {
        ReflectionPeak p;
        p.position = corr.t0 +
                     (static_cast<double>(center_index) + mu_rel) / fs;
        p.amplitude = amp * scale;
        p.sigma_width = sig / fs;
        p.rms_residual = rms * scale;
        p.window_first = first;
        p.window_last = last;
        return p;
    };
    const ReflectionPeak parabola_peak = make_peak(1.0, est->mu, est->sigma, 0.0);

    // Gauss-Newton with Levenberg damping, abscissa relative to the center.
    double A = 1.0, mu = est->mu, s = est->sigma, b = 0.0;
    auto ssr_of = [&](double A_, double mu_, double s_, double b_) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < npts; ++i) {
            const double t = static_cast<double>(i) - static_cast<double>(half_window);
            const double e = std::exp(-(t - mu_) * (t - mu_) / (2.0 * s_ * s_));
            const double r = A_ * e + b_ - z[i];
            ssr += r * r;
        }
        return ssr;
    };
    double ssr = ssr_of(A, mu, s, b);
    double lambda = 0.0;
    constexpr double tol = 1e-4;
    constexpr int max_iter = 50;
    bool converged = false;

    for (int iter = 0; iter < max_iter && !converged; ++iter) {
        double jtj[4][4] = {};
        double jtr[4] = {};
        for (std::size_t i = 0; i < npts; ++i) {
            const double t = static_cast<double>(i) - static_cast<double>(half_window);
            const double u = (t - mu) / s;
            const double e = std::exp(-0.5 * u * u);
            const double r = A * e + b - z[i];
            const double j[4] = {e, A * e * u / s, A * e * u * u / s, 1.0};
            for (int p = 0; p < 4; ++p) {
                jtr[p] += j[p] * r;
                for (int q = p; q < 4; ++q) jtj[p][q] += j[p] * j[q];
            }
        }
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < p; ++q) jtj[p][q] = jtj[q][p];

        bool stepped = false;
        for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
            double a2[4][4];
            double rhs[4];
            for (int p = 0; p < 4; ++p) {
                for (int q = 0; q < 4; ++q) a2[p][q] = jtj[p][q];
                a2[p][p] *= 1.0 + lambda;
                rhs[p] = -jtr[p];
            }
            double step[4];
            if (solve4(a2, rhs, step)) {
                const double A2 = A + step[0], mu2 = mu + step[1];
                const double s2 = s + step[2], b2 = b + step[3];
                if (s2 > 1e-6) {
                    const double ssr2 = ssr_of(A2, mu2, s2, b2);
                    if (ssr2 <= ssr * (1.0 + 1e-12)) {
                        A = A2;
                        mu = mu2;
                        s = s2;
                        b = b2;
                        ssr = ssr2;
                        lambda = lambda > 1e-7 ? lambda * 0.1 : 0.0;
                        stepped = true;
                        if (std::abs(step[1]) < tol && std::abs(step[2]) < tol &&
                            std::abs(step[0]) < tol * std::max(std::abs(A), 1.0) &&
                            std::abs(step[3]) < tol * std::max(std::abs(A), 1.0))
                            converged = true;
                        break;
                    }
                }
            }
            lambda = std::max(1e-4, lambda * 10.0);
        }
        if (!stepped) break;
    }
    if (!converged)
        throw FitError("gaussian fit did not converge", parabola_peak);

    return make_peak(A, mu, s, std::sqrt(ssr / static_cast<double>(npts)));
}

std::vector<ReflectionPeak> fit_peaks(const AnalogTrace& corr, double threshold,
                                      double min_separation_s) {
    std::vector<ReflectionPeak> peaks;
    for (std::size_t idx : detect_peaks(corr, threshold, min_separation_s))
        peaks.push_back(fit_gaussian(corr, idx));
    return peaks;
}

}  // namespace cotdr
