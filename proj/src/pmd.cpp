#include "cotdr/pmd.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "cotdr/fiber.hpp"
#include "cotdr/rng.hpp"

namespace cotdr {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

void check_band(double wavelength_m) {
    if (wavelength_m < 1.49e-6 || wavelength_m > 1.62e-6)
        throw std::invalid_argument("wavelength outside supported band [1.49, 1.62] um");
}

void check_model(const CorePolarizationModel& model) {
    if (model.segments.empty())
        throw std::invalid_argument("polarization model needs at least one segment");
    for (const auto& seg : model.segments)
        if (seg.dgd_s < 0.0) throw std::invalid_argument("segment dgd must be >= 0");
}

double omega_of(double wavelength_m) {
    return 2.0 * kPi * kSpeedOfLight / wavelength_m;
}

JonesMatrix jones_at_omega(const CorePolarizationModel& model, double omega) {
    JonesMatrix j;
    j(0, 0) = 1.0;
    j(1, 1) = 1.0;
    for (const auto& seg : model.segments) {
        const double phi = omega * seg.dgd_s / 2.0 + seg.phase_offset_rad;
        const cplx e(std::cos(phi), std::sin(phi));
        const double c = std::cos(seg.axis_angle_rad), s = std::sin(seg.axis_angle_rad);
        // R(theta) * diag(e, conj(e)) * R(-theta)
        JonesMatrix seg_j;
        seg_j(0, 0) = c * c * e + s * s * std::conj(e);
        seg_j(0, 1) = c * s * (e - std::conj(e));
        seg_j(1, 0) = c * s * (e - std::conj(e));
        seg_j(1, 1) = s * s * e + c * c * std::conj(e);
        j = seg_j * j;
    }
    return j;
}

/// Eigenvalues of a 2x2 complex matrix (quadratic formula).
std::array<cplx, 2> eigenvalues(const JonesMatrix& j) {
    const cplx tr = j(0, 0) + j(1, 1);
    const cplx det = j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0);
    const cplx disc = std::sqrt(tr * tr - 4.0 * det);
    return {(tr + disc) / 2.0, (tr - disc) / 2.0};
}

/// Eigenvector of j for eigenvalue lambda, picked from the numerically larger
/// of the two adjugate columns.
std::array<cplx, 2> eigenvector(const JonesMatrix& j, cplx lambda) {
    const std::array<cplx, 2> v1 = {j(0, 1), lambda - j(0, 0)};
    const std::array<cplx, 2> v2 = {lambda - j(1, 1), j(1, 0)};
    const double n1 = std::norm(v1[0]) + std::norm(v1[1]);
    const double n2 = std::norm(v2[0]) + std::norm(v2[1]);
    std::array<cplx, 2> v = n1 >= n2 ? v1 : v2;
    const double n = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    if (n < 1e-150) return {1.0, 0.0};  // degenerate (zero DGD): any state works
    return {v[0] / n, v[1] / n};
}

StokesVector to_stokes(const std::array<cplx, 2>& jones_vec) {
    const cplx ex = jones_vec[0], ey = jones_vec[1];
    StokesVector s;
    s.s1 = std::norm(ex) - std::norm(ey);
    s.s2 = 2.0 * std::real(std::conj(ex) * ey);
    s.s3 = 2.0 * std::imag(std::conj(ex) * ey);
    return s;
}

std::array<cplx, 2> to_jones(const StokesVector& s) {
    const double theta = std::acos(std::clamp(s.s1, -1.0, 1.0));
    const double phi = std::atan2(s.s3, s.s2);
    return {std::cos(theta / 2.0),
            std::polar(std::sin(theta / 2.0), phi)};
}

struct RatioEigen {
    double dgd;
    double tau_avg;
    std::array<cplx, 2> slow_vec;
};

/// Eigen-decomposition of the frequency-ratio matrix; `input_side` selects
/// J^-1(w) J(w+dw) (input PSPs) versus J(w+dw) J^-1(w) (output PSPs).
RatioEigen ratio_eigen(const CorePolarizationModel& model, double omega,
                       double delta_omega, bool input_side) {
    const JonesMatrix j1 = jones_at_omega(model, omega);
    const JonesMatrix j2 = jones_at_omega(model, omega + delta_omega);
    const JonesMatrix g =
        input_side ? inverse(j1) * j2 : j2 * inverse(j1);
    const auto ev = eigenvalues(g);
    const double split = std::abs(std::arg(ev[0] / ev[1]));
    if (split > 0.98 * kPi)
        throw SimulationError(
            "dgd eigenphase split near pi: reduce delta_omega to avoid wrapping");
    RatioEigen out;
    out.dgd = split / delta_omega;
    // Common phase carries the polarization-averaged group delay.
    const double common = std::arg(ev[0] * ev[1]) / 2.0;
    out.tau_avg = common / delta_omega;
    // Slow state: the eigenvalue whose phase (relative to the common phase)
    // is larger, with the e^{+i omega tau} convention used by the segments.
    const double p0 = std::arg(ev[0] * std::polar(1.0, -common));
    out.slow_vec = eigenvector(g, p0 >= 0.0 ? ev[0] : ev[1]);
    return out;
}

constexpr double kDefaultJmeDeltaOmega = 2.0 * kPi * 2.5e8;

}  // namespace

double StokesVector::norm() const { return std::sqrt(s1 * s1 + s2 * s2 + s3 * s3); }

JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b) {
    JonesMatrix r;
    r(0, 0) = a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0);
    r(0, 1) = a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1);
    r(1, 0) = a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0);
    r(1, 1) = a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1);
    return r;
}

JonesMatrix inverse(const JonesMatrix& j) {
    const cplx det = j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0);
    if (std::abs(det) < 1e-300) throw std::invalid_argument("singular Jones matrix");
    JonesMatrix r;
    r(0, 0) = j(1, 1) / det;
    r(0, 1) = -j(0, 1) / det;
    r(1, 0) = -j(1, 0) / det;
    r(1, 1) = j(0, 0) / det;
    return r;
}

JonesMatrix adjoint(const JonesMatrix& j) {
    JonesMatrix r;
    r(0, 0) = std::conj(j(0, 0));
    r(0, 1) = std::conj(j(1, 0));
    r(1, 0) = std::conj(j(0, 1));
    r(1, 1) = std::conj(j(1, 1));
    return r;
}

JonesMatrix jones_matrix(const CorePolarizationModel& model, double wavelength_m) {
    check_band(wavelength_m);
    check_model(model);
    return jones_at_omega(model, omega_of(wavelength_m));
}

double dgd_jme(const CorePolarizationModel& model, double wavelength_m,
               double delta_omega) {
    check_band(wavelength_m);
    check_model(model);
    if (!(delta_omega > 0.0)) throw std::invalid_argument("delta_omega must be > 0");
    return ratio_eigen(model, omega_of(wavelength_m), delta_omega, false).dgd;
}

JmeAnalysis jme_analysis(const CorePolarizationModel& model, double wavelength_m,
                         double delta_omega) {
    check_band(wavelength_m);
    check_model(model);
    if (!(delta_omega > 0.0)) throw std::invalid_argument("delta_omega must be > 0");
    const auto r = ratio_eigen(model, omega_of(wavelength_m), delta_omega, true);
    JmeAnalysis out;
    out.dgd_s = r.dgd;
    out.tau_avg_s = r.tau_avg;
    out.psp_slow = to_stokes(r.slow_vec);
    return out;
}

double mps_group_delay(const CorePolarizationModel& model, const StokesVector& input_sop,
                       double wavelength_m, double mod_freq_hz, double base_delay_s) {
    check_band(wavelength_m);
    check_model(model);
    if (!(mod_freq_hz > 0.0)) throw std::invalid_argument("mod_freq must be > 0");
    if (std::abs(input_sop.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("input SOP must be a unit Stokes vector");

    const double omega = omega_of(wavelength_m);
    const double omega_m = 2.0 * kPi * mod_freq_hz;

    // Ambiguity guard: after removing the coarse (base) delay, the spread of
    // the per-SOP delays must stay below half a modulation period.
    const auto jme = ratio_eigen(model, omega, kDefaultJmeDeltaOmega, true);
    if ((jme.dgd + 2.0 * std::abs(jme.tau_avg)) * omega_m >= kPi)
        throw SimulationError(
            "mps ambiguity: delay spread exceeds half a modulation period");

    // Detected RF beat between the two modulation sidebands of the carrier:
    // phase arg(e^dagger J(w-)^dagger J(w+) e) over the modulation frequency.
    const JonesMatrix jm = jones_at_omega(model, omega - omega_m / 2.0);
    const JonesMatrix jp = jones_at_omega(model, omega + omega_m / 2.0);
    const auto e = to_jones(input_sop);
    const JonesMatrix t = adjoint(jm) * jp;
    const cplx beat = std::conj(e[0]) * (t(0, 0) * e[0] + t(0, 1) * e[1]) +
                      std::conj(e[1]) * (t(1, 0) * e[0] + t(1, 1) * e[1]);
    return base_delay_s + std::arg(beat) / omega_m;
}

PmdReport pmd_report(const CorePolarizationModel& model,
                     std::array<double, 2> band_m, int n_points,
                     const std::array<StokesVector, 4>& sops, double mod_freq_hz,
                     double base_delay_s) {
    if (n_points < 2) throw std::invalid_argument("pmd sweep needs n_points >= 2");
    if (!(band_m[0] < band_m[1])) throw std::invalid_argument("invalid sweep band");
    check_band(band_m[0]);
    check_band(band_m[1]);

    // Linear-form design matrix tau = a + (1/2) d . s over the probed SOPs,
    // solved in least squares via its normal equations (4 unknowns).
    PmdReport rep;
    rep.wavelengths_m.resize(n_points);
    rep.dgd_mps_s.resize(n_points);
    rep.dgd_fit_s.resize(n_points);
    rep.dgd_jme_s.resize(n_points);

    for (int i = 0; i < n_points; ++i) {
        const double lam = band_m[0] + (band_m[1] - band_m[0]) * i / (n_points - 1);
        rep.wavelengths_m[i] = lam;

        double tau[4];
        double lo = 0.0, hi = 0.0;
        for (int k = 0; k < 4; ++k) {
            tau[k] = mps_group_delay(model, sops[k], lam, mod_freq_hz, base_delay_s);
            if (k == 0) {
                lo = hi = tau[k];
            } else {
                lo = std::min(lo, tau[k]);
                hi = std::max(hi, tau[k]);
            }
        }
        rep.dgd_mps_s[i] = hi - lo;
        rep.dgd_jme_s[i] = dgd_jme(model, lam, kDefaultJmeDeltaOmega);

        // Exact with 4 affinely independent SOPs: solve [1 s] x = tau.
        double m[4][4] = {};
        double rhs[4] = {};
        const StokesVector* sv = sops.data();
        for (int k = 0; k < 4; ++k) {
            const double row[4] = {1.0, sv[k].s1, sv[k].s2, sv[k].s3};
            for (int p = 0; p < 4; ++p) {
                rhs[p] += row[p] * tau[k];
                for (int q = 0; q < 4; ++q) m[p][q] += row[p] * row[q];
            }
        }
        // Gaussian elimination (partial pivoting) on the 4x4 normal equations.
        int piv[4] = {0, 1, 2, 3};
        bool ok = true;
        for (int col = 0; col < 4 && ok; ++col) {
            int best = col;
            for (int r = col + 1; r < 4; ++r)
                if (std::abs(m[piv[r]][col]) > std::abs(m[piv[best]][col])) best = r;
            std::swap(piv[col], piv[best]);
            if (std::abs(m[piv[col]][col]) < 1e-30) {
                ok = false;
                break;
            }
            for (int r = col + 1; r < 4; ++r) {
                const double f = m[piv[r]][col] / m[piv[col]][col];
                for (int c = col; c < 4; ++c) m[piv[r]][c] -= f * m[piv[col]][c];
                rhs[piv[r]] -= f * rhs[piv[col]];
            }
        }
        if (ok) {
            double x[4];
            for (int col = 3; col >= 0; --col) {
                double s = rhs[piv[col]];
                for (int c = col + 1; c < 4; ++c) s -= m[piv[col]][c] * x[c];
                x[col] = s / m[piv[col]][col];
            }
            rep.dgd_fit_s[i] = 2.0 * std::sqrt(x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
        } else {
            rep.dgd_fit_s[i] = rep.dgd_mps_s[i];  // degenerate SOP set
        }
    }

    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    rep.pmd_mps_s = mean(rep.dgd_mps_s);
    rep.pmd_fit_s = mean(rep.dgd_fit_s);
    rep.pmd_jme_s = mean(rep.dgd_jme_s);
    return rep;
}

std::array<StokesVector, 4> default_sops() {
    return {StokesVector{1.0, 0.0, 0.0}, StokesVector{-1.0, 0.0, 0.0},
            StokesVector{0.0, 1.0, 0.0}, StokesVector{0.0, 0.0, 1.0}};
}

CorePolarizationModel make_random_model(double target_mean_dgd_s, int n_segments,
                                        std::uint64_t seed) {
    if (n_segments < 1) throw std::invalid_argument("model needs >= 1 segment");
    if (target_mean_dgd_s < 0.0) throw std::invalid_argument("mean dgd must be >= 0");
    auto rng = make_rng({seed, 0x706d64ULL});
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> axis(0.0, kPi);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);

    CorePolarizationModel model;
    model.segments.resize(n_segments);
    double sum_sq = 0.0;
    for (auto& seg : model.segments) {
        seg.dgd_s = std::abs(nd(rng));
        seg.axis_angle_rad = axis(rng);
        seg.phase_offset_rad = phase(rng);
        sum_sq += seg.dgd_s * seg.dgd_s;
    }
    // Maxwellian concatenation: mean DGD = sqrt(8/(3 pi)) * sqrt(sum dgd_i^2).
    const double target_rms = target_mean_dgd_s * std::sqrt(3.0 * kPi / 8.0);
    const double scale = sum_sq > 0.0 ? target_rms / std::sqrt(sum_sq) : 0.0;
    for (auto& seg : model.segments) seg.dgd_s *= scale;
    return model;
}

CorePolarizationModel make_uniform_model(double total_dgd_s, int n_segments) {
    if (n_segments < 1) throw std::invalid_argument("model needs >= 1 segment");
    CorePolarizationModel model;
    model.segments.assign(n_segments,
                          BirefringentSegment{total_dgd_s / n_segments, 0.0, 0.0});
    return model;
}

}  // namespace cotdr
