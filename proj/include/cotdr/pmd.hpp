#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "cotdr/types.hpp"

namespace cotdr {

/// One birefringent waveplate: differential delay, fast-axis orientation and a
/// static retardation offset.
struct BirefringentSegment {
    double dgd_s = 0.0;
    double axis_angle_rad = 0.0;
    double phase_offset_rad = 0.0;
};

struct CorePolarizationModel {
    std::vector<BirefringentSegment> segments;
};

struct StokesVector {
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;

    double norm() const;
};

/// 2x2 complex Jones matrix, row-major [[a, b], [c, d]].
struct JonesMatrix {
    std::array<std::complex<double>, 4> m{};

    std::complex<double>& operator()(int r, int c) { return m[2 * r + c]; }
    const std::complex<double>& operator()(int r, int c) const { return m[2 * r + c]; }
};

JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b);
JonesMatrix inverse(const JonesMatrix& j);
JonesMatrix adjoint(const JonesMatrix& j);

/// Segment retarders concatenated at the given wavelength; each contributes a
/// frequency-dependent phase omega * dgd/2 plus its static offset. Wavelength
/// must lie in the supported sweep band [1.49, 1.62] um.
JonesMatrix jones_matrix(const CorePolarizationModel& model, double wavelength_m);

/// Differential group delay via Jones-matrix eigenanalysis: the eigenvalues of
/// J(omega + dw) * J(omega)^-1 split by dw * DGD in phase. Throws when the
/// phase split approaches pi (wrap), asking for a smaller delta_omega.
double dgd_jme(const CorePolarizationModel& model, double wavelength_m,
               double delta_omega);

/// Full JME analysis: DGD, the polarization-averaged group delay, and the
/// slow input principal state in Stokes space.
struct JmeAnalysis {
    double dgd_s = 0.0;
    double tau_avg_s = 0.0;
    StokesVector psp_slow;
};
JmeAnalysis jme_analysis(const CorePolarizationModel& model, double wavelength_m,
                         double delta_omega);

/// Group delay seen by a modulation-phase-shift measurement for one input SOP:
/// the RF phase of the detected intensity beat between the two modulation
/// sidebands, converted to delay and unwrapped against base_delay. Throws when
/// the polarization-induced spread exceeds half a modulation period.
double mps_group_delay(const CorePolarizationModel& model, const StokesVector& input_sop,
                       double wavelength_m, double mod_freq_hz, double base_delay_s);

struct PmdReport {
    std::vector<double> wavelengths_m;
    std::vector<double> dgd_mps_s;   // max - min over the probed SOPs
    std::vector<double> dgd_fit_s;   // linear-form fit over the probed SOPs
    std::vector<double> dgd_jme_s;   // eigenanalysis oracle
    double pmd_mps_s = 0.0;          // mean of dgd_mps over wavelength
    double pmd_fit_s = 0.0;
    double pmd_jme_s = 0.0;
};

/// DGD versus wavelength over [band_lo, band_hi] at n_points, probing the four
/// SOPs with the MPS emulation; PMD is the arithmetic mean over wavelength.
PmdReport pmd_report(const CorePolarizationModel& model,
                     std::array<double, 2> band_m, int n_points,
                     const std::array<StokesVector, 4>& sops, double mod_freq_hz,
                     double base_delay_s);

/// Default probe states {+S1, -S1, +S2, +S3}.
std::array<StokesVector, 4> default_sops();

/// Randomized concatenation model: n_segments waveplates with uniform axes and
/// per-segment delays scaled so that sqrt(sum dgd_i^2) hits the RMS DGD that
/// gives `target_mean_dgd_s` under Maxwellian concatenation statistics.
CorePolarizationModel make_random_model(double target_mean_dgd_s, int n_segments,
                                        std::uint64_t seed);

/// Single-axis model with the given total DGD (wavelength-flat birefringence).
CorePolarizationModel make_uniform_model(double total_dgd_s, int n_segments = 1);

}  // namespace cotdr
