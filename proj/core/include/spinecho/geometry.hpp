#pragma once

#include "spinecho/vec3.hpp"

namespace spinecho {

/// Wavevector in rad/m; magnitude is the Euclidean norm of the components.
struct Wavevector {
    Vec3 components;

    double magnitude() const { return components.norm(); }
    Vec3 direction() const { return components.normalized(); }
};

/// Beam wavelengths and directions of the four beams that matter here:
/// the coupling/read beam, the probe/write beam defining the signal spin
/// wave, and the two Raman rephasing beams.
///
/// Convention: the coupling beam runs along +z; the probe and Raman beams
/// are tilted from it in the x-z plane so that k_s and k_pi come out
/// collinear. Explicit direction overrides are allowed (misalignment
/// studies), in which case the angle fields keep their nominal values.
struct BeamGeometry {
    double lambda1; // Raman beam 1 wavelength, m (couples |s> <-> |e>)
    double lambda2; // Raman beam 2 wavelength, m (couples |g> <-> |e>)
    double lambda_c; // coupling/write beam wavelength, m
    double theta_s; // signal spin-wave angle, rad
    double theta_pi; // Raman intersection angle, rad

    Vec3 coupling_dir;
    Vec3 probe_dir;
    Vec3 raman1_dir;
    Vec3 raman2_dir;

    /// Coplanar construction from angles. lambda2 <= 0 derives beam 2 from
    /// beam 1 shifted down by the ground-state hyperfine splitting (a
    /// ~1.8e-5 relative change in |k2|, kept in exact mode, negligible at
    /// the quoted precision).
    static BeamGeometry from_angles(double lambda_c, double lambda1, double theta_s,
                                    double theta_pi, double lambda2 = 0.0,
                                    double hyperfine_hz = -1.0);

    BeamGeometry with_directions(const Vec3& coupling, const Vec3& probe, const Vec3& raman1,
                                 const Vec3& raman2) const;

    double k_coupling() const;
    double k_raman1() const;
    double k_raman2() const;
};

/// Signal spin-wave wavevector k_s = k_p - k_c (exact vector difference).
Wavevector spinwave_wavevector(const BeamGeometry& geom);

/// Raman grating wavevector k_pi = k_2 - k_1 (exact vector difference).
Wavevector raman_wavevector(const BeamGeometry& geom);

/// |k_s| / (2 |k_pi|), exact magnitudes. This is the optimal dt/T fraction.
/// Throws InfeasibleError on degenerate geometry (|k_pi| = 0).
double rephasing_ratio(const BeamGeometry& geom);

/// Smallest Raman intersection angle for which a two-pulse schedule fits
/// inside the storage window (dt <= T), i.e. the angle where the ratio is 1.
double min_feasible_theta_pi(const BeamGeometry& geom);

} // namespace spinecho
