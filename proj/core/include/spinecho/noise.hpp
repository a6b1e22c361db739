#pragma once

#include <cstddef>
#include <vector>

#include "spinecho/ensemble.hpp"
#include "spinecho/geometry.hpp"
#include "spinecho/vec3.hpp"

namespace spinecho {

/// Single-mode detector: direction, effective solid angle and wavelength.
/// A Gaussian mode of waist w has far-field intensity exp(-2 theta^2/theta_d^2)
/// with theta_d = lambda / (pi w); its effective solid angle (integral of the
/// peak-normalized acceptance) is pi theta_d^2 / 2 = lambda^2 / (2 pi w^2).
struct DetectionMode {
    Vec3 direction; // unit
    double solid_angle = 0.0; // sr
    double wavelength = 0.0; // m

    static DetectionMode from_waist(const Vec3& direction, double waist, double wavelength);
    double divergence_angle() const; // theta_d, rad
    void validate() const;
};

/// Incoherent pi-pulse noise into a solid angle: 2 eps N dOmega / (4 pi)
/// photons per shot.
double incoherent_noise_floor(double epsilon, double n_atoms, double solid_angle);

/// Residual wrong-state population after n imperfect pulses, 1 - (1-eps)^n.
double residual_population(double epsilon, int n_pulses);

struct NoiseGrid {
    std::size_t nx = 101;
    std::size_t ny = 101;
    double half_span_x = 0.0; // rad around the lobe center; 0 = auto (5 lobe widths)
    double half_span_y = 0.0;
};

/// Angular map of the read-out noise around the k_pi phase-matched direction.
/// Angles are offsets from the lobe center (which sits at theta_pi from the
/// read axis); intensity is expected photons per shot per grid cell.
struct NoiseMap {
    std::vector<double> theta_x; // rad, strictly increasing
    std::vector<double> theta_y;
    std::vector<double> photons; // row-major, [iy * nx + ix]
    double cell_solid_angle = 0.0;
    double floor_photons_per_cell = 0.0; // incoherent component per cell
    double n_eff = 0.0; // (sum b)^2 / sum b^2 of the mode-product weights
    double lobe_center_angle = 0.0; // rad from the read axis (metadata)
    bool covers_lobe = false;

    std::size_t nx() const { return theta_x.size(); }
    std::size_t ny() const { return theta_y.size(); }
    double at(std::size_t ix, std::size_t iy) const { return photons[iy * nx() + ix]; }
};

/// Phased-array noise map from the sampled atoms. Per cell,
///   I = (dOmega/4pi) * r * [ (N - sum b^2) + |sum_j b_j e^{i dk . rho_j}|^2 ],
/// with b_j = w_j^2 the write*read mode product weight and r the residual
/// population. The far-angle expectation is exactly the incoherent floor and
/// the coherent lobe width emerges from the sample, not from an input.
NoiseMap directional_noise_map(const AtomSample& atoms, const BeamGeometry& geom, double epsilon,
                               const NoiseGrid& grid, int n_pulses = 2, unsigned workers = 1,
                               double mode_waist = 0.0);

/// Mean intensity of the map's far-angle region (beyond `inner_fraction` of
/// the half-span), in photons per cell; compares against the floor.
double far_angle_mean(const NoiseMap& map, double inner_fraction = 0.7);

/// Closed-form expected pi-pulse noise photons per shot in one detection
/// mode, floor plus the collectively enhanced lobe evaluated at the mode's
/// offset from the phase-matched direction. The transverse cloud is treated
/// as isotropic with sigma = sqrt(sigma_x sigma_y).
double noise_into_readout_mode(const BeamGeometry& geom, const EnsembleSpec& spec, double epsilon,
                               const DetectionMode& detection, double detection_efficiency = 1.0,
                               double calibration = 1.0, int n_pulses = 2);

/// Map-integration flavor: weights each cell by the detection mode's angular
/// acceptance centered at `offset` from the lobe center.
double noise_into_readout_mode(const NoiseMap& map, const DetectionMode& detection,
                               double offset_x, double offset_y,
                               double detection_efficiency = 1.0, double calibration = 1.0);

/// Calibration constant that makes noise_into_readout_mode hit
/// `target_probability` at `epsilon_ref` for this configuration.
double calibrate_noise(const BeamGeometry& geom, const EnsembleSpec& spec, double epsilon_ref,
                       const DetectionMode& detection, double target_probability,
                       double detection_efficiency = 1.0, int n_pulses = 2);

/// Direction of maximal phase matching for the k_pi noise grating,
/// normalize(k_read * coupling_dir + k_pi).
Vec3 noise_lobe_direction(const BeamGeometry& geom);

} // namespace spinecho
