#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spinecho/vec3.hpp"

namespace spinecho {

/// Thermal cloud description. All SI (kelvin, meters, kilograms).
struct EnsembleSpec {
    std::size_t n_atoms = 0;
    double temperature = 0.0;
    Vec3 cloud_sigma; // Gaussian cloud standard deviations per axis, m
    double mode_waist = 0.0; // Gaussian mode waist for mode weighting, m
    double atom_mass = 0.0; // kg

    void validate() const;
};

/// One Monte Carlo realization of the cloud; all sequences share the atom index.
struct AtomSample {
    std::vector<Vec3> positions; // m
    std::vector<Vec3> velocities; // m/s
    std::vector<double> weights; // Gaussian mode overlap at t = 0, in [0, 1]

    std::size_t size() const { return positions.size(); }
};

/// One-dimensional RMS thermal velocity sqrt(kB T / m). This is the sigma of
/// each velocity component and the scale that makes the Gaussian decay law
/// exact; the mean speed convention is reported separately.
double thermal_sigma_v(const EnsembleSpec& spec);

/// Mean thermal speed sqrt(8 kB T / (pi m)), the other common convention.
double mean_thermal_speed(const EnsembleSpec& spec);

/// Mode overlap weight exp(-(x^2 + y^2) / waist^2); z-independent.
double mode_weight_at(const Vec3& position, double waist);

/// Draws positions ~ N(0, diag(cloud_sigma^2)), velocity components
/// ~ N(0, sigma_v^2), and mode weights at t = 0. Atom j consumes only
/// substream j of the seed (three Box-Muller pairs: x/y, z/vx, vy/vz), so the
/// result is bit-identical for any worker count and any generation order.
AtomSample sample_atoms(const EnsembleSpec& spec, std::uint64_t seed, unsigned workers = 1);

/// Recovers the mode waist a sample's weights were computed with.
double infer_mode_waist(const AtomSample& atoms);

} // namespace spinecho
