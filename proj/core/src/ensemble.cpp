#include "spinecho/ensemble.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spinecho/constants.hpp"
#include "spinecho/parallel.hpp"
#include "spinecho/rng.hpp"

namespace spinecho {

void EnsembleSpec::validate() const {
    if (n_atoms < 1) throw std::invalid_argument("n_atoms must be >= 1");
    if (!(temperature > 0)) throw std::invalid_argument("temperature must be positive");
    if (!(cloud_sigma.x > 0 && cloud_sigma.y > 0 && cloud_sigma.z > 0))
        throw std::invalid_argument("cloud_sigma components must be positive");
    if (!(mode_waist > 0)) throw std::invalid_argument("mode_waist must be positive");
    if (!(atom_mass > 0)) throw std::invalid_argument("atom_mass must be positive");
}

double thermal_sigma_v(const EnsembleSpec& spec) {
    spec.validate();
    return std::sqrt(constants::k_boltzmann * spec.temperature / spec.atom_mass);
}

double mean_thermal_speed(const EnsembleSpec& spec) {
    spec.validate();
    return std::sqrt(8.0 * constants::k_boltzmann * spec.temperature /
                     (std::numbers::pi * spec.atom_mass));
}

double mode_weight_at(const Vec3& position, double waist) {
    return std::exp(-(position.x * position.x + position.y * position.y) / (waist * waist));
}

AtomSample sample_atoms(const EnsembleSpec& spec, std::uint64_t seed, unsigned workers) {
    spec.validate();
    const double sigma_v = thermal_sigma_v(spec);

    AtomSample sample;
    sample.positions.resize(spec.n_atoms);
    sample.velocities.resize(spec.n_atoms);
    sample.weights.resize(spec.n_atoms);

    parallel_for(spec.n_atoms, workers, [&](std::size_t j) {
        Rng rng(seed, j);
        const auto [nx, ny] = rng.normal_pair();
        const auto [nz, nvx] = rng.normal_pair();
        const auto [nvy, nvz] = rng.normal_pair();
        const Vec3 pos{nx * spec.cloud_sigma.x, ny * spec.cloud_sigma.y, nz * spec.cloud_sigma.z};
        sample.positions[j] = pos;
        sample.velocities[j] = {nvx * sigma_v, nvy * sigma_v, nvz * sigma_v};
        sample.weights[j] = mode_weight_at(pos, spec.mode_waist);
    });

    return sample;
}

double infer_mode_waist(const AtomSample& atoms) {
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        const double rho2 = atoms.positions[j].x * atoms.positions[j].x +
                            atoms.positions[j].y * atoms.positions[j].y;
        if (atoms.weights[j] > 0.0 && atoms.weights[j] < 1.0 && rho2 > 0.0)
            return std::sqrt(-rho2 / std::log(atoms.weights[j]));
    }
    throw std::invalid_argument("cannot infer mode waist from sample weights");
}

} // namespace spinecho
