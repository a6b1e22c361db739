#include "spinecho/noise.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "spinecho/errors.hpp"
#include "spinecho/parallel.hpp"

namespace spinecho {

namespace {

constexpr double four_pi = 4.0 * std::numbers::pi;

} // namespace

DetectionMode DetectionMode::from_waist(const Vec3& direction, double waist, double wavelength) {
    if (!(waist > 0.0)) throw std::invalid_argument("detection mode waist must be positive");
    DetectionMode mode;
    mode.direction = direction;
    mode.wavelength = wavelength;
    mode.solid_angle = wavelength * wavelength / (2.0 * std::numbers::pi * waist * waist);
    mode.validate();
    return mode;
}

double DetectionMode::divergence_angle() const {
    return std::sqrt(2.0 * solid_angle / std::numbers::pi);
}

void DetectionMode::validate() const {
    if (!(solid_angle > 0.0)) throw std::invalid_argument("detection solid angle must be > 0");
    if (!(wavelength > 0.0)) throw std::invalid_argument("detection wavelength must be > 0");
    if (std::abs(direction.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("detection direction is not unit length");
}

double incoherent_noise_floor(double epsilon, double n_atoms, double solid_angle) {
    if (epsilon < 0.0 || epsilon >= 1.0)
        throw std::invalid_argument("epsilon must be in [0, 1)");
    if (!(n_atoms >= 1.0)) throw std::invalid_argument("n_atoms must be >= 1");
    if (!(solid_angle > 0.0 && solid_angle <= four_pi))
        throw std::invalid_argument("solid angle must be in (0, 4pi]");
    return 2.0 * epsilon * n_atoms * solid_angle / four_pi;
}

double residual_population(double epsilon, int n_pulses) {
    return 1.0 - std::pow(1.0 - epsilon, n_pulses);
}

Vec3 noise_lobe_direction(const BeamGeometry& geom) {
    const Vec3 k_read = geom.coupling_dir * geom.k_coupling();
    return (k_read + raman_wavevector(geom).components).normalized();
}

NoiseMap directional_noise_map(const AtomSample& atoms, const BeamGeometry& geom, double epsilon,
                               const NoiseGrid& grid, int n_pulses, unsigned workers,
                               double mode_waist) {
    if (grid.nx < 3 || grid.ny < 3) throw std::invalid_argument("noise grid needs >= 3x3 cells");
    if (epsilon < 0.0 || epsilon >= 1.0)
        throw std::invalid_argument("epsilon must be in [0, 1)");
    const double waist = mode_waist > 0.0 ? mode_waist : infer_mode_waist(atoms);
    const double lobe_full_width = 2.0 * geom.lambda_c / (std::numbers::pi * waist);

    NoiseMap map;
    const double span_x = grid.half_span_x > 0.0 ? grid.half_span_x : 5.0 * lobe_full_width;
    const double span_y = grid.half_span_y > 0.0 ? grid.half_span_y : 5.0 * lobe_full_width;
    map.covers_lobe = span_x >= 2.0 * lobe_full_width && span_y >= 2.0 * lobe_full_width;
    map.lobe_center_angle =
        std::acos(std::clamp(noise_lobe_direction(geom).dot(geom.coupling_dir), -1.0, 1.0));

    const std::size_t nx = grid.nx, ny = grid.ny;
    map.theta_x.resize(nx);
    map.theta_y.resize(ny);
    const double dx = 2.0 * span_x / static_cast<double>(nx - 1);
    const double dy = 2.0 * span_y / static_cast<double>(ny - 1);
    for (std::size_t i = 0; i < nx; ++i) map.theta_x[i] = -span_x + dx * static_cast<double>(i);
    for (std::size_t i = 0; i < ny; ++i) map.theta_y[i] = -span_y + dy * static_cast<double>(i);
    map.cell_solid_angle = dx * dy;

    // Write*read mode product weight per atom.
    const std::size_t n = atoms.size();
    std::vector<double> b(n);
    double sum_b = 0.0, sum_b2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        b[j] = atoms.weights[j] * atoms.weights[j];
        sum_b += b[j];
        sum_b2 += b[j] * b[j];
    }
    map.n_eff = sum_b2 > 0.0 ? sum_b * sum_b / sum_b2 : 0.0;

    const double r_pop = residual_population(epsilon, n_pulses);
    const double n_atoms = static_cast<double>(n);
    const double scale = map.cell_solid_angle / four_pi * r_pop;
    map.floor_photons_per_cell = scale * n_atoms;
    const double incoherent_rest = n_atoms - sum_b2;

    map.photons.assign(nx * ny, 0.0);
    if (r_pop == 0.0) return map;

    const double k_read = geom.k_coupling();
    parallel_for(ny, workers, [&](std::size_t iy) {
        const double qy = k_read * map.theta_y[iy];
        const double qx0 = k_read * map.theta_x[0];
        const double dqx = k_read * dx;
        std::vector<std::complex<double>> row(nx, {0.0, 0.0});
        for (std::size_t j = 0; j < n; ++j) {
            if (b[j] == 0.0) continue;
            const double x = atoms.positions[j].x;
            const double y = atoms.positions[j].y;
            std::complex<double> cur =
                b[j] * std::complex<double>(std::cos(qx0 * x + qy * y), std::sin(qx0 * x + qy * y));
            const std::complex<double> rot(std::cos(dqx * x), std::sin(dqx * x));
            for (std::size_t ix = 0; ix < nx; ++ix) {
                row[ix] += cur;
                cur *= rot;
            }
        }
        for (std::size_t ix = 0; ix < nx; ++ix)
            map.photons[iy * nx + ix] = scale * (incoherent_rest + std::norm(row[ix]));
    });
    return map;
}

double far_angle_mean(const NoiseMap& map, double inner_fraction) {
    const double span_x = map.theta_x.back();
    const double span_y = map.theta_y.back();
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t iy = 0; iy < map.ny(); ++iy) {
        for (std::size_t ix = 0; ix < map.nx(); ++ix) {
            const double fx = std::abs(map.theta_x[ix]) / span_x;
            const double fy = std::abs(map.theta_y[iy]) / span_y;
            if (std::max(fx, fy) > inner_fraction) {
                sum += map.at(ix, iy);
                ++count;
            }
        }
    }
    if (count == 0) throw std::invalid_argument("no far-angle cells at this inner_fraction");
    return sum / static_cast<double>(count);
}

double noise_into_readout_mode(const BeamGeometry& geom, const EnsembleSpec& spec, double epsilon,
                               const DetectionMode& detection, double detection_efficiency,
                               double calibration, int n_pulses) {
    detection.validate();
    spec.validate();
    const double r_pop = residual_population(epsilon, n_pulses);
    const double n_atoms = static_cast<double>(spec.n_atoms);
    const double floor = r_pop * n_atoms * detection.solid_angle / four_pi;

    // Transverse mismatch between the detected mode and the phase-matched
    // lobe direction.
    const Vec3 u_pm = noise_lobe_direction(geom);
    const double k_det = 2.0 * std::numbers::pi / detection.wavelength;
    const Vec3 dk = (detection.direction - u_pm) * k_det;
    const double dk_long = dk.dot(u_pm);
    const double q2 = std::max(0.0, dk.norm2() - dk_long * dk_long);

    const double w2 = spec.mode_waist * spec.mode_waist;
    const double sigma_perp2 = spec.cloud_sigma.x * spec.cloud_sigma.y;
    const double mean_b_dim = 1.0 / std::sqrt(1.0 + 4.0 * sigma_perp2 / w2);
    const double sigma_e2 = 1.0 / (1.0 / sigma_perp2 + 4.0 / w2);
    const double lobe = n_atoms * std::pow(mean_b_dim, 4) * std::exp(-q2 * sigma_e2);

    return detection_efficiency * calibration * floor * (1.0 + lobe);
}

double noise_into_readout_mode(const NoiseMap& map, const DetectionMode& detection,
                               double offset_x, double offset_y, double detection_efficiency,
                               double calibration) {
    detection.validate();
    const double theta_d2 = detection.divergence_angle() * detection.divergence_angle();
    double sum = 0.0;
    for (std::size_t iy = 0; iy < map.ny(); ++iy) {
        for (std::size_t ix = 0; ix < map.nx(); ++ix) {
            const double ddx = map.theta_x[ix] - offset_x;
            const double ddy = map.theta_y[iy] - offset_y;
            sum += map.at(ix, iy) * std::exp(-2.0 * (ddx * ddx + ddy * ddy) / theta_d2);
        }
    }
    return detection_efficiency * calibration * sum;
}

double calibrate_noise(const BeamGeometry& geom, const EnsembleSpec& spec, double epsilon_ref,
                       const DetectionMode& detection, double target_probability,
                       double detection_efficiency, int n_pulses) {
    const double raw = noise_into_readout_mode(geom, spec, epsilon_ref, detection,
                                               detection_efficiency, 1.0, n_pulses);
    if (!(raw > 0.0)) throw InfeasibleError("noise calibration reference evaluates to zero");
    return target_probability / raw;
}

} // namespace spinecho
