#pragma once

#include <string>

#include "spinecho/errors.hpp"

namespace spinecho::constants {

// SI defining constants (exact since the 2019 redefinition).
inline constexpr double k_boltzmann = 1.380649e-23; // J/K
inline constexpr double speed_of_light = 299792458.0; // m/s

// Atomic masses, CODATA-derived (atomic mass * 1.66053906660e-27 kg).
inline constexpr double rb87_mass_kg = 1.44316060e-25;
inline constexpr double rb85_mass_kg = 1.40999341e-25;
inline constexpr double cs133_mass_kg = 2.20694657e-25;

// Ground-state hyperfine splittings, Hz.
inline constexpr double rb87_hyperfine_hz = 6.834682610904e9;
inline constexpr double rb85_hyperfine_hz = 3.035732439e9;
inline constexpr double cs133_hyperfine_hz = 9.192631770e9; // exact, defines the second

} // namespace spinecho::constants

namespace spinecho {

struct SpeciesData {
    double mass_kg;
    double hyperfine_hz;
};

inline SpeciesData species_data(const std::string& name) {
    if (name == "Rb87") return {constants::rb87_mass_kg, constants::rb87_hyperfine_hz};
    if (name == "Rb85") return {constants::rb85_mass_kg, constants::rb85_hyperfine_hz};
    if (name == "Cs133") return {constants::cs133_mass_kg, constants::cs133_hyperfine_hz};
    throw ConfigError("unknown species '" + name + "' (known: Rb87, Rb85, Cs133)");
}

} // namespace spinecho
