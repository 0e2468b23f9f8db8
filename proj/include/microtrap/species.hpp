#pragma once

#include <string>

#include "microtrap/units.hpp"

namespace microtrap {

// A trappable atom in a single weak-field-seeking Zeeman state.
struct AtomSpecies {
  std::string name;
  double mass;                    // [kg]
  double gF_mF;                   // dimensionless, > 0 for trappable states
  double transition_wavelength;   // probe transition [m]

  double magnetic_moment() const { return gF_mF * constants::mu_bohr; }  // [J/T]

  // Photon recoil of the probe transition expressed as a frequency, h/(2 m lambda^2).
  double recoil_frequency() const {
    return constants::planck_h /
           (2.0 * mass * transition_wavelength * transition_wavelength);
  }
};

// 87Rb in |F=2, mF=2> probed on the D2 line. g_F*m_F = 1 for this state.
inline AtomSpecies species_rb87() {
  return AtomSpecies{
      .name = "Rb87|2,2>",
      .mass = 86.909180531 * constants::atomic_mass_unit,
      .gF_mF = 1.0,
      .transition_wavelength = 780.24e-9,
  };
}

}  // namespace microtrap
