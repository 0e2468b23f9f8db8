#pragma once

#include <numbers>

namespace microtrap {

// Internal unit system is strict SI: tesla, meter, ampere, second, kilogram.
// File and CLI I/O use the units the atom-chip community works in (G, um, mm,
// ms) and convert at the boundary with the helpers below.
//
// mu0/(2*pi) = 2e-7 T*m/A exactly, i.e. 2 G*mm/A: a 1 A wire produces 2 G at
// 1 mm distance. The Biot-Savart prefactors below are written in terms of
// this constant so that the coefficient is exact in floating point.

namespace constants {

inline constexpr double pi = std::numbers::pi;

inline constexpr double mu0_over_2pi = 2.0e-7;       // [T m / A], exact
inline constexpr double mu0_over_4pi = 1.0e-7;       // [T m / A], exact
inline constexpr double mu0 = 2.0 * pi * mu0_over_2pi;

inline constexpr double planck_h = 6.62607015e-34;   // [J s], exact (SI 2019)
inline constexpr double hbar = planck_h / (2.0 * pi);
inline constexpr double k_boltzmann = 1.380649e-23;  // [J/K], exact (SI 2019)
inline constexpr double mu_bohr = 9.2740100657e-24;  // [J/T], CODATA 2022
inline constexpr double atomic_mass_unit = 1.66053906892e-27;  // [kg], CODATA 2022
inline constexpr double proton_mass = 1.67262192595e-27;       // [kg], CODATA 2022
inline constexpr double g_earth = 9.80665;           // standard gravity [m/s^2]

}  // namespace constants

// Magnetic field
inline constexpr double gauss_to_tesla(double g) { return g * 1e-4; }
inline constexpr double tesla_to_gauss(double t) { return t * 1e4; }

// Field gradient: 1 G/cm = 1e-2 T/m
inline constexpr double gauss_per_cm_to_tesla_per_m(double g) { return g * 1e-2; }
inline constexpr double tesla_per_m_to_gauss_per_cm(double t) { return t * 1e2; }

// Field curvature: 1 G/cm^2 = 1 T/m^2 exactly
inline constexpr double gauss_per_cm2_to_tesla_per_m2(double g) { return g; }
inline constexpr double tesla_per_m2_to_gauss_per_cm2(double t) { return t; }

// Length
inline constexpr double um_to_m(double u) { return u * 1e-6; }
inline constexpr double m_to_um(double m) { return m * 1e6; }
inline constexpr double mm_to_m(double v) { return v * 1e-3; }
inline constexpr double m_to_mm(double m) { return m * 1e3; }

// Time
inline constexpr double ms_to_s(double v) { return v * 1e-3; }
inline constexpr double s_to_ms(double v) { return v * 1e3; }

}  // namespace microtrap
