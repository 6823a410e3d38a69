#pragma once

// CODATA 2018 values, SI.
namespace fewbose::constants {

inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double amu = 1.66053906660e-27;      // kg
inline constexpr double bohr_radius = 5.29177210903e-11;  // m
inline constexpr double bohr_magneton = 9.2740100783e-24; // J/T
inline constexpr double planck_h = 6.62607015e-34;    // J s
inline constexpr double gauss = 1e-4;                 // T

// Efimov scaling exponent for three identical bosons.
inline constexpr double s0 = 1.00624;

}  // namespace fewbose::constants
