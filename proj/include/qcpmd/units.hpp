// Copyright 2026 The QCPMD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file units.hpp
 * Physical constants and unit conversions. Everything inside the library is
 * in atomic units (hartree, bohr, electron mass, atomic time); conversions
 * happen only at the I/O boundary.
 */
#pragma once

namespace qcpmd::units {

// CODATA 2018.
inline constexpr double kAngstromPerBohr = 0.529177210903;
inline constexpr double kBohrPerAngstrom = 1.0 / kAngstromPerBohr;
inline constexpr double kFsPerAtu = 2.4188843265857e-2;
inline constexpr double kElectronMassPerAmu = 1822.888486209;
inline constexpr double kBoltzmann = 3.166811563e-6; // hartree / K
inline constexpr double kWavenumberPerHartree = 219474.6313632;

inline constexpr double angstrom_to_bohr(double x) { return x * kBohrPerAngstrom; }
inline constexpr double bohr_to_angstrom(double x) { return x * kAngstromPerBohr; }
inline constexpr double fs_to_atu(double t) { return t / kFsPerAtu; }
inline constexpr double atu_to_fs(double t) { return t * kFsPerAtu; }
inline constexpr double amu_to_me(double m) { return m * kElectronMassPerAmu; }
inline constexpr double me_to_amu(double m) { return m / kElectronMassPerAmu; }

/// Inverse temperature 1/(k_B T) in 1/hartree.
inline constexpr double beta_from_kelvin(double kelvin) { return 1.0 / (kBoltzmann * kelvin); }
inline constexpr double kelvin_from_beta(double beta) { return 1.0 / (kBoltzmann * beta); }

/// Angular frequency (1/atomic time) to wavenumber in cm^-1.
inline constexpr double angular_to_wavenumber(double omega) { return omega * kWavenumberPerHartree; }
inline constexpr double wavenumber_to_angular(double nu) { return nu / kWavenumberPerHartree; }

/// Mass-like quantities given in hartree * fs^2 (per squared coordinate unit)
/// converted to hartree * atu^2.
inline constexpr double hartree_fs2_to_au(double mu) { return mu / (kFsPerAtu * kFsPerAtu); }

} // namespace qcpmd::units
