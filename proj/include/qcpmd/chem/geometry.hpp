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
 * @file geometry.hpp
 * Atoms and molecular geometries. Positions are bohr, masses electron masses.
 */
#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcpmd/errors.hpp"
#include "qcpmd/units.hpp"

namespace qcpmd::chem {

using Vec3 = std::array<double, 3>;

struct ElementData {
    std::string_view symbol;
    int atomic_number;
    double mass_amu; // isotope-averaged standard atomic weight
};

inline constexpr std::array<ElementData, 10> kElements{{
    {"H", 1, 1.00794},
    {"He", 2, 4.002602},
    {"Li", 3, 6.941},
    {"Be", 4, 9.012182},
    {"B", 5, 10.811},
    {"C", 6, 12.0107},
    {"N", 7, 14.0067},
    {"O", 8, 15.9994},
    {"F", 9, 18.9984032},
    {"Ne", 10, 20.1797},
}};

inline const ElementData& element(std::string_view symbol) {
    for (const auto& e : kElements) {
        if (e.symbol == symbol) {
            return e;
        }
    }
    throw ConfigError("unknown element '" + std::string(symbol) + "'");
}

inline const ElementData& element(int atomic_number) {
    for (const auto& e : kElements) {
        if (e.atomic_number == atomic_number) {
            return e;
        }
    }
    throw ConfigError("unknown atomic number " + std::to_string(atomic_number));
}

struct Atom {
    int atomic_number = 1;
    double mass = 0.0; // electron masses
    Vec3 position{};   // bohr

    static Atom of(std::string_view symbol, Vec3 position_bohr) {
        const auto& e = element(symbol);
        return Atom{e.atomic_number, units::amu_to_me(e.mass_amu), position_bohr};
    }
};

inline double distance(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

class MolecularGeometry {
  public:
    MolecularGeometry() = default;

    MolecularGeometry(std::vector<Atom> atoms, int charge) : atoms_{std::move(atoms)}, charge_{charge} {
        if (atoms_.empty()) {
            throw ConfigError("geometry has no atoms");
        }
        int total = 0;
        for (const auto& a : atoms_) {
            if (a.atomic_number < 1) {
                throw ConfigError("atomic number must be >= 1");
            }
            if (!(a.mass > 0.0)) {
                throw ConfigError("atomic mass must be positive");
            }
            total += a.atomic_number;
        }
        const int electrons = total - charge_;
        if (electrons < 0) {
            throw ConfigError("charge exceeds nuclear charge");
        }
        if (electrons % 2 != 0) {
            throw ConfigError("closed-shell scope: electron count " + std::to_string(electrons) + " is odd");
        }
    }

    /// Two atoms along z, centered on the origin.
    static MolecularGeometry diatomic(std::string_view a, std::string_view b, double bond_bohr, int charge = 0) {
        return MolecularGeometry({Atom::of(a, {0.0, 0.0, -0.5 * bond_bohr}), Atom::of(b, {0.0, 0.0, 0.5 * bond_bohr})},
                                 charge);
    }

    [[nodiscard]] const std::vector<Atom>& atoms() const { return atoms_; }
    [[nodiscard]] std::size_t size() const { return atoms_.size(); }
    [[nodiscard]] int charge() const { return charge_; }

    [[nodiscard]] int n_electrons() const {
        int total = 0;
        for (const auto& a : atoms_) {
            total += a.atomic_number;
        }
        return total - charge_;
    }

    /// Flattened coordinates (x0, y0, z0, x1, ...).
    [[nodiscard]] std::vector<double> coordinates() const {
        std::vector<double> r;
        r.reserve(3 * atoms_.size());
        for (const auto& a : atoms_) {
            r.insert(r.end(), a.position.begin(), a.position.end());
        }
        return r;
    }

    /// Per-coordinate masses matching coordinates().
    [[nodiscard]] std::vector<double> coordinate_masses() const {
        std::vector<double> m;
        m.reserve(3 * atoms_.size());
        for (const auto& a : atoms_) {
            m.insert(m.end(), 3, a.mass);
        }
        return m;
    }

    [[nodiscard]] MolecularGeometry with_coordinates(std::span<const double> r) const {
        if (r.size() != 3 * atoms_.size()) {
            throw DimensionError("expected " + std::to_string(3 * atoms_.size()) + " coordinates, got " +
                                 std::to_string(r.size()));
        }
        MolecularGeometry g = *this;
        for (std::size_t k = 0; k < atoms_.size(); ++k) {
            g.atoms_[k].position = {r[3 * k], r[3 * k + 1], r[3 * k + 2]};
        }
        return g;
    }

    /// Geometry JSON: {atoms: [{element, mass_amu?, xyz_angstrom}], charge}.
    static MolecularGeometry from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("atoms")) {
            throw ConfigError("geometry: missing key 'atoms'");
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.key() != "atoms" && it.key() != "charge") {
                throw ConfigError("geometry: unknown key '" + it.key() + "'");
            }
        }
        std::vector<Atom> atoms;
        std::size_t idx = 0;
        for (const auto& ja : j.at("atoms")) {
            const std::string where = "geometry.atoms[" + std::to_string(idx++) + "]";
            for (auto it = ja.begin(); it != ja.end(); ++it) {
                if (it.key() != "element" && it.key() != "mass_amu" && it.key() != "xyz_angstrom") {
                    throw ConfigError(where + ": unknown key '" + it.key() + "'");
                }
            }
            if (!ja.contains("element") || !ja.contains("xyz_angstrom")) {
                throw ConfigError(where + ": 'element' and 'xyz_angstrom' are required");
            }
            const auto& e = element(ja.at("element").get<std::string>());
            const auto xyz = ja.at("xyz_angstrom").get<std::vector<double>>();
            if (xyz.size() != 3) {
                throw ConfigError(where + ".xyz_angstrom: expected 3 numbers");
            }
            const double mass_amu = ja.value("mass_amu", e.mass_amu);
            atoms.push_back(Atom{e.atomic_number, units::amu_to_me(mass_amu),
                                 {units::angstrom_to_bohr(xyz[0]), units::angstrom_to_bohr(xyz[1]),
                                  units::angstrom_to_bohr(xyz[2])}});
        }
        return MolecularGeometry(std::move(atoms), j.value("charge", 0));
    }

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json atoms = nlohmann::json::array();
        for (const auto& a : atoms_) {
            atoms.push_back({{"element", std::string(element(a.atomic_number).symbol)},
                             {"mass_amu", units::me_to_amu(a.mass)},
                             {"xyz_angstrom",
                              {units::bohr_to_angstrom(a.position[0]), units::bohr_to_angstrom(a.position[1]),
                               units::bohr_to_angstrom(a.position[2])}}});
        }
        return {{"atoms", atoms}, {"charge", charge_}};
    }

  private:
    std::vector<Atom> atoms_;
    int charge_ = 0;
};

} // namespace qcpmd::chem
