// Copyright 2026 The Automaton Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "alab/bits.hpp"
#include "alab/rng.hpp"

namespace alab {

using Site = std::uint32_t;

struct CNot {
    Site control;
    Site target;
    friend bool operator==(const CNot&, const CNot&) = default;
};

struct Swap {
    Site a;
    Site b;
    friend bool operator==(const Swap&, const Swap&) = default;
};

/// Independent e^{i angle Z} rotations on two sites sharing one brick.
struct RzPair {
    Site a;
    double angle_a;
    Site b;
    double angle_b;
    friend bool operator==(const RzPair&, const RzPair&) = default;
};

/// Toffoli with a phase: when both controls are set, flip the target and multiply by e^{i angle}.
struct CCNotPhase {
    Site c1;
    Site c2;
    Site target;
    double angle;
    friend bool operator==(const CCNotPhase&, const CCNotPhase&) = default;
};

/// Only legal in dense-only circuits.
struct Hadamard {
    Site site;
    friend bool operator==(const Hadamard&, const Hadamard&) = default;
};

using Gate = std::variant<CNot, Swap, RzPair, CCNotPhase, Hadamard>;
using Layer = std::vector<Gate>;

std::vector<Site> gate_sites(const Gate& g);
bool preserves_basis(const Gate& g) noexcept;
Gate inverse(const Gate& g);
std::string gate_kind(const Gate& g);

/// Ordered layers of gates on n_sites qubits. Within a layer, gates act on disjoint sites.
class Circuit {
  public:
    Circuit() = default;
    explicit Circuit(std::size_t n_sites, bool periodic = true, std::uint64_t seed = 0);

    /// Throws InvalidArgument if a gate touches an out-of-range or already-used site.
    void add_layer(Layer layer);

    std::size_t n_sites() const noexcept { return n_sites_; }
    std::size_t depth() const noexcept { return layers_.size(); }
    bool periodic() const noexcept { return periodic_; }
    std::uint64_t seed() const noexcept { return seed_; }
    bool basis_preserving() const noexcept { return hadamard_count_ == 0; }
    std::size_t gate_count() const noexcept;

    const std::vector<Layer>& layers() const noexcept { return layers_; }
    const Layer& layer(std::size_t t) const { return layers_.at(t); }

    friend bool operator==(const Circuit&, const Circuit&) = default;

  private:
    std::size_t n_sites_ = 0;
    bool periodic_ = true;
    std::uint64_t seed_ = 0;
    std::size_t hadamard_count_ = 0;
    std::vector<Layer> layers_;
};

/// Layers reversed, each gate inverted.
Circuit inverse(const Circuit& c);

/// First t layers; throws InvalidArgument when t > depth.
Circuit truncate(const Circuit& c, std::size_t t);

enum class GateSet {
    Automaton,  ///< {CNot, Swap, RzPair}
    Clifford,   ///< {CNot, Swap, Hadamard on both sites of the brick}
};

struct EnsembleSpec {
    std::size_t n_sites = 16;
    std::size_t depth = 100;
    GateSet gate_set = GateSet::Automaton;
    /// Probabilities for {CNot, Swap, third gate}; the third gate is RzPair or Hadamard by gate_set.
    std::array<double, 3> gate_weights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    bool periodic = true;
    std::uint64_t master_seed = 0;
    /// When set, every Rz angle takes this value instead of a uniform draw on [0, 2 pi).
    std::optional<double> fixed_angle;
    /// CNOT control drawn uniformly from the two sites of the brick; false pins it to the left site.
    bool random_cnot_direction = true;

    /// Throws InvalidArgument describing the first offending field.
    void validate() const;
};

/// Bonds touched by brickwork layer t: (0,1),(2,3),... on even t and (1,2),(3,4),... on odd t.
std::vector<std::array<Site, 2>> brickwork_bonds(std::size_t n_sites, bool periodic, std::size_t layer);

/// Deterministic function of spec (including master_seed).
Circuit build_brickwork(const EnsembleSpec& spec);

/// Header "N depth periodic seed", then one "layer kind sites... angles..." line per gate.
void write_circuit(std::ostream& os, const Circuit& c);
Circuit read_circuit(std::istream& is);

/// Product of single-site states a_i|0> + b_i|1>.
class ProductState {
  public:
    using Amp = std::complex<double>;

    ProductState() = default;
    /// Normalizes each pair; throws InvalidArgument on a zero pair or non-finite entry.
    explicit ProductState(std::vector<std::array<Amp, 2>> sites);

    /// Eigenstate of every X_i with eigenvalue signs[i] in {+1, -1}.
    static ProductState x_basis(std::span<const int> signs);
    static ProductState all_plus(std::size_t n_sites);
    /// Each site an independent Haar-random single-qubit state.
    static ProductState haar_random(std::size_t n_sites, Rng& rng);
    /// Computational basis state |label>.
    static ProductState basis(std::size_t n_sites, std::uint64_t label);

    std::size_t n_sites() const noexcept { return sites_.size(); }
    const std::array<Amp, 2>& site(std::size_t i) const { return sites_.at(i); }

    /// c_m = prod_i (a_i if bit_i(m) = 0 else b_i).
    Amp coefficient(const BitString& bits) const;
    Amp coefficient(std::uint64_t label) const;

  private:
    std::vector<std::array<Amp, 2>> sites_;
};

}  // namespace alab
