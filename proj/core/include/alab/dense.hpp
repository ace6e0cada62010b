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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "alab/automaton.hpp"
#include "alab/circuit.hpp"

namespace alab {

/// Exact 2^N amplitude vector; bit i of the index is site i.
class StateVector {
  public:
    using Amp = std::complex<double>;
    static constexpr std::size_t kDefaultCap = 22;

    /// |0...0>. Throws CapacityError when n_sites > cap (message carries the memory estimate).
    explicit StateVector(std::size_t n_sites, std::size_t cap = kDefaultCap);
    static StateVector from_product(const ProductState& s, std::size_t cap = kDefaultCap);
    /// Takes ownership of amps; size must be a power of two.
    static StateVector from_amplitudes(std::vector<Amp> amps, std::size_t cap = kDefaultCap);

    std::size_t n_sites() const noexcept { return n_; }
    std::size_t dim() const noexcept { return amps_.size(); }
    std::span<const Amp> amps() const noexcept { return amps_; }
    std::span<Amp> amps() noexcept { return amps_; }
    Amp operator[](std::uint64_t x) const { return amps_[x]; }

    void apply_gate(const Gate& g);
    void apply_circuit(const Circuit& c);
    /// Applies inverse(c).
    void apply_inverse(const Circuit& c);
    void apply_x(Site s);
    /// Hadamard on every site (fast Walsh-Hadamard transform).
    void apply_hadamard_all();

    double norm_squared() const noexcept;
    /// <this|other>
    Amp inner(const StateVector& other) const;

  private:
    StateVector() = default;
    void check_circuit(const Circuit& c) const;

    std::size_t n_ = 0;
    std::vector<Amp> amps_;
};

StateVector apply_circuit(StateVector s, const Circuit& c);

/// <psi| W |psi> with W realized by dense circuit passes.
std::complex<double> expectation(const StateVector& s, const HeisenbergWord& w);

/// Product of single-site Paulis, e.g. {{0,'X'},{3,'Z'}}.
struct PauliString {
    std::vector<std::pair<Site, char>> ops;
};
std::complex<double> expectation(const StateVector& s, const PauliString& p);

struct SchmidtSpectrum {
    std::vector<double> values;  ///< eigenvalues of rho_A, ascending, clamped at 0
    std::vector<Site> subset;    ///< sites in A
};

/// Spectrum of rho_A for any non-empty proper subset A (need not be contiguous).
SchmidtSpectrum schmidt(const StateVector& s, std::span<const Site> subset);

/// Sites {0, ..., n/2 - 1}.
std::vector<Site> half_cut(std::size_t n_sites);

enum class MeasureBasis { Z, X };

/// |<x|psi>|^2 for all x; the X basis is read out after a global Hadamard.
std::vector<double> exact_distribution(const StateVector& s, MeasureBasis basis);

/// n i.i.d. outcomes, deterministic in seed.
std::vector<std::uint64_t> sample_bitstrings(const StateVector& s, MeasureBasis basis, std::size_t n,
                                             std::uint64_t seed);

}  // namespace alab
