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
#include <memory>
#include <variant>
#include <vector>

#include "alab/bits.hpp"
#include "alab/circuit.hpp"

namespace alab {

/// A computational-basis string together with its accumulated phase (radians).
struct Trajectory {
    BitString bits;
    double phase = 0.0;

    Trajectory() = default;
    explicit Trajectory(BitString b, double ph = 0.0) : bits(std::move(b)), phase(ph) {}

    /// Phase reduced to [-pi, pi].
    double reduced_phase() const noexcept;
};

/// Applies one basis-preserving gate; throws InvalidArgument for Hadamard.
/// Rz convention: e^{i theta Z}, so bit 0 gains +theta and bit 1 gains -theta.
void apply_gate(Trajectory& t, const Gate& g);

/// Layer-by-layer forward evolution. O(N T) per call.
void evolve(Trajectory& t, const Circuit& c);
/// Applies inverse(c) without materializing it.
void evolve_inverse(Trajectory& t, const Circuit& c);

/// Basis-preserving circuit lowered to a flat gate array for the hot loops.
class FlatCircuit {
  public:
    enum class Op : std::uint8_t { CNot, Swap, Rz, CCNot };
    struct Instr {
        Op op;
        Site s0;
        Site s1;
        Site s2;
        double a0;
        double a1;
    };

    /// Throws InvalidArgument unless c is basis-preserving.
    explicit FlatCircuit(const Circuit& c);

    std::size_t n_sites() const noexcept { return n_sites_; }
    const std::vector<Instr>& instrs() const noexcept { return instrs_; }

  private:
    std::size_t n_sites_;
    std::vector<Instr> instrs_;
};

/// Fast path for N <= 64: evolve a label forward (sign = +1) or through the inverse (sign = -1).
void evolve_label(std::uint64_t& bits, double& phase, const FlatCircuit& c, int sign);

// ---------------------------------------------------------------------------
// Heisenberg words

struct Forward {
    std::shared_ptr<const Circuit> circuit;
};
struct Backward {
    std::shared_ptr<const Circuit> circuit;
};
struct FlipX {
    Site site;
};
using WordAction = std::variant<Forward, Backward, FlipX>;

/// Actions in application order: the first action hits the ket first.
struct HeisenbergWord {
    std::vector<WordAction> actions;

    /// Number of Forward/Backward passes.
    std::size_t circuit_passes() const noexcept;
    /// Throws InvalidArgument when a circuit is not basis-preserving or a site is out of range.
    void validate(std::size_t n_sites) const;
};

void apply_word(Trajectory& t, const HeisenbergWord& w);

/// psi(x) = c_{pi^{-1}(x)} exp(i theta_{pi^{-1}(x)}).
std::complex<double> amplitude(const BitString& x, const Circuit& c, const ProductState& s);

struct PermutationTable {
    std::vector<std::uint32_t> image;  ///< pi(m)
    std::vector<double> phase;         ///< theta_m
};

/// Exhaustive permutation of all 2^N labels; throws CapacityError for N > 24.
PermutationTable permutation_table(const Circuit& c);

// ---------------------------------------------------------------------------
// Monte Carlo estimation

struct McEstimate {
    std::complex<double> mean{0.0, 0.0};
    double std_error = 0.0;
    std::size_t n_samples = 0;
};

/// Order-dependent (but deterministic) running sums of complex samples.
class McAccumulator {
  public:
    void add(std::complex<double> z) noexcept {
        ++n_;
        sum_re_ += z.real();
        sum_im_ += z.imag();
        sq_re_ += z.real() * z.real();
        sq_im_ += z.imag() * z.imag();
    }
    void merge(const McAccumulator& o) noexcept {
        n_ += o.n_;
        sum_re_ += o.sum_re_;
        sum_im_ += o.sum_im_;
        sq_re_ += o.sq_re_;
        sq_im_ += o.sq_im_;
    }
    std::size_t count() const noexcept { return n_; }
    /// std_error from the complex sample variance (real plus imaginary).
    McEstimate estimate() const noexcept;

  private:
    std::size_t n_ = 0;
    double sum_re_ = 0.0;
    double sum_im_ = 0.0;
    double sq_re_ = 0.0;
    double sq_im_ = 0.0;
};

/// 64 trajectories evolved together; site i is one 64-bit word, lane l is bit l.
class TrajectoryBatch {
  public:
    static constexpr std::size_t kLanes = 64;

    explicit TrajectoryBatch(std::size_t n_sites) : words_(n_sites, 0) { lane_phase_.fill(0.0); }

    std::size_t n_sites() const noexcept { return words_.size(); }
    std::vector<std::uint64_t>& words() noexcept { return words_; }
    const std::vector<std::uint64_t>& words() const noexcept { return words_; }

    /// sign = +1 applies c, sign = -1 applies inverse(c).
    void apply(const FlatCircuit& c, int sign);
    void flip(Site s) noexcept { words_[s] = ~words_[s]; }

    Trajectory lane(std::size_t l) const;
    void set_lane(std::size_t l, const Trajectory& t);
    double lane_phase(std::size_t l) const noexcept { return common_phase_ + lane_phase_[l]; }

  private:
    std::vector<std::uint64_t> words_;
    std::array<double, kLanes> lane_phase_{};
    double common_phase_ = 0.0;
};

/// Importance-sampled estimate of <psi0| W |psi0>, x ~ |c_x|^2 drawn site by site.
/// Samples are processed in fixed 64-lane blocks seeded by (seed, block), so the
/// result does not depend on the worker count.
McEstimate mc_expectation(const HeisenbergWord& w, const ProductState& s, std::size_t n_samples,
                          std::uint64_t seed, std::size_t workers = 1);

/// Per-block accumulators of mc_expectation, in block order; exposed for partitioned runs.
std::vector<McAccumulator> mc_blocks(const HeisenbergWord& w, const ProductState& s, std::size_t n_samples,
                                     std::uint64_t seed, std::size_t first_block, std::size_t n_blocks);

/// Summand c_{x'}^* e^{i phi} c_x / |c_x|^2 for one sample x -> (x', phi).
std::complex<double> mc_summand(const BitString& x, const Trajectory& image, const ProductState& s);

}  // namespace alab
