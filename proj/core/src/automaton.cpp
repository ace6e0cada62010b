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

#include "alab/automaton.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include <fmt/format.h>

#include "alab/error.hpp"
#include "alab/parallel.hpp"
#include "alab/rng.hpp"

namespace alab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

void check_width(const Trajectory& t, const Circuit& c) {
    if (t.bits.size() != c.n_sites()) {
        throw InvalidArgument(
            fmt::format("trajectory has {} sites but circuit has {}", t.bits.size(), c.n_sites()));
    }
}

inline void add_masked(std::array<double, TrajectoryBatch::kLanes>& lanes, std::uint64_t mask, double v) {
    for (std::size_t l = 0; l < TrajectoryBatch::kLanes; ++l) {
        lanes[l] += v * static_cast<double>((mask >> l) & 1U);
    }
}

}  // namespace

double Trajectory::reduced_phase() const noexcept { return std::remainder(phase, 2.0 * std::numbers::pi); }

void apply_gate(Trajectory& t, const Gate& g) {
    auto& b = t.bits;
    std::visit(Overloaded{
                   [&](const CNot& x) {
                       if (b.get(x.control)) b.flip(x.target);
                   },
                   [&](const Swap& x) { b.swap_bits(x.a, x.b); },
                   [&](const RzPair& x) {
                       t.phase += b.get(x.a) ? -x.angle_a : x.angle_a;
                       t.phase += b.get(x.b) ? -x.angle_b : x.angle_b;
                   },
                   [&](const CCNotPhase& x) {
                       if (b.get(x.c1) && b.get(x.c2)) {
                           b.flip(x.target);
                           t.phase += x.angle;
                       }
                   },
                   [](const Hadamard&) {
                       throw InvalidArgument("Hadamard does not preserve the computational basis");
                   },
               },
               g);
}

void evolve(Trajectory& t, const Circuit& c) {
    check_width(t, c);
    for (const Layer& layer : c.layers()) {
        for (const Gate& g : layer) apply_gate(t, g);
        t.phase = std::remainder(t.phase, kTwoPi);
    }
}

void evolve_inverse(Trajectory& t, const Circuit& c) {
    check_width(t, c);
    for (auto it = c.layers().rbegin(); it != c.layers().rend(); ++it) {
        for (const Gate& g : *it) apply_gate(t, inverse(g));
        t.phase = std::remainder(t.phase, kTwoPi);
    }
}

FlatCircuit::FlatCircuit(const Circuit& c) : n_sites_(c.n_sites()) {
    if (!c.basis_preserving()) throw InvalidArgument("circuit is not basis-preserving");
    instrs_.reserve(c.gate_count());
    for (const Layer& layer : c.layers()) {
        for (const Gate& g : layer) {
            std::visit(Overloaded{
                           [&](const CNot& x) { instrs_.push_back({Op::CNot, x.control, x.target, 0, 0.0, 0.0}); },
                           [&](const Swap& x) { instrs_.push_back({Op::Swap, x.a, x.b, 0, 0.0, 0.0}); },
                           [&](const RzPair& x) {
                               instrs_.push_back({Op::Rz, x.a, x.b, 0, x.angle_a, x.angle_b});
                           },
                           [&](const CCNotPhase& x) {
                               instrs_.push_back({Op::CCNot, x.c1, x.c2, x.target, x.angle, 0.0});
                           },
                           [](const Hadamard&) {},
                       },
                       g);
        }
    }
}

void evolve_label(std::uint64_t& bits, double& phase, const FlatCircuit& c, int sign) {
    auto step = [&](const FlatCircuit::Instr& g) {
        switch (g.op) {
            case FlatCircuit::Op::CNot:
                bits ^= ((bits >> g.s0) & 1U) << g.s1;
                break;
            case FlatCircuit::Op::Swap: {
                const std::uint64_t d = ((bits >> g.s0) ^ (bits >> g.s1)) & 1U;
                bits ^= (d << g.s0) | (d << g.s1);
                break;
            }
            case FlatCircuit::Op::Rz:
                phase += sign * (((bits >> g.s0) & 1U) ? -g.a0 : g.a0);
                phase += sign * (((bits >> g.s1) & 1U) ? -g.a1 : g.a1);
                break;
            case FlatCircuit::Op::CCNot:
                if (((bits >> g.s0) & (bits >> g.s1) & 1U) != 0) {
                    bits ^= std::uint64_t{1} << g.s2;
                    phase += sign * g.a0;
                }
                break;
        }
    };
    const auto& in = c.instrs();
    if (sign > 0) {
        for (const auto& g : in) step(g);
    } else {
        for (auto it = in.rbegin(); it != in.rend(); ++it) step(*it);
    }
}

std::size_t HeisenbergWord::circuit_passes() const noexcept {
    std::size_t n = 0;
    for (const auto& a : actions) n += std::holds_alternative<FlipX>(a) ? 0 : 1;
    return n;
}

void HeisenbergWord::validate(std::size_t n_sites) const {
    auto check_circuit = [&](const std::shared_ptr<const Circuit>& c) {
        if (!c) throw InvalidArgument("word references a null circuit");
        if (!c->basis_preserving()) throw InvalidArgument("word references a non-basis-preserving circuit");
        if (c->n_sites() != n_sites) {
            throw InvalidArgument(fmt::format("word circuit has {} sites, state has {}", c->n_sites(), n_sites));
        }
    };
    for (const auto& a : actions) {
        std::visit(Overloaded{
                       [&](const Forward& f) { check_circuit(f.circuit); },
                       [&](const Backward& b) { check_circuit(b.circuit); },
                       [&](const FlipX& x) {
                           if (x.site >= n_sites) throw InvalidArgument(fmt::format("flip site {} out of range", x.site));
                       },
                   },
                   a);
    }
}

void apply_word(Trajectory& t, const HeisenbergWord& w) {
    for (const auto& a : w.actions) {
        std::visit(Overloaded{
                       [&](const Forward& f) { evolve(t, *f.circuit); },
                       [&](const Backward& b) { evolve_inverse(t, *b.circuit); },
                       [&](const FlipX& x) { t.bits.flip(x.site); },
                   },
                   a);
    }
}

std::complex<double> amplitude(const BitString& x, const Circuit& c, const ProductState& s) {
    Trajectory pre(x);
    evolve_inverse(pre, c);
    Trajectory fwd(pre.bits);
    evolve(fwd, c);
    return s.coefficient(pre.bits) * std::polar(1.0, fwd.phase);
}

PermutationTable permutation_table(const Circuit& c) {
    constexpr std::size_t kMaxSites = 24;
    if (c.n_sites() > kMaxSites) {
        throw CapacityError(fmt::format("permutation table for N={} needs {} entries (cap N={})", c.n_sites(),
                                        std::uint64_t{1} << std::min<std::size_t>(c.n_sites(), 63), kMaxSites));
    }
    const FlatCircuit flat(c);
    const std::size_t d = std::size_t{1} << c.n_sites();
    PermutationTable table;
    table.image.resize(d);
    table.phase.resize(d);
    for (std::size_t m = 0; m < d; ++m) {
        std::uint64_t bits = m;
        double phase = 0.0;
        evolve_label(bits, phase, flat, +1);
        table.image[m] = static_cast<std::uint32_t>(bits);
        table.phase[m] = phase;
    }
    return table;
}

McEstimate McAccumulator::estimate() const noexcept {
    McEstimate e;
    e.n_samples = n_;
    if (n_ == 0) return e;
    const double n = static_cast<double>(n_);
    e.mean = {sum_re_ / n, sum_im_ / n};
    if (n_ > 1) {
        const double var_re = std::max(0.0, (sq_re_ - sum_re_ * sum_re_ / n) / (n - 1));
        const double var_im = std::max(0.0, (sq_im_ - sum_im_ * sum_im_ / n) / (n - 1));
        e.std_error = std::sqrt((var_re + var_im) / n);
    }
    return e;
}

void TrajectoryBatch::apply(const FlatCircuit& c, int sign) {
    const double s = static_cast<double>(sign);
    auto step = [&](const FlatCircuit::Instr& g) {
        switch (g.op) {
            case FlatCircuit::Op::CNot:
                words_[g.s1] ^= words_[g.s0];
                break;
            case FlatCircuit::Op::Swap:
                std::swap(words_[g.s0], words_[g.s1]);
                break;
            case FlatCircuit::Op::Rz:
                // theta (1 - 2 b) split into a lane-independent part and a masked part.
                common_phase_ += s * (g.a0 + g.a1);
                add_masked(lane_phase_, words_[g.s0], -2.0 * s * g.a0);
                add_masked(lane_phase_, words_[g.s1], -2.0 * s * g.a1);
                break;
            case FlatCircuit::Op::CCNot: {
                const std::uint64_t m = words_[g.s0] & words_[g.s1];
                words_[g.s2] ^= m;
                add_masked(lane_phase_, m, s * g.a0);
                break;
            }
        }
    };
    const auto& in = c.instrs();
    if (sign > 0) {
        for (const auto& g : in) step(g);
    } else {
        for (auto it = in.rbegin(); it != in.rend(); ++it) step(*it);
    }
    common_phase_ = std::remainder(common_phase_, kTwoPi);
    for (auto& p : lane_phase_) p = std::remainder(p, kTwoPi);
}

Trajectory TrajectoryBatch::lane(std::size_t l) const {
    BitString b(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) b.set(i, (words_[i] >> l) & 1U);
    return Trajectory(std::move(b), lane_phase(l));
}

void TrajectoryBatch::set_lane(std::size_t l, const Trajectory& t) {
    for (std::size_t i = 0; i < words_.size(); ++i) {
        const std::uint64_t m = std::uint64_t{1} << l;
        words_[i] = t.bits.get(i) ? (words_[i] | m) : (words_[i] & ~m);
    }
    lane_phase_[l] = t.phase - common_phase_;
}

std::complex<double> mc_summand(const BitString& x, const Trajectory& image, const ProductState& s) {
    const auto cx = s.coefficient(x);
    const double px = std::norm(cx);
    if (px == 0.0) throw InvalidArgument("sampled a zero-amplitude basis state");
    return std::conj(s.coefficient(image.bits)) * std::polar(1.0, image.phase) * cx / px;
}

std::vector<McAccumulator> mc_blocks(const HeisenbergWord& w, const ProductState& s, std::size_t n_samples,
                                     std::uint64_t seed, std::size_t first_block, std::size_t n_blocks) {
    const std::size_t n = s.n_sites();
    w.validate(n);

    // Lower every distinct circuit once.
    std::unordered_map<const Circuit*, FlatCircuit> flat;
    struct Step {
        const FlatCircuit* circuit;
        int sign;
        Site site;
    };
    std::vector<Step> steps;
    for (const auto& a : w.actions) {
        std::visit(Overloaded{
                       [&](const Forward& f) {
                           auto it = flat.try_emplace(f.circuit.get(), *f.circuit).first;
                           steps.push_back({&it->second, +1, 0});
                       },
                       [&](const Backward& b) {
                           auto it = flat.try_emplace(b.circuit.get(), *b.circuit).first;
                           steps.push_back({&it->second, -1, 0});
                       },
                       [&](const FlipX& x) { steps.push_back({nullptr, 0, x.site}); },
                   },
                   a);
    }

    std::vector<double> p_one(n);
    std::vector<std::complex<double>> r01(n), r10(n);
    std::vector<bool> zero_a(n), zero_b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& [a, b] = s.site(i);
        p_one[i] = std::norm(b);
        zero_a[i] = std::norm(a) == 0.0;
        zero_b[i] = std::norm(b) == 0.0;
        r01[i] = zero_a[i] ? 0.0 : std::conj(b) / std::conj(a);
        r10[i] = zero_b[i] ? 0.0 : std::conj(a) / std::conj(b);
    }

    std::vector<McAccumulator> out(n_blocks);
    std::vector<std::uint64_t> initial(n);
    for (std::size_t k = 0; k < n_blocks; ++k) {
        const std::size_t block = first_block + k;
        const std::size_t begin = block * TrajectoryBatch::kLanes;
        if (begin >= n_samples) break;
        const std::size_t lanes = std::min(TrajectoryBatch::kLanes, n_samples - begin);
        const std::uint64_t live = lanes == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << lanes) - 1);

        Rng rng(derive_seed(seed, {block}));
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t word = 0;
            if (p_one[i] == 0.5) {
                word = rng();
            } else {
                for (std::size_t l = 0; l < TrajectoryBatch::kLanes; ++l) {
                    if (uniform01(rng) < p_one[i]) word |= std::uint64_t{1} << l;
                }
            }
            if ((zero_a[i] && (~word & live)) || (zero_b[i] && (word & live))) {
                throw InvalidArgument(fmt::format("sampled a zero amplitude on site {}", i));
            }
            initial[i] = word;
        }

        TrajectoryBatch batch(n);
        batch.words() = initial;
        for (const Step& st : steps) {
            if (st.circuit) {
                batch.apply(*st.circuit, st.sign);
            } else {
                batch.flip(st.site);
            }
        }

        std::array<std::complex<double>, TrajectoryBatch::kLanes> ratio;
        ratio.fill({1.0, 0.0});
        const auto& fin = batch.words();
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t diff = (initial[i] ^ fin[i]) & live;
            while (diff != 0) {
                const int l = std::countr_zero(diff);
                diff &= diff - 1;
                ratio[l] *= ((initial[i] >> l) & 1U) ? r10[i] : r01[i];
            }
        }
        for (std::size_t l = 0; l < lanes; ++l) out[k].add(ratio[l] * std::polar(1.0, batch.lane_phase(l)));
    }
    return out;
}

McEstimate mc_expectation(const HeisenbergWord& w, const ProductState& s, std::size_t n_samples,
                          std::uint64_t seed, std::size_t workers) {
    if (n_samples == 0) throw InvalidArgument("mc_expectation needs at least one sample");
    w.validate(s.n_sites());
    const std::size_t n_blocks = (n_samples + TrajectoryBatch::kLanes - 1) / TrajectoryBatch::kLanes;
    // Group blocks into tasks so a task amortizes circuit lowering.
    const std::size_t per_task = std::max<std::size_t>(1, n_blocks / (8 * std::max<std::size_t>(1, workers)));
    const std::size_t n_tasks = (n_blocks + per_task - 1) / per_task;
    std::vector<std::vector<McAccumulator>> parts(n_tasks);
    parallel_for(n_tasks, workers, [&](std::size_t task) {
        const std::size_t first = task * per_task;
        parts[task] = mc_blocks(w, s, n_samples, seed, first, std::min(per_task, n_blocks - first));
    });
    McAccumulator total;
    for (const auto& part : parts) {
        for (const auto& acc : part) total.merge(acc);
    }
    return total.estimate();
}

}  // namespace alab
