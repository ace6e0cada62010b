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

#include "alab/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "alab/error.hpp"

namespace alab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

bool finite_angles(const Gate& g) {
    return std::visit(Overloaded{
                          [](const RzPair& r) { return std::isfinite(r.angle_a) && std::isfinite(r.angle_b); },
                          [](const CCNotPhase& c) { return std::isfinite(c.angle); },
                          [](const auto&) { return true; },
                      },
                      g);
}

}  // namespace

std::vector<Site> gate_sites(const Gate& g) {
    return std::visit(Overloaded{
                          [](const CNot& x) { return std::vector<Site>{x.control, x.target}; },
                          [](const Swap& x) { return std::vector<Site>{x.a, x.b}; },
                          [](const RzPair& x) { return std::vector<Site>{x.a, x.b}; },
                          [](const CCNotPhase& x) { return std::vector<Site>{x.c1, x.c2, x.target}; },
                          [](const Hadamard& x) { return std::vector<Site>{x.site}; },
                      },
                      g);
}

bool preserves_basis(const Gate& g) noexcept { return !std::holds_alternative<Hadamard>(g); }

Gate inverse(const Gate& g) {
    return std::visit(Overloaded{
                          [](const RzPair& r) -> Gate { return RzPair{r.a, -r.angle_a, r.b, -r.angle_b}; },
                          [](const CCNotPhase& c) -> Gate { return CCNotPhase{c.c1, c.c2, c.target, -c.angle}; },
                          [](const auto& self_inverse) -> Gate { return self_inverse; },
                      },
                      g);
}

std::string gate_kind(const Gate& g) {
    static constexpr const char* kNames[] = {"CNOT", "SWAP", "RZ", "CCNOT", "H"};
    return kNames[g.index()];
}

Circuit::Circuit(std::size_t n_sites, bool periodic, std::uint64_t seed)
    : n_sites_(n_sites), periodic_(periodic), seed_(seed) {
    if (n_sites == 0) throw InvalidArgument("circuit needs at least one site");
}

void Circuit::add_layer(Layer layer) {
    std::vector<bool> used(n_sites_, false);
    for (const Gate& g : layer) {
        if (!finite_angles(g)) throw InvalidArgument("gate angle is not finite");
        for (Site s : gate_sites(g)) {
            if (s >= n_sites_) {
                throw InvalidArgument(fmt::format("site {} out of range for {} sites", s, n_sites_));
            }
            if (used[s]) {
                throw InvalidArgument(fmt::format("site {} used twice in layer {}", s, layers_.size()));
            }
            used[s] = true;
        }
        if (!preserves_basis(g)) ++hadamard_count_;
    }
    layers_.push_back(std::move(layer));
}

std::size_t Circuit::gate_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.size();
    return n;
}

Circuit inverse(const Circuit& c) {
    Circuit out(c.n_sites(), c.periodic(), c.seed());
    for (auto it = c.layers().rbegin(); it != c.layers().rend(); ++it) {
        Layer inv;
        inv.reserve(it->size());
        for (const Gate& g : *it) inv.push_back(inverse(g));
        out.add_layer(std::move(inv));
    }
    return out;
}

Circuit truncate(const Circuit& c, std::size_t t) {
    if (t > c.depth()) {
        throw InvalidArgument(fmt::format("cannot truncate depth-{} circuit to {} layers", c.depth(), t));
    }
    Circuit out(c.n_sites(), c.periodic(), c.seed());
    for (std::size_t i = 0; i < t; ++i) out.add_layer(c.layer(i));
    return out;
}

void EnsembleSpec::validate() const {
    if (n_sites < 2) throw InvalidArgument("ensemble.n_sites must be at least 2");
    if (periodic && n_sites % 2 != 0) {
        throw InvalidArgument("ensemble.periodic requires an even number of sites");
    }
    double total = 0.0;
    for (double w : gate_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("ensemble.gate_weights must be >= 0");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidArgument(fmt::format("ensemble.gate_weights must sum to 1 (got {})", total));
    }
    if (fixed_angle && !std::isfinite(*fixed_angle)) throw InvalidArgument("ensemble.fixed_angle must be finite");
}

std::vector<std::array<Site, 2>> brickwork_bonds(std::size_t n_sites, bool periodic, std::size_t layer) {
    std::vector<std::array<Site, 2>> bonds;
    const std::size_t start = layer % 2;
    for (std::size_t j = start; j + 1 < n_sites; j += 2) {
        bonds.push_back({static_cast<Site>(j), static_cast<Site>(j + 1)});
    }
    if (periodic && start == 1 && n_sites % 2 == 0) {
        bonds.push_back({static_cast<Site>(n_sites - 1), 0});
    }
    return bonds;
}

Circuit build_brickwork(const EnsembleSpec& spec) {
    spec.validate();
    Rng rng(spec.master_seed);
    auto angle = [&] {
        const double u = uniform01(rng);
        return spec.fixed_angle ? *spec.fixed_angle : 2.0 * std::numbers::pi * u;
    };
    const double p_cnot = spec.gate_weights[0];
    const double p_swap = p_cnot + spec.gate_weights[1];

    Circuit c(spec.n_sites, spec.periodic, spec.master_seed);
    for (std::size_t t = 0; t < spec.depth; ++t) {
        Layer layer;
        for (const auto& [a, b] : brickwork_bonds(spec.n_sites, spec.periodic, t)) {
            const double u = uniform01(rng);
            if (u < p_cnot) {
                if (spec.random_cnot_direction && uniform01(rng) < 0.5) {
                    layer.emplace_back(CNot{b, a});
                } else {
                    layer.emplace_back(CNot{a, b});
                }
            } else if (u < p_swap) {
                layer.emplace_back(Swap{a, b});
            } else if (spec.gate_set == GateSet::Automaton) {
                const double ta = angle();
                const double tb = angle();
                layer.emplace_back(RzPair{a, ta, b, tb});
            } else {
                layer.emplace_back(Hadamard{a});
                layer.emplace_back(Hadamard{b});
            }
        }
        c.add_layer(std::move(layer));
    }
    return c;
}

void write_circuit(std::ostream& os, const Circuit& c) {
    os << fmt::format("{} {} {} {}\n", c.n_sites(), c.depth(), c.periodic() ? 1 : 0, c.seed());
    for (std::size_t t = 0; t < c.depth(); ++t) {
        for (const Gate& g : c.layer(t)) {
            os << t << ' ' << gate_kind(g);
            for (Site s : gate_sites(g)) os << ' ' << s;
            std::visit(Overloaded{
                           [&](const RzPair& r) { os << fmt::format(" {:.17g} {:.17g}", r.angle_a, r.angle_b); },
                           [&](const CCNotPhase& x) { os << fmt::format(" {:.17g}", x.angle); },
                           [](const auto&) {},
                       },
                       g);
            os << '\n';
        }
    }
}

Circuit read_circuit(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw InvalidArgument("circuit text: missing header");
    std::istringstream hs(header);
    std::size_t n = 0, depth = 0;
    int periodic = 0;
    std::uint64_t seed = 0;
    if (!(hs >> n >> depth >> periodic >> seed)) throw InvalidArgument("circuit text: malformed header");

    std::vector<Layer> layers(depth);
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::size_t t = 0;
        std::string kind;
        if (!(ls >> t >> kind) || t >= depth) {
            throw InvalidArgument(fmt::format("circuit text line {}: bad layer index", lineno));
        }
        Site a = 0, b = 0, x = 0;
        double ta = 0, tb = 0;
        bool ok = false;
        if (kind == "CNOT") {
            ok = static_cast<bool>(ls >> a >> b);
            layers[t].emplace_back(CNot{a, b});
        } else if (kind == "SWAP") {
            ok = static_cast<bool>(ls >> a >> b);
            layers[t].emplace_back(Swap{a, b});
        } else if (kind == "RZ") {
            ok = static_cast<bool>(ls >> a >> b >> ta >> tb);
            layers[t].emplace_back(RzPair{a, ta, b, tb});
        } else if (kind == "CCNOT") {
            ok = static_cast<bool>(ls >> a >> b >> x >> ta);
            layers[t].emplace_back(CCNotPhase{a, b, x, ta});
        } else if (kind == "H") {
            ok = static_cast<bool>(ls >> a);
            layers[t].emplace_back(Hadamard{a});
        }
        if (!ok) throw InvalidArgument(fmt::format("circuit text line {}: bad gate '{}'", lineno, line));
    }
    Circuit c(n, periodic != 0, seed);
    for (auto& l : layers) c.add_layer(std::move(l));
    return c;
}

ProductState::ProductState(std::vector<std::array<Amp, 2>> sites) : sites_(std::move(sites)) {
    for (auto& [a, b] : sites_) {
        const double norm = std::sqrt(std::norm(a) + std::norm(b));
        if (!std::isfinite(norm) || norm == 0.0) throw InvalidArgument("product state site has zero norm");
        a /= norm;
        b /= norm;
    }
}

ProductState ProductState::x_basis(std::span<const int> signs) {
    const double h = 1.0 / std::numbers::sqrt2;
    std::vector<std::array<Amp, 2>> sites;
    sites.reserve(signs.size());
    for (int s : signs) {
        if (s != 1 && s != -1) throw InvalidArgument("x_basis signs must be +1 or -1");
        sites.push_back({Amp{h, 0.0}, Amp{s * h, 0.0}});
    }
    return ProductState(std::move(sites));
}

ProductState ProductState::all_plus(std::size_t n_sites) {
    const std::vector<int> signs(n_sites, 1);
    return x_basis(signs);
}

ProductState ProductState::haar_random(std::size_t n_sites, Rng& rng) {
    std::normal_distribution<double> normal;
    std::vector<std::array<Amp, 2>> sites;
    sites.reserve(n_sites);
    for (std::size_t i = 0; i < n_sites; ++i) {
        const double ar = normal(rng), ai = normal(rng), br = normal(rng), bi = normal(rng);
        sites.push_back({Amp{ar, ai}, Amp{br, bi}});
    }
    return ProductState(std::move(sites));
}

ProductState ProductState::basis(std::size_t n_sites, std::uint64_t label) {
    std::vector<std::array<Amp, 2>> sites;
    sites.reserve(n_sites);
    for (std::size_t i = 0; i < n_sites; ++i) {
        const bool one = i < 64 && ((label >> i) & 1U);
        sites.push_back(one ? std::array<Amp, 2>{Amp{0.0}, Amp{1.0}} : std::array<Amp, 2>{Amp{1.0}, Amp{0.0}});
    }
    return ProductState(std::move(sites));
}

ProductState::Amp ProductState::coefficient(const BitString& bits) const {
    Amp c{1.0, 0.0};
    for (std::size_t i = 0; i < sites_.size(); ++i) c *= sites_[i][bits.get(i) ? 1 : 0];
    return c;
}

ProductState::Amp ProductState::coefficient(std::uint64_t label) const {
    return coefficient(BitString::from_label(sites_.size(), label));
}

}  // namespace alab
