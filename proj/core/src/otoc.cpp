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

#include "alab/otoc.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "alab/dense.hpp"
#include "alab/parallel.hpp"
#include "alab/rng.hpp"

namespace alab {

void OtocSpec::validate(std::size_t n_sites) const {
    if (factors.empty() || factors.size() % 2 != 0) {
        throw InvalidArgument(fmt::format("OTOC spec needs an even, non-zero number of factors (got {})", factors.size()));
    }
    for (const auto& f : factors) {
        if (f.site >= n_sites) throw InvalidArgument(fmt::format("OTOC site {} out of range for N={}", f.site, n_sites));
    }
}

std::string format_spec(const OtocSpec& spec) {
    std::string out;
    for (const auto& f : spec.factors) {
        if (!out.empty()) out += ' ';
        out += fmt::format("{}X{}", f.conjugated ? "~" : "", f.site);
    }
    return out;
}

OtocSpec parse_spec(std::string_view text) {
    OtocSpec spec;
    std::istringstream is{std::string(text)};
    std::string tok;
    while (is >> tok) {
        std::string_view v = tok;
        OtocFactor f{false, 0};
        if (!v.empty() && v.front() == '~') {
            f.conjugated = true;
            v.remove_prefix(1);
        }
        if (v.size() < 2 || v.front() != 'X') throw InvalidArgument(fmt::format("bad OTOC factor '{}'", tok));
        v.remove_prefix(1);
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), f.site);
        if (ec != std::errc{} || ptr != v.data() + v.size()) {
            throw InvalidArgument(fmt::format("bad OTOC factor '{}'", tok));
        }
        spec.factors.push_back(f);
    }
    if (spec.factors.empty()) throw InvalidArgument("empty OTOC spec");
    return spec;
}

OtocSpec expand_recursive(std::span<const Site> probe_sites, Site base_site) {
    if (probe_sites.empty()) throw InvalidArgument("expand_recursive needs at least one probe site");
    if (probe_sites.size() > 20) throw InvalidArgument("expand_recursive: too many probe sites");
    std::vector<OtocFactor> u{{true, probe_sites[0]}};
    for (std::size_t m = 1; m < probe_sites.size(); ++m) {
        std::vector<OtocFactor> next(u.rbegin(), u.rend());
        next.push_back({false, probe_sites[m]});
        next.insert(next.end(), u.begin(), u.end());
        u = std::move(next);
    }
    OtocSpec spec;
    spec.factors.assign(u.rbegin(), u.rend());
    spec.factors.push_back({false, base_site});
    spec.factors.insert(spec.factors.end(), u.begin(), u.end());
    spec.factors.push_back({false, base_site});
    return spec;
}

std::vector<Site> recursive_probe_sites(std::size_t n_sites, std::size_t points) {
    if (points < 4 || !std::has_single_bit(points)) {
        throw InvalidArgument(fmt::format("recursive OTOC order must be a power of two >= 4 (got {})", points));
    }
    const auto k = static_cast<std::size_t>(std::countr_zero(points));
    if (k - 1 >= n_sites / 2) throw InvalidArgument("too few sites for this recursive order");
    std::vector<Site> out{static_cast<Site>(n_sites / 2)};
    for (std::size_t j = k - 2; j >= 1; --j) out.push_back(static_cast<Site>(j));
    return out;
}

HeisenbergWord compile(const OtocSpec& spec, std::shared_ptr<const Circuit> prefix) {
    if (!prefix) throw InvalidArgument("compile needs a circuit prefix");
    const bool trivial = prefix->depth() == 0;
    HeisenbergWord w;
    auto push = [&](WordAction a) {
        if (!w.actions.empty()) {
            const auto& last = w.actions.back();
            const bool cancel = (std::holds_alternative<Backward>(last) && std::holds_alternative<Forward>(a)) ||
                                (std::holds_alternative<Forward>(last) && std::holds_alternative<Backward>(a));
            if (cancel) {
                w.actions.pop_back();
                return;
            }
        }
        w.actions.push_back(std::move(a));
    };
    for (auto it = spec.factors.rbegin(); it != spec.factors.rend(); ++it) {
        if (it->conjugated && !trivial) {
            push(Forward{prefix});
            push(FlipX{it->site});
            push(Backward{prefix});
        } else {
            push(FlipX{it->site});
        }
    }
    return w;
}

namespace {

std::vector<bool> brickwork_support(std::size_t n, bool periodic, std::size_t depth, Site site) {
    std::vector<bool> sup(n, false);
    sup[site] = true;
    for (std::size_t l = depth; l-- > 0;) {
        for (const auto& [a, b] : brickwork_bonds(n, periodic, l)) {
            if (sup[a] || sup[b]) sup[a] = sup[b] = true;
        }
    }
    return sup;
}

}  // namespace

std::size_t light_cone_contact_depth(const OtocSpec& spec, std::size_t n_sites, bool periodic, std::size_t max_depth) {
    spec.validate(n_sites);
    std::set<Site> conj, bare;
    for (const auto& f : spec.factors) (f.conjugated ? conj : bare).insert(f.site);
    for (Site c : conj) {
        if (bare.count(c)) return 0;
    }
    for (std::size_t t = 1; t <= max_depth; ++t) {
        for (Site c : conj) {
            const auto sup = brickwork_support(n_sites, periodic, t, c);
            for (Site b : bare) {
                if (sup[b]) return t;
            }
        }
    }
    return max_depth + 1;
}

std::vector<bool> heisenberg_support(const Circuit& c, Site site) {
    if (site >= c.n_sites()) throw InvalidArgument("site out of range");
    std::vector<bool> sup(c.n_sites(), false);
    sup[site] = true;
    for (std::size_t l = c.depth(); l-- > 0;) {
        for (const Gate& g : c.layer(l)) {
            const auto s = gate_sites(g);
            if (std::any_of(s.begin(), s.end(), [&](Site x) { return sup[x]; })) {
                for (Site x : s) sup[x] = true;
            }
        }
    }
    return sup;
}

double series_cost(const SeriesRequest& req) {
    const double sum_t = std::accumulate(req.depths.begin(), req.depths.end(), 0.0,
                                         [](double acc, std::size_t t) { return acc + static_cast<double>(t); });
    return static_cast<double>(req.realizations) * static_cast<double>(req.samples) *
           static_cast<double>(req.spec.points()) * static_cast<double>(req.ensemble.n_sites) * sum_t;
}

Circuit realization_circuit(const EnsembleSpec& ensemble, std::size_t depth, std::uint64_t seed, std::size_t r) {
    EnsembleSpec e = ensemble;
    e.depth = depth;
    e.master_seed = derive_seed(seed, {r});
    return build_brickwork(e);
}

namespace {

void check_request(const SeriesRequest& req) {
    req.ensemble.validate();
    req.spec.validate(req.ensemble.n_sites);
    if (req.depths.empty()) throw InvalidArgument("series needs at least one depth");
    if (req.realizations == 0) throw InvalidArgument("series needs at least one realization");
}

OtocPoint combine(std::size_t depth, std::span<const McEstimate> per_r) {
    OtocPoint p{};
    p.depth = depth;
    p.n_realizations = per_r.size();
    p.n_samples = per_r.empty() ? 0 : per_r.front().n_samples;
    const double r = static_cast<double>(per_r.size());
    double re = 0, im = 0, mc = 0;
    for (const auto& e : per_r) {
        re += e.mean.real();
        im += e.mean.imag();
        mc += e.std_error * e.std_error;
    }
    p.mean = re / r;
    p.mean_imag = im / r;
    p.mc_error = std::sqrt(mc) / r;
    if (per_r.size() > 1) {
        double var = 0;
        for (const auto& e : per_r) var += std::norm(e.mean - std::complex<double>(p.mean, p.mean_imag));
        var /= (r - 1.0);
        p.std_error = std::sqrt(var / r);
    } else {
        p.std_error = p.mc_error;
    }
    return p;
}

std::vector<std::size_t> sorted_depths(std::vector<std::size_t> d) {
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    return d;
}

}  // namespace

void check_series_cost(const SeriesRequest& req) {
    if (req.ensemble.gate_set != GateSet::Automaton) throw InvalidArgument("OTOC series need the automaton ensemble");
    if (req.samples == 0) throw InvalidArgument("series needs at least one sample");
    const double cost = series_cost(req);
    if (cost > req.max_cost) {
        throw CapacityError(fmt::format("OTOC series cost {:.3g} (R M points N sum t) exceeds the budget {:.3g}", cost,
                                        req.max_cost));
    }
}

std::vector<McEstimate> series_realization(const SeriesRequest& req, std::size_t r, const ProductState& psi,
                                           SeriesEngine engine) {
    check_request(req);
    if (psi.n_sites() != req.ensemble.n_sites) throw InvalidArgument("state width does not match the ensemble");
    const auto depths = sorted_depths(req.depths);
    const Circuit full = realization_circuit(req.ensemble, depths.back(), req.seed, r);
    std::vector<McEstimate> out(depths.size());
    std::optional<StateVector> sv;
    if (engine == SeriesEngine::Exact) sv.emplace(StateVector::from_product(psi));
    for (std::size_t i = 0; i < depths.size(); ++i) {
        auto prefix = std::make_shared<const Circuit>(truncate(full, depths[i]));
        const auto word = compile(req.spec, prefix);
        if (engine == SeriesEngine::Exact) {
            out[i] = McEstimate{expectation(*sv, word), 0.0, 0};
        } else {
            out[i] = mc_expectation(word, psi, req.samples, derive_seed(req.seed, {r, depths[i], 1}), req.workers);
        }
    }
    return out;
}

OtocSeries combine_series(const SeriesRequest& req, std::span<const std::vector<McEstimate>> per_realization) {
    const auto depths = sorted_depths(req.depths);
    OtocSeries out{req.spec, req.ensemble.n_sites, req.seed, {}};
    std::vector<McEstimate> column(per_realization.size());
    for (std::size_t i = 0; i < depths.size(); ++i) {
        for (std::size_t r = 0; r < per_realization.size(); ++r) {
            if (per_realization[r].size() != depths.size()) throw InvalidArgument("realization has the wrong length");
            column[r] = per_realization[r][i];
        }
        out.points.push_back(combine(depths[i], column));
    }
    return out;
}

OtocSeries evaluate_series(const SeriesRequest& req, const std::optional<ProductState>& state) {
    check_request(req);
    check_series_cost(req);
    const ProductState psi = state ? *state : ProductState::all_plus(req.ensemble.n_sites);
    std::vector<std::vector<McEstimate>> est(req.realizations);
    for (std::size_t r = 0; r < req.realizations; ++r) est[r] = series_realization(req, r, psi, SeriesEngine::MonteCarlo);
    return combine_series(req, est);
}

OtocSeries evaluate_series_exact(const SeriesRequest& req, const std::optional<ProductState>& state) {
    check_request(req);
    const ProductState psi = state ? *state : ProductState::all_plus(req.ensemble.n_sites);
    std::vector<std::vector<McEstimate>> est(req.realizations);
    parallel_for(req.realizations, req.workers,
                 [&](std::size_t r) { est[r] = series_realization(req, r, psi, SeriesEngine::Exact); });
    return combine_series(req, est);
}

NoCrossing::NoCrossing(double series_min, double epsilon)
    : Error(fmt::format("series never stays below epsilon={} (minimum {})", epsilon, series_min)), min_(series_min) {}

double scrambling_time(const OtocSeries& series, double epsilon) {
    const auto& p = series.points;
    if (p.empty()) throw NoCrossing(std::numeric_limits<double>::quiet_NaN(), epsilon);
    std::optional<std::size_t> last_above;
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i) {
        lo = std::min(lo, p[i].mean);
        if (p[i].mean >= epsilon) last_above = i;
    }
    if (!last_above) return static_cast<double>(p.front().depth);
    const std::size_t j = *last_above;
    if (j + 1 == p.size()) throw NoCrossing(lo, epsilon);
    const double d0 = static_cast<double>(p[j].depth), d1 = static_cast<double>(p[j + 1].depth);
    const double f = (p[j].mean - epsilon) / (p[j].mean - p[j + 1].mean);
    return d0 + f * (d1 - d0);
}

std::vector<std::size_t> depth_grid(std::size_t dense_from, std::size_t max_depth, std::size_t step) {
    if (step == 0) throw InvalidArgument("depth grid step must be positive");
    std::vector<std::size_t> g{0};
    for (std::size_t t = 1; t < dense_from && t <= max_depth; t *= 2) g.push_back(t);
    for (std::size_t t = dense_from; t <= max_depth; t += step) {
        if (t > g.back() || g.size() == 1) g.push_back(t);
    }
    return sorted_depths(g);
}

// ---------------------------------------------------------------------------
// Max-OTOC search

namespace {

bool pool_has(std::span<const Site> pool, Site s) { return std::find(pool.begin(), pool.end(), s) != pool.end(); }

// Moves that leave the ensemble-averaged value on an X-basis eigenstate unchanged.
std::vector<OtocSpec> neighbours(const OtocSpec& s, std::span<const Site> pool, std::size_t n) {
    std::vector<OtocSpec> out;
    const auto& f = s.factors;
    const std::size_t len = f.size();
    // translation by L/2 keeps the brickwork parity only when L/2 is even
    if (n % 4 == 0) {
        OtocSpec t = s;
        bool closed = true;
        for (auto& x : t.factors) {
            x.site = static_cast<Site>((x.site + n / 2) % n);
            closed = closed && pool_has(pool, x.site);
        }
        if (closed) out.push_back(std::move(t));
    }
    // trailing bare factor acts on an X eigenstate
    if (!f.back().conjugated) {
        for (Site p : pool) {
            OtocSpec t = s;
            t.factors.back().site = p;
            out.push_back(std::move(t));
        }
    }
    // reversal (complex conjugation); the leading bare factor is dropped and a free bare one appended
    if (len >= 2 && f[0].conjugated && !f.back().conjugated) {
        OtocSpec r;
        for (std::size_t i = len - 1; i-- > 0;) r.factors.push_back(f[i]);
        r.factors.push_back({false, f.back().site});
        out.push_back(std::move(r));
    }
    return out;
}

OtocSpec rotate_pair(const OtocSpec& s, std::size_t by) {
    OtocSpec r;
    const std::size_t k = (2 * by) % s.factors.size();
    r.factors.assign(s.factors.begin() + static_cast<std::ptrdiff_t>(k), s.factors.end());
    r.factors.insert(r.factors.end(), s.factors.begin(), s.factors.begin() + static_cast<std::ptrdiff_t>(k));
    return r;
}

}  // namespace

std::vector<OtocSpec> equivalent_specs(const OtocSpec& spec, std::span<const Site> pool, std::size_t n_sites) {
    std::set<OtocSpec> seen{spec};
    std::vector<OtocSpec> frontier{spec};
    while (!frontier.empty()) {
        auto cur = std::move(frontier.back());
        frontier.pop_back();
        for (auto& nb : neighbours(cur, pool, n_sites)) {
            if (seen.insert(nb).second) frontier.push_back(std::move(nb));
        }
    }
    return {seen.begin(), seen.end()};
}

OtocSpec canonical_spec(const OtocSpec& spec, std::span<const Site> pool, std::size_t n_sites) {
    return equivalent_specs(spec, pool, n_sites).front();
}

namespace {

OtocSpec cyclic_key(const OtocSpec& spec, std::span<const Site> pool, std::size_t n_sites) {
    OtocSpec best = canonical_spec(spec, pool, n_sites);
    for (std::size_t r = 1; r < spec.factors.size() / 2; ++r) {
        best = std::min(best, canonical_spec(rotate_pair(spec, r), pool, n_sites));
    }
    return best;
}

}  // namespace

SearchResult max_otoc_search(const SearchRequest& req, const SpecEvaluator& coarse, const SpecEvaluator& fine) {
    if (req.points < 2 || req.points % 2 != 0) throw InvalidArgument("search needs an even number of factors");
    if (req.n_sites < 2) throw InvalidArgument("search needs n_sites");
    std::vector<Site> pool = req.site_pool;
    if (pool.empty()) {
        const auto h = static_cast<Site>(req.n_sites / 2);
        pool = {0, 1, static_cast<Site>(h - 1), h};
    }
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    for (Site s : pool) {
        if (s >= req.n_sites) throw InvalidArgument(fmt::format("pool site {} out of range", s));
    }

    SearchResult res;
    const double total = std::pow(static_cast<double>(pool.size()), static_cast<double>(req.points));
    const std::size_t count =
        total > static_cast<double>(req.max_specs) ? req.max_specs : static_cast<std::size_t>(total);
    res.partial = total > static_cast<double>(req.max_specs);

    // coarse groups: exact classes merged under pair rotation; rotation is not exact, so the
    // fine stage re-scores every exact class of the surviving groups
    std::vector<OtocSpec> reps;
    std::map<OtocSpec, std::vector<OtocSpec>> groups;
    std::set<OtocSpec> canon;
    std::vector<std::size_t> digits(req.points, 0);
    for (std::size_t i = 0; i < count; ++i) {
        OtocSpec s;
        for (std::size_t j = 0; j < req.points; ++j) s.factors.push_back({j % 2 == 0, pool[digits[j]]});
        if (req.prune_symmetric) {
            auto c = canonical_spec(s, pool, req.n_sites);
            if (canon.insert(c).second) {
                auto key = cyclic_key(c, pool, req.n_sites);
                auto [it, fresh] = groups.try_emplace(key);
                if (fresh) reps.push_back(key);
                it->second.push_back(std::move(c));
            }
        } else {
            reps.push_back(std::move(s));
        }
        for (std::size_t j = req.points; j-- > 0;) {
            if (++digits[j] < pool.size()) break;
            digits[j] = 0;
        }
    }
    res.enumerated = count;
    res.evaluated_coarse = reps.size();

    const auto cv = coarse(reps);
    if (cv.size() != reps.size()) throw Error("coarse evaluator returned the wrong number of values");
    std::vector<std::size_t> order(reps.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cv[a] > cv[b]; });
    order.resize(std::min(order.size(), std::max<std::size_t>(1, req.survivors)));

    std::set<OtocSpec> cand_set;
    for (std::size_t i : order) {
        if (req.prune_symmetric) {
            for (const auto& c : groups.at(reps[i])) cand_set.insert(c);
        } else {
            cand_set.insert(reps[i]);
        }
    }
    const std::vector<OtocSpec> cands(cand_set.begin(), cand_set.end());
    const auto fv = fine(cands);
    if (fv.size() != cands.size()) throw Error("fine evaluator returned the wrong number of values");
    for (std::size_t i = 0; i < cands.size(); ++i) res.ranking.emplace_back(cands[i], fv[i]);
    std::stable_sort(res.ranking.begin(), res.ranking.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    res.best = res.ranking.front().first;
    res.best_value = res.ranking.front().second;
    return res;
}

namespace {

using Vec = std::vector<std::complex<double>>;

// U^dagger X_a U as a phased permutation: |m> -> e^{i(theta_m - theta_m')} |m'>.
struct ConjugatedX {
    std::vector<std::uint32_t> target;
    std::vector<std::complex<double>> phase;
};

void apply_factor(const OtocFactor& f, const std::vector<ConjugatedX>& conj, Vec& v, Vec& tmp) {
    const std::uint64_t dim = v.size();
    if (!f.conjugated) {
        const std::uint64_t bit = std::uint64_t{1} << f.site;
        for (std::uint64_t m = 0; m < dim; ++m) {
            if (m & bit) std::swap(v[m], v[m ^ bit]);
        }
        return;
    }
    const auto& cx = conj[f.site];
    for (std::uint64_t m = 0; m < dim; ++m) tmp[cx.target[m]] = cx.phase[m] * v[m];
    v.swap(tmp);
}

}  // namespace

std::vector<double> exact_spec_values_at(std::span<const OtocSpec> specs, const EnsembleSpec& ensemble,
                                         std::size_t depth, std::uint64_t seed, std::size_t r,
                                         const ProductState& state) {
    const std::size_t n = ensemble.n_sites;
    if (n > 20) throw CapacityError("exact_spec_values needs N <= 20");
    for (const auto& s : specs) s.validate(n);
    const StateVector sv = StateVector::from_product(state);
    const std::uint64_t dim = sv.dim();
    std::vector<double> out(specs.size(), 0.0);

    const Circuit c = realization_circuit(ensemble, depth, seed, r);
    const auto table = permutation_table(c);
    std::vector<std::uint32_t> inv(dim);
    for (std::uint64_t m = 0; m < dim; ++m) inv[table.image[m]] = static_cast<std::uint32_t>(m);
    std::vector<ConjugatedX> conj(n);
    for (Site a = 0; a < n; ++a) {
        conj[a].target.resize(dim);
        conj[a].phase.resize(dim);
        for (std::uint64_t m = 0; m < dim; ++m) {
            const std::uint32_t mp = inv[table.image[m] ^ (std::uint32_t{1} << a)];
            conj[a].target[m] = mp;
            conj[a].phase[m] = std::polar(1.0, table.phase[m] - table.phase[mp]);
        }
    }
    std::map<std::vector<OtocFactor>, Vec> left, right;
    Vec tmp(dim);
    auto half_vec = [&](std::map<std::vector<OtocFactor>, Vec>& cache, std::vector<OtocFactor> key,
                        bool is_left) -> const Vec& {
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        Vec v(sv.amps().begin(), sv.amps().end());
        // right half: f0 f1 ... |psi>, innermost first; left half: (f0 ... f_{h-1})^dagger |psi>
        if (is_left) {
            for (const auto& f : key) apply_factor(f, conj, v, tmp);
        } else {
            for (auto f = key.rbegin(); f != key.rend(); ++f) apply_factor(*f, conj, v, tmp);
        }
        return cache.emplace(std::move(key), std::move(v)).first->second;
    };
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& f = specs[i].factors;
        const std::size_t h = f.size() / 2;
        const Vec& l = half_vec(left, {f.begin(), f.begin() + static_cast<std::ptrdiff_t>(h)}, true);
        const Vec& rv = half_vec(right, {f.begin() + static_cast<std::ptrdiff_t>(h), f.end()}, false);
        double acc = 0.0;
        for (std::uint64_t m = 0; m < dim; ++m) {
            acc += l[m].real() * rv[m].real() + l[m].imag() * rv[m].imag();
        }
        out[i] = acc;
    }
    return out;
}

std::vector<double> exact_spec_values(std::span<const OtocSpec> specs, const EnsembleSpec& ensemble, std::size_t depth,
                                      std::size_t realizations, std::uint64_t seed, const ProductState& state) {
    if (realizations == 0) throw InvalidArgument("need at least one realization");
    std::vector<double> out(specs.size(), 0.0);
    for (std::size_t r = 0; r < realizations; ++r) {
        const auto v = exact_spec_values_at(specs, ensemble, depth, seed, r, state);
        for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
    }
    for (auto& v : out) v /= static_cast<double>(realizations);
    return out;
}

std::vector<double> mc_spec_values_at(std::span<const OtocSpec> specs, const EnsembleSpec& ensemble,
                                      std::size_t depth, std::size_t samples, std::uint64_t seed, std::size_t r,
                                      const ProductState& state, std::size_t workers) {
    auto c = std::make_shared<const Circuit>(realization_circuit(ensemble, depth, seed, r));
    std::vector<double> out(specs.size(), 0.0);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto e = mc_expectation(compile(specs[i], c), state, samples, derive_seed(seed, {r, i, 2}), workers);
        out[i] = e.mean.real();
    }
    return out;
}

std::vector<double> mc_spec_values(std::span<const OtocSpec> specs, const EnsembleSpec& ensemble, std::size_t depth,
                                   std::size_t realizations, std::size_t samples, std::uint64_t seed,
                                   const ProductState& state, std::size_t workers) {
    if (realizations == 0) throw InvalidArgument("need at least one realization");
    std::vector<double> out(specs.size(), 0.0);
    for (std::size_t r = 0; r < realizations; ++r) {
        const auto v = mc_spec_values_at(specs, ensemble, depth, samples, seed, r, state, workers);
        for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
    }
    for (auto& v : out) v /= static_cast<double>(realizations);
    return out;
}

}  // namespace alab
