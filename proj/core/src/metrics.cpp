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

#include "alab/metrics.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <tuple>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "alab/error.hpp"
#include "alab/parallel.hpp"
#include "alab/rng.hpp"

namespace alab {

double von_neumann(const SchmidtSpectrum& sp) {
    double s = 0.0;
    for (double v : sp.values) {
        if (v > 0.0) s -= v * std::log2(v);
    }
    return std::max(0.0, s);
}

double page_entropy(double dim_a, double dim_b) {
    if (!(dim_a >= 1.0) || !(dim_b >= 1.0)) throw InvalidArgument("page_entropy dimensions must be >= 1");
    if (dim_a > dim_b) {
        std::cerr << fmt::format("warning: page_entropy called with dA={} > dB={}; swapping\n", dim_a, dim_b);
        std::swap(dim_a, dim_b);
    }
    const double s = std::log2(dim_a) - dim_a / (2.0 * std::numbers::ln2 * dim_b);
    return std::max(0.0, s);
}

double renyi(const SchmidtSpectrum& sp, double alpha) {
    if (alpha == 1.0) throw InvalidArgument("renyi(alpha = 1) is the von Neumann entropy; call von_neumann");
    if (!(alpha > 0.0)) throw InvalidArgument("renyi needs alpha > 0");
    if (std::isinf(alpha)) return min_entropy(sp);
    double sum = 0.0;
    for (double v : sp.values) {
        if (v > 0.0) sum += std::pow(v, alpha);
    }
    return std::log2(sum) / (1.0 - alpha);
}

double trace_power(const SchmidtSpectrum& sp, int k) {
    if (k < 1) throw InvalidArgument("trace_power needs k >= 1");
    double sum = 0.0;
    for (double v : sp.values) {
        double p = v;
        for (int i = 1; i < k; ++i) p *= v;
        sum += p;
    }
    return sum;
}

double min_entropy(const SchmidtSpectrum& sp) {
    if (sp.values.empty()) throw InvalidArgument("empty spectrum");
    const double top = *std::max_element(sp.values.begin(), sp.values.end());
    return -std::log2(top);
}

std::pair<double, double> mean_std(std::span<const double> xs) {
    if (xs.empty()) return {0.0, 0.0};
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return {mean, std::sqrt(var / n)};
}

namespace {

std::vector<Site> mask_sites(std::uint64_t mask) {
    std::vector<Site> out;
    while (mask != 0) {
        out.push_back(static_cast<Site>(std::countr_zero(mask)));
        mask &= mask - 1;
    }
    return out;
}

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

}  // namespace

EntropyStats bipartition_scan(const StateVector& s, const ScanMode& mode, std::size_t workers) {
    const std::size_t n = s.n_sites();
    if (n % 2 != 0 || n < 2) throw InvalidArgument("bipartition_scan needs an even number of sites");
    const std::size_t half = n / 2;
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;

    EntropyStats st;
    if (!mode.sampled) {
        const double count = binomial(n, half);
        if (count > static_cast<double>(kMaxExhaustiveBipartitions)) {
            throw InvalidArgument(fmt::format(
                "{} bipartitions exceed the exhaustive cap of {}; use a sampled scan", count, kMaxExhaustiveBipartitions));
        }
        // Pure state: S(A) = S(complement), so only subsets containing site 0 are diagonalized.
        std::vector<std::uint64_t> with_zero;
        for (std::uint64_t m = (std::uint64_t{1} << half) - 1; m <= full;) {
            if (m & 1U) with_zero.push_back(m);
            const std::uint64_t c = m & (~m + 1);
            const std::uint64_t r = m + c;
            if (r > full || r == 0) break;
            m = (((r ^ m) >> 2) / c) | r;
        }
        std::vector<double> ent(with_zero.size());
        parallel_for(with_zero.size(), workers, [&](std::size_t i) {
            const auto sites = mask_sites(with_zero[i]);
            ent[i] = von_neumann(schmidt(s, sites));
        });
        for (std::size_t i = 0; i < with_zero.size(); ++i) {
            st.entries.push_back({with_zero[i], ent[i]});
            st.entries.push_back({full & ~with_zero[i], ent[i]});
        }
        std::sort(st.entries.begin(), st.entries.end(),
                  [](const auto& a, const auto& b) { return a.subset_mask < b.subset_mask; });
    } else {
        Rng rng(mode.seed);
        std::vector<std::uint64_t> masks(*mode.sampled);
        std::vector<Site> order(n);
        for (auto& m : masks) {
            std::iota(order.begin(), order.end(), Site{0});
            for (std::size_t i = 0; i < half; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - i));
                std::swap(order[i], order[std::min(j, n - 1)]);
            }
            m = 0;
            for (std::size_t i = 0; i < half; ++i) m |= std::uint64_t{1} << order[i];
        }
        std::vector<double> ent(masks.size());
        parallel_for(masks.size(), workers, [&](std::size_t i) { ent[i] = von_neumann(schmidt(s, mask_sites(masks[i]))); });
        for (std::size_t i = 0; i < masks.size(); ++i) st.entries.push_back({masks[i], ent[i]});
    }
    std::vector<double> xs;
    xs.reserve(st.entries.size());
    for (const auto& e : st.entries) xs.push_back(e.entropy);
    std::tie(st.mean, st.std_dev) = mean_std(xs);
    return st;
}

std::vector<double> spacing_ratios(std::span<const double> levels, std::size_t* zero_spacings) {
    std::vector<double> r;
    if (levels.size() < 3) return r;
    r.reserve(levels.size() - 2);
    std::size_t zeros = 0;
    for (std::size_t i = 0; i + 2 < levels.size(); ++i) {
        const double s0 = levels[i + 1] - levels[i];
        const double s1 = levels[i + 2] - levels[i + 1];
        if (s0 <= 0.0 || s1 <= 0.0) {
            ++zeros;
            r.push_back(0.0);
        } else {
            r.push_back(std::min(s0 / s1, s1 / s0));
        }
    }
    if (zero_spacings) *zero_spacings = zeros;
    return r;
}

LevelSpacingStats stats_from_ratios(std::vector<double> ratios, std::size_t bins) {
    LevelSpacingStats st;
    st.ratios = std::move(ratios);
    st.hist_edges.resize(bins + 1);
    st.hist_density.assign(bins, 0.0);
    for (std::size_t i = 0; i <= bins; ++i) st.hist_edges[i] = static_cast<double>(i) / static_cast<double>(bins);
    for (double r : st.ratios) {
        const auto b = std::min(bins - 1, static_cast<std::size_t>(r * static_cast<double>(bins)));
        st.hist_density[b] += 1.0;
    }
    if (!st.ratios.empty()) {
        const double norm = static_cast<double>(st.ratios.size()) / static_cast<double>(bins);
        for (auto& h : st.hist_density) h /= norm;
        st.mean_r = std::accumulate(st.ratios.begin(), st.ratios.end(), 0.0) / static_cast<double>(st.ratios.size());
    }
    return st;
}

LevelSpacingStats level_spacing(const SchmidtSpectrum& sp, std::size_t truncation) {
    std::vector<double> levels;
    std::size_t discarded = 0;
    for (double v : sp.values) {
        if (v < kLevelFloor) {
            ++discarded;
        } else {
            levels.push_back(v);
        }
    }
    std::sort(levels.begin(), levels.end());
    if (truncation > 0 && levels.size() > truncation) {
        levels.erase(levels.begin(), levels.end() - static_cast<std::ptrdiff_t>(truncation));
    }
    if (levels.size() < 3) {
        throw InvalidArgument(fmt::format("level_spacing needs at least 3 levels above {} (got {})", kLevelFloor,
                                          levels.size()));
    }
    std::size_t zeros = 0;
    auto st = stats_from_ratios(spacing_ratios(levels, &zeros));
    st.discarded_levels = discarded;
    st.zero_spacings = zeros;
    return st;
}

LevelSpacingStats pool(std::span<const LevelSpacingStats> parts, std::size_t bins) {
    std::vector<double> all;
    std::size_t discarded = 0, zeros = 0;
    for (const auto& p : parts) {
        all.insert(all.end(), p.ratios.begin(), p.ratios.end());
        discarded += p.discarded_levels;
        zeros += p.zero_spacings;
    }
    auto st = stats_from_ratios(std::move(all), bins);
    st.discarded_levels = discarded;
    st.zero_spacings = zeros;
    return st;
}

LevelSpacingStats rmt_reference(RmtEnsemble ensemble, std::size_t dim, std::size_t n_samples, std::uint64_t seed) {
    if (dim < 16) throw InvalidArgument("rmt_reference needs matrix_dim >= 16");
    Rng rng(seed);
    std::vector<double> ratios;
    std::vector<double> levels(dim);
    if (ensemble == RmtEnsemble::Poisson) {
        ratios.reserve(n_samples * (dim - 2));
        for (std::size_t s = 0; s < n_samples; ++s) {
            for (auto& l : levels) l = uniform01(rng);
            std::sort(levels.begin(), levels.end());
            const auto r = spacing_ratios(levels);
            ratios.insert(ratios.end(), r.begin(), r.end());
        }
    } else {
        std::normal_distribution<double> normal;
        const auto n = static_cast<Eigen::Index>(dim);
        Eigen::MatrixXcd a(n, n);
        for (std::size_t s = 0; s < n_samples; ++s) {
            for (Eigen::Index j = 0; j < n; ++j) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double re = normal(rng);
                    const double im = normal(rng);
                    a(i, j) = {re, im};
                }
            }
            const Eigen::MatrixXcd h = (a + a.adjoint()) * 0.5;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
            for (std::size_t i = 0; i < dim; ++i) levels[i] = es.eigenvalues()[static_cast<Eigen::Index>(i)];
            const auto r = spacing_ratios(levels);
            ratios.insert(ratios.end(), r.begin(), r.end());
        }
    }
    return stats_from_ratios(std::move(ratios));
}

double BitstringHistogram::density(std::size_t i) const {
    if (total_mass <= 0.0) return 0.0;
    return counts.at(i) / (total_mass * (edges.at(i + 1) - edges.at(i)));
}

BitstringHistogram bitstring_histogram(std::span<const double> probabilities, double dim, double bin_width,
                                       double gamma_max) {
    if (!(bin_width > 0.0) || !(gamma_max > bin_width)) throw InvalidArgument("bad histogram binning");
    BitstringHistogram h;
    const auto bins = static_cast<std::size_t>(std::ceil(gamma_max / bin_width));
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = bin_width * static_cast<double>(i);
    h.counts.assign(bins, 0.0);
    for (double p : probabilities) {
        const double g = dim * p;
        const auto b = static_cast<std::size_t>(g / bin_width);
        if (b < bins) h.counts[b] += 1.0;
    }
    h.total_mass = static_cast<double>(probabilities.size());
    return h;
}

LineFit porter_thomas_fit(const BitstringHistogram& h, double lo, double hi) {
    double sw = 0, sx = 0, sy = 0;
    std::vector<std::array<double, 3>> pts;
    for (std::size_t i = 0; i + 1 < h.edges.size(); ++i) {
        const double c = 0.5 * (h.edges[i] + h.edges[i + 1]);
        if (c < lo || c > hi || h.counts[i] <= 0.0) continue;
        pts.push_back({c, std::log(h.density(i)), h.counts[i]});
    }
    LineFit f;
    f.points = pts.size();
    if (pts.size() < 2) throw InvalidArgument("porter_thomas_fit needs at least two populated bins");
    for (const auto& [x, y, w] : pts) {
        sw += w;
        sx += w * x;
        sy += w * y;
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y, w] : pts) {
        sxx += w * (x - mx) * (x - mx);
        sxy += w * (x - mx) * (y - my);
        syy += w * (y - my) * (y - my);
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.slope_err = 1.0 / std::sqrt(sxx);
    f.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

std::vector<std::size_t> tail_counts(std::span<const double> probabilities, double dim,
                                     std::span<const double> gamma_grid) {
    std::vector<double> g(probabilities.size());
    std::transform(probabilities.begin(), probabilities.end(), g.begin(), [&](double p) { return dim * p; });
    std::sort(g.begin(), g.end());
    std::vector<std::size_t> out;
    out.reserve(gamma_grid.size());
    for (double gamma : gamma_grid) {
        out.push_back(static_cast<std::size_t>(g.end() - std::upper_bound(g.begin(), g.end(), gamma)));
    }
    return out;
}

DesignBoundReport design_bound_from_tails(std::span<const double> gamma_grid, std::span<const std::size_t> tails,
                                          std::size_t total, double eps, double z_sigma) {
    if (tails.size() != gamma_grid.size()) throw InvalidArgument("tail counts and gamma grid differ in length");
    const double n = static_cast<double>(total);
    DesignBoundReport rep;
    bool clean = true;
    for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
        const double gamma = gamma_grid[i];
        DesignBoundRow row{};
        row.gamma = gamma;
        row.tail = n > 0 ? static_cast<double>(tails[i]) / n : 0.0;
        row.bound = (1.0 + eps) * std::exp(-gamma);
        const double pb = std::min(row.bound, 1.0);
        row.allowance = n > 0 ? z_sigma * std::sqrt(pb * (1.0 - pb) / n) : 0.0;
        row.violated = row.tail > row.bound + row.allowance;
        if (row.violated && !rep.violation_onset) rep.violation_onset = gamma;
        if (row.violated) clean = false;
        if (clean) rep.gamma_star = gamma;
        rep.rows.push_back(row);
    }
    return rep;
}

DesignBoundReport design_bound_check(std::span<const double> probabilities, double dim,
                                     std::span<const double> gamma_grid, double eps, double z_sigma) {
    const auto tails = tail_counts(probabilities, dim, gamma_grid);
    return design_bound_from_tails(gamma_grid, tails, probabilities.size(), eps, z_sigma);
}

std::vector<TracePowerEstimate> haar_trace_power_oracle(std::size_t dim_a, std::size_t dim_b, std::span<const int> ks,
                                                        std::size_t n_samples, std::uint64_t seed) {
    if (dim_a * dim_b > (std::size_t{1} << 20)) throw CapacityError("haar oracle needs dA dB <= 2^20");
    if (n_samples == 0) throw InvalidArgument("haar oracle needs at least one sample");
    for (int k : ks) {
        if (k < 1) throw InvalidArgument("trace power order must be >= 1");
    }
    Rng rng(seed);
    std::normal_distribution<double> normal;
    const auto da = static_cast<Eigen::Index>(dim_a), db = static_cast<Eigen::Index>(dim_b);
    Eigen::MatrixXcd m(da, db);
    std::vector<double> sum(ks.size(), 0.0), sq(ks.size(), 0.0);
    SchmidtSpectrum sp;
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (Eigen::Index j = 0; j < db; ++j) {
            for (Eigen::Index i = 0; i < da; ++i) {
                const double re = normal(rng);
                const double im = normal(rng);
                m(i, j) = {re, im};
            }
        }
        m /= m.norm();
        const Eigen::Index small = std::min(da, db);
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(small, small);
        if (da <= db) {
            rho.selfadjointView<Eigen::Lower>().rankUpdate(m);
        } else {
            rho.selfadjointView<Eigen::Lower>().rankUpdate(m.adjoint());
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
        sp.values.resize(static_cast<std::size_t>(small));
        for (Eigen::Index i = 0; i < small; ++i) sp.values[static_cast<std::size_t>(i)] = std::max(0.0, es.eigenvalues()[i]);
        for (std::size_t j = 0; j < ks.size(); ++j) {
            const double t = trace_power(sp, ks[j]);
            sum[j] += t;
            sq[j] += t * t;
        }
    }
    std::vector<TracePowerEstimate> out;
    const double n = static_cast<double>(n_samples);
    for (std::size_t j = 0; j < ks.size(); ++j) {
        const double mean = sum[j] / n;
        const double var = n > 1 ? std::max(0.0, (sq[j] - n * mean * mean) / (n - 1)) : 0.0;
        out.push_back({ks[j], mean, std::sqrt(var / n)});
    }
    return out;
}

}  // namespace alab
