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

#include "alab/fits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "alab/error.hpp"

namespace alab {

LeastSquares least_squares(std::span<const double> design, std::size_t cols, std::span<const double> y) {
    if (cols == 0 || design.size() != y.size() * cols) throw InvalidArgument("design matrix shape mismatch");
    const auto rows = static_cast<Eigen::Index>(y.size());
    const auto p = static_cast<Eigen::Index>(cols);
    if (rows < p) throw InvalidArgument(fmt::format("least squares needs at least {} rows (got {})", cols, rows));
    Eigen::MatrixXd x(rows, p);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = design[static_cast<std::size_t>(i * p + j)];
    }
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), rows);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) throw InvalidArgument("degenerate design matrix");
    const Eigen::VectorXd beta = qr.solve(yv);
    const Eigen::VectorXd res = yv - x * beta;

    LeastSquares out;
    out.params.assign(beta.data(), beta.data() + p);
    out.residuals.assign(res.data(), res.data() + rows);
    const double rss = res.squaredNorm();
    const double tss = (yv.array() - yv.mean()).matrix().squaredNorm();
    out.r_squared = tss > 0 ? 1.0 - rss / tss : 1.0;
    const double sigma2 = rows > p ? rss / static_cast<double>(rows - p) : 0.0;
    const Eigen::MatrixXd cov = (x.transpose() * x).inverse() * sigma2;
    for (Eigen::Index j = 0; j < p; ++j) out.std_errors.push_back(std::sqrt(std::max(0.0, cov(j, j))));
    return out;
}

PowerLaw fit_power_law(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("x and y differ in length");
    if (x.size() < 3) throw InvalidArgument("power-law fit needs at least three points");
    std::vector<double> design, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw InvalidArgument("power-law fit needs positive data");
        design.push_back(1.0);
        design.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    auto fit = least_squares(design, 2, ly);
    return {std::exp(fit.params[0]), fit.params[1], fit.std_errors[1], std::move(fit)};
}

ScramblingFit complexity_fits(std::span<const TStarEntry> table, double epsilon) {
    std::vector<TStarEntry> at;
    for (const auto& e : table) {
        if (e.epsilon == epsilon) at.push_back(e);
    }
    if (at.size() < 3) {
        throw InvalidArgument(fmt::format("complexity_fits needs at least 3 entries at epsilon={} (got {})", epsilon,
                                          at.size()));
    }
    ScramblingFit out;
    std::vector<double> dlog, dlin, y;
    double mean_l = 0.0;
    for (const auto& e : at) {
        const double l = static_cast<double>(e.n_sites);
        const double k = static_cast<double>(e.points);
        dlog.insert(dlog.end(), {l, std::log2(k)});
        dlin.insert(dlin.end(), {l, k});
        y.push_back(e.t_star);
        mean_l += l;
    }
    mean_l /= static_cast<double>(at.size());
    out.log_fit = least_squares(dlog, 2, y);
    out.log_v_b = out.log_fit.params[0];
    out.log_v_k = out.log_fit.params[1];
    out.lin_fit = least_squares(dlin, 2, y);
    out.lin_v_b = out.lin_fit.params[0];
    out.slope_k = out.lin_fit.params[1];
    out.delta = out.slope_k / std::sqrt(mean_l);

    // per-size slope in k
    std::map<std::size_t, std::vector<const TStarEntry*>> by_size;
    for (const auto& e : at) by_size[e.n_sites].push_back(&e);
    std::vector<double> ls, gaps;
    for (const auto& [n, es] : by_size) {
        std::set<std::size_t> ks;
        for (const auto* e : es) ks.insert(e->points);
        if (ks.size() < 2) continue;
        std::vector<double> d, t;
        for (const auto* e : es) {
            d.insert(d.end(), {1.0, static_cast<double>(e->points)});
            t.push_back(e->t_star);
        }
        const double slope = least_squares(d, 2, t).params[1];
        if (slope > 0) {
            ls.push_back(static_cast<double>(n));
            gaps.push_back(slope);
        }
    }
    if (ls.size() >= 3) {
        const auto pl = fit_power_law(ls, gaps);
        out.alpha = pl.exponent;
        out.alpha_err = pl.exponent_err;
        out.prefactor = pl.prefactor;
    }

    std::map<std::pair<std::size_t, double>, std::map<std::size_t, double>> cells;
    for (const auto& e : table) cells[{e.n_sites, e.epsilon}][e.points] = e.t_star;
    for (const auto& [key, ts] : cells) {
        if (ts.count(4) && ts.count(8) && ts.count(16) && ts.at(8) != ts.at(4)) {
            out.ratios.push_back({key.first, key.second, (ts.at(16) - ts.at(8)) / (ts.at(8) - ts.at(4))});
        }
    }
    return out;
}

}  // namespace alab
