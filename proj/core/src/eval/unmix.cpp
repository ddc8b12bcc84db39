#include "spectracal/eval/unmix.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "spectracal/errors.hpp"

namespace spectracal::eval {

namespace {

// Lawson-Hanson on the normal equations: gram = A^T A, aty = A^T y.
std::vector<double> nnls_normal(const Eigen::MatrixXd& gram, const Eigen::VectorXd& aty) {
    const Eigen::Index n = gram.rows();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    const double tol = 1e-12 * std::max(1.0, aty.cwiseAbs().maxCoeff()) *
                       std::max<double>(1.0, static_cast<double>(n));

    auto solve_passive = [&](Eigen::VectorXd& z) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index q = 0; q < n; ++q) {
            if (passive[static_cast<std::size_t>(q)]) idx.push_back(q);
        }
        const auto m = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd g(m, m);
        Eigen::VectorXd b(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            b[r] = aty[idx[static_cast<std::size_t>(r)]];
            for (Eigen::Index c = 0; c < m; ++c)
                g(r, c) = gram(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]);
        }
        const Eigen::VectorXd sol = g.ldlt().solve(b);
        z = Eigen::VectorXd::Zero(n);
        for (Eigen::Index r = 0; r < m; ++r) z[idx[static_cast<std::size_t>(r)]] = sol[r];
    };

    for (int outer = 0; outer < 3 * n + 10; ++outer) {
        const Eigen::VectorXd w = aty - gram * x;
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index q = 0; q < n; ++q) {
            if (!passive[static_cast<std::size_t>(q)] && w[q] > best_w) {
                best_w = w[q];
                best = q;
            }
        }
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = true;

        for (int inner = 0; inner < 3 * n + 10; ++inner) {
            Eigen::VectorXd z;
            solve_passive(z);
            bool feasible = true;
            for (Eigen::Index q = 0; q < n; ++q) {
                if (passive[static_cast<std::size_t>(q)] && z[q] <= 0.0) feasible = false;
            }
            if (feasible) {
                x = z;
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            for (Eigen::Index q = 0; q < n; ++q) {
                if (passive[static_cast<std::size_t>(q)] && z[q] <= 0.0)
                    alpha = std::min(alpha, x[q] / (x[q] - z[q]));
            }
            x += alpha * (z - x);
            for (Eigen::Index q = 0; q < n; ++q) {
                if (passive[static_cast<std::size_t>(q)] && x[q] <= tol * 1e-3) {
                    passive[static_cast<std::size_t>(q)] = false;
                    x[q] = 0.0;
                }
            }
        }
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    for (Eigen::Index q = 0; q < n; ++q) out[static_cast<std::size_t>(q)] = std::max(0.0, x[q]);
    return out;
}

}  // namespace

std::vector<double> nnls(std::span<const double> a, std::size_t rows, std::size_t cols,
                         std::span<const double> y) {
    if (a.size() != rows * cols || y.size() != rows) throw DimensionError("nnls: size mismatch");
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMatrix> am(a.data(), static_cast<Eigen::Index>(rows),
                                         static_cast<Eigen::Index>(cols));
    const Eigen::Map<const Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(rows));
    const Eigen::MatrixXd gram = am.transpose() * am;
    const Eigen::VectorXd aty = am.transpose() * ym;
    return nnls_normal(gram, aty);
}

std::vector<double> UnmixResult::total_hemoglobin() const {
    std::vector<double> out(oxygenation.size());
    for (std::size_t p = 0; p < out.size(); ++p)
        out[p] = concentrations[p * illum::kChromophores] + concentrations[p * illum::kChromophores + 1];
    return out;
}

std::vector<double> UnmixResult::water() const {
    std::vector<double> out(oxygenation.size());
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = concentrations[p * illum::kChromophores + 2];
    return out;
}

UnmixResult unmix(const HsiCube& cube, const illum::ChromophoreBasis& basis, double path_length) {
    if (!(cube.grid() == basis.grid)) throw DimensionError("unmix: chromophore grid does not match cube");
    if (!(path_length > 0.0)) throw ParameterError("unmix: path length must be positive");
    constexpr std::size_t k = illum::kChromophores;
    const std::size_t bands = cube.bands();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(bands), static_cast<Eigen::Index>(k));
    for (std::size_t l = 0; l < bands; ++l) {
        for (std::size_t c = 0; c < k; ++c)
            m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(c)) = basis.at(l, c);
    }
    const Eigen::MatrixXd gram = m.transpose() * m;

    UnmixResult out;
    out.height = cube.height();
    out.width = cube.width();
    out.concentrations.resize(cube.pixels() * k);
    out.oxygenation.resize(cube.pixels());
    out.undefined_oxygenation.resize(cube.pixels());
    Eigen::VectorXd absorbance(static_cast<Eigen::Index>(bands));
    for (std::size_t p = 0; p < cube.pixels(); ++p) {
        const auto px = cube.pixel(p);
        for (std::size_t l = 0; l < bands; ++l)
            absorbance[static_cast<Eigen::Index>(l)] = -std::log(std::max(px[l], kReflectanceFloor)) / path_length;
        const auto c = nnls_normal(gram, m.transpose() * absorbance);
        std::copy(c.begin(), c.end(), out.concentrations.begin() + static_cast<std::ptrdiff_t>(p * k));
        const double hb = c[0] + c[1];
        if (hb > 0.0) {
            out.oxygenation[p] = c[0] / hb;
            out.undefined_oxygenation[p] = 0;
        } else {
            out.oxygenation[p] = 0.0;
            out.undefined_oxygenation[p] = 1;
        }
    }
    return out;
}

}  // namespace spectracal::eval
