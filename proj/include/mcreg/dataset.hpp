#pragma once

#include <cstddef>
#include <vector>

#include <mcreg/errors.hpp>
#include <mcreg/linalg.hpp>

namespace mcreg {

/// Column-centered covariates X (n×p) and responses Y (n×q) with the means removed.
struct Dataset {
    DenseMatrix X;
    DenseMatrix Y;
    std::vector<double> x_means;
    std::vector<double> y_means;

    std::size_t n() const noexcept { return X.rows(); }
    std::size_t p() const noexcept { return X.cols(); }
    std::size_t q() const noexcept { return Y.cols(); }

    static Dataset from_raw(const DenseMatrix& x_raw, const DenseMatrix& y_raw)
    {
        if (x_raw.rows() != y_raw.rows()) throw DimensionError("Dataset: X and Y row counts differ");
        auto cx = center_columns(x_raw);
        auto cy = center_columns(y_raw);
        return {std::move(cx.centered), std::move(cy.centered), std::move(cx.means), std::move(cy.means)};
    }
};

}  // namespace mcreg
