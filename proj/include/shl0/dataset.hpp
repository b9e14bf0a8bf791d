#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "shl0/family.hpp"

namespace shl0 {

/// Response plus standardized main-effect columns.  Every column is centered
/// to mean 0 and scaled so its squared norm equals n.  Interaction columns
/// are formed on demand as elementwise products of standardized mains and
/// are deliberately NOT re-centered or re-scaled.
///
/// Variable indices are 1-based throughout the public API; index 0 is
/// reserved for "no partner" (the intercept direction) in screening calls.
/// Centers each column to mean 0 and rescales to squared norm n, in place.
/// Throws on (near-)constant columns.
template <class Scalar>
void standardize_columns(MatX<Scalar>& x) {
    const Eigen::Index n = x.rows();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        auto col = x.col(j);
        col.array() -= col.mean();
        const Scalar norm = col.norm();
        if (!(norm > Scalar(1e-12) * std::sqrt(Scalar(n))))
            throw std::invalid_argument("dataset: constant column cannot be standardized");
        col *= std::sqrt(Scalar(n)) / norm;
    }
}

template <class Scalar = double>
class Dataset {
public:
    Dataset() = default;

    /// Takes columns that already satisfy the standardization invariants.
    Dataset(VecX<Scalar> y, MatX<Scalar> x_standardized, std::vector<std::string> names = {})
        : y_(std::move(y)), x_(std::move(x_standardized)), names_(std::move(names)) {
        if (names_.empty()) default_names();
        if (y_.size() != x_.rows()) throw std::invalid_argument("dataset: y/X row mismatch");
        if (static_cast<Eigen::Index>(names_.size()) != x_.cols())
            throw std::invalid_argument("dataset: name count mismatch");
    }

    /// Centers and rescales raw columns.  Throws on (near-)constant columns;
    /// callers that want to drop them instead must filter beforehand.
    static Dataset standardize(VecX<Scalar> y, MatX<Scalar> raw,
                               std::vector<std::string> names = {}) {
        standardize_columns(raw);
        return Dataset(std::move(y), std::move(raw), std::move(names));
    }

    int n() const { return static_cast<int>(y_.size()); }
    int p() const { return static_cast<int>(x_.cols()); }
    const VecX<Scalar>& y() const { return y_; }
    const MatX<Scalar>& x() const { return x_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(int j) const { return names_.at(static_cast<std::size_t>(j - 1)); }

    /// Standardized main-effect column, 1-based.
    auto main_col(int j) const { return x_.col(j - 1); }

    /// x_j o x_k elementwise; k == 0 yields the plain main effect x_j.
    VecX<Scalar> column(int j, int k) const {
        if (k == 0) return main_col(j);
        return main_col(j).cwiseProduct(main_col(k));
    }

    /// Writes x_j o x_k (or x_j when k == 0) into `out` without allocating.
    template <class Out>
    void column_into(int j, int k, Out&& out) const {
        if (k == 0)
            out = main_col(j);
        else
            out = main_col(j).cwiseProduct(main_col(k));
    }

private:
    void default_names() {
        names_.resize(static_cast<std::size_t>(x_.cols()));
        for (std::size_t j = 0; j < names_.size(); ++j) names_[j] = "x" + std::to_string(j + 1);
    }

    VecX<Scalar> y_;
    MatX<Scalar> x_;
    std::vector<std::string> names_;
};

}  // namespace shl0
