#pragma once

#include "fermsig/core.hpp"

namespace fermsig {

/// Hermitian 2x2 representation of the fermionic signature operator on one
/// spatial mode, in the basis of Cauchy data e1 = (1,0), e2 = (0,1) at t = 0:
///     (e_i | S_m e_j)_m = 2 pi * entries(i, j).
class SignatureMatrix {
public:
    SignatureMatrix() = default;
    SignatureMatrix(const Mat2& entries, double lambda, double mass)
        : entries_(entries), lambda_(lambda), mass_(mass) {}

    const Mat2& entries() const noexcept { return entries_; }
    double lambda() const noexcept { return lambda_; }
    double mass() const noexcept { return mass_; }

    double hermitian_defect() const { return max_abs(entries_ - entries_.adjoint()); }
    double trace_defect() const { return std::abs(entries_.trace()); }
    double norm() const { return operator_norm(entries_); }

    /// Representation in the basis given by the columns of the unitary `basis`.
    SignatureMatrix in_basis(const Mat2& basis) const {
        return SignatureMatrix(basis.adjoint() * entries_ * basis, lambda_, mass_);
    }

private:
    Mat2 entries_ = Mat2::Zero();
    double lambda_ = 0.0;
    double mass_ = 0.0;
};

}  // namespace fermsig
