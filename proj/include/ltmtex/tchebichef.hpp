#pragma once

#include <span>
#include <vector>

namespace ltmtex {

inline constexpr int kMinKernelSize = 3;
inline constexpr int kMaxKernelSize = 15;

/// Throws ValidationError unless size is odd and within [3, 15].
void validate_kernel_size(int size);

/// Table of orthonormal discrete Tchebichef polynomials t_n(x) on {0..N-1}.
///
/// Built with the three-term recurrence seeded by t_0 and t_1. Rows are
/// exactly (anti)symmetric about the grid centre: t_n(N-1-x) = (-1)^n t_n(x).
class TchebichefBasis {
public:
    int size() const { return size_; }

    double operator()(int degree, int x) const { return table_[static_cast<std::size_t>(degree) * size_ + x]; }

    std::span<const double> row(int degree) const {
        return {table_.data() + static_cast<std::size_t>(degree) * size_, static_cast<std::size_t>(size_)};
    }

private:
    friend TchebichefBasis build_basis(int size);
    TchebichefBasis(int size, std::vector<double> table) : size_(size), table_(std::move(table)) {}

    int size_;
    std::vector<double> table_;
};

/// Moment order pair. `p` is the degree along x (columns), `q` along y (rows),
/// so M_pq(x, y) = t_p(x) t_q(y).
struct MomentOrder {
    int p = 0;
    int q = 0;

    int degree() const { return p + q; }
    friend auto operator<=>(const MomentOrder&, const MomentOrder&) = default;
};

/// One N x N correlation mask w[y][x] = t_p(x) t_q(y).
class MomentKernel {
public:
    MomentOrder order() const { return order_; }
    int size() const { return size_; }

    double at(int x, int y) const { return weights_[static_cast<std::size_t>(y) * size_ + x]; }
    std::span<const double> weights() const { return weights_; }

    /// Separable factors: column_factor()[x] = t_p(x), row_factor()[y] = t_q(y).
    std::span<const double> column_factor() const { return column_; }
    std::span<const double> row_factor() const { return row_; }

private:
    friend MomentKernel build_kernel(const TchebichefBasis&, int, int);
    MomentKernel() = default;

    MomentOrder order_;
    int size_ = 0;
    std::vector<double> column_;
    std::vector<double> row_;
    std::vector<double> weights_;
};

TchebichefBasis build_basis(int size);

/// Mask for orders (p, q). Throws ValidationError when either order is >= N.
MomentKernel build_kernel(const TchebichefBasis& basis, int p, int q);
inline MomentKernel build_kernel(const TchebichefBasis& basis, MomentOrder order) {
    return build_kernel(basis, order.p, order.q);
}

/// All N^2 masks ordered by total degree p+q, then lexicographically by (p, q).
std::vector<MomentKernel> all_kernels(int size);

}  // namespace ltmtex
