#include "ltmtex/tchebichef.hpp"

#include "ltmtex/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ltmtex {

namespace {

constexpr double kOrthonormalityTolerance = 1e-10;

// Forces t_n(N-1-x) = (-1)^n t_n(x) bit-exactly; removes the rounding
// asymmetry the recurrence accumulates so that mirrored windows produce
// exactly mirrored moments.
void symmetrize(std::span<double> row, int degree) {
    const int n = static_cast<int>(row.size());
    const double parity = (degree % 2 == 0) ? 1.0 : -1.0;
    for (int x = 0; x < n / 2; ++x) {
        const double v = 0.5 * (row[x] + parity * row[n - 1 - x]);
        row[x] = v;
        row[n - 1 - x] = parity * v;
    }
    if (n % 2 == 1 && degree % 2 == 1) row[n / 2] = 0.0;
}

}  // namespace

void validate_kernel_size(int size) {
    if (size < kMinKernelSize || size > kMaxKernelSize || size % 2 == 0) {
        throw ValidationError("kernel size must be odd and within [" + std::to_string(kMinKernelSize) + ", " +
                              std::to_string(kMaxKernelSize) + "], got " + std::to_string(size));
    }
}

TchebichefBasis build_basis(int size) {
    validate_kernel_size(size);
    const int N = size;
    const double NN = static_cast<double>(N) * N;
    std::vector<double> table(static_cast<std::size_t>(N) * N);
    auto t = [&](int n, int x) -> double& { return table[static_cast<std::size_t>(n) * N + x]; };

    const double t0 = 1.0 / std::sqrt(static_cast<double>(N));
    const double t1_scale = std::sqrt(3.0 / (N * (NN - 1.0)));
    for (int x = 0; x < N; ++x) {
        t(0, x) = t0;
        t(1, x) = (2.0 * x + 1.0 - N) * t1_scale;
    }

    for (int n = 2; n < N; ++n) {
        const double dn = n;
        const double root = std::sqrt((4.0 * dn * dn - 1.0) / (NN - dn * dn));
        const double a1 = (2.0 / dn) * root;
        const double a2 = ((1.0 - N) / dn) * root;
        // Negative sign: (1 - n) / n keeps the family orthonormal.
        const double a3 = ((1.0 - dn) / dn) * std::sqrt((2.0 * dn + 1.0) / (2.0 * dn - 3.0)) *
                          std::sqrt((NN - (dn - 1.0) * (dn - 1.0)) / (NN - dn * dn));
        for (int x = 0; x < N; ++x) {
            t(n, x) = a1 * x * t(n - 1, x) + a2 * t(n - 1, x) + a3 * t(n - 2, x);
        }
    }

    for (int n = 0; n < N; ++n) symmetrize(std::span<double>(&t(n, 0), N), n);

    for (int m = 0; m < N; ++m) {
        for (int n = m; n < N; ++n) {
            double dot = 0.0;
            for (int x = 0; x < N; ++x) dot += t(m, x) * t(n, x);
            const double expected = (m == n) ? 1.0 : 0.0;
            if (std::abs(dot - expected) > kOrthonormalityTolerance) {
                throw std::logic_error("Tchebichef basis lost orthonormality at (" + std::to_string(m) + ", " +
                                       std::to_string(n) + ") for N=" + std::to_string(N));
            }
        }
    }
    return TchebichefBasis(N, std::move(table));
}

MomentKernel build_kernel(const TchebichefBasis& basis, int p, int q) {
    const int N = basis.size();
    if (p < 0 || q < 0 || p >= N || q >= N) {
        throw ValidationError("moment order (" + std::to_string(p) + ", " + std::to_string(q) +
                              ") out of range for kernel size " + std::to_string(N));
    }
    MomentKernel k;
    k.order_ = {p, q};
    k.size_ = N;
    const auto col = basis.row(p);
    const auto row = basis.row(q);
    k.column_.assign(col.begin(), col.end());
    k.row_.assign(row.begin(), row.end());
    k.weights_.resize(static_cast<std::size_t>(N) * N);
    for (int y = 0; y < N; ++y) {
        for (int x = 0; x < N; ++x) k.weights_[static_cast<std::size_t>(y) * N + x] = col[x] * row[y];
    }
    return k;
}

std::vector<MomentKernel> all_kernels(int size) {
    const TchebichefBasis basis = build_basis(size);
    std::vector<MomentOrder> orders;
    orders.reserve(static_cast<std::size_t>(size) * size);
    for (int p = 0; p < size; ++p)
        for (int q = 0; q < size; ++q) orders.push_back({p, q});
    std::ranges::sort(orders, [](const MomentOrder& a, const MomentOrder& b) {
        if (a.degree() != b.degree()) return a.degree() < b.degree();
        return a < b;
    });

    std::vector<MomentKernel> kernels;
    kernels.reserve(orders.size());
    for (const auto& o : orders) kernels.push_back(build_kernel(basis, o));
    return kernels;
}

}  // namespace ltmtex
