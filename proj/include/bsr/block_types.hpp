#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace bsr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Geometry of a block-sparse instance: n blocks of length d, m measurement
/// blocks (dm rows), k nonzero blocks.
struct BlockDims {
    int n = 1;
    int d = 1;
    int m = 1;
    int k = 0;

    long ambient() const { return static_cast<long>(d) * n; }  // N = dn
    long rows() const { return static_cast<long>(d) * m; }     // M = dm
    double alpha() const { return static_cast<double>(m) / n; }
    double beta() const { return static_cast<double>(k) / n; }

    /// Throws DomainError unless 1 <= m <= n, 0 <= k <= n and n, d >= 1.
    void validate() const;
};

/// A length-dn vector viewed as n consecutive blocks of length d.
class BlockSignal {
public:
    BlockSignal() = default;
    BlockSignal(Vector values, int d);

    const Vector& values() const { return values_; }
    Vector& values() { return values_; }
    int block_length() const { return d_; }
    int num_blocks() const { return d_ > 0 ? static_cast<int>(values_.size() / d_) : 0; }

    auto block(int i) const { return values_.segment(static_cast<Eigen::Index>(i) * d_, d_); }
    auto block(int i) { return values_.segment(static_cast<Eigen::Index>(i) * d_, d_); }

    Vector block_norms() const;
    /// Indices of blocks with nonzero l2 norm, ascending.
    std::vector<int> support() const;
    int block_sparsity() const { return static_cast<int>(support().size()); }
    /// Sum of block l2 norms.
    double l2l1_norm() const;

private:
    Vector values_;
    int d_ = 0;
};

/// y = A x with a planted block-sparse x.
struct ProblemInstance {
    BlockDims dims;
    Matrix matrix;
    Vector measurements;
    BlockSignal planted;
    std::uint64_t seed = 0;
};

}  // namespace bsr
