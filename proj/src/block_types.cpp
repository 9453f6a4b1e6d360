#include "bsr/block_types.hpp"

#include <sstream>

#include "bsr/errors.hpp"

namespace bsr {

void BlockDims::validate() const {
    std::ostringstream os;
    if (n < 1 || d < 1) {
        os << "block dims: n and d must be >= 1 (n=" << n << ", d=" << d << ")";
    } else if (m < 1 || m > n) {
        os << "block dims: m must satisfy 1 <= m <= n (m=" << m << ", n=" << n << ")";
    } else if (k < 0 || k > n) {
        os << "block dims: k must satisfy 0 <= k <= n (k=" << k << ", n=" << n << ")";
    } else {
        return;
    }
    throw DomainError(os.str());
}

BlockSignal::BlockSignal(Vector values, int d) : values_(std::move(values)), d_(d) {
    if (d < 1 || values_.size() % d != 0) {
        std::ostringstream os;
        os << "block signal: length " << values_.size() << " is not a multiple of d=" << d;
        throw Error(ErrorCode::kDimensionMismatch, os.str());
    }
}

Vector BlockSignal::block_norms() const {
    Vector norms(num_blocks());
    for (int i = 0; i < num_blocks(); ++i) norms[i] = block(i).norm();
    return norms;
}

std::vector<int> BlockSignal::support() const {
    std::vector<int> out;
    for (int i = 0; i < num_blocks(); ++i) {
        if (block(i).squaredNorm() > 0.0) out.push_back(i);
    }
    return out;
}

double BlockSignal::l2l1_norm() const { return block_norms().sum(); }

}  // namespace bsr
