#include "crossmap/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>

namespace crossmap::numkit {

void fix_column_signs(Eigen::MatrixXd& columns) {
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
        Eigen::Index pivot = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < columns.rows(); ++r) {
            const double a = std::abs(columns(r, c));
            if (a > best) { // strict: first occurrence wins ties
                best = a;
                pivot = r;
            }
        }
        if (columns(pivot, c) < 0.0) {
            columns.col(c) = -columns.col(c);
        }
    }
}

EigenPairs sym_eig_smallest(const Eigen::MatrixXd& m, Eigen::Index k) {
    if (m.rows() != m.cols()) {
        throw ArgumentError("sym_eig_smallest: matrix must be square");
    }
    if (k < 1 || k > m.rows()) {
        throw ArgumentError("sym_eig_smallest: k out of range");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) {
        throw SymmetryError("sym_eig_smallest: input deviates from symmetry by " +
                            std::to_string(asym));
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("sym_eig_smallest: eigendecomposition failed");
    }

    EigenPairs out;
    out.eigenvalues = solver.eigenvalues().head(k);
    out.eigenvectors = solver.eigenvectors().leftCols(k);
    fix_column_signs(out.eigenvectors);
    return out;
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& m) {
    if (!m.allFinite()) {
        throw ArgumentError("pinv: input has non-finite entries");
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? 1e-12 * sv(0) : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::VectorXd solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
    if (a.rows() != a.cols()) {
        throw ArgumentError("solve: matrix must be square");
    }
    if (a.rows() != y.size()) {
        throw ArgumentError("solve: right-hand side length mismatch");
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) {
        throw SingularSystemError("solve: reciprocal condition estimate " +
                                  std::to_string(rc));
    }
    Eigen::VectorXd x = lu.solve(y);
    if (!x.allFinite()) {
        throw SingularSystemError("solve: non-finite solution");
    }
    return x;
}

namespace {

// Heap entry ordered lexicographically by (squared distance, index); the
// worst candidate sits on top of a max-heap.
struct Candidate {
    double d2;
    Eigen::Index index;
    bool operator<(const Candidate& o) const {
        return d2 < o.d2 || (d2 == o.d2 && index < o.index);
    }
};

} // namespace

NeighborIndex::NeighborIndex(Eigen::MatrixXd points) : points_(std::move(points)) {
    if (points_.rows() < 1 || points_.cols() < 1) {
        throw ArgumentError("NeighborIndex: need at least one point and one dimension");
    }
    if (!points_.allFinite()) {
        throw ArgumentError("NeighborIndex: points must be finite");
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(points_.rows()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
    nodes_.reserve(order.size());
    root_ = build(order, 0, points_.rows(), 0);
}

Eigen::Index NeighborIndex::build(std::vector<Eigen::Index>& order, Eigen::Index lo,
                                  Eigen::Index hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % static_cast<int>(points_.cols());
    const Eigen::Index mid = lo + (hi - lo) / 2;
    // Total order on (coordinate, index) keeps the tree layout deterministic.
    std::nth_element(order.begin() + lo, order.begin() + mid, order.begin() + hi,
                     [&](Eigen::Index a, Eigen::Index b) {
                         const double ca = points_(a, axis), cb = points_(b, axis);
                         return ca < cb || (ca == cb && a < b);
                     });
    Node node;
    node.point = order[static_cast<std::size_t>(mid)];
    node.axis = axis;
    const Eigen::Index self = static_cast<Eigen::Index>(nodes_.size());
    nodes_.push_back(node);
    const Eigen::Index left = build(order, lo, mid, depth + 1);
    const Eigen::Index right = build(order, mid + 1, hi, depth + 1);
    nodes_[static_cast<std::size_t>(self)].left = left;
    nodes_[static_cast<std::size_t>(self)].right = right;
    return self;
}

std::vector<Eigen::Index> NeighborIndex::query(
    const Eigen::Ref<const Eigen::VectorXd>& p, Eigen::Index k) const {
    if (p.size() != points_.cols()) {
        throw ArgumentError("NeighborIndex::query: dimension mismatch");
    }
    if (k < 1 || k > points_.rows()) {
        throw ArgumentError("NeighborIndex::query: k out of range");
    }

    std::priority_queue<Candidate> heap;
    // Explicit stack of (node, recurse-state) kept simple with recursion via
    // a small lambda; depth is O(log n) for median splits.
    auto consider = [&](Eigen::Index point) {
        const double d2 = (points_.row(point).transpose() - p).squaredNorm();
        const Candidate c{d2, point};
        if (static_cast<Eigen::Index>(heap.size()) < k) {
            heap.push(c);
        } else if (c < heap.top()) {
            heap.pop();
            heap.push(c);
        }
    };

    auto walk = [&](auto&& self, Eigen::Index node_id) -> void {
        if (node_id < 0) return;
        const Node& node = nodes_[static_cast<std::size_t>(node_id)];
        consider(node.point);
        const double diff = p(node.axis) - points_(node.point, node.axis);
        const Eigen::Index near = diff < 0.0 ? node.left : node.right;
        const Eigen::Index far = diff < 0.0 ? node.right : node.left;
        self(self, near);
        // The far side may still hold an equal-distance point with a lower
        // index, so prune only on strict excess.
        if (static_cast<Eigen::Index>(heap.size()) < k || diff * diff <= heap.top().d2) {
            self(self, far);
        }
    };
    walk(walk, root_);

    std::vector<Candidate> found;
    found.reserve(heap.size());
    while (!heap.empty()) {
        found.push_back(heap.top());
        heap.pop();
    }
    std::sort(found.begin(), found.end());
    std::vector<Eigen::Index> out;
    out.reserve(found.size());
    for (const Candidate& c : found) out.push_back(c.index);
    return out;
}

} // namespace crossmap::numkit
