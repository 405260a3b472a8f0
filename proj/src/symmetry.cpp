#include "hodgex/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hodgex {

namespace {

// image tuple of a sorted simplex under the vertex permutation, with the
// parity sign of re-sorting
std::pair<std::vector<int>, int> map_tuple(const std::vector<int>& s,
                                           const std::vector<int>& perm) {
    std::vector<int> img(s.size());
    for (size_t i = 0; i < s.size(); ++i) img[i] = perm[s[i]];
    int sign = 1;
    for (size_t a = 0; a < img.size(); ++a)
        for (size_t b = a + 1; b < img.size(); ++b)
            if (img[a] > img[b]) {
                std::swap(img[a], img[b]);
                sign = -sign;
            }
    return {img, sign};
}

SpMatI signed_perm_matrix(const std::vector<int>& image, const std::vector<int>& sign) {
    const int n = static_cast<int>(image.size());
    SpMatI R(n, n);
    std::vector<Eigen::Triplet<long long>> trip;
    trip.reserve(n);
    for (int i = 0; i < n; ++i) trip.emplace_back(image[i], i, sign[i]);
    R.setFromTriplets(trip.begin(), trip.end());
    return R;
}

}  // namespace

CyclicAction build_action(const OrientedComplex& c, int order,
                          const std::vector<int>& vertex_perm) {
    if (static_cast<int>(vertex_perm.size()) != c.nverts)
        throw ValidationError("vertex permutation has wrong length");
    std::vector<char> hit(c.nverts, 0);
    for (int v : vertex_perm) {
        if (v < 0 || v >= c.nverts || hit[v])
            throw ValidationError("vertex permutation is not a bijection");
        hit[v] = 1;
    }
    if (order < 1) throw ValidationError("action order must be positive");
    // pi^m = id
    {
        std::vector<int> p(c.nverts);
        for (int v = 0; v < c.nverts; ++v) p[v] = v;
        for (int i = 0; i < order; ++i) {
            std::vector<int> q(c.nverts);
            for (int v = 0; v < c.nverts; ++v) q[v] = vertex_perm[p[v]];
            p.swap(q);
        }
        for (int v = 0; v < c.nverts; ++v)
            if (p[v] != v)
                throw ValidationError("permutation order does not divide " +
                                      std::to_string(order));
    }
    CyclicAction a;
    a.order = order;
    a.vertex_perm = vertex_perm;
    a.image.resize(c.dim + 1);
    a.sign.resize(c.dim + 1);
    for (int k = 0; k <= c.dim; ++k) {
        a.image[k].resize(c.count(k));
        a.sign[k].resize(c.count(k));
        for (int i = 0; i < c.count(k); ++i) {
            auto [img, sgn] = map_tuple(c.simplices[k][i], vertex_perm);
            auto it = c.index[k].find(img);
            if (it == c.index[k].end())
                throw ValidationError("action does not preserve the complex at degree " +
                                      std::to_string(k));
            a.image[k][i] = it->second;
            a.sign[k][i] = sgn;
        }
    }
    return a;
}

ActionReport validate_action(const OrientedComplex& c, const EmbeddedGeometry& g,
                             const CyclicAction& a, const PLVectorField& X,
                             double tol) {
    ActionReport rep;
    // isometry: edge lengths preserved
    for (int e = 0; e < c.count(1); ++e) {
        const auto& s = c.simplices[1][e];
        double l0 = (g.coords.row(s[0]) - g.coords.row(s[1])).norm();
        const auto& t = c.simplices[1][a.image[1][e]];
        double l1 = (g.coords.row(t[0]) - g.coords.row(t[1])).norm();
        rep.isometry_defect = std::max(rep.isometry_defect, std::abs(l1 - l0));
    }
    double scale = 0.0;
    for (int e = 0; e < c.count(1); ++e) {
        const auto& s = c.simplices[1][e];
        scale = std::max(scale, (g.coords.row(s[0]) - g.coords.row(s[1])).norm());
    }
    if (rep.isometry_defect > tol * std::max(1.0, scale)) {
        std::ostringstream os;
        os << "action is not an isometry: edge-length defect " << rep.isometry_defect;
        throw ValidationError(os.str());
    }
    // chain map, exact integers
    for (int k = 0; k + 1 <= c.dim; ++k) {
        SpMatI Rk = signed_perm_matrix(a.image[k], a.sign[k]);
        SpMatI Rk1 = signed_perm_matrix(a.image[k + 1], a.sign[k + 1]);
        SpMatI lhs = (Rk1 * c.coboundary[k]).pruned();
        SpMatI rhs = (c.coboundary[k] * Rk).pruned();
        SpMatI diff = (lhs - rhs).pruned();
        if (diff.nonZeros() != 0)
            throw ValidationError("action is not a chain map at degree " + std::to_string(k));
    }
    // boundary preservation
    for (int k = 0; k <= c.dim; ++k)
        for (int i = 0; i < c.count(k); ++i)
            if (c.on_boundary[k][i] != c.on_boundary[k][a.image[k][i]])
                throw ValidationError("action does not preserve the boundary");
    // orientation preservation on top simplices
    for (int i = 0; i < c.count(c.dim); ++i) {
        int j = a.image[c.dim][i];
        if (a.sign[c.dim][i] * c.orient[c.dim][i] * c.orient[c.dim][j] != 1) {
            rep.orientation_preserving = false;
            throw ValidationError(
                "orientation-reversing simplex images detected; only "
                "orientation-preserving actions are supported");
        }
    }
    // field invariance via isometry-invariant pairings X(v).(pos u - pos v)
    double field_scale = 0.0;
    for (int v = 0; v < c.nverts; ++v)
        field_scale = std::max(field_scale, X.vectors.row(v).norm());
    for (int e = 0; e < c.count(1); ++e) {
        const auto& s = c.simplices[1][e];
        for (int side = 0; side < 2; ++side) {
            int v = s[side], u = s[1 - side];
            int pv = a.vertex_perm[v], pu = a.vertex_perm[u];
            double d0 = X.vectors.row(v).dot(g.coords.row(u) - g.coords.row(v));
            double d1 = X.vectors.row(pv).dot(g.coords.row(pu) - g.coords.row(pv));
            rep.field_defect = std::max(rep.field_defect, std::abs(d1 - d0));
        }
    }
    for (int v = 0; v < c.nverts; ++v) {
        double n0 = X.vectors.row(v).norm();
        double n1 = X.vectors.row(a.vertex_perm[v]).norm();
        rep.field_defect = std::max(rep.field_defect, std::abs(n1 - n0));
    }
    if (rep.field_defect > tol * std::max({1.0, scale, field_scale}) * 10)
        throw ValidationError("field is not invariant under the action: defect " +
                              std::to_string(rep.field_defect));
    return rep;
}

Eigen::VectorXd InvariantBasis::reduce(int k, const Eigen::VectorXd& x) const {
    Eigen::VectorXd w = J[k].transpose() * x;
    for (int i = 0; i < w.size(); ++i) w(i) /= orbit_size[k][i];
    return w;
}

Eigen::VectorXd InvariantBasis::expand(int k, const Eigen::VectorXd& w) const {
    return J[k] * w;
}

InvariantBasis invariant_basis(const OrientedComplex& c, const CyclicAction& a) {
    InvariantBasis B;
    B.J.resize(c.dim + 1);
    B.orbit_size.resize(c.dim + 1);
    B.col_boundary.resize(c.dim + 1);
    for (int k = 0; k <= c.dim; ++k) {
        const int n = c.count(k);
        std::vector<char> seen(n, 0);
        std::vector<Eigen::Triplet<double>> trip;
        int ncols = 0;
        for (int i = 0; i < n; ++i) {
            if (seen[i]) continue;
            // traverse the orbit accumulating signs
            std::vector<std::pair<int, int>> members;
            int j = i, s = 1;
            bool reversing = false;
            while (true) {
                members.emplace_back(j, s);
                seen[j] = 1;
                int jn = a.image[k][j];
                int sn = s * a.sign[k][j];
                if (jn == i) {
                    if (sn != 1) reversing = true;
                    break;
                }
                j = jn;
                s = sn;
            }
            if (reversing) continue;  // invariant coefficient forced to zero
            for (auto [m, sg] : members)
                trip.emplace_back(m, ncols, static_cast<double>(sg));
            B.orbit_size[k].push_back(static_cast<double>(members.size()));
            B.col_boundary[k].push_back(c.on_boundary[k][i]);
            ++ncols;
        }
        B.J[k].resize(n, ncols);
        B.J[k].setFromTriplets(trip.begin(), trip.end());
    }
    return B;
}

SubcomplexResult fixed_subcomplex(const OrientedComplex& c, const CyclicAction& a,
                                  const EmbeddedGeometry& g, const PLVectorField& X,
                                  const std::vector<int>* metadata_fixed) {
    std::vector<char> mask(c.nverts, 0);
    double scale = 0.0;
    for (int e = 0; e < c.count(1); ++e) {
        const auto& s = c.simplices[1][e];
        scale = std::max(scale, (g.coords.row(s[0]) - g.coords.row(s[1])).norm());
    }
    if (metadata_fixed) {
        for (int v : *metadata_fixed) {
            if (a.vertex_perm[v] != v)
                throw ValidationError("metadata fixed vertex " + std::to_string(v) +
                                      " is not permutation-fixed");
            if (X.vectors.row(v).norm() * std::abs(X.scale) > 1e-12 * scale)
                throw ValidationError("metadata fixed vertex " + std::to_string(v) +
                                      " has nonzero field");
            mask[v] = 1;
        }
    } else {
        for (int v = 0; v < c.nverts; ++v)
            mask[v] = (a.vertex_perm[v] == v) &&
                      (X.vectors.row(v).norm() * std::abs(X.scale) <= 1e-12 * scale);
    }
    return spanned_subcomplex(c, mask);
}

CyclicAction restrict_action(const OrientedComplex& sub, const CyclicAction& a,
                             const std::vector<int>& vertex_map, int ambient_nverts) {
    std::vector<int> inv(ambient_nverts, -1);
    for (size_t i = 0; i < vertex_map.size(); ++i) inv[vertex_map[i]] = static_cast<int>(i);
    std::vector<int> perm(vertex_map.size());
    for (size_t i = 0; i < vertex_map.size(); ++i) {
        int img = a.vertex_perm[vertex_map[i]];
        if (inv[img] < 0)
            throw ValidationError("action does not restrict to the subcomplex");
        perm[i] = inv[img];
    }
    return build_action(sub, a.order, perm);
}

}  // namespace hodgex
