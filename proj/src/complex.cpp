#include "hodgex/complex.hpp"

#include <algorithm>
#include <sstream>

#include "hodgex/exact.hpp"

namespace hodgex {

namespace {

std::string tuple_str(const std::vector<int>& t) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i];
    os << ")";
    return os.str();
}

// Coefficient of the sorted face (tuple minus position i) in the boundary of
// the sorted tuple.
inline int face_sign(int i) { return (i % 2 == 0) ? 1 : -1; }

}  // namespace

SpMatD OrientedComplex::coboundary_d(int k) const {
    const SpMatI& D = coboundary[k];
    SpMatD out(D.rows(), D.cols());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(D.nonZeros());
    for (int c = 0; c < D.outerSize(); ++c)
        for (SpMatI::InnerIterator it(D, c); it; ++it)
            trip.emplace_back(it.row(), it.col(), static_cast<double>(it.value()));
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

bool OrientedComplex::has_boundary() const {
    if (dim == 0) return false;
    for (char f : on_boundary[dim - 1])
        if (f) return true;
    return false;
}

OrientedComplex build_complex(int dim, int nverts,
                              const std::vector<std::vector<int>>& top_simplices,
                              bool require_manifold) {
    if (dim < 0 || dim > 3)
        throw ValidationError("unsupported complex dimension " + std::to_string(dim));
    OrientedComplex c;
    c.dim = dim;
    c.nverts = nverts;
    c.simplices.resize(dim + 1);
    c.orient.resize(dim + 1);
    c.on_boundary.resize(dim + 1);
    c.index.resize(dim + 1);

    // Top simplices: sort tuples, record orientation parity.
    for (const auto& t : top_simplices) {
        if (static_cast<int>(t.size()) != dim + 1)
            throw ValidationError("top simplex " + tuple_str(t) + " has wrong arity");
        std::vector<int> s = t;
        int sign = 1;
        for (size_t a = 0; a < s.size(); ++a)
            for (size_t b = a + 1; b < s.size(); ++b) {
                if (s[a] == s[b])
                    throw ValidationError("degenerate simplex " + tuple_str(t));
                if (s[a] > s[b]) {
                    std::swap(s[a], s[b]);
                    sign = -sign;
                }
            }
        for (int v : s)
            if (v < 0 || v >= nverts)
                throw ValidationError("simplex " + tuple_str(t) + " references missing vertex");
        auto [it, fresh] = c.index[dim].emplace(s, static_cast<int>(c.simplices[dim].size()));
        if (!fresh)
            throw ValidationError("duplicate simplex " + tuple_str(t));
        c.simplices[dim].push_back(s);
        c.orient[dim].push_back(sign);
    }

    // Derive faces downward.
    for (int k = dim; k >= 1; --k) {
        for (const auto& s : c.simplices[k]) {
            std::vector<int> f(s.size() - 1);
            for (size_t i = 0; i < s.size(); ++i) {
                size_t w = 0;
                for (size_t j = 0; j < s.size(); ++j)
                    if (j != i) f[w++] = s[j];
                if (c.index[k - 1].emplace(f, static_cast<int>(c.simplices[k - 1].size())).second) {
                    c.simplices[k - 1].push_back(f);
                    c.orient[k - 1].push_back(1);
                }
            }
        }
    }

    if (dim > 0) {
        std::vector<char> seen(nverts, 0);
        for (const auto& s : c.simplices[0]) seen[s[0]] = 1;
        for (int v = 0; v < nverts; ++v)
            if (!seen[v])
                throw ValidationError("dangling vertex " + std::to_string(v));
    } else {
        // 0-dimensional complex: every vertex is a simplex
        for (int v = 0; v < nverts; ++v) {
            if (!c.index[0].count({v})) {
                c.index[0].emplace(std::vector<int>{v}, static_cast<int>(c.simplices[0].size()));
                c.simplices[0].push_back({v});
                c.orient[0].push_back(1);
            }
        }
    }

    // Coboundary matrices, sorted-tuple convention.
    c.coboundary.resize(std::max(dim, 0));
    for (int k = 0; k + 1 <= dim; ++k) {
        std::vector<Eigen::Triplet<long long>> trip;
        for (size_t si = 0; si < c.simplices[k + 1].size(); ++si) {
            const auto& s = c.simplices[k + 1][si];
            std::vector<int> f(s.size() - 1);
            for (size_t i = 0; i < s.size(); ++i) {
                size_t w = 0;
                for (size_t j = 0; j < s.size(); ++j)
                    if (j != i) f[w++] = s[j];
                trip.emplace_back(static_cast<int>(si), c.index[k].at(f),
                                  face_sign(static_cast<int>(i)));
            }
        }
        c.coboundary[k].resize(static_cast<int>(c.simplices[k + 1].size()),
                               static_cast<int>(c.simplices[k].size()));
        c.coboundary[k].setFromTriplets(trip.begin(), trip.end());
    }

    // D D = 0, exact integers.
    for (int k = 0; k + 2 <= dim; ++k) {
        SpMatI prod = (c.coboundary[k + 1] * c.coboundary[k]).pruned();
        if (prod.nonZeros() != 0)
            throw ValidationError("coboundary composition nonzero at degree " + std::to_string(k));
    }

    // Face incidence counts and induced-orientation consistency.
    for (int k = 0; k <= dim; ++k)
        c.on_boundary[k].assign(c.simplices[k].size(), 0);
    if (dim >= 1) {
        const int nf = c.count(dim - 1);
        std::vector<int> cofaces(nf, 0);
        std::vector<long long> osum(nf, 0);
        const SpMatI& D = c.coboundary[dim - 1];
        for (int col = 0; col < D.outerSize(); ++col)
            for (SpMatI::InnerIterator it(D, col); it; ++it) {
                cofaces[it.col()] += 1;
                osum[it.col()] += it.value() * c.orient[dim][it.row()];
            }
        for (int f = 0; f < nf; ++f) {
            if (require_manifold && (cofaces[f] < 1 || cofaces[f] > 2))
                throw ValidationError("non-manifold incidence at " +
                                      tuple_str(c.simplices[dim - 1][f]) + ": " +
                                      std::to_string(cofaces[f]) + " cofaces");
            if (cofaces[f] == 1) {
                c.on_boundary[dim - 1][f] = 1;
            } else if (cofaces[f] == 2 && require_manifold && osum[f] != 0) {
                throw ValidationError("inconsistent orientation across face " +
                                      tuple_str(c.simplices[dim - 1][f]));
            }
        }
        // Propagate flags to lower degrees.
        for (int k = dim - 1; k >= 1; --k) {
            for (size_t si = 0; si < c.simplices[k].size(); ++si) {
                if (!c.on_boundary[k][si]) continue;
                const auto& s = c.simplices[k][si];
                std::vector<int> f(s.size() - 1);
                for (size_t i = 0; i < s.size(); ++i) {
                    size_t w = 0;
                    for (size_t j = 0; j < s.size(); ++j)
                        if (j != i) f[w++] = s[j];
                    c.on_boundary[k - 1][c.index[k - 1].at(f)] = 1;
                }
            }
        }
        // Boundary closedness: inside the flagged (n-1)-complex every flagged
        // (n-2)-simplex must have exactly two flagged cofaces.
        if (require_manifold && dim >= 2) {
            std::vector<int> bcount(c.count(dim - 2), 0);
            const SpMatI& Db = c.coboundary[dim - 2];
            for (int col = 0; col < Db.outerSize(); ++col)
                for (SpMatI::InnerIterator it(Db, col); it; ++it)
                    if (c.on_boundary[dim - 1][it.row()]) bcount[it.col()] += 1;
            for (int f = 0; f < c.count(dim - 2); ++f)
                if (c.on_boundary[dim - 2][f] && bcount[f] != 2)
                    throw ValidationError("boundary not closed at " +
                                          tuple_str(c.simplices[dim - 2][f]));
        }
    }
    return c;
}

SubcomplexResult boundary_subcomplex(const OrientedComplex& c) {
    SubcomplexResult out;
    if (c.dim == 0) {
        out.complex = build_complex(0, 0, {});
        out.selector.indices.resize(1);
        out.selector.signs.resize(1);
        return out;
    }
    const int bd = c.dim - 1;
    // Induced orientation: the sign making the (top, face) incidence +1.
    std::vector<int> bfaces;
    std::vector<int> bsigns;
    {
        const SpMatI& D = c.coboundary[bd];
        std::vector<int> sign_of(c.count(bd), 0);
        for (int col = 0; col < D.outerSize(); ++col)
            for (SpMatI::InnerIterator it(D, col); it; ++it)
                if (c.on_boundary[bd][it.col()])
                    sign_of[it.col()] = static_cast<int>(it.value()) * c.orient[c.dim][it.row()];
        for (int f = 0; f < c.count(bd); ++f)
            if (c.on_boundary[bd][f]) {
                bfaces.push_back(f);
                bsigns.push_back(sign_of[f]);
            }
    }
    // Compact vertex numbering.
    std::vector<int> old2new(c.nverts, -1);
    for (int f : bfaces)
        for (int v : c.simplices[bd][f])
            if (old2new[v] < 0) {
                old2new[v] = static_cast<int>(out.vertex_map.size());
                out.vertex_map.push_back(v);
            }
    std::vector<std::vector<int>> tops;
    for (size_t i = 0; i < bfaces.size(); ++i) {
        std::vector<int> t;
        for (int v : c.simplices[bd][bfaces[i]]) t.push_back(old2new[v]);
        // renumbering is monotone, tuple stays sorted; encode induced sign
        if (bsigns[i] < 0 && t.size() >= 2) std::swap(t[0], t[1]);
        tops.push_back(t);
    }
    out.complex = build_complex(bd, static_cast<int>(out.vertex_map.size()), tops);
    if (out.complex.has_boundary())
        throw ValidationError("boundary subcomplex is not closed");

    // Selector from boundary degrees into ambient positions.
    out.selector.indices.resize(c.dim + 1);
    out.selector.signs.resize(c.dim + 1);
    for (int k = 0; k <= bd; ++k) {
        for (size_t i = 0; i < out.complex.simplices[k].size(); ++i) {
            std::vector<int> amb;
            for (int v : out.complex.simplices[k][i]) amb.push_back(out.vertex_map[v]);
            std::sort(amb.begin(), amb.end());
            out.selector.indices[k].push_back(c.index[k].at(amb));
            out.selector.signs[k].push_back(out.complex.orient[k][i]);
        }
    }
    return out;
}

SubcomplexResult spanned_subcomplex(const OrientedComplex& c,
                                    const std::vector<char>& vertex_mask) {
    SubcomplexResult out;
    std::vector<int> old2new(c.nverts, -1);
    for (int v = 0; v < c.nverts; ++v)
        if (vertex_mask[v]) {
            old2new[v] = static_cast<int>(out.vertex_map.size());
            out.vertex_map.push_back(v);
        }
    // Highest degree whose simplices survive.
    int sdim = 0;
    std::vector<std::vector<int>> kept(c.dim + 1);
    for (int k = c.dim; k >= 0; --k)
        for (int i = 0; i < c.count(k); ++i) {
            bool all = true;
            for (int v : c.simplices[k][i]) all = all && vertex_mask[v];
            if (all) {
                kept[k].push_back(i);
                sdim = std::max(sdim, k);
            }
        }
    // Maximal simplices only; build_complex re-derives the rest. A simplex is
    // maximal if it is not a face of a kept (k+1)-simplex.
    std::vector<std::vector<int>> tops;
    std::vector<std::vector<char>> is_face(c.dim + 1);
    for (int k = 0; k <= c.dim; ++k) is_face[k].assign(c.count(k), 0);
    for (int k = c.dim; k >= 1; --k)
        for (int i : kept[k]) {
            const auto& s = c.simplices[k][i];
            std::vector<int> f(s.size() - 1);
            for (size_t a = 0; a < s.size(); ++a) {
                size_t w = 0;
                for (size_t j = 0; j < s.size(); ++j)
                    if (j != a) f[w++] = s[j];
                is_face[k - 1][c.index[k - 1].at(f)] = 1;
            }
        }
    // A spanned subcomplex of mixed dimension is rejected: the fixed sets we
    // care about are unions of simplices of one dimension.
    for (int k = 0; k <= sdim; ++k)
        for (int i : kept[k])
            if (!is_face[k][i] && k != sdim)
                throw ValidationError("spanned subcomplex has mixed dimension");
    for (int i : kept[sdim]) {
        std::vector<int> t;
        for (int v : c.simplices[sdim][i]) t.push_back(old2new[v]);
        if (c.orient[sdim][i] < 0 && t.size() >= 2) std::swap(t[0], t[1]);
        tops.push_back(t);
    }
    out.complex = build_complex(sdim, static_cast<int>(out.vertex_map.size()), tops,
                                /*require_manifold=*/false);
    // Boundary flags inherit from the ambient complex.
    for (int k = 0; k <= sdim; ++k)
        for (size_t i = 0; i < out.complex.simplices[k].size(); ++i) {
            std::vector<int> amb;
            for (int v : out.complex.simplices[k][i]) amb.push_back(out.vertex_map[v]);
            std::sort(amb.begin(), amb.end());
            out.complex.on_boundary[k][i] = c.on_boundary[k].empty()
                                                ? 0
                                                : c.on_boundary[k][c.index[k].at(amb)];
        }
    out.selector.indices.resize(c.dim + 1);
    out.selector.signs.resize(c.dim + 1);
    for (int k = 0; k <= sdim; ++k)
        for (size_t i = 0; i < out.complex.simplices[k].size(); ++i) {
            std::vector<int> amb;
            for (int v : out.complex.simplices[k][i]) amb.push_back(out.vertex_map[v]);
            std::sort(amb.begin(), amb.end());
            out.selector.indices[k].push_back(c.index[k].at(amb));
            out.selector.signs[k].push_back(out.complex.orient[k][i]);
        }
    return out;
}

std::vector<long> reference_betti(const OrientedComplex& c,
                                  const SubcomplexSelector* relative_to) {
    long total = 0;
    for (int k = 0; k <= c.dim; ++k) total += c.count(k);
    const bool use_exact = total <= kExactRankCap;

    std::vector<std::vector<char>> drop(c.dim + 1);
    for (int k = 0; k <= c.dim; ++k) {
        drop[k].assign(c.count(k), 0);
        if (relative_to && k < static_cast<int>(relative_to->indices.size()))
            for (int i : relative_to->indices[k]) drop[k][i] = 1;
    }
    std::vector<long> nk(c.dim + 1, 0);
    for (int k = 0; k <= c.dim; ++k) {
        long d = 0;
        for (char x : drop[k]) d += x;
        nk[k] = c.count(k) - d;
    }
    std::vector<long> rank(c.dim, 0);
    for (int k = 0; k + 1 <= c.dim; ++k) {
        if (nk[k] == 0 || nk[k + 1] == 0) {
            rank[k] = 0;
            continue;
        }
        if (use_exact)
            rank[k] = exact_rank_restricted(c.coboundary[k], drop[k + 1], drop[k]);
        else {
            // fallback: floating rank on the restricted matrix
            std::vector<Eigen::Triplet<long long>> trip;
            std::vector<int> rmap(c.count(k + 1), -1), cmap(c.count(k), -1);
            int r = 0, cc = 0;
            for (int i = 0; i < c.count(k + 1); ++i)
                if (!drop[k + 1][i]) rmap[i] = r++;
            for (int i = 0; i < c.count(k); ++i)
                if (!drop[k][i]) cmap[i] = cc++;
            for (int col = 0; col < c.coboundary[k].outerSize(); ++col)
                for (SpMatI::InnerIterator it(c.coboundary[k], col); it; ++it)
                    if (rmap[it.row()] >= 0 && cmap[it.col()] >= 0)
                        trip.emplace_back(rmap[it.row()], cmap[it.col()], it.value());
            SpMatI A(r, cc);
            A.setFromTriplets(trip.begin(), trip.end());
            rank[k] = float_rank(A);
        }
    }
    std::vector<long> betti(c.dim + 1, 0);
    for (int k = 0; k <= c.dim; ++k) {
        long rk = (k < c.dim) ? rank[k] : 0;
        long rkm = (k > 0) ? rank[k - 1] : 0;
        betti[k] = nk[k] - rk - rkm;
    }
    return betti;
}

long euler_characteristic(const OrientedComplex& c, EulerMode mode) {
    long chi = 0;
    for (int k = 0; k <= c.dim; ++k) {
        long n = 0;
        for (int i = 0; i < c.count(k); ++i) {
            bool b = c.on_boundary[k][i];
            if (mode == EulerMode::Absolute || (mode == EulerMode::Relative && !b) ||
                (mode == EulerMode::Boundary && b))
                ++n;
        }
        chi += (k % 2 == 0) ? n : -n;
    }
    return chi;
}

}  // namespace hodgex
