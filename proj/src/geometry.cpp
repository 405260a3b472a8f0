#include "hodgex/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace hodgex {

namespace {

// Gauss-Jacobi nodes/weights on [0,1] for weight (1-t)^alpha, by Golub-Welsch.
void gauss_jacobi01(int npts, double alpha, Eigen::VectorXd& t, Eigen::VectorXd& w) {
    const double a = alpha, b = 0.0;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(npts, npts);
    auto diag = [&](int k) -> double {
        if (k == 0 && a + b + 2 == 0) return 0.0;
        double num = b * b - a * a;
        double den = (2 * k + a + b) * (2 * k + a + b + 2);
        return den == 0 ? 0.0 : num / den;
    };
    auto offsq = [&](int k) -> double {
        double num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
        double den = std::pow(2 * k + a + b, 2) * (2 * k + a + b + 1) * (2 * k + a + b - 1);
        return num / den;
    };
    for (int k = 0; k < npts; ++k) J(k, k) = diag(k);
    for (int k = 1; k < npts; ++k) {
        double v = std::sqrt(offsq(k));
        J(k, k - 1) = v;
        J(k - 1, k) = v;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    // total weight on [-1,1]: 2^{a+b+1} B(a+1,b+1)
    double mu0 = std::pow(2.0, a + b + 1) * std::tgamma(a + 1) * std::tgamma(b + 1) /
                 std::tgamma(a + b + 2);
    t.resize(npts);
    w.resize(npts);
    for (int i = 0; i < npts; ++i) {
        t(i) = (1.0 + es.eigenvalues()(i)) / 2.0;
        double v0 = es.eigenvectors()(0, i);
        w(i) = mu0 * v0 * v0 / std::pow(2.0, a + 1);
    }
}

// ascending k-subsets of {0..n-1}
std::vector<std::vector<int>> k_subsets(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int start) {
        if (static_cast<int>(cur.size()) == k) {
            out.push_back(cur);
            return;
        }
        for (int i = start; i < n; ++i) {
            cur.push_back(i);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

// Exterior algebra over R^n in the dx_I basis (I ascending), n <= 3.
struct Exterior {
    int n;
    std::vector<std::vector<std::vector<int>>> subsets;  // [k][i] = I
    std::vector<std::map<std::vector<int>, int>> pos;

    explicit Exterior(int n_) : n(n_) {
        subsets.resize(n + 1);
        pos.resize(n + 1);
        for (int k = 0; k <= n; ++k) {
            subsets[k] = k_subsets(n, k);
            for (size_t i = 0; i < subsets[k].size(); ++i) pos[k][subsets[k][i]] = static_cast<int>(i);
        }
    }
    int dim(int k) const { return static_cast<int>(subsets[k].size()); }

    // wedge of k row-vectors: coefficients = k x k minors
    Eigen::VectorXd wedge(const std::vector<Eigen::VectorXd>& vs) const {
        int k = static_cast<int>(vs.size());
        Eigen::VectorXd out(dim(k));
        for (int i = 0; i < dim(k); ++i) {
            const auto& I = subsets[k][i];
            Eigen::MatrixXd m(k, k);
            for (int r = 0; r < k; ++r)
                for (int c = 0; c < k; ++c) m(r, c) = vs[r](I[c]);
            out(i) = (k == 0) ? 1.0 : m.determinant();
        }
        if (k == 0) out(0) = 1.0;
        return out;
    }

    // interior product with vector x: Lambda^k -> Lambda^{k-1}
    Eigen::VectorXd contract(const Eigen::VectorXd& form, int k,
                             const Eigen::VectorXd& x) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(dim(k - 1));
        for (int i = 0; i < dim(k); ++i) {
            const auto& I = subsets[k][i];
            for (int j = 0; j < k; ++j) {
                std::vector<int> J;
                for (int a = 0; a < k; ++a)
                    if (a != j) J.push_back(I[a]);
                double sgn = (j % 2 == 0) ? 1.0 : -1.0;
                out(pos[k - 1].at(J)) += sgn * x(I[j]) * form(i);
            }
        }
        return out;
    }
};

struct ElementFrame {
    Eigen::MatrixXd axes;   // d x n orthonormal
    Eigen::VectorXd origin; // p0
    Eigen::MatrixXd grads;  // (n+1) x n barycentric gradients in local coords
    double volume = 0.0;
};

ElementFrame element_frame(const EmbeddedGeometry& g, const std::vector<int>& verts) {
    const int n = static_cast<int>(verts.size()) - 1;
    const int d = g.ambient_dim();
    ElementFrame F;
    F.origin = g.coords.row(verts[0]).transpose();
    Eigen::MatrixXd edges(d, n);
    for (int i = 0; i < n; ++i)
        edges.col(i) = g.coords.row(verts[i + 1]).transpose() - F.origin;
    // modified Gram-Schmidt
    F.axes.resize(d, n);
    Eigen::MatrixXd work = edges;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v = work.col(i);
        for (int j = 0; j < i; ++j) v -= (F.axes.col(j).dot(v)) * F.axes.col(j);
        double nv = v.norm();
        if (nv <= 0) throw ValidationError("degenerate simplex (zero volume)");
        F.axes.col(i) = v / nv;
    }
    Eigen::MatrixXd L = F.axes.transpose() * edges;  // n x n, upper triangular
    double det = L.determinant();
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    F.volume = std::abs(det) / fact;
    if (!(F.volume > 0)) throw ValidationError("degenerate simplex (zero volume)");
    Eigen::MatrixXd Linv = L.inverse();
    F.grads.resize(n + 1, n);
    for (int i = 0; i < n; ++i) F.grads.row(i + 1) = Linv.row(i);
    F.grads.row(0) = -F.grads.bottomRows(n).colwise().sum();
    return F;
}

double factorial(int k) {
    double f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// Whitney k-form of the ascending-local-index face S at barycentric point.
Eigen::VectorXd whitney_value(const Exterior& ext, const ElementFrame& F,
                              const std::vector<int>& S, const Eigen::VectorXd& bary) {
    const int k = static_cast<int>(S.size()) - 1;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(ext.dim(k));
    std::vector<Eigen::VectorXd> gs;
    for (int j = 0; j <= k; ++j) {
        gs.clear();
        for (int a = 0; a <= k; ++a)
            if (a != j) gs.push_back(F.grads.row(S[a]).transpose());
        double sgn = (j % 2 == 0) ? 1.0 : -1.0;
        out += factorial(k) * sgn * bary(S[j]) * ext.wedge(gs);
    }
    return out;
}

}  // namespace

QuadratureRule simplex_quadrature(int n, int degree) {
    const int q = degree / 2 + 1;  // Gauss: q points exact to degree 2q-1
    std::vector<Eigen::VectorXd> ts(n), ws(n);
    for (int i = 0; i < n; ++i) gauss_jacobi01(q, static_cast<double>(n - 1 - i), ts[i], ws[i]);
    QuadratureRule rule;
    const int total = static_cast<int>(std::pow(q, n));
    rule.bary.resize(total, n + 1);
    rule.weights.resize(total);
    std::vector<int> idx(n, 0);
    for (int p = 0; p < total; ++p) {
        double w = 1.0, rem = 1.0;
        Eigen::VectorXd lam = Eigen::VectorXd::Zero(n + 1);
        for (int i = 0; i < n; ++i) {
            double t = ts[i](idx[i]);
            lam(i + 1 - 1) = rem * t;  // lambda_i for i = 0..n-1 (collapsed coords)
            rem *= (1.0 - t);
            w *= ws[i](idx[i]);
        }
        lam(n) = rem;
        rule.bary.row(p) = lam.transpose();
        rule.weights(p) = w;
        for (int i = 0; i < n; ++i) {
            if (++idx[i] < q) break;
            idx[i] = 0;
        }
    }
    // weights currently sum to the reference volume 1/n!; normalize to 1
    rule.weights /= rule.weights.sum();
    return rule;
}

MassMatrix mass_matrix(const EmbeddedGeometry& g, const OrientedComplex& c, int k) {
    const int n = c.dim;
    if (k < 0 || k > n) throw ValidationError("mass degree out of range");
    Exterior ext(n);
    QuadratureRule rule = simplex_quadrature(n, 4);
    const auto faces = k_subsets(n + 1, k + 1);
    std::vector<Eigen::Triplet<double>> trip;
    for (int e = 0; e < c.count(n); ++e) {
        const auto& verts = c.simplices[n][e];
        ElementFrame F = element_frame(g, verts);
        // global indices of the element's k-faces
        std::vector<int> gidx(faces.size());
        for (size_t f = 0; f < faces.size(); ++f) {
            std::vector<int> t;
            for (int li : faces[f]) t.push_back(verts[li]);
            gidx[f] = c.index[k].at(t);
        }
        Eigen::MatrixXd local = Eigen::MatrixXd::Zero(faces.size(), faces.size());
        std::vector<Eigen::VectorXd> vals(faces.size());
        for (int p = 0; p < rule.bary.rows(); ++p) {
            const Eigen::VectorXd bary = rule.bary.row(p).transpose();
            for (size_t f = 0; f < faces.size(); ++f)
                vals[f] = whitney_value(ext, F, faces[f], bary);
            const double w = rule.weights(p) * F.volume;
            for (size_t a = 0; a < faces.size(); ++a)
                for (size_t b = a; b < faces.size(); ++b)
                    local(a, b) += w * vals[a].dot(vals[b]);
        }
        for (size_t a = 0; a < faces.size(); ++a)
            for (size_t b = a; b < faces.size(); ++b) {
                trip.emplace_back(gidx[a], gidx[b], local(a, b));
                if (a != b) trip.emplace_back(gidx[b], gidx[a], local(a, b));
            }
    }
    MassMatrix M;
    M.degree = k;
    M.mat.resize(c.count(k), c.count(k));
    M.mat.setFromTriplets(trip.begin(), trip.end());
    return M;
}

SpMatD contraction_matrix(const EmbeddedGeometry& g, const OrientedComplex& c,
                          const PLVectorField& X, int k) {
    const int n = c.dim;
    if (k < 1 || k > n) throw ValidationError("contraction degree out of range");
    Exterior ext(n);
    QuadratureRule rule = simplex_quadrature(n, 4);
    const auto kfaces = k_subsets(n + 1, k + 1);
    const auto rfaces = k_subsets(n + 1, k);
    std::vector<Eigen::Triplet<double>> trip;
    for (int e = 0; e < c.count(n); ++e) {
        const auto& verts = c.simplices[n][e];
        ElementFrame F = element_frame(g, verts);
        std::vector<int> gk(kfaces.size()), gr(rfaces.size());
        for (size_t f = 0; f < kfaces.size(); ++f) {
            std::vector<int> t;
            for (int li : kfaces[f]) t.push_back(verts[li]);
            gk[f] = c.index[k].at(t);
        }
        for (size_t f = 0; f < rfaces.size(); ++f) {
            std::vector<int> t;
            for (int li : rfaces[f]) t.push_back(verts[li]);
            gr[f] = c.index[k - 1].at(t);
        }
        // vertex field values in the element frame
        Eigen::MatrixXd Xl(n + 1, n);
        for (int i = 0; i <= n; ++i)
            Xl.row(i) = (F.axes.transpose() *
                         (X.scale * X.vectors.row(verts[i]).transpose()))
                            .transpose();
        Eigen::MatrixXd local = Eigen::MatrixXd::Zero(rfaces.size(), kfaces.size());
        for (int p = 0; p < rule.bary.rows(); ++p) {
            const Eigen::VectorXd bary = rule.bary.row(p).transpose();
            Eigen::VectorXd xpt = Xl.transpose() * bary;
            const double w = rule.weights(p) * F.volume;
            std::vector<Eigen::VectorXd> rv(rfaces.size());
            for (size_t f = 0; f < rfaces.size(); ++f)
                rv[f] = whitney_value(ext, F, rfaces[f], bary);
            for (size_t f = 0; f < kfaces.size(); ++f) {
                Eigen::VectorXd iw =
                    ext.contract(whitney_value(ext, F, kfaces[f], bary), k, xpt);
                for (size_t r = 0; r < rfaces.size(); ++r)
                    local(r, f) += w * iw.dot(rv[r]);
            }
        }
        for (size_t r = 0; r < rfaces.size(); ++r)
            for (size_t f = 0; f < kfaces.size(); ++f)
                if (local(r, f) != 0.0) trip.emplace_back(gr[r], gk[f], local(r, f));
    }
    SpMatD B(c.count(k - 1), c.count(k));
    B.setFromTriplets(trip.begin(), trip.end());
    return B;
}

FieldReport validate_field(const EmbeddedGeometry& g, const OrientedComplex& c,
                           const PLVectorField& X,
                           const std::vector<int>& fixed_vertices, double tau_tan) {
    FieldReport rep;
    const int n = c.dim;
    const int d = g.ambient_dim();
    if (n >= 1 && c.has_boundary()) {
        // averaged outward normal per boundary vertex, oriented away from the
        // opposite vertex of the unique containing top simplex
        Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(g.coords.rows(), d);
        const int bd = n - 1;
        std::vector<int> coface(c.count(bd), -1);
        {
            const SpMatI& D = c.coboundary[bd];
            for (int col = 0; col < D.outerSize(); ++col)
                for (SpMatI::InnerIterator it(D, col); it; ++it)
                    if (c.on_boundary[bd][it.col()])
                        coface[it.col()] = static_cast<int>(it.row());
        }
        for (int f = 0; f < c.count(bd); ++f) {
            if (!c.on_boundary[bd][f]) continue;
            const auto& fs = c.simplices[bd][f];
            const auto& ts = c.simplices[n][coface[f]];
            int opp = -1;
            for (int v : ts)
                if (std::find(fs.begin(), fs.end(), v) == fs.end()) opp = v;
            Eigen::VectorXd mid = Eigen::VectorXd::Zero(d);
            for (int v : fs) mid += g.coords.row(v).transpose();
            mid /= static_cast<double>(fs.size());
            Eigen::VectorXd u = mid - g.coords.row(opp).transpose();
            // remove the in-face components inside the top simplex plane
            ElementFrame F = element_frame(g, ts);
            Eigen::VectorXd ul = F.axes.transpose() * u;
            std::vector<Eigen::VectorXd> tang;
            for (size_t i = 1; i < fs.size(); ++i) {
                Eigen::VectorXd e =
                    F.axes.transpose() *
                    (g.coords.row(fs[i]) - g.coords.row(fs[0])).transpose();
                for (const auto& t : tang) e -= e.dot(t) * t;
                e.normalize();
                tang.push_back(e);
            }
            for (const auto& t : tang) ul -= ul.dot(t) * t;
            double nn = ul.norm();
            if (nn == 0) continue;
            Eigen::VectorXd nrm = F.axes * (ul / nn);
            for (int v : fs) normal.row(v) += nrm.transpose();
        }
        for (int v = 0; v < c.nverts; ++v) {
            if (!c.on_boundary[0].empty() && c.on_boundary[0][v]) {
                double nn = normal.row(v).norm();
                if (nn == 0) continue;
                double defect =
                    std::abs(normal.row(v).dot(X.vectors.row(v)) * X.scale) / nn;
                rep.max_tangency_defect = std::max(rep.max_tangency_defect, defect);
            }
        }
    }
    for (int v : fixed_vertices) {
        double nv = X.vectors.row(v).norm() * std::abs(X.scale);
        rep.max_fixed_norm = std::max(rep.max_fixed_norm, nv);
        if (nv != 0.0) rep.fixed_ok = false;
    }
    if (rep.max_tangency_defect > tau_tan)
        throw ValidationError("field not tangent to boundary: defect " +
                              std::to_string(rep.max_tangency_defect));
    return rep;
}

EmbeddedGeometry restrict_geometry(const EmbeddedGeometry& g,
                                   const std::vector<int>& vertex_map) {
    EmbeddedGeometry out;
    out.coords.resize(vertex_map.size(), g.coords.cols());
    for (size_t i = 0; i < vertex_map.size(); ++i)
        out.coords.row(i) = g.coords.row(vertex_map[i]);
    return out;
}

PLVectorField restrict_field(const PLVectorField& X, const std::vector<int>& vertex_map) {
    PLVectorField out;
    out.scale = X.scale;
    out.vectors.resize(vertex_map.size(), X.vectors.cols());
    for (size_t i = 0; i < vertex_map.size(); ++i)
        out.vectors.row(i) = X.vectors.row(vertex_map[i]);
    return out;
}

double integrate_top(const OrientedComplex& c, const Eigen::VectorXd& cochain) {
    double s = 0;
    for (int i = 0; i < c.count(c.dim); ++i) s += c.orient[c.dim][i] * cochain(i);
    return s;
}

Eigen::VectorXd interpolate_vertex(const EmbeddedGeometry& g,
                                   const std::function<double(const Eigen::VectorXd&)>& f) {
    Eigen::VectorXd out(g.coords.rows());
    for (int i = 0; i < g.coords.rows(); ++i) out(i) = f(g.coords.row(i).transpose());
    return out;
}

Eigen::VectorXd interpolate_one_form(
    const EmbeddedGeometry& g, const OrientedComplex& c,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& w) {
    // 8-point Gauss-Legendre on each edge
    Eigen::VectorXd t, wt;
    {
        QuadratureRule r = simplex_quadrature(1, 15);
        t = r.bary.col(0);
        wt = r.weights;
    }
    Eigen::VectorXd out(c.count(1));
    for (int e = 0; e < c.count(1); ++e) {
        Eigen::VectorXd a = g.coords.row(c.simplices[1][e][0]).transpose();
        Eigen::VectorXd b = g.coords.row(c.simplices[1][e][1]).transpose();
        double acc = 0;
        for (int p = 0; p < t.size(); ++p) {
            Eigen::VectorXd x = a + t(p) * (b - a);
            acc += wt(p) * w(x).dot(b - a);
        }
        out(e) = acc;
    }
    return out;
}

Eigen::VectorXd interpolate_top_density(
    const EmbeddedGeometry& g, const OrientedComplex& c,
    const std::function<double(const Eigen::VectorXd&)>& density) {
    const int n = c.dim;
    QuadratureRule rule = simplex_quadrature(n, 9);
    Eigen::VectorXd out(c.count(n));
    for (int e = 0; e < c.count(n); ++e) {
        const auto& verts = c.simplices[n][e];
        ElementFrame F = element_frame(g, verts);
        double acc = 0;
        for (int p = 0; p < rule.bary.rows(); ++p) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(g.ambient_dim());
            for (int i = 0; i <= n; ++i)
                x += rule.bary(p, i) * g.coords.row(verts[i]).transpose();
            acc += rule.weights(p) * F.volume * density(x);
        }
        out(e) = acc * c.orient[n][e];
    }
    return out;
}

}  // namespace hodgex
