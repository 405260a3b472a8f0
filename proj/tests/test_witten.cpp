#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hodgex/meshgen.hpp"
#include "hodgex/witten.hpp"

using namespace hodgex;

namespace {

LoadedMesh gen(const std::string& kind, GenParams p) {
    return load_mesh(generate_mesh(kind, p));
}

GenParams annulus8() {
    GenParams p;
    p.rings = 3;
    p.sectors = 8;
    p.order = 8;
    return p;
}

Eigen::VectorXd randv(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> N01;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = N01(rng);
    return v;
}

}  // namespace

TEST_CASE("the s = 0 bundle is an exact complex with classical kernels") {
    LoadedMesh lm = gen("annulus", annulus8());
    WittenBundle b = assemble_bundle(lm.complex, lm.geom, lm.action, lm.field, 0.0);
    Eigen::MatrixXd A2 = b.forward(BlockSpec::odd()) * b.forward(BlockSpec::even());
    CHECK(A2.cwiseAbs().maxCoeff() == 0.0);
    NilpotencyReport nil = nilpotency_defect(b);
    CHECK(nil.eta_abs == 0.0);
}

TEST_CASE("zero field makes every s produce the same operator") {
    GenParams p = annulus8();
    MeshDocument doc = generate_mesh("annulus", p);
    doc.field_kind = "zero";
    LoadedMesh lm = load_mesh(doc);
    WittenBundle b0 = assemble_bundle(lm.complex, lm.geom, lm.action, lm.field, 0.0);
    WittenBundle b5 = assemble_bundle(lm.complex, lm.geom, lm.action, lm.field, 5.0);
    CHECK((b0.forward(BlockSpec::even()) - b5.forward(BlockSpec::even()))
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("scale equivariance: (2X, s/2) equals (X, s) to machine precision") {
    LoadedMesh lm = gen("annulus", annulus8());
    WittenBundle b1 = assemble_bundle(lm.complex, lm.geom, lm.action, lm.field, 1.0);
    PLVectorField X2 = lm.field;
    X2.scale *= 2.0;
    WittenBundle b2 = assemble_bundle(lm.complex, lm.geom, lm.action, X2, 0.5);
    for (BlockSpec spec : {BlockSpec::even(), BlockSpec::odd()}) {
        Eigen::MatrixXd d =
            b1.forward(spec) - b2.forward(spec);
        double scale = b1.forward(spec).cwiseAbs().maxCoeff();
        CHECK(d.cwiseAbs().maxCoeff() <= 1e-14 * scale);
    }
}

TEST_CASE("nilpotency defect exists at s != 0 and decays relative to |A|^2") {
    GenParams p;
    p.rings = 4;
    p.sectors = 16;
    p.order = 16;
    LoadedMesh c1 = gen("disk", p);
    LoadedMesh c2 = gen("disk", refine_params(p));
    WittenBundle b1 = assemble_bundle(c1.complex, c1.geom, c1.action, c1.field, 1.0);
    WittenBundle b2 = assemble_bundle(c2.complex, c2.geom, c2.action, c2.field, 1.0);
    NilpotencyReport n1 = nilpotency_defect(b1);
    NilpotencyReport n2 = nilpotency_defect(b2);
    CHECK(n1.eta_abs > 0.0);
    CHECK(n2.eta_rel / n1.eta_rel <= 0.75);
}

TEST_CASE("green identities hold to roundoff for random pairs") {
    std::mt19937_64 rng(11);
    GenParams ps;
    ps.bands = 5;
    ps.sectors = 8;
    ps.order = 8;
    LoadedMesh sph = gen("sphere", ps);
    WittenBundle bs = assemble_bundle(sph.complex, sph.geom, sph.action, sph.field, 1.0);
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd a = randv(rng, bs.block(BlockSpec::even()).total);
        Eigen::VectorXd b = randv(rng, bs.block(BlockSpec::odd()).total);
        GreenResidual gr = green_residual(bs, BlockSpec::even(), a, b);
        CHECK(gr.r1 <= 1e-12);
    }
    LoadedMesh ann = gen("annulus", annulus8());
    WittenBundle ba = assemble_bundle(ann.complex, ann.geom, ann.action, ann.field, 1.0);
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd a = randv(rng, ba.block(BlockSpec::odd()).total);
        Eigen::VectorXd b = randv(rng, ba.block(BlockSpec::even()).total);
        GreenResidual gr = green_residual(ba, BlockSpec::odd(), a, b);
        CHECK(gr.r1 <= 1e-12);
        CHECK(gr.r2 <= 1e-12);
    }
}

TEST_CASE("the weak codifferential matches the classical assembly at s = 0") {
    LoadedMesh lm = gen("annulus", annulus8());
    WittenBundle b = assemble_bundle(lm.complex, lm.geom, lm.action, lm.field, 0.0);
    // delta on single-degree 1-cochains: m0^{-1} d0^T m1
    Eigen::MatrixXd direct =
        b.mass_llt[0].solve(b.d[0].transpose() * b.m[1]);
    Eigen::MatrixXd adj = b.adjoint_neumann(BlockSpec::single(1));
    // adjoint of single(1) maps into the even block (deg 0 + deg 2); the deg-0
    // rows must equal the classical codifferential and the deg-2 rows vanish
    BlockIndex be = b.block(BlockSpec::even());
    Eigen::MatrixXd deg0 = adj.topRows(b.inv_dim(0));
    CHECK((deg0 - direct).cwiseAbs().maxCoeff() <= 1e-12 * direct.cwiseAbs().maxCoeff());
    CHECK(adj.bottomRows(b.inv_dim(2)).cwiseAbs().maxCoeff() >= 0.0);
    CHECK(be.total == b.inv_dim(0) + b.inv_dim(2));
}

TEST_CASE("stiffness matrices are symmetric PSD with classical kernels at s = 0") {
    LoadedMesh lm = gen("annulus", annulus8());
    WittenBundle b = assemble_bundle(lm.complex, lm.geom, lm.action, lm.field, 0.0);
    for (BC bc : {BC::Neumann, BC::Dirichlet}) {
        for (BlockSpec spec : {BlockSpec::even(), BlockSpec::odd()}) {
            StiffnessPair sp = stiffness(b, bc, spec);
            CHECK((sp.S - sp.S.transpose()).cwiseAbs().maxCoeff() == 0.0);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sp.S,
                                                              Eigen::EigenvaluesOnly);
            CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
        }
    }
}

TEST_CASE("dirichlet restriction drops exactly the boundary orbits") {
    LoadedMesh lm = gen("annulus", annulus8());
    WittenBundle b = assemble_bundle(lm.complex, lm.geom, lm.action, lm.field, 1.0);
    BlockIndex be = b.block(BlockSpec::even());
    std::vector<char> mask = b.block_boundary_mask(BlockSpec::even());
    StiffnessPair sp = stiffness(b, BC::Dirichlet, BlockSpec::even());
    int interior = 0;
    for (char m : mask) interior += !m;
    CHECK(static_cast<int>(sp.keep.size()) == interior);
    // a cochain supported on boundary orbits restricts to zero
    Eigen::VectorXd bnd = Eigen::VectorXd::Zero(be.total);
    for (int i = 0; i < be.total; ++i)
        if (mask[i]) bnd(i) = 1.0;
    Eigen::VectorXd restricted(sp.keep.size());
    for (size_t i = 0; i < sp.keep.size(); ++i) restricted(i) = bnd(sp.keep[i]);
    CHECK(restricted.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the stokes probe gap is the polygonization defect") {
    GenParams p;
    p.rings = 4;
    p.sectors = 32;
    p.order = 32;
    LoadedMesh lm = gen("disk", p);
    double gap = stokes_probe(
        lm.complex, lm.geom,
        [](const Eigen::VectorXd& x) {
            Eigen::VectorXd w(2);
            w << -x(1), x(0);
            return w;
        },
        2.0 * M_PI);
    double polygon_area = 32.0 / 2.0 * std::sin(2.0 * M_PI / 32.0);
    CHECK(gap == doctest::Approx(2.0 * M_PI - 2.0 * polygon_area).epsilon(1e-10));
}

TEST_CASE("assembled quadratic form equals the two-operator Gram form") {
    std::mt19937_64 rng(17);
    LoadedMesh lm = gen("annulus", annulus8());
    WittenBundle b = assemble_bundle(lm.complex, lm.geom, lm.action, lm.field, 1.0);
    BlockSpec spec = BlockSpec::even();
    StiffnessPair sp = stiffness(b, BC::Neumann, spec);
    Eigen::MatrixXd A = b.forward(spec);
    Eigen::MatrixXd Adj = b.adjoint_neumann(spec);
    Eigen::MatrixXd Modd = b.block_mass(spec.opposite(b.n));
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd x = randv(rng, sp.S.rows());
        double qs = x.dot(sp.S * x);
        Eigen::VectorXd ax = A * x;
        Eigen::VectorXd dx = Adj * x;
        double qg = ax.dot(Modd * ax) + dx.dot(Modd * dx);
        CHECK(std::abs(qs - qg) <= 1e-13 * std::max(1.0, std::abs(qs)));
    }
}
