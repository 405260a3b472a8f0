#include "hodgex/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <sstream>

namespace hodgex {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

ToleranceProfile ToleranceProfile::named(const std::string& name) {
    ToleranceProfile p;
    p.name = name;
    if (name == "default") {
        // spec defaults
    } else if (name == "strict") {
        p.kernel.tau_abs = 1e-8;
        p.kernel.rho_min = 1000.0;
    } else {
        throw ValidationError("unknown tolerance profile: " + name);
    }
    return p;
}

HarmonicOptions ToleranceProfile::harmonic(std::uint64_t seed, int expected) const {
    HarmonicOptions h;
    h.kernel = kernel;
    h.gevp.seed = seed;
    h.expected = expected;
    h.tau_field = tau_field;
    return h;
}

bool Scenario::wants(const std::string& a) const {
    if (analyses.empty()) return true;
    return std::find(analyses.begin(), analyses.end(), a) != analyses.end();
}

Scenario scenario_from_json(const Json& j) {
    if (!j.contains("schema") || j["schema"] != kScenarioSchema)
        throw ValidationError("scenario schema mismatch");
    Scenario sc;
    sc.name = j.value("name", "unnamed");
    const Json& mesh = j.at("mesh");
    if (mesh.contains("file")) {
        sc.mesh_kind = "file";
        sc.mesh_file = mesh["file"].get<std::string>();
    } else {
        const Json& gen = mesh.at("generator");
        sc.mesh_kind = gen.at("kind").get<std::string>();
        sc.params.rings = gen.value("rings", 0);
        sc.params.sectors = gen.value("sectors", 0);
        sc.params.bands = gen.value("bands", 0);
        sc.params.grid_major = gen.value("major", 0);
        sc.params.grid_minor = gen.value("minor", 0);
        sc.params.radius = gen.value("radius", 1.0);
        sc.params.inner = gen.value("inner", 1.0);
        sc.params.outer = gen.value("outer", 2.0);
        sc.params.radius_major = gen.value("radius_major", 2.0);
        sc.params.radius_minor = gen.value("radius_minor", 0.5);
        sc.params.order = gen.value("order", 1);
        sc.params.scale = gen.value("scale", 1.0);
    }
    sc.s_values = j.value("s_values", std::vector<double>{0.0, 1.0});
    sc.refine = j.value("refine", 0);
    sc.analyses = j.value("analyses", std::vector<std::string>{});
    sc.angle_sweep_s = j.value("angle_sweep_s", std::vector<double>{});
    sc.require_min_empty_lambda = j.value("require_min_empty_lambda", -1.0);
    sc.random_cochains = j.value("random_cochains", 20);
    sc.seed = j.value("seed", std::uint64_t{0x5eed});
    sc.tol_profile = j.value("tol_profile", std::string("default"));
    if (sc.s_values.empty()) throw ValidationError("scenario: s_values must be nonempty");
    return sc;
}

Json scenario_to_json(const Scenario& sc) {
    Json j;
    j["schema"] = kScenarioSchema;
    j["name"] = sc.name;
    if (sc.mesh_kind == "file") {
        j["mesh"] = {{"file", sc.mesh_file}};
    } else {
        Json gen;
        gen["kind"] = sc.mesh_kind;
        if (sc.params.rings) gen["rings"] = sc.params.rings;
        if (sc.params.sectors) gen["sectors"] = sc.params.sectors;
        if (sc.params.bands) gen["bands"] = sc.params.bands;
        if (sc.params.grid_major) gen["major"] = sc.params.grid_major;
        if (sc.params.grid_minor) gen["minor"] = sc.params.grid_minor;
        gen["radius"] = sc.params.radius;
        gen["inner"] = sc.params.inner;
        gen["outer"] = sc.params.outer;
        gen["radius_major"] = sc.params.radius_major;
        gen["radius_minor"] = sc.params.radius_minor;
        gen["order"] = sc.params.order;
        gen["scale"] = sc.params.scale;
        j["mesh"] = {{"generator", gen}};
    }
    j["s_values"] = sc.s_values;
    j["refine"] = sc.refine;
    j["analyses"] = sc.analyses;
    j["angle_sweep_s"] = sc.angle_sweep_s;
    j["require_min_empty_lambda"] = sc.require_min_empty_lambda;
    j["random_cochains"] = sc.random_cochains;
    j["seed"] = sc.seed;
    j["tol_profile"] = sc.tol_profile;
    return j;
}

namespace {

struct PerS {
    double s = 0.0;
    WittenBundle bundle;
    HarmonicBasis hb[2][2];  // [parity 0=even,1=odd][bc 0=N,1=D]
    XCohomologyDims dims;
    BoundarySetup bctx;
    bool bctx_ready = false;
};

struct Checks {
    Json rows = Json::array();
    bool all = true;
    void add(const std::string& name, bool ok, const Json& detail = Json::object()) {
        Json row;
        row["check"] = name;
        row["pass"] = ok;
        if (!detail.empty()) row["detail"] = detail;
        rows.push_back(row);
        all = all && ok;
    }
};

Json dims_json(const XCohomologyDims& d) {
    Json j;
    j["neumann"] = {{"even", d.neumann.even}, {"odd", d.neumann.odd}};
    j["dirichlet"] = {{"even", d.dirichlet.even}, {"odd", d.dirichlet.odd}};
    j["closed"] = d.closed;
    j["all_clean"] = d.all_clean;
    j["min_empty_lambda"] = d.min_empty_lambda;
    j["min_gap_ratio"] = d.min_gap_ratio;
    return j;
}

Eigen::VectorXd random_block_vector(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> N01(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = N01(rng);
    return v;
}

double parity_sum(const std::vector<long>& betti, int parity) {
    long s = 0;
    for (size_t k = 0; k < betti.size(); ++k)
        if (static_cast<int>(k) % 2 == parity) s += betti[k];
    return static_cast<double>(s);
}

}  // namespace

ScenarioReport run_scenario(const Scenario& sc_in, const RunOverrides& ov) {
    Scenario sc = sc_in;
    if (ov.seed) sc.seed = *ov.seed;
    if (ov.tol_profile) sc.tol_profile = *ov.tol_profile;
    ToleranceProfile prof = ToleranceProfile::named(sc.tol_profile);

    ScenarioReport rep;
    Json& doc = rep.doc;
    doc["schema"] = kReportSchema;
    doc["scenario"] = scenario_to_json(sc);
    Json& results = doc["results"];
    results = Json::object();
    Json timing = Json::object();
    Checks checks;
    std::mt19937_64 rng(sc.seed);
    auto t_start = Clock::now();
    auto phase_ms = [&](auto t0) {
        return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0)
            .count();
    };

    try {
        // ---- mesh & validation --------------------------------------------
        auto t0 = Clock::now();
        std::vector<MeshDocument> docs;
        if (sc.mesh_kind == "file") {
            std::ifstream in(sc.mesh_file);
            if (!in) throw ValidationError("cannot open mesh file " + sc.mesh_file);
            Json mj = Json::parse(in);
            docs.push_back(mesh_from_json(mj));
            if (sc.refine > 0)
                throw ValidationError("refinement ladders require generator meshes");
        } else {
            GenParams p = sc.params;
            for (int l = 0; l <= sc.refine; ++l) {
                docs.push_back(generate_mesh(sc.mesh_kind, p));
                p = refine_params(p);
            }
        }
        LoadedMesh base = load_mesh(docs[0]);
        const int n = base.complex.dim;
        const bool has_bd = base.complex.has_boundary();
        if (sc.wants("angles") && !sc.angle_sweep_s.empty() && !has_bd)
            throw ValidationError("angle analyses require a boundary");
        if (sc.wants("sweep")) {
            int nonzero = 0;
            bool has0 = false;
            for (double s : sc.s_values) {
                if (s == 0.0) has0 = true;
                else ++nonzero;
            }
            if (!has0 || nonzero < 3)
                throw ValidationError(
                    "s-sweep requires s=0 plus at least three nonzero values");
        }

        {
            Json mesh;
            Json counts = Json::array();
            for (int k = 0; k <= n; ++k) counts.push_back(base.complex.count(k));
            mesh["counts"] = counts;
            mesh["dim"] = n;
            mesh["has_boundary"] = has_bd;
            std::vector<long> betti_abs = reference_betti(base.complex);
            mesh["betti_abs"] = betti_abs;
            auto bd = boundary_subcomplex(base.complex);
            std::vector<long> betti_rel =
                has_bd ? reference_betti(base.complex, &bd.selector) : betti_abs;
            mesh["betti_rel"] = betti_rel;
            mesh["chi"] = euler_characteristic(base.complex, EulerMode::Absolute);
            mesh["action"] = {{"order", base.action.order},
                              {"isometry_defect", base.action_report.isometry_defect},
                              {"field_defect", base.action_report.field_defect}};
            mesh["field"] = {{"tangency_defect", base.field_report.max_tangency_defect},
                             {"fixed_ok", base.field_report.fixed_ok}};
            results["mesh"] = mesh;
            // euler characteristic identity on counts vs betti
            long chi_counts = euler_characteristic(base.complex, EulerMode::Absolute);
            long chi_betti = 0;
            for (size_t k = 0; k < betti_abs.size(); ++k)
                chi_betti += (k % 2 == 0 ? betti_abs[k] : -betti_abs[k]);
            checks.add("euler_counts_vs_ranks", chi_counts == chi_betti,
                       {{"counts", chi_counts}, {"ranks", chi_betti}});
        }
        timing["mesh"] = phase_ms(t0);

        // ---- fixed point & euler ------------------------------------------
        t0 = Clock::now();
        FixedPointReference ref =
            fixed_point_reference(base.complex, base.action, base.geom, base.field,
                                  base.fixed_vertices.empty() ? nullptr
                                                              : &base.fixed_vertices);
        {
            Json fj;
            fj["empty"] = ref.empty;
            fj["even_abs"] = ref.even_abs;
            fj["odd_abs"] = ref.odd_abs;
            fj["even_rel"] = ref.even_rel;
            fj["odd_rel"] = ref.odd_rel;
            results["fixed_point"] = fj;
        }
        if (sc.wants("euler")) {
            EulerReport er = euler_identities(base.complex, ref);
            Json ej;
            ej["chi_m"] = er.chi_m;
            ej["chi_bm"] = er.chi_bm;
            ej["chi_m_rel"] = er.chi_m_rel;
            ej["chi_n"] = er.chi_n;
            ej["chi_bn"] = er.chi_bn;
            ej["chi_n_rel"] = er.chi_n_rel;
            results["euler"] = ej;
            checks.add("euler_identities", er.pass, ej);
        }
        timing["fixed_point"] = phase_ms(t0);

        // ---- spectral levels ----------------------------------------------
        t0 = Clock::now();
        std::vector<PerS> level0;
        Json levels = Json::array();
        std::vector<std::vector<XCohomologyDims>> level_dims(docs.size());
        std::vector<std::vector<double>> level_eta(docs.size());
        std::vector<double> level_stokes(docs.size(), -1.0);

        for (size_t lvl = 0; lvl < docs.size(); ++lvl) {
            LoadedMesh scratch;
            if (lvl > 0) scratch = load_mesh(docs[lvl]);
            const LoadedMesh& lm = (lvl == 0) ? base : scratch;
            AssemblyCache cache;
            Json jlvl;
            jlvl["level"] = static_cast<int>(lvl);
            Json jcounts = Json::array();
            for (int k = 0; k <= n; ++k) jcounts.push_back(lm.complex.count(k));
            jlvl["counts"] = jcounts;
            Json per_s = Json::array();
            for (double s : sc.s_values) {
                WittenBundle bundle =
                    assemble_bundle(lm.complex, lm.geom, lm.action, lm.field, s, &cache);
                HarmonicOptions hopts = prof.harmonic(sc.seed);
                HarmonicBasis ne =
                    harmonic_fields(bundle, BC::Neumann, BlockSpec::even(), hopts);
                HarmonicBasis no =
                    harmonic_fields(bundle, BC::Neumann, BlockSpec::odd(), hopts);
                XCohomologyDims dims;
                PerS ps;
                if (has_bd) {
                    HarmonicBasis de =
                        harmonic_fields(bundle, BC::Dirichlet, BlockSpec::even(), hopts);
                    HarmonicBasis dd =
                        harmonic_fields(bundle, BC::Dirichlet, BlockSpec::odd(), hopts);
                    dims = dims_from_bases(ne, no, &de, &dd);
                    ps.hb[0][1] = de;
                    ps.hb[1][1] = dd;
                } else {
                    dims = dims_from_bases(ne, no, nullptr, nullptr);
                    ps.hb[0][1] = ne;
                    ps.hb[1][1] = no;
                }
                Json js;
                js["s"] = s;
                js["dims"] = dims_json(dims);
                per_s.push_back(js);
                level_dims[lvl].push_back(dims);

                if (sc.wants("nilpotency")) {
                    NilpotencyReport nil = nilpotency_defect(bundle);
                    per_s.back()["nilpotency"] = {{"eta_abs", nil.eta_abs},
                                                  {"eta_rel", nil.eta_rel},
                                                  {"norm_A", nil.norm_A}};
                    level_eta[lvl].push_back(nil.eta_rel);
                    if (s == 0.0)
                        checks.add("nilpotency_exact_s0_level" + std::to_string(lvl),
                                   nil.eta_abs == 0.0, {{"eta_abs", nil.eta_abs}});
                } else {
                    level_eta[lvl].push_back(-1.0);
                }

                if (lvl == 0) {
                    ps.s = s;
                    ps.bundle = std::move(bundle);
                    ps.hb[0][0] = std::move(ne);
                    ps.hb[1][0] = std::move(no);
                    ps.dims = dims;
                    level0.push_back(std::move(ps));
                }
            }
            jlvl["per_s"] = per_s;
            if (sc.wants("stokes") && has_bd) {
                // rotation 1-form; its boundary integral is twice the area
                double area_exact = 0.0;
                if (sc.mesh_kind == "disk")
                    area_exact = M_PI * sc.params.radius * sc.params.radius;
                else if (sc.mesh_kind == "annulus")
                    area_exact =
                        M_PI * (sc.params.outer * sc.params.outer -
                                sc.params.inner * sc.params.inner);
                if (area_exact > 0.0) {
                    double gap = stokes_probe(
                        lm.complex, lm.geom,
                        [](const Eigen::VectorXd& x) {
                            Eigen::VectorXd w(x.size());
                            w.setZero();
                            w(0) = -x(1);
                            w(1) = x(0);
                            return w;
                        },
                        2.0 * area_exact);
                    jlvl["stokes_gap"] = gap;
                    level_stokes[lvl] = gap;
                }
            }
            levels.push_back(jlvl);
        }
        results["levels"] = levels;
        timing["spectral"] = phase_ms(t0);

        // kernel cleanliness and the explicit empty-kernel floor
        for (size_t i = 0; i < level0.size(); ++i) {
            const XCohomologyDims& d0 = level0[i].dims;
            checks.add("kernel_clean_s" + std::to_string(level0[i].s), d0.all_clean,
                       dims_json(d0));
            if (sc.require_min_empty_lambda > 0 && level0[i].s != 0.0 &&
                d0.min_empty_lambda >= 0)
                checks.add("lambda_min_floor_s" + std::to_string(level0[i].s),
                           d0.min_empty_lambda >= sc.require_min_empty_lambda,
                           {{"min_empty_lambda", d0.min_empty_lambda},
                            {"floor", sc.require_min_empty_lambda}});
        }
        // refinement stability of dimensions on the two finest levels
        if (docs.size() >= 2) {
            bool stable = true;
            size_t a = docs.size() - 2, b = docs.size() - 1;
            for (size_t i = 0; i < sc.s_values.size(); ++i)
                stable = stable &&
                         level_dims[a][i].neumann == level_dims[b][i].neumann &&
                         level_dims[a][i].dirichlet == level_dims[b][i].dirichlet &&
                         level_dims[a][i].all_clean && level_dims[b][i].all_clean;
            checks.add("dims_stable", stable);
        }
        if (sc.wants("nilpotency") && docs.size() >= 2) {
            bool ok = true;
            Json detail = Json::array();
            for (size_t lvl = 0; lvl + 1 < docs.size(); ++lvl)
                for (size_t i = 0; i < sc.s_values.size(); ++i) {
                    if (sc.s_values[i] == 0.0) continue;
                    double r = level_eta[lvl + 1][i] / std::max(level_eta[lvl][i], 1e-300);
                    detail.push_back({{"s", sc.s_values[i]}, {"ratio", r}});
                    ok = ok && (r <= 0.75);
                }
            checks.add("nilpotency_ratio", ok, {{"ratios", detail}});
        }
        if (sc.wants("stokes") && docs.size() >= 2 && level_stokes[0] > 0) {
            bool ok = true;
            Json detail = Json::array();
            for (size_t lvl = 0; lvl + 1 < docs.size(); ++lvl) {
                double r = level_stokes[lvl + 1] / std::max(level_stokes[lvl], 1e-300);
                detail.push_back(r);
                ok = ok && (r <= 0.6);
            }
            checks.add("stokes_ratio", ok, {{"ratios", detail}});
        }

        // ---- pair dims against the fixed-point oracle ----------------------
        for (const PerS& ps : level0) {
            if (ps.s == 0.0) continue;
            IsomorphismVerdict v = pair_dims(n, ps.dims, ref);
            checks.add("fixed_point_isomorphism_s" + std::to_string(ps.s), v.pass,
                       {{"neumann_match", v.neumann_match},
                        {"dirichlet_match", v.dirichlet_match},
                        {"duality", v.duality}});
        }

        // ---- classical per-degree regression at s = 0 ----------------------
        if (sc.wants("classical")) {
            auto it = std::find(sc.s_values.begin(), sc.s_values.end(), 0.0);
            if (it != sc.s_values.end()) {
                auto t1 = Clock::now();
                const PerS& ps = level0[it - sc.s_values.begin()];
                std::vector<long> betti_abs = results["mesh"]["betti_abs"]
                                                  .get<std::vector<long>>();
                std::vector<long> betti_rel = results["mesh"]["betti_rel"]
                                                  .get<std::vector<long>>();
                Json cj = Json::array();
                bool ok = true;
                HarmonicOptions hopts = prof.harmonic(sc.seed);
                for (int k = 0; k <= n; ++k) {
                    HarmonicBasis hn = harmonic_fields(ps.bundle, BC::Neumann,
                                                       BlockSpec::single(k), hopts);
                    int dn = hn.dim();
                    int dd = dn;
                    if (has_bd) {
                        HarmonicBasis hd = harmonic_fields(ps.bundle, BC::Dirichlet,
                                                           BlockSpec::single(k), hopts);
                        dd = hd.dim();
                    }
                    bool rowok = (dn == betti_abs[k]) && (dd == betti_rel[k]) &&
                                 hn.kernel.verdict == KernelVerdict::Clean;
                    cj.push_back({{"degree", k},
                                  {"dim_neumann", dn},
                                  {"dim_dirichlet", dd},
                                  {"betti_abs", betti_abs[k]},
                                  {"betti_rel", betti_rel[k]},
                                  {"pass", rowok}});
                    ok = ok && rowok;
                }
                results["classical"] = cj;
                checks.add("classical_dims_by_degree", ok);
                timing["classical"] = phase_ms(t1);
            }
        }

        // ---- s-sweep verdict ------------------------------------------------
        if (sc.wants("sweep")) {
            std::vector<long> betti_abs =
                results["mesh"]["betti_abs"].get<std::vector<long>>();
            std::vector<long> betti_rel =
                results["mesh"]["betti_rel"].get<std::vector<long>>();
            bool constant = true, matches_ref = true, s0_classical = true;
            const XCohomologyDims* first_nz = nullptr;
            for (const PerS& ps : level0) {
                if (ps.s == 0.0) {
                    s0_classical =
                        ps.dims.neumann.even == parity_sum(betti_abs, 0) &&
                        ps.dims.neumann.odd == parity_sum(betti_abs, 1) &&
                        ps.dims.dirichlet.even == parity_sum(betti_rel, 0) &&
                        ps.dims.dirichlet.odd == parity_sum(betti_rel, 1);
                } else {
                    if (!first_nz) first_nz = &ps.dims;
                    constant = constant && ps.dims.neumann == first_nz->neumann &&
                               ps.dims.dirichlet == first_nz->dirichlet;
                    matches_ref = matches_ref &&
                                  ps.dims.neumann.even == ref.even_abs &&
                                  ps.dims.neumann.odd == ref.odd_abs &&
                                  ps.dims.dirichlet.even == ref.even_rel &&
                                  ps.dims.dirichlet.odd == ref.odd_rel;
                }
            }
            Json sj;
            sj["constant_nonzero_rows"] = constant;
            sj["matches_fixed_point"] = matches_ref;
            sj["s0_matches_classical"] = s0_classical;
            results["sweep_dims"] = sj;
            checks.add("sweep_dims", constant && matches_ref && s0_classical, sj);
        }

        // ---- green residuals -------------------------------------------------
        if (sc.wants("green")) {
            auto t1 = Clock::now();
            int per_block = std::max<int>(
                5, static_cast<int>(
                       std::ceil(100.0 / (2.0 * static_cast<double>(level0.size())))));
            double max_r1 = 0, max_r2 = 0;
            int total = 0;
            for (const PerS& ps : level0) {
                for (BlockSpec spec : {BlockSpec::even(), BlockSpec::odd()}) {
                    BlockIndex bi = ps.bundle.block(spec);
                    BlockIndex bo = ps.bundle.block(spec.opposite(n));
                    if (bi.total == 0 || bo.total == 0) continue;
                    for (int p = 0; p < per_block; ++p) {
                        Eigen::VectorXd a = random_block_vector(rng, bi.total);
                        Eigen::VectorXd b = random_block_vector(rng, bo.total);
                        GreenResidual gr = green_residual(ps.bundle, spec, a, b);
                        max_r1 = std::max(max_r1, gr.r1);
                        max_r2 = std::max(max_r2, gr.r2);
                        ++total;
                    }
                }
            }
            Json gj;
            gj["pairs"] = total;
            gj["max_r1"] = max_r1;
            gj["max_r2"] = max_r2;
            results["green"] = gj;
            checks.add("green_r1", max_r1 <= 1e-12, gj);
            checks.add("green_r2", max_r2 <= 1e-12, gj);
            timing["green"] = phase_ms(t1);
        }

        // ---- decompositions --------------------------------------------------
        if (sc.wants("decomp")) {
            auto t1 = Clock::now();
            double max_recon = 0, max_ortho = 0, min_angle = M_PI, max_poisson = 0;
            int count = 0;
            for (const PerS& ps : level0) {
                for (int par = 0; par < 2; ++par) {
                    BlockSpec spec = par == 0 ? BlockSpec::even() : BlockSpec::odd();
                    BlockIndex bi = ps.bundle.block(spec);
                    if (bi.total == 0) continue;
                    MorreyContext mctx = make_morrey_context(
                        ps.bundle, spec, &ps.hb[par][0], &ps.hb[par][1]);
                    int per = std::max(1, sc.random_cochains / 2);
                    for (int t = 0; t < per; ++t) {
                        Eigen::VectorXd w = random_block_vector(rng, bi.total);
                        FiveTermParts ft = five_term_decompose(
                            ps.bundle, spec, w, ps.hb[par][0], ps.hb[par][1], &mctx);
                        max_recon = std::max(max_recon, ft.reconstruction_residual);
                        max_ortho = std::max(max_ortho, ft.max_pairwise_ip);
                        if (!ft.closed_degenerate &&
                            ps.hb[par][0].dim() > 0 && ps.hb[par][1].dim() > 0)
                            min_angle = std::min(min_angle, ft.hn_hd_min_angle);
                        ++count;
                    }
                    // one poisson solve per (s, parity): project a random rhs
                    const HarmonicBasis& hn = ps.hb[par][0];
                    Eigen::VectorXd eta = random_block_vector(rng, bi.total);
                    Eigen::MatrixXd M = ps.bundle.block_mass(spec);
                    for (int j = 0; j < hn.dim(); ++j) {
                        Eigen::VectorXd h = hn.basis.col(j);
                        eta -= (h.dot(M * eta)) * h;
                    }
                    PoissonResult pr =
                        solve_poisson(ps.bundle, BC::Neumann, spec, eta,
                                      prof.harmonic(sc.seed));
                    max_poisson = std::max(max_poisson, pr.residual);
                }
            }
            Json dj;
            dj["cochains"] = count;
            dj["max_reconstruction_residual"] = max_recon;
            dj["max_pairwise_orthogonality"] = max_ortho;
            dj["min_hn_hd_angle"] = (min_angle == M_PI ? -1.0 : min_angle);
            dj["max_poisson_residual"] = max_poisson;
            results["decomp"] = dj;
            checks.add("five_term_reconstruction", max_recon <= 1e-9, dj);
            checks.add("decomp_orthogonality", max_ortho <= 1e-9, dj);
            if (min_angle < M_PI)
                checks.add("hn_hd_angle", min_angle >= 1e-3, {{"min_angle", min_angle}});
            checks.add("poisson_residual", max_poisson <= 1e-9, dj);
            timing["decomp"] = phase_ms(t1);
        }

        // ---- interior/boundary splits ---------------------------------------
        if (sc.wants("splits")) {
            auto t1 = Clock::now();
            auto bd = boundary_subcomplex(base.complex);
            Json sj = Json::array();
            bool all_ok = true;
            for (PerS& ps : level0) {
                if (!ps.bctx_ready) {
                    ps.bctx = build_boundary_setup(ps.bundle, base.complex, base.geom,
                                                   base.action, base.field, bd, ps.s,
                                                   prof.harmonic(sc.seed));
                    ps.bctx_ready = true;
                }
                for (int par = 0; par < 2; ++par) {
                    BlockSpec spec = par == 0 ? BlockSpec::even() : BlockSpec::odd();
                    SplitOptions sopt = prof.split;
                    sopt.throw_on_disagreement = false;
                    SplitBases sN = interior_boundary_split(
                        ps.bundle, ps.hb[par][0], ps.hb[par][1], ps.bctx, sopt);
                    SplitBases sD = interior_boundary_split(
                        ps.bundle, ps.hb[par][1], ps.hb[par][0], ps.bctx, sopt);
                    bool dual_dims =
                        static_cast<int>(sN.interior.cols()) ==
                        static_cast<int>(sD.interior.cols());
                    // localization refinement: with dN(X) empty, BH = 0 and
                    // IH carries the full fixed-point cohomology
                    bool refinement = true;
                    if (!ref.empty && ref.chi_bn == 0 && ref.even_rel == ref.even_abs &&
                        ref.odd_rel == ref.odd_abs) {
                        long want = (par == 0) ? ref.even_abs : ref.odd_abs;
                        if (ps.s != 0.0)
                            refinement = (sN.boundary.cols() == 0) &&
                                         (sD.boundary.cols() == 0) &&
                                         (sN.interior.cols() == want) &&
                                         (sD.interior.cols() == want);
                    }
                    bool ok = sN.method_agreement && sD.method_agreement && dual_dims &&
                              refinement &&
                              sN.max_cross_gram <= 1e-9 && sD.max_cross_gram <= 1e-9;
                    all_ok = all_ok && ok;
                    Json row;
                    row["s"] = ps.s;
                    row["parity"] = spec.name();
                    row["ih_n"] = static_cast<int>(sN.interior.cols());
                    row["bh_n"] = static_cast<int>(sN.boundary.cols());
                    row["ih_d"] = static_cast<int>(sD.interior.cols());
                    row["bh_d"] = static_cast<int>(sD.boundary.cols());
                    row["agreement_n"] = sN.method_agreement;
                    row["agreement_d"] = sD.method_agreement;
                    row["span_angle_n"] = sN.span_angle;
                    row["span_angle_d"] = sD.span_angle;
                    row["max_cross_gram"] =
                        std::max(sN.max_cross_gram, sD.max_cross_gram);
                    row["pass"] = ok;
                    sj.push_back(row);
                }
            }
            results["splits"] = sj;
            checks.add("splits", all_ok);
            timing["splits"] = phase_ms(t1);
        }

        // ---- duality angles ---------------------------------------------------
        if (sc.wants("angles") && has_bd && !sc.angle_sweep_s.empty()) {
            auto t1 = Clock::now();
            auto bd = boundary_subcomplex(base.complex);
            Json rows = Json::array();
            bool ok = true;
            AssemblyCache cache;
            for (double s : sc.angle_sweep_s) {
                PerS* ps = nullptr;
                for (PerS& q : level0)
                    if (q.s == s) ps = &q;
                PerS local;
                if (!ps) {
                    local.s = s;
                    local.bundle = assemble_bundle(base.complex, base.geom, base.action,
                                                   base.field, s, &cache);
                    HarmonicOptions hopts = prof.harmonic(sc.seed);
                    local.hb[0][0] = harmonic_fields(local.bundle, BC::Neumann,
                                                     BlockSpec::even(), hopts);
                    local.hb[1][0] = harmonic_fields(local.bundle, BC::Neumann,
                                                     BlockSpec::odd(), hopts);
                    local.hb[0][1] = harmonic_fields(local.bundle, BC::Dirichlet,
                                                     BlockSpec::even(), hopts);
                    local.hb[1][1] = harmonic_fields(local.bundle, BC::Dirichlet,
                                                     BlockSpec::odd(), hopts);
                    ps = &local;
                }
                if (!ps->bctx_ready) {
                    ps->bctx = build_boundary_setup(ps->bundle, base.complex, base.geom,
                                                    base.action, base.field, bd, s,
                                                    prof.harmonic(sc.seed));
                    ps->bctx_ready = true;
                }
                for (int par = 0; par < 2; ++par) {
                    BlockSpec spec = par == 0 ? BlockSpec::even() : BlockSpec::odd();
                    if (ps->hb[par][0].dim() == 0 && ps->hb[par][1].dim() == 0) continue;
                    SplitOptions sopt = prof.split;
                    sopt.throw_on_disagreement = false;
                    SplitBases sN = interior_boundary_split(
                        ps->bundle, ps->hb[par][0], ps->hb[par][1], ps->bctx, sopt);
                    SplitBases sD = interior_boundary_split(
                        ps->bundle, ps->hb[par][1], ps->hb[par][0], ps->bctx, sopt);
                    if (sN.interior.cols() == 0 && sD.interior.cols() == 0) continue;
                    if (sN.interior.cols() != sD.interior.cols()) {
                        ok = false;
                        rows.push_back({{"s", s},
                                        {"parity", spec.name()},
                                        {"error", "interior dimension mismatch"}});
                        continue;
                    }
                    Eigen::MatrixXd M = ps->bundle.block_mass(spec);
                    AngleReport ar = duality_angles(sN.interior, sD.interior, M);
                    // full-basis minimal angle must match the interior minimum
                    double full_vs_interior = -1.0;
                    if (ps->hb[par][0].dim() == ps->hb[par][1].dim() &&
                        ps->hb[par][0].dim() > 0 && ar.angles.size()) {
                        AngleReport full = duality_angles(ps->hb[par][0].basis,
                                                          ps->hb[par][1].basis, M);
                        if (full.angles.size())
                            full_vs_interior =
                                std::abs(full.angles(0) - ar.angles(0));
                    }
                    for (int i = 0; i < ar.angles.size(); ++i) {
                        Json row;
                        row["s"] = s;
                        row["parity"] = spec.name();
                        row["angle_index"] = i;
                        row["angle_radians"] = ar.angles(i);
                        row["margin_to_0"] = ar.angles(i);
                        row["margin_to_halfpi"] = M_PI / 2 - ar.angles(i);
                        if (i == 0 && full_vs_interior >= 0)
                            row["full_minus_interior_min_angle"] = full_vs_interior;
                        rows.push_back(row);
                        bool acute = ar.angles(i) > 1e-3 &&
                                     ar.angles(i) < M_PI / 2 - 1e-3;
                        ok = ok && acute;
                        if (full_vs_interior >= 0 && i == 0)
                            ok = ok && full_vs_interior <= 1e-8;
                    }
                }
            }
            results["angles"] = rows;
            checks.add("duality_angles_acute", ok);
            timing["angles"] = phase_ms(t1);
        }
    } catch (const ValidationError& e) {
        doc["validation_error"] = e.what();
        checks.add("pipeline", false, {{"error", e.what()}});
    } catch (const std::exception& e) {
        doc["internal_error"] = e.what();
        checks.add("pipeline", false, {{"error", e.what()}});
    }

    timing["total"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                          Clock::now() - t_start)
                          .count();
    Json summary;
    summary["pass"] = checks.all;
    summary["checks"] = checks.rows;
    doc["summary"] = summary;
    doc["timing"] = timing;
    doc["generated_at"] = []() {
        auto now = std::chrono::system_clock::now().time_since_epoch();
        return std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    }();
    rep.pass = checks.all;
    return rep;
}

std::string report_fingerprint(const Json& report) {
    Json j = report;
    j.erase("timing");
    j.erase("generated_at");
    return j.dump();
}

std::string angle_sweep_csv(const Json& report) {
    std::ostringstream os;
    os << "s,angle_index,angle_radians,margin_to_0,margin_to_halfpi\n";
    if (report.contains("results") && report["results"].contains("angles")) {
        for (const Json& row : report["results"]["angles"]) {
            if (row.contains("error")) continue;
            os << row["s"].get<double>() << "," << row["angle_index"].get<int>() << ","
               << row["angle_radians"].get<double>() << ","
               << row["margin_to_0"].get<double>() << ","
               << row["margin_to_halfpi"].get<double>() << "\n";
        }
    }
    return os.str();
}

VerifyAllResult verify_all(const std::string& directory, const RunOverrides& ov) {
    VerifyAllResult out;
    std::vector<fs::path> files;
    if (!fs::is_directory(directory)) {
        out.exit_code = 2;
        out.summary = {{"error", "not a directory: " + directory}};
        return out;
    }
    for (const auto& e : fs::directory_iterator(directory))
        if (e.path().extension() == ".json" &&
            e.path().string().find(".scenario.") != std::string::npos)
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        out.exit_code = 2;
        out.summary = {{"error", "no scenarios found in " + directory}};
        return out;
    }
    std::vector<std::pair<std::string, ScenarioReport>> reports(files.size());
    int jobs = std::max(1, ov.jobs);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= files.size()) break;
            ScenarioReport r;
            try {
                std::ifstream in(files[i]);
                Json sj = Json::parse(in);
                Scenario sc = scenario_from_json(sj);
                r = run_scenario(sc, ov);
            } catch (const std::exception& e) {
                r.pass = false;
                r.doc = {{"schema", kReportSchema},
                         {"validation_error", e.what()},
                         {"summary", {{"pass", false}}}};
            }
            reports[i] = {files[i].filename().string(), std::move(r)};
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::future<void>> fut;
        for (int t = 0; t < jobs; ++t) fut.push_back(std::async(std::launch::async, worker));
        for (auto& f : fut) f.get();
    }
    bool all = true;
    Json table = Json::array();
    for (auto& [name, r] : reports) {
        all = all && r.pass;
        table.push_back({{"scenario", name}, {"pass", r.pass}});
    }
    out.summary = {{"pass", all}, {"scenarios", table}};
    out.reports = std::move(reports);
    out.exit_code = all ? 0 : 1;
    return out;
}

}  // namespace hodgex
