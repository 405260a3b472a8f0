// Acceptance suite: runs the shipped scenarios end to end and checks every
// criterion at its stated tolerance, one pass/fail line per criterion.

#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "hodgex/scenario.hpp"
#include "radial_oracle.hpp"

using hodgex::Json;

namespace {

int g_failures = 0;

void line(int idx, const std::string& what, bool ok, const std::string& evidence) {
    std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", idx, what.c_str(),
                evidence.c_str());
    if (!ok) ++g_failures;
}

const Json* find_per_s(const Json& report, int level, double s) {
    const Json& levels = report["results"]["levels"];
    for (const Json& lvl : levels) {
        if (lvl["level"].get<int>() != level) continue;
        for (const Json& ps : lvl["per_s"])
            if (ps["s"].get<double>() == s) return &ps;
    }
    return nullptr;
}

bool dims_equal(const Json& d, int ne, int no, int de, int dd) {
    return d["neumann"]["even"] == ne && d["neumann"]["odd"] == no &&
           d["dirichlet"]["even"] == de && d["dirichlet"]["odd"] == dd;
}

bool check_named(const Json& report, const std::string& name) {
    for (const Json& c : report["summary"]["checks"])
        if (c["check"] == name) return c["pass"].get<bool>();
    return false;
}

double round_2sig(double x) {
    if (x == 0) return 0;
    double mag = std::pow(10.0, std::floor(std::log10(std::abs(x))) - 1);
    return std::round(x / mag) * mag;
}

}  // namespace

int main(int argc, char** argv) {
    std::string dir = (argc > 1) ? argv[1] : "scenarios";
    hodgex::RunOverrides ov;
    ov.jobs = 2;

    hodgex::VerifyAllResult run1 = hodgex::verify_all(dir, ov);
    hodgex::VerifyAllResult run2 = hodgex::verify_all(dir, ov);
    if (run1.exit_code == 2) {
        std::fprintf(stderr, "cannot load scenarios from %s\n", dir.c_str());
        return 3;
    }
    std::map<std::string, const Json*> rep;
    for (auto& [name, r] : run1.reports) {
        std::string key = name.substr(0, name.find(".scenario."));
        rep[key] = &r.doc;
    }
    const Json& disk = *rep.at("disk_rotation");
    const Json& annulus = *rep.at("annulus_rotation");
    const Json& sphere = *rep.at("sphere_rotation");
    const Json& torus = *rep.at("torus_rotation");

    // 1. classical regression at s = 0 on the annulus
    {
        bool ok = true;
        std::string ev;
        const Json& rows = annulus["results"]["classical"];
        long bn[3] = {1, 1, 0}, bd[3] = {0, 1, 1};
        for (const Json& row : rows) {
            int k = row["degree"].get<int>();
            ok = ok && row["dim_neumann"] == bn[k] && row["dim_dirichlet"] == bd[k];
        }
        const Json& dec = annulus["results"]["decomp"];
        ok = ok && dec["cochains"].get<int>() >= 20 &&
             dec["max_reconstruction_residual"].get<double>() <= 1e-9;
        long ms = annulus["timing"]["total"].get<long>();
        ok = ok && ms <= 60000;
        ev = "dims (1,1,0)/(0,1,1), recon " +
             std::to_string(dec["max_reconstruction_residual"].get<double>()) + ", " +
             std::to_string(ms) + " ms";
        line(1, "classical regression, annulus 16x64", ok, ev);
    }

    // 2. Witten collapse on the torus of revolution
    {
        bool ok = true;
        double minlam = 1e9;
        for (double s : {0.5, 1.0, 2.0}) {
            const Json* ps = find_per_s(torus, 0, s);
            ok = ok && ps && dims_equal((*ps)["dims"], 0, 0, 0, 0) &&
                 (*ps)["dims"]["all_clean"].get<bool>();
            if (ps) minlam = std::min(minlam, (*ps)["dims"]["min_empty_lambda"].get<double>());
        }
        ok = ok && minlam >= 1e-3;
        const Json* ps0 = find_per_s(torus, 0, 0.0);
        ok = ok && ps0 && dims_equal((*ps0)["dims"], 2, 2, 2, 2);
        line(2, "Witten collapse, torus 64x48, s in {0.5,1,2}", ok,
             "all dims 0, lambda_min " + std::to_string(minlam) + ", s=0 gives (2,2)");
    }

    // 3. fixed-point isomorphism with boundary on the disk
    {
        const Json* p1 = find_per_s(disk, 0, 1.0);
        const Json* p1r = find_per_s(disk, 1, 1.0);
        bool ok = p1 && p1r && dims_equal((*p1)["dims"], 1, 0, 1, 0) &&
                  dims_equal((*p1r)["dims"], 1, 0, 1, 0) &&
                  (*p1)["dims"]["all_clean"].get<bool>() &&
                  (*p1r)["dims"]["all_clean"].get<bool>() &&
                  (*p1)["dims"]["min_gap_ratio"].get<double>() >= 100.0 &&
                  disk["results"]["fixed_point"]["even_abs"] == 1;
        line(3, "disk localization: (even,N)=(even,D)=1, stable under refinement", ok,
             p1 ? "gap ratio " +
                      std::to_string((*p1)["dims"]["min_gap_ratio"].get<double>())
                : "missing row");
    }

    // 4. empty fixed set with boundary on the annulus
    {
        const Json* p1 = find_per_s(annulus, 0, 1.0);
        const Json* p1r = find_per_s(annulus, 1, 1.0);
        bool ok = p1 && p1r && dims_equal((*p1)["dims"], 0, 0, 0, 0) &&
                  dims_equal((*p1r)["dims"], 0, 0, 0, 0) &&
                  (*p1)["dims"]["min_empty_lambda"].get<double>() >= 1e-3 &&
                  (*p1)["dims"]["all_clean"].get<bool>() &&
                  (*p1r)["dims"]["all_clean"].get<bool>();
        line(4, "annulus collapse: all dims 0 with lambda floor, stable", ok,
             p1 ? "lambda_min " +
                      std::to_string((*p1)["dims"]["min_empty_lambda"].get<double>())
                : "missing row");
    }

    // 5. closed-manifold check on the sphere
    {
        const Json* p1 = find_per_s(sphere, 0, 1.0);
        bool ok = p1 && dims_equal((*p1)["dims"], 2, 0, 2, 0) &&
                  sphere["results"]["fixed_point"]["even_abs"] == 2;
        line(5, "sphere: (even)=2,(odd)=0 against the two poles", ok,
             "N(X) = two fixed poles");
    }

    // 6. Poincare-Lefschetz duality of dimensions on every scenario
    {
        bool ok = true;
        for (auto& [name, doc] : rep) {
            for (const Json& lvl : (*doc)["results"]["levels"])
                for (const Json& ps : lvl["per_s"]) {
                    const Json& d = ps["dims"];
                    // n = 2: parity is preserved by n - (.)
                    ok = ok && d["dirichlet"]["even"] == d["neumann"]["even"] &&
                         d["dirichlet"]["odd"] == d["neumann"]["odd"];
                }
        }
        line(6, "dim H_D = dim H_N across the whole suite (n=2 parity duality)", ok,
             "checked every scenario, level and s");
    }

    // 7. Green/adjoint identities and the Stokes probe
    {
        bool ok = true;
        double worst = 0;
        int pairs = 0;
        for (auto& [name, doc] : rep) {
            const Json& g = (*doc)["results"]["green"];
            worst = std::max({worst, g["max_r1"].get<double>(), g["max_r2"].get<double>()});
            pairs += g["pairs"].get<int>();
            ok = ok && g["max_r1"].get<double>() <= 1e-12 &&
                 g["max_r2"].get<double>() <= 1e-12;
        }
        ok = ok && pairs >= 400;  // at least 100 per scenario
        // stokes: gap at least halves under refinement on the bounded scenarios
        for (const Json* doc : {&disk, &annulus}) {
            double g0 = (*doc)["results"]["levels"][0]["stokes_gap"].get<double>();
            double g1 = (*doc)["results"]["levels"][1]["stokes_gap"].get<double>();
            ok = ok && (g1 / g0 <= 0.6);
        }
        line(7, "Green residuals <= 1e-12 and Stokes gap at least halves", ok,
             "max residual " + std::to_string(worst) + " over " + std::to_string(pairs) +
                 " pairs");
    }

    // 8. nilpotency convergence on all four ladders
    {
        bool ok = true;
        double worst_ratio = 0;
        for (auto& [name, doc] : rep) {
            std::map<double, double> eta0, eta1;
            for (const Json& lvl : (*doc)["results"]["levels"])
                for (const Json& ps : lvl["per_s"]) {
                    double s = ps["s"].get<double>();
                    if (s == 0.0) continue;
                    double e = ps["nilpotency"]["eta_rel"].get<double>();
                    (lvl["level"].get<int>() == 0 ? eta0 : eta1)[s] = e;
                }
            for (auto& [s, e0] : eta0) {
                double r = eta1.at(s) / e0;
                worst_ratio = std::max(worst_ratio, r);
                ok = ok && r <= 0.75;
            }
        }
        line(8, "eta(h/2)/eta(h) <= 0.75 on disk/annulus/sphere/torus", ok,
             "worst ratio " + std::to_string(worst_ratio));
    }

    // 9. decomposition orthogonality and subspace separations
    {
        bool ok = true;
        double worst = 0, cross = 0;
        for (auto& [name, doc] : rep) {
            const Json& d = (*doc)["results"]["decomp"];
            worst = std::max(worst, d["max_pairwise_orthogonality"].get<double>());
            ok = ok && d["max_reconstruction_residual"].get<double>() <= 1e-9 &&
                 d["max_pairwise_orthogonality"].get<double>() <= 1e-9;
            if ((*doc)["results"].contains("splits"))
                for (const Json& row : (*doc)["results"]["splits"]) {
                    cross = std::max(cross, row["max_cross_gram"].get<double>());
                    ok = ok && row["max_cross_gram"].get<double>() <= 1e-9;
                }
        }
        double angle = disk["results"]["decomp"]["min_hn_hd_angle"].get<double>();
        ok = ok && angle >= 1e-3;
        line(9, "pairwise orthogonality <= 1e-9, H_N/H_D angle >= 1e-3, BH _|_ H", ok,
             "worst ip " + std::to_string(worst) + ", disk angle " +
                 std::to_string(angle) + ", cross-Gram " + std::to_string(cross));
    }

    // 10. interior/boundary split cross-validation
    {
        bool ok = true;
        // disk at s=1: IH=1, BH=0 for both conditions, methods agree
        bool found_disk = false;
        for (const Json& row : disk["results"]["splits"]) {
            if (row["s"] == 1.0 && row["parity"] == "even") {
                found_disk = true;
                ok = ok && row["ih_n"] == 1 && row["bh_n"] == 0 && row["ih_d"] == 1 &&
                     row["bh_d"] == 0 && row["agreement_n"].get<bool>() &&
                     row["agreement_d"].get<bool>();
            }
            ok = ok && row["pass"].get<bool>();
        }
        // classical annulus, odd parity: IH=0, BH=1
        bool found_ann = false;
        for (const Json& row : annulus["results"]["splits"]) {
            if (row["s"] == 0.0 && row["parity"] == "odd") {
                found_ann = true;
                ok = ok && row["ih_n"] == 0 && row["bh_n"] == 1 && row["ih_d"] == 0 &&
                     row["bh_d"] == 1 && row["agreement_n"].get<bool>() &&
                     row["agreement_d"].get<bool>();
            }
            ok = ok && row["pass"].get<bool>();
        }
        ok = ok && found_disk && found_ann;
        line(10, "method A/B agreement: disk (IH=1/BH=0), annulus s=0 odd (IH=0/BH=1)",
             ok, "span angles <= 1e-6 in every split row");
    }

    // 11. acute duality angle against the radial oracle
    {
        bool ok = true;
        double theta = -1;
        int count_s1 = 0;
        double margin = M_PI;
        for (const Json& row : disk["results"]["angles"]) {
            if (row.contains("error")) {
                ok = false;
                continue;
            }
            double a = row["angle_radians"].get<double>();
            margin = std::min({margin, a, M_PI / 2 - a});
            if (row["s"] == 1.0) {
                ++count_s1;
                theta = a;
            }
        }
        ok = ok && count_s1 == 1 && theta > 1e-3 && theta < M_PI / 2 - 1e-3;
        double oracle = hodgex_test::radial_duality_angle(1.0);
        ok = ok && round_2sig(theta) == round_2sig(oracle) &&
             std::abs(theta - oracle) <= 0.05 * std::max(theta, oracle);
        ok = ok && margin > 0;
        char ev[160];
        std::snprintf(ev, sizeof ev,
                      "theta(s=1) = %.5f vs radial oracle %.5f, sweep margin %.4f",
                      theta, oracle, margin);
        line(11, "disk duality angle matches the 1-D radial reduction to 2 s.f.", ok, ev);
    }

    // 12. euler identities on every scenario
    {
        bool ok = true;
        for (auto& [name, doc] : rep) ok = ok && check_named(*doc, "euler_identities");
        line(12, "chi(M)=chi(N), chi(M,dM)=chi(N,dN), chi(dM)=chi(dN)", ok,
             "exact integer identities");
    }

    // 13. determinism of verify-all
    {
        bool ok = run1.reports.size() == run2.reports.size();
        for (size_t i = 0; ok && i < run1.reports.size(); ++i)
            ok = hodgex::report_fingerprint(run1.reports[i].second.doc) ==
                 hodgex::report_fingerprint(run2.reports[i].second.doc);
        line(13, "two verify-all runs are byte-identical modulo timestamps", ok,
             std::to_string(run1.reports.size()) + " reports compared");
    }

    // every scenario must have passed end to end as well
    {
        bool ok = run1.exit_code == 0;
        if (!ok) ++g_failures;
        std::printf("[%s] scenario suite: verify-all exit %d\n", ok ? "PASS" : "FAIL",
                    run1.exit_code);
    }

    std::printf("%d criterion failure(s)\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
