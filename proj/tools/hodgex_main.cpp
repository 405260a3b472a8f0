#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hodgex/scenario.hpp"

namespace fs = std::filesystem;
using hodgex::Json;

namespace {

int write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) {
        std::cerr << "cannot write " << path << "\n";
        return 3;
    }
    out << content;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hodgex - discrete Witten-Hodge laboratory"};
    app.require_subcommand(1);

    // mesh gen / mesh verify
    auto* mesh = app.add_subcommand("mesh", "mesh utilities");
    mesh->require_subcommand(1);
    auto* gen = mesh->add_subcommand("gen", "generate a symmetric mesh");
    std::string kind = "disk", out_path = "mesh.json";
    hodgex::GenParams gp;
    gen->add_option("--kind", kind, "disk|annulus|sphere|torus")->required();
    gen->add_option("--rings", gp.rings);
    gen->add_option("--sectors", gp.sectors);
    gen->add_option("--bands", gp.bands);
    gen->add_option("--major", gp.grid_major);
    gen->add_option("--minor", gp.grid_minor);
    gen->add_option("--radius", gp.radius);
    gen->add_option("--inner", gp.inner);
    gen->add_option("--outer", gp.outer);
    gen->add_option("--radius-major", gp.radius_major);
    gen->add_option("--radius-minor", gp.radius_minor);
    gen->add_option("--order", gp.order);
    gen->add_option("--scale", gp.scale);
    gen->add_option("--out", out_path);

    auto* verify = mesh->add_subcommand("verify", "validate a mesh document");
    std::string mesh_path;
    verify->add_option("file", mesh_path)->required();

    // run
    auto* run = app.add_subcommand("run", "run one scenario");
    std::string scenario_path, report_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string tol_profile;
    int jobs = 1;
    run->add_option("scenario", scenario_path)->required();
    run->add_option("--out", report_path);
    auto* seed_opt = run->add_option("--seed", seed);
    run->add_option("--tol-profile", tol_profile)->check(CLI::IsMember({"strict", "default"}));
    run->add_option("--jobs", jobs);

    // verify-all
    auto* vall = app.add_subcommand("verify-all", "run every scenario in a directory");
    std::string dir, out_dir;
    std::uint64_t vseed = 0;
    vall->add_option("directory", dir)->required();
    vall->add_option("--out", out_dir);
    auto* vseed_opt = vall->add_option("--seed", vseed);
    std::string vtol;
    vall->add_option("--tol-profile", vtol)->check(CLI::IsMember({"strict", "default"}));
    int vjobs = 1;
    vall->add_option("--jobs", vjobs);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "emit the duality-angle sweep as CSV");
    std::string sweep_scenario, sweep_out = "sweep.csv";
    std::uint64_t sseed = 0;
    sweep->add_option("scenario", sweep_scenario)->required();
    sweep->add_option("--out", sweep_out);
    auto* sseed_opt = sweep->add_option("--seed", sseed);

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        if (gen->parsed()) {
            hodgex::MeshDocument doc = hodgex::generate_mesh(kind, gp);
            hodgex::load_mesh(doc);  // self-check before writing
            return write_file(out_path, hodgex::mesh_to_json(doc).dump(1));
        }
        if (verify->parsed()) {
            std::ifstream in(mesh_path);
            if (!in) {
                std::cerr << "cannot open " << mesh_path << "\n";
                return 2;
            }
            hodgex::MeshDocument doc = hodgex::mesh_from_json(Json::parse(in));
            hodgex::LoadedMesh lm = hodgex::load_mesh(doc);
            std::cout << "ok: dim=" << lm.complex.dim;
            for (int k = 0; k <= lm.complex.dim; ++k)
                std::cout << " n" << k << "=" << lm.complex.count(k);
            std::cout << " boundary=" << (lm.complex.has_boundary() ? "yes" : "no")
                      << "\n";
            return 0;
        }
        if (run->parsed()) {
            std::ifstream in(scenario_path);
            if (!in) {
                std::cerr << "cannot open " << scenario_path << "\n";
                return 2;
            }
            hodgex::Scenario sc = hodgex::scenario_from_json(Json::parse(in));
            hodgex::RunOverrides ov;
            if (seed_set) ov.seed = seed;
            if (!tol_profile.empty()) ov.tol_profile = tol_profile;
            ov.jobs = jobs;
            hodgex::ScenarioReport rep = hodgex::run_scenario(sc, ov);
            std::string text = rep.doc.dump(1);
            if (!report_path.empty()) {
                int rc = write_file(report_path, text);
                if (rc) return rc;
            } else {
                std::cout << text << "\n";
            }
            for (const Json& row : rep.doc["summary"]["checks"])
                std::cout << (row["pass"].get<bool>() ? "[pass] " : "[FAIL] ")
                          << row["check"].get<std::string>() << "\n";
            if (rep.doc.contains("validation_error")) {
                std::cerr << "validation: "
                          << rep.doc["validation_error"].get<std::string>() << "\n";
                return 2;
            }
            return rep.pass ? 0 : 1;
        }
        if (vall->parsed()) {
            hodgex::RunOverrides ov;
            if (vseed_opt->count() > 0) ov.seed = vseed;
            if (!vtol.empty()) ov.tol_profile = vtol;
            ov.jobs = vjobs;
            hodgex::VerifyAllResult res = hodgex::verify_all(dir, ov);
            if (res.exit_code == 2) {
                std::cerr << res.summary.dump(1) << "\n";
                return 2;
            }
            if (!out_dir.empty()) {
                fs::create_directories(out_dir);
                for (auto& [name, r] : res.reports) {
                    std::string base = name;
                    auto pos = base.find(".scenario.");
                    if (pos != std::string::npos) base = base.substr(0, pos);
                    write_file((fs::path(out_dir) / (base + ".report.json")).string(),
                               r.doc.dump(1));
                }
                write_file((fs::path(out_dir) / "summary.json").string(),
                           res.summary.dump(1));
            }
            for (const Json& row : res.summary["scenarios"])
                std::cout << (row["pass"].get<bool>() ? "[pass] " : "[FAIL] ")
                          << row["scenario"].get<std::string>() << "\n";
            std::cout << (res.summary["pass"].get<bool>() ? "all scenarios passed"
                                                          : "FAILURES present")
                      << "\n";
            return res.exit_code;
        }
        if (sweep->parsed()) {
            std::ifstream in(sweep_scenario);
            if (!in) {
                std::cerr << "cannot open " << sweep_scenario << "\n";
                return 2;
            }
            hodgex::Scenario sc = hodgex::scenario_from_json(Json::parse(in));
            hodgex::RunOverrides ov;
            if (sseed_opt->count() > 0) ov.seed = sseed;
            hodgex::ScenarioReport rep = hodgex::run_scenario(sc, ov);
            int rc = write_file(sweep_out, hodgex::angle_sweep_csv(rep.doc));
            if (rc) return rc;
            return rep.pass ? 0 : 1;
        }
    } catch (const hodgex::ValidationError& e) {
        std::cerr << "validation: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
