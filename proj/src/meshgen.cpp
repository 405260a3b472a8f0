#include "hodgex/meshgen.hpp"

#include <cmath>

namespace hodgex {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

MeshDocument gen_disk(const GenParams& p) {
    require(p.rings >= 2, "disk: rings must be >= 2");
    require(p.sectors >= 3, "disk: sectors must be >= 3");
    MeshDocument doc;
    doc.dim = 2;
    const int m = p.sectors;
    doc.vertices.resize(1 + p.rings * m, 2);
    doc.vertices.row(0) << 0.0, 0.0;
    for (int i = 1; i <= p.rings; ++i) {
        double r = p.radius * i / p.rings;
        for (int j = 0; j < m; ++j) {
            double a = kTau * j / m;
            doc.vertices.row(1 + (i - 1) * m + j) << r * std::cos(a), r * std::sin(a);
        }
    }
    auto vid = [&](int i, int j) { return 1 + (i - 1) * m + ((j % m + m) % m); };
    for (int j = 0; j < m; ++j)
        doc.simplices.push_back({0, vid(1, j), vid(1, j + 1)});
    for (int i = 1; i < p.rings; ++i)
        for (int j = 0; j < m; ++j) {
            int a = vid(i, j), b = vid(i, j + 1), c = vid(i + 1, j), d = vid(i + 1, j + 1);
            doc.simplices.push_back({a, d, b});
            doc.simplices.push_back({a, c, d});
        }
    doc.vertex_perm.resize(doc.vertices.rows());
    doc.vertex_perm[0] = 0;
    for (int i = 1; i <= p.rings; ++i)
        for (int j = 0; j < m; ++j) doc.vertex_perm[vid(i, j)] = vid(i, j + 1);
    doc.fixed_vertices = {0};
    return doc;
}

MeshDocument gen_annulus(const GenParams& p) {
    require(p.rings >= 1, "annulus: rings must be >= 1");
    require(p.sectors >= 3, "annulus: sectors must be >= 3");
    require(p.inner > 0 && p.outer > p.inner, "annulus: need 0 < inner < outer");
    MeshDocument doc;
    doc.dim = 2;
    const int m = p.sectors;
    doc.vertices.resize((p.rings + 1) * m, 2);
    for (int i = 0; i <= p.rings; ++i) {
        double r = p.inner + (p.outer - p.inner) * i / p.rings;
        for (int j = 0; j < m; ++j) {
            double a = kTau * j / m;
            doc.vertices.row(i * m + j) << r * std::cos(a), r * std::sin(a);
        }
    }
    auto vid = [&](int i, int j) { return i * m + ((j % m + m) % m); };
    for (int i = 0; i < p.rings; ++i)
        for (int j = 0; j < m; ++j) {
            int a = vid(i, j), b = vid(i, j + 1), c = vid(i + 1, j), d = vid(i + 1, j + 1);
            doc.simplices.push_back({a, d, b});
            doc.simplices.push_back({a, c, d});
        }
    doc.vertex_perm.resize(doc.vertices.rows());
    for (int i = 0; i <= p.rings; ++i)
        for (int j = 0; j < m; ++j) doc.vertex_perm[vid(i, j)] = vid(i, j + 1);
    return doc;
}

MeshDocument gen_sphere(const GenParams& p) {
    require(p.bands >= 3, "sphere: bands must be >= 3");
    require(p.sectors >= 3, "sphere: sectors must be >= 3");
    MeshDocument doc;
    doc.dim = 2;
    const int m = p.sectors, b = p.bands;
    const int nv = 2 + (b - 1) * m;
    doc.vertices.resize(nv, 3);
    doc.vertices.row(0) << 0.0, 0.0, p.radius;
    for (int i = 1; i < b; ++i) {
        double th = M_PI * i / b;
        for (int j = 0; j < m; ++j) {
            double a = kTau * j / m;
            doc.vertices.row(1 + (i - 1) * m + j)
                << p.radius * std::sin(th) * std::cos(a),
                p.radius * std::sin(th) * std::sin(a), p.radius * std::cos(th);
        }
    }
    doc.vertices.row(nv - 1) << 0.0, 0.0, -p.radius;
    auto vid = [&](int i, int j) { return 1 + (i - 1) * m + ((j % m + m) % m); };
    for (int j = 0; j < m; ++j)
        doc.simplices.push_back({0, vid(1, j), vid(1, j + 1)});
    for (int i = 1; i < b - 1; ++i)
        for (int j = 0; j < m; ++j) {
            int a = vid(i, j), bb = vid(i, j + 1), c = vid(i + 1, j), d = vid(i + 1, j + 1);
            doc.simplices.push_back({a, d, bb});
            doc.simplices.push_back({a, c, d});
        }
    for (int j = 0; j < m; ++j)
        doc.simplices.push_back({nv - 1, vid(b - 1, j + 1), vid(b - 1, j)});
    doc.vertex_perm.resize(nv);
    doc.vertex_perm[0] = 0;
    doc.vertex_perm[nv - 1] = nv - 1;
    for (int i = 1; i < b; ++i)
        for (int j = 0; j < m; ++j) doc.vertex_perm[vid(i, j)] = vid(i, j + 1);
    doc.fixed_vertices = {0, nv - 1};
    return doc;
}

MeshDocument gen_torus(const GenParams& p) {
    require(p.grid_major >= 3 && p.grid_minor >= 3, "torus: grid counts must be >= 3");
    require(p.radius_minor > 0 && p.radius_major > p.radius_minor,
            "torus: need 0 < minor < major radius");
    MeshDocument doc;
    doc.dim = 2;
    const int n1 = p.grid_major, n2 = p.grid_minor;
    doc.vertices.resize(n1 * n2, 3);
    for (int i = 0; i < n1; ++i) {
        double th = kTau * i / n1;
        for (int j = 0; j < n2; ++j) {
            double ph = kTau * j / n2;
            double rho = p.radius_major + p.radius_minor * std::cos(ph);
            doc.vertices.row(i * n2 + j) << rho * std::cos(th), rho * std::sin(th),
                p.radius_minor * std::sin(ph);
        }
    }
    auto vid = [&](int i, int j) {
        return ((i % n1 + n1) % n1) * n2 + ((j % n2 + n2) % n2);
    };
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            int a = vid(i, j), b = vid(i + 1, j), c = vid(i, j + 1), d = vid(i + 1, j + 1);
            doc.simplices.push_back({a, d, b});
            doc.simplices.push_back({a, c, d});
        }
    doc.vertex_perm.resize(n1 * n2);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) doc.vertex_perm[vid(i, j)] = vid(i + 1, j);
    return doc;
}

}  // namespace

MeshDocument generate_mesh(const std::string& kind, const GenParams& p) {
    MeshDocument doc;
    if (kind == "disk")
        doc = gen_disk(p);
    else if (kind == "annulus")
        doc = gen_annulus(p);
    else if (kind == "sphere")
        doc = gen_sphere(p);
    else if (kind == "torus")
        doc = gen_torus(p);
    else
        throw ValidationError("unknown mesh kind: " + kind);
    // action order: the one-step permutation above generates Z_sectors; an
    // order m | sectors action uses the (sectors/m)-step power
    int sectors = (kind == "torus") ? p.grid_major : p.sectors;
    require(p.order >= 1 && sectors % p.order == 0,
            "action order must divide the sector count");
    if (p.order != sectors) {
        int step = sectors / p.order;
        std::vector<int> perm(doc.vertex_perm.size());
        for (size_t v = 0; v < perm.size(); ++v) {
            int w = static_cast<int>(v);
            for (int s = 0; s < step; ++s) w = doc.vertex_perm[w];
            perm[v] = w;
        }
        doc.vertex_perm = perm;
    }
    doc.action_order = p.order;
    doc.field_kind = "rotation";
    doc.field_scale = p.scale;
    doc.field_center = Eigen::VectorXd::Zero(doc.vertices.cols());
    return doc;
}

GenParams refine_params(const GenParams& p) {
    GenParams q = p;
    if (q.rings) q.rings *= 2;
    if (q.sectors) q.sectors *= 2;
    if (q.bands) q.bands *= 2;
    if (q.grid_major) q.grid_major *= 2;
    if (q.grid_minor) q.grid_minor *= 2;
    return q;
}

LoadedMesh load_mesh(const MeshDocument& doc, double tau_tan) {
    LoadedMesh out;
    out.complex = build_complex(doc.dim, static_cast<int>(doc.vertices.rows()),
                                doc.simplices);
    out.geom.coords = doc.vertices;
    const int d = static_cast<int>(doc.vertices.cols());
    out.field.scale = doc.field_scale;
    if (doc.field_kind == "rotation") {
        out.field.vectors.resize(doc.vertices.rows(), d);
        for (int v = 0; v < doc.vertices.rows(); ++v) {
            double x = doc.vertices(v, 0) - (doc.field_center.size() ? doc.field_center(0) : 0.0);
            double y = doc.vertices(v, 1) - (doc.field_center.size() > 1 ? doc.field_center(1) : 0.0);
            out.field.vectors(v, 0) = -y;
            out.field.vectors(v, 1) = x;
            if (d == 3) out.field.vectors(v, 2) = 0.0;
        }
        // exact zeros on the rotation axis
        for (int v = 0; v < doc.vertices.rows(); ++v)
            if (out.field.vectors.row(v).head(2).norm() == 0.0)
                out.field.vectors.row(v).setZero();
    } else if (doc.field_kind == "explicit") {
        require(doc.field_vectors.rows() == doc.vertices.rows() &&
                    doc.field_vectors.cols() == d,
                "explicit field has wrong shape");
        out.field.vectors = doc.field_vectors;
    } else if (doc.field_kind == "zero") {
        out.field.vectors = Eigen::MatrixXd::Zero(doc.vertices.rows(), d);
    } else {
        throw ValidationError("unknown field kind: " + doc.field_kind);
    }
    std::vector<int> perm = doc.vertex_perm;
    if (perm.empty()) {
        perm.resize(doc.vertices.rows());
        for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    }
    out.action = build_action(out.complex, doc.action_order, perm);
    out.action_report = validate_action(out.complex, out.geom, out.action, out.field);
    out.fixed_vertices = doc.fixed_vertices;
    out.field_report =
        validate_field(out.geom, out.complex, out.field, out.fixed_vertices, tau_tan);
    out.field_report.invariance_defect = out.action_report.field_defect;
    return out;
}

Json mesh_to_json(const MeshDocument& doc) {
    Json j;
    j["schema"] = kMeshSchema;
    j["dim"] = doc.dim;
    Json verts = Json::array();
    for (int i = 0; i < doc.vertices.rows(); ++i) {
        Json row = Json::array();
        for (int c = 0; c < doc.vertices.cols(); ++c) row.push_back(doc.vertices(i, c));
        verts.push_back(row);
    }
    j["vertices"] = verts;
    j["simplices"] = doc.simplices;
    j["action"] = {{"order", doc.action_order}, {"vertex_perm", doc.vertex_perm}};
    Json field;
    field["kind"] = doc.field_kind;
    field["scale"] = doc.field_scale;
    if (doc.field_kind == "rotation") {
        Json ctr = Json::array();
        for (int c = 0; c < doc.field_center.size(); ++c) ctr.push_back(doc.field_center(c));
        field["center"] = ctr;
    } else if (doc.field_kind == "explicit") {
        Json vecs = Json::array();
        for (int i = 0; i < doc.field_vectors.rows(); ++i) {
            Json row = Json::array();
            for (int c = 0; c < doc.field_vectors.cols(); ++c)
                row.push_back(doc.field_vectors(i, c));
            vecs.push_back(row);
        }
        field["vectors"] = vecs;
    }
    j["field"] = field;
    j["fixed_vertices"] = doc.fixed_vertices;
    return j;
}

MeshDocument mesh_from_json(const Json& j) {
    if (!j.contains("schema") || j["schema"] != kMeshSchema)
        throw ValidationError("mesh document schema mismatch");
    MeshDocument doc;
    doc.dim = j.at("dim").get<int>();
    const auto& verts = j.at("vertices");
    if (verts.empty()) throw ValidationError("mesh has no vertices");
    const int d = static_cast<int>(verts[0].size());
    doc.vertices.resize(verts.size(), d);
    for (size_t i = 0; i < verts.size(); ++i)
        for (int c = 0; c < d; ++c) doc.vertices(i, c) = verts[i][c].get<double>();
    doc.simplices = j.at("simplices").get<std::vector<std::vector<int>>>();
    if (j.contains("action")) {
        doc.action_order = j["action"].value("order", 1);
        doc.vertex_perm = j["action"].value("vertex_perm", std::vector<int>{});
    }
    if (j.contains("field")) {
        doc.field_kind = j["field"].value("kind", "zero");
        doc.field_scale = j["field"].value("scale", 1.0);
        if (j["field"].contains("center")) {
            const auto& c = j["field"]["center"];
            doc.field_center.resize(c.size());
            for (size_t i = 0; i < c.size(); ++i) doc.field_center(i) = c[i].get<double>();
        }
        if (j["field"].contains("vectors")) {
            const auto& v = j["field"]["vectors"];
            doc.field_vectors.resize(v.size(), d);
            for (size_t i = 0; i < v.size(); ++i)
                for (int c = 0; c < d; ++c) doc.field_vectors(i, c) = v[i][c].get<double>();
        }
    }
    doc.fixed_vertices = j.value("fixed_vertices", std::vector<int>{});
    return doc;
}

}  // namespace hodgex
