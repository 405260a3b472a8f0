#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hodgex/complex.hpp"
#include "hodgex/geometry.hpp"
#include "hodgex/symmetry.hpp"

namespace hodgex {

using Json = nlohmann::ordered_json;

inline constexpr const char* kMeshSchema = "hodgex-mesh/1";

/// Serializable mesh document: top simplices only (faces derived), one cyclic
/// action generator, and a field given symbolically or by explicit vectors.
struct MeshDocument {
    int dim = 2;
    Eigen::MatrixXd vertices;                 // V x d
    std::vector<std::vector<int>> simplices;  // oriented top simplices
    int action_order = 1;
    std::vector<int> vertex_perm;             // identity for the trivial action
    std::string field_kind = "zero";          // zero | rotation | explicit
    Eigen::VectorXd field_center;             // rotation center (d=2) / axis point
    double field_scale = 1.0;
    Eigen::MatrixXd field_vectors;            // explicit
    std::vector<int> fixed_vertices;
};

struct GenParams {
    int rings = 0, sectors = 0, bands = 0;
    int grid_major = 0, grid_minor = 0;
    double radius = 1.0, inner = 1.0, outer = 2.0;
    double radius_major = 2.0, radius_minor = 0.5;
    int order = 1;
    double scale = 1.0;
};

/// Exactly Z_m-symmetric structured meshes with the generator rotation field.
MeshDocument generate_mesh(const std::string& kind, const GenParams& p);

/// Fully validated in-memory pieces of one mesh document.
struct LoadedMesh {
    OrientedComplex complex;
    EmbeddedGeometry geom;
    CyclicAction action;
    PLVectorField field;
    std::vector<int> fixed_vertices;
    ActionReport action_report;
    FieldReport field_report;
};
LoadedMesh load_mesh(const MeshDocument& doc, double tau_tan = 1e-12);

Json mesh_to_json(const MeshDocument& doc);
MeshDocument mesh_from_json(const Json& j);

/// Same parameters with the grid counts doubled (refinement ladder step).
GenParams refine_params(const GenParams& p);

}  // namespace hodgex
