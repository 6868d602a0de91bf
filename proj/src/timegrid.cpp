#include "tdbem/timegrid.hpp"

namespace tdbem {

double cfl_ratio(const TimeGrid& grid, const Mesh& mesh) {
    return grid.dt / std::pow(mesh.h_min, mesh.beta);
}

int lag_cutoff(const TimeGrid& grid, const Mesh& mesh) {
    return int(std::ceil(mesh_diameter(mesh) / grid.dt));
}

}  // namespace tdbem
