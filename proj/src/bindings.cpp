#include "tdbem/potentials.hpp"
#include "tdbem/studies.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace tdbem;

namespace {

RhsSpec rhs_from_string(const std::string& id, const Vec3& k, const Vec3& y_src) {
    if (id == "plane_wave") return PlaneWavePacket{k};
    if (id == "ringdown") return RingdownG{};
    if (id == "point_source") return PointSourceDirac{y_src};
    throw std::invalid_argument("rhs must be plane_wave|ringdown|point_source");
}

}  // namespace

PYBIND11_MODULE(_tdbem, m) {
    m.doc() = "Time-domain Galerkin BEM for the wave equation on screens";

    py::enum_<ScreenKind>(m, "ScreenKind")
        .value("Square", ScreenKind::Square)
        .value("Disc", ScreenKind::Disc)
        .value("Horn", ScreenKind::Horn);

    py::enum_<OperatorId>(m, "OperatorId")
        .value("SingleLayer", OperatorId::SingleLayer)
        .value("Hypersingular", OperatorId::Hypersingular)
        .value("AdjointDLHalfSpace", OperatorId::AdjointDLHalfSpace)
        .value("DtN", OperatorId::DtN);

    py::enum_<SectionKind>(m, "SectionKind")
        .value("EdgeMidline", SectionKind::EdgeMidline)
        .value("CornerDiagonal", SectionKind::CornerDiagonal)
        .value("DiscRadial", SectionKind::DiscRadial);

    py::class_<Mesh>(m, "Mesh")
        .def_property_readonly("n_triangles", &Mesh::n_triangles)
        .def_property_readonly("n_nodes", &Mesh::n_nodes)
        .def_readonly("nodes", &Mesh::nodes)
        .def_readonly("triangles", &Mesh::triangles)
        .def_readonly("boundary_nodes", &Mesh::boundary_nodes)
        .def_readonly("beta", &Mesh::beta)
        .def_readonly("h_max", &Mesh::h_max)
        .def_readonly("h_min", &Mesh::h_min)
        .def("interior_nodes", &Mesh::interior_nodes)
        .def("is_flat", &Mesh::is_flat)
        .def("to_json", [](const Mesh& mesh) { return mesh_to_json(mesh); })
        .def("__repr__", [](const Mesh& mesh) {
            return "<Mesh " + std::to_string(mesh.n_triangles()) + " triangles, beta=" +
                   std::to_string(mesh.beta) + ">";
        });

    m.def("graded_square_mesh", &graded_square_mesh, py::arg("N"), py::arg("beta"));
    m.def("graded_disc_mesh", &graded_disc_mesh, py::arg("N"), py::arg("beta"),
          py::arg("angular_multiplier") = 6);
    m.def("horn_surface_mesh", &horn_surface_mesh, py::arg("radius"), py::arg("clearance"),
          py::arg("resolution"), py::arg("half_length") = -1.0);
    m.def("mesh_diameter", &mesh_diameter);

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<double, int>(), py::arg("dt"), py::arg("n_steps"))
        .def_readonly("dt", &TimeGrid::dt)
        .def_readonly("n_steps", &TimeGrid::n_steps)
        .def("time", &TimeGrid::time)
        .def("horizon", &TimeGrid::horizon);

    py::class_<LagMatrixSequence>(m, "LagMatrixSequence")
        .def_readonly("lag_cutoff", &LagMatrixSequence::lag_cutoff)
        .def_readonly("n_space", &LagMatrixSequence::n_space)
        .def_readonly("n_phi", &LagMatrixSequence::n_phi)
        .def_readonly("dt", &LagMatrixSequence::dt)
        .def("n_lags", &LagMatrixSequence::n_lags)
        .def("mat", [](const LagMatrixSequence& s, int l) {
            return Eigen::MatrixXd(s.mats.at(l));
        });

    py::class_<RhsTimeSeries>(m, "RhsTimeSeries")
        .def_readonly("vectors", &RhsTimeSeries::vectors)
        .def_readonly("difference_form", &RhsTimeSeries::difference_form);

    py::class_<DensityHistory>(m, "DensityHistory")
        .def_readonly("steps", &DensityHistory::steps)
        .def_readonly("dt", &DensityHistory::dt)
        .def_readonly("n_phi", &DensityHistory::n_phi)
        .def_property_readonly("n_steps", &DensityHistory::n_steps);

    m.def(
        "assemble",
        [](const Mesh& mesh, const TimeGrid& grid, OperatorId op, bool reference_rule) {
            AssemblyOptions opts;
            opts.rule = reference_rule ? QuadratureRule{} : study_quadrature_rule();
            switch (op) {
                case OperatorId::SingleLayer: return assemble_single_layer(mesh, grid, opts);
                case OperatorId::Hypersingular:
                    return assemble_hypersingular(mesh, grid, opts);
                case OperatorId::DtN: return assemble_dtn_blocks(mesh, grid, opts);
                case OperatorId::AdjointDLHalfSpace:
                    return assemble_adjoint_double_layer_halfspace(mesh, grid, opts);
            }
            throw std::invalid_argument("unknown operator");
        },
        py::arg("mesh"), py::arg("grid"), py::arg("op"), py::arg("reference_rule") = false);

    m.def(
        "assemble_rhs",
        [](const Mesh& mesh, const TimeGrid& grid, OperatorId op, const std::string& rhs,
           const Vec3& k, const Vec3& y_src) {
            return assemble_rhs(mesh, grid, op, rhs_from_string(rhs, k, y_src),
                                study_quadrature_rule());
        },
        py::arg("mesh"), py::arg("grid"), py::arg("op"), py::arg("rhs") = "plane_wave",
        py::arg("k") = Vec3(0.2, 0.2, 0.2), py::arg("y_src") = Vec3(0.08, 0.0, 0.0));

    m.def("march", [](const LagMatrixSequence& sys, const RhsTimeSeries& rhs) {
        return march(sys, rhs);
    });
    m.def("energy_functional", &energy_functional);
    m.def("spacetime_residual", &spacetime_residual);

    m.def(
        "evaluate_single_layer",
        [](const DensityHistory& psi, const Mesh& mesh, const std::vector<Vec3>& points,
           const std::vector<double>& times) {
            return evaluate_single_layer(psi, mesh, points, times).values;
        },
        py::arg("psi"), py::arg("mesh"), py::arg("points"), py::arg("times"));
    m.def(
        "evaluate_halfspace_pressure",
        [](const DensityHistory& phi, const Mesh& mesh, const std::vector<Vec3>& points,
           const std::vector<double>& times) {
            return evaluate_halfspace_pressure(phi, mesh, points, times).values;
        },
        py::arg("phi"), py::arg("mesh"), py::arg("points"), py::arg("times"));
    m.def("wave_equation_residual",
          [](const DensityHistory& psi, const Mesh& mesh, const Vec3& x, double t, double h) {
              return wave_equation_residual(psi, mesh, x, t, h);
          });

    m.def("l2_spacetime_error", &l2_spacetime_error);
    m.def("fit_convergence_rate", [](const std::vector<std::pair<double, double>>& rows) {
        std::vector<RateRow> rr;
        for (auto& [dof, err] : rows) rr.push_back({dof, 0.0, err});
        return fit_convergence_rate(rr);
    });

    py::class_<ExponentFit>(m, "ExponentFit")
        .def_readonly("time", &ExponentFit::time)
        .def_readonly("exponent", &ExponentFit::exponent)
        .def_readonly("r2", &ExponentFit::r2)
        .def_readonly("n_points", &ExponentFit::n_points);
    m.def("fit_singular_exponent", &fit_singular_exponent, py::arg("mesh"), py::arg("hist"),
          py::arg("section"), py::arg("time"));

    py::class_<InterpStudy>(m, "InterpStudy")
        .def_readonly("a", &InterpStudy::a)
        .def_readonly("beta", &InterpStudy::beta)
        .def_readonly("rate", &InterpStudy::rate)
        .def_readonly("predicted", &InterpStudy::predicted);
    m.def("interpolation_lemma_study", &interpolation_lemma_study, py::arg("a"),
          py::arg("beta"), py::arg("levels"), py::arg("n0") = 8);

    py::class_<Spectrum>(m, "Spectrum")
        .def_readonly("omega", &Spectrum::omega)
        .def_readonly("freq_hz", &Spectrum::freq_hz)
        .def_readonly("db", &Spectrum::db);
    m.def(
        "amplification_spectrum",
        [](const std::vector<double>& scattered, const TimeGrid& grid, const Vec3& y_src,
           const Vec3& x_fp) { return amplification_spectrum(scattered, grid, y_src, x_fp); },
        py::arg("scattered"), py::arg("grid"), py::arg("y_src") = Vec3(0.08, 0, 0),
        py::arg("x_fp") = Vec3(1, 0, 0));
}
