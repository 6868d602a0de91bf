#include "tdbem/potentials.hpp"
#include "tdbem/parallel.hpp"
#include "tdbem/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tdbem {

namespace {

constexpr double kPi = std::numbers::pi;

// causal linear-in-time lookup: coefficient psi^n attached to t_n, zero at
// t <= 0 (the p.c. reading makes the retarded field a staircase that defeats
// finite-difference probing; the linear reading is second-order consistent)
double density_at(const DensityHistory& psi, int dof, double t) {
    if (t <= 0.0) return 0.0;
    double s = t / psi.dt;
    int n = static_cast<int>(std::floor(s));
    double f = s - n;
    auto at = [&](int k) {
        return (k >= 1 && k <= psi.n_steps()) ? psi.steps[k - 1][dof] : 0.0;
    };
    return (1.0 - f) * at(n) + f * at(n + 1);
}

void check_off_surface(const Mesh& mesh, const Vec3& x, double tol) {
    for (const auto& T : mesh.tri) {
        double d = std::min({(x - T.v[0]).norm(), (x - T.v[1]).norm(), (x - T.v[2]).norm(),
                             (x - T.centroid).norm()});
        if (d <= std::max(tol, 1e-6 * T.diameter) &&
            std::abs(T.normal.dot(x - T.v[0])) <= std::max(tol, 1e-6 * T.diameter))
            throw std::invalid_argument("field evaluation point lies on the screen");
    }
}

FieldProbe evaluate(const DensityHistory& dens, const Mesh& mesh,
                    const std::vector<Vec3>& points, const std::vector<double>& times,
                    const EvaluationOptions& opts, bool with_image) {
    FieldProbe probe;
    probe.points = points;
    probe.times = times;
    probe.values.setZero(points.size(), times.size());

    // per-triangle quadrature shared by all points
    std::vector<std::vector<SurfacePoint>> qp(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t)
        qp[t] = tensor_gauss_points(mesh.tri[t], std::max(2, opts.tensor_order));

    for (const auto& x : points) check_off_surface(mesh, x, opts.surface_tolerance);

    parallel_chunks(points.size(), opts.n_threads, [&](std::size_t p) {
        const Vec3& x = points[p];
        for (int tr = 0; tr < mesh.n_triangles(); ++tr)
            for (const auto& q : qp[tr]) {
                double r = (x - q.x).norm();
                double ri = 0.0;
                if (with_image) {
                    Vec3 yi(q.x.x(), q.x.y(), -q.x.z());
                    ri = (x - yi).norm();
                }
                for (std::size_t ti = 0; ti < times.size(); ++ti) {
                    double v = density_at(dens, tr, times[ti] - r) / r;
                    if (with_image) v += density_at(dens, tr, times[ti] - ri) / ri;
                    probe.values(p, ti) += q.w * v / (4.0 * kPi);
                }
            }
    });
    return probe;
}

}  // namespace

FieldProbe evaluate_single_layer(const DensityHistory& psi, const Mesh& mesh,
                                 const std::vector<Vec3>& points,
                                 const std::vector<double>& times,
                                 const EvaluationOptions& opts) {
    return evaluate(psi, mesh, points, times, opts, false);
}

FieldProbe evaluate_halfspace_pressure(const DensityHistory& phi, const Mesh& mesh,
                                       const std::vector<Vec3>& points,
                                       const std::vector<double>& times,
                                       const EvaluationOptions& opts) {
    return evaluate(phi, mesh, points, times, opts, true);
}

std::vector<std::complex<double>> incident_point_source_spectrum(
    const Vec3& y_src, const Vec3& x, const std::vector<double>& omegas) {
    double r = (x - y_src).norm();
    Vec3 yi(y_src.x(), y_src.y(), -y_src.z());
    double ri = (x - yi).norm();
    if (r == 0.0 || ri == 0.0)
        throw std::invalid_argument("incident field evaluated at the source point");
    std::vector<std::complex<double>> out(omegas.size());
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        std::complex<double> iw(0.0, -omegas[k]);
        out[k] = std::exp(iw * r) / (4.0 * kPi * r) + std::exp(iw * ri) / (4.0 * kPi * ri);
    }
    return out;
}

double wave_equation_residual(const DensityHistory& psi, const Mesh& mesh, const Vec3& x,
                              double t, double h, const EvaluationOptions& opts) {
    std::vector<Vec3> pts = {x,
                             x + Vec3(h, 0, 0), x - Vec3(h, 0, 0),
                             x + Vec3(0, h, 0), x - Vec3(0, h, 0),
                             x + Vec3(0, 0, h), x - Vec3(0, 0, h)};
    std::vector<double> times = {t, t + h, t - h};
    FieldProbe pr = evaluate_single_layer(psi, mesh, pts, times, opts);
    double utt = (pr.values(0, 1) - 2.0 * pr.values(0, 0) + pr.values(0, 2)) / (h * h);
    double lap = 0.0;
    for (int d = 0; d < 3; ++d)
        lap += (pr.values(1 + 2 * d, 0) - 2.0 * pr.values(0, 0) + pr.values(2 + 2 * d, 0)) /
               (h * h);
    if (utt == 0.0) return lap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(utt - lap) / std::abs(utt);
}

std::string field_probe_csv(const FieldProbe& probe) {
    std::ostringstream os;
    os.precision(17);
    os << "point_id,t,value\n";
    for (std::size_t p = 0; p < probe.points.size(); ++p)
        for (std::size_t ti = 0; ti < probe.times.size(); ++ti)
            os << p << ',' << probe.times[ti] << ',' << probe.values(p, ti) << '\n';
    return os.str();
}

}  // namespace tdbem
