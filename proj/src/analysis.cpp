#include "tdbem/analysis.hpp"
#include "tdbem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace tdbem {

namespace {

constexpr double kPi = std::numbers::pi;

// least-squares slope of y vs x with R^2
struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 1.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    int n = static_cast<int>(x.size());
    if (n < 2) throw std::invalid_argument("line fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    double den = n * sxx - sx * sx;
    if (den == 0.0) throw std::invalid_argument("degenerate abscissae in line fit");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0, ybar = sy / n;
    for (int i = 0; i < n; ++i) {
        double e = y[i] - (f.slope * x[i] + f.intercept);
        ss_res += e * e;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

}  // namespace

ScreenDensity::ScreenDensity(const Mesh& mesh, const DensityHistory& hist)
    : mesh_(mesh), hist_(hist) {
    p1_ = hist.op == OperatorId::Hypersingular || hist.op == OperatorId::DtN;
    if (p1_) {
        if (static_cast<int>(hist.dof_nodes.size()) != static_cast<int>(hist.steps[0].size()))
            throw std::invalid_argument("P1 density needs dof_nodes matching the steps");
        nodal_.setZero(mesh.n_nodes(), hist.n_steps());
        for (int n = 0; n < hist.n_steps(); ++n)
            for (int d = 0; d < static_cast<int>(hist.dof_nodes.size()); ++d)
                nodal_(hist.dof_nodes[d], n) = hist.steps[n][d];
    }
}

int ScreenDensity::locate(const Vec3& x, std::array<double, 3>& bary) const {
    int best = -1;
    double best_min = -1e30;
    for (int t = 0; t < mesh_.n_triangles(); ++t) {
        const TriangleGeom& T = mesh_.tri[t];
        // in-plane barycentric coordinates via the hat gradients
        Vec3 d = x - T.v[0];
        d -= T.normal.dot(d) * T.normal;
        std::array<double, 3> b;
        b[1] = T.hat_grad[1].dot(d);
        b[2] = T.hat_grad[2].dot(d);
        b[0] = 1.0 - b[1] - b[2];
        double mn = std::min({b[0], b[1], b[2]});
        if (mn > best_min) {
            best_min = mn;
            best = t;
            bary = b;
        }
        if (mn >= 0.0) break;  // strictly inside, done
    }
    return best;
}

ScreenDensity::Sample ScreenDensity::sample(const Vec3& x) const {
    Sample s;
    s.tri = locate(x, s.bary);
    return s;
}

double ScreenDensity::value(const Vec3& x, double t) const {
    return value(sample(x), t);
}

double ScreenDensity::value(const Sample& s, double t) const {
    int tr = s.tri;
    const std::array<double, 3>& bary = s.bary;
    if (tr < 0) return 0.0;
    if (!p1_) {
        // p.c. in time; t exactly at the horizon reads the last interval
        if (t < 0.0) return 0.0;
        int n = static_cast<int>(std::floor(t / hist_.dt)) + 1;
        if (n == hist_.n_steps() + 1 && t <= hist_.n_steps() * hist_.dt) --n;
        if (n < 1 || n > hist_.n_steps()) return 0.0;
        return hist_.steps[n - 1][tr];
    }
    // P1 in space, hat in time with value 0 at t = 0
    auto nodal_at = [&](int step) {  // step n >= 1 -> column n-1, else 0
        if (step < 1 || step > hist_.n_steps()) return 0.0;
        double v = 0.0;
        for (int k = 0; k < 3; ++k) v += bary[k] * nodal_(mesh_.triangles[tr][k], step - 1);
        return v;
    };
    if (t <= 0.0) return 0.0;
    int n = static_cast<int>(std::floor(t / hist_.dt));
    double frac = t / hist_.dt - n;
    return (1.0 - frac) * nodal_at(n) + frac * nodal_at(n + 1);
}

double l2_spacetime_error(const Mesh& mesh_a, const DensityHistory& a, const Mesh& mesh_b,
                          const DensityHistory& b, double T) {
    if (a.dt <= 0 || b.dt <= 0) throw std::invalid_argument("densities lack a time grid");
    ScreenDensity da(mesh_a, a), db(mesh_b, b);
    const Mesh& host = mesh_a.n_triangles() >= mesh_b.n_triangles() ? mesh_a : mesh_b;
    double dt = std::min(a.dt, b.dt);
    int n_steps = static_cast<int>(std::lround(T / dt));
    double acc = 0.0;
    for (int t = 0; t < host.n_triangles(); ++t)
        for (const auto& q : triangle_rule_points(host.tri[t])) {
            auto sa = da.sample(q.x), sb = db.sample(q.x);
            for (int n = 1; n <= n_steps; ++n) {
                double tm = (n - 0.5) * dt;
                double d = da.value(sa, tm) - db.value(sb, tm);
                acc += q.w * dt * d * d;
            }
        }
    return std::sqrt(acc);
}

DensityHistory lift_density(const Mesh& coarse_mesh, const DensityHistory& coarse,
                            const Mesh& fine_mesh, const LagMatrixSequence& fine_system) {
    ScreenDensity dc(coarse_mesh, coarse);
    DensityHistory out;
    out.op = coarse.op;
    out.dt = coarse.dt;
    out.n_phi = fine_system.n_phi;
    out.dof_nodes = fine_system.dof_nodes;
    std::vector<Vec3> locs;
    if (dc.p1()) {
        for (int d : fine_system.dof_nodes) locs.push_back(fine_mesh.nodes[d]);
    } else {
        for (const auto& T : fine_mesh.tri) locs.push_back(T.centroid);
    }
    std::vector<ScreenDensity::Sample> samples(locs.size());
    for (std::size_t i = 0; i < locs.size(); ++i) samples[i] = dc.sample(locs[i]);
    for (int n = 1; n <= coarse.n_steps(); ++n) {
        Eigen::VectorXd v(locs.size());
        double t = dc.p1() ? n * coarse.dt : (n - 0.5) * coarse.dt;
        for (std::size_t i = 0; i < locs.size(); ++i) v[i] = dc.value(samples[i], t);
        out.steps.push_back(std::move(v));
    }
    return out;
}

double energy_error(const LagMatrixSequence& fine_system, const Mesh& coarse_mesh,
                    const DensityHistory& coarse, const Mesh& fine_mesh,
                    const DensityHistory& fine, const RhsTimeSeries& fine_rhs) {
    DensityHistory lifted = lift_density(coarse_mesh, coarse, fine_mesh, fine_system);
    double ec = energy_functional(fine_system, lifted, fine_rhs);
    double ef = energy_functional(fine_system, fine, fine_rhs);
    return std::sqrt(std::abs(ec - ef));
}

double fit_convergence_rate(const std::vector<RateRow>& rows) {
    if (rows.size() < 3) throw std::invalid_argument("rate fit needs >= 3 levels");
    std::vector<double> x, y;
    for (const auto& r : rows) {
        if (r.error <= 0.0 || r.dof <= 0.0)
            throw std::invalid_argument("rate fit needs positive DOF and error");
        x.push_back(std::log(r.dof));
        y.push_back(std::log(r.error));
    }
    return fit_line(x, y).slope;
}

ExponentFit fit_singular_exponent(const Mesh& mesh, const DensityHistory& hist,
                                  SectionKind section, double time) {
    ScreenDensity dens(mesh, hist);
    int N = std::max(mesh.levels, 2);
    double beta = mesh.beta;
    // Edge sections fit close to the singular set; the corner fit needs a
    // wider window because the corner behavior extends further into the screen.
    double d_lo, d_hi;
    if (section == SectionKind::CornerDiagonal) {
        d_lo = 1.2 * std::pow(2.0 / N, beta);
        d_hi = 0.3;
    } else {
        d_lo = 1.5 * std::pow(1.0 / N, beta);
        d_hi = 0.15;
    }
    if (d_lo >= d_hi / 2.0) d_lo = d_hi / 8.0;

    auto sample_point = [&](double d) {
        switch (section) {
            case SectionKind::EdgeMidline:
                return Vec3(1.0 - d, 0.0, 0.0);
            case SectionKind::CornerDiagonal: {
                double s = d / std::sqrt(2.0);
                return Vec3(1.0 - s, 1.0 - s, 0.0);
            }
            case SectionKind::DiscRadial:
            default:
                return Vec3(1.0 - d, 0.0, 0.0);
        }
    };

    std::vector<double> lx, ly;
    int n_samples = 60;
    for (int i = 0; i < n_samples; ++i) {
        double d = d_lo * std::pow(d_hi / d_lo, i / double(n_samples - 1));
        double v = dens.value(sample_point(d), time);
        if (std::abs(v) <= 0.0) continue;
        lx.push_back(std::log(d));
        ly.push_back(std::log(std::abs(v)));
    }
    ExponentFit fit;
    fit.time = time;
    fit.section = section;
    fit.window_lo = d_lo;
    fit.window_hi = d_hi;
    fit.n_points = static_cast<int>(lx.size());
    if (fit.n_points < 4) throw std::invalid_argument("too few samples in the fit window");
    LineFit lf = fit_line(lx, ly);
    fit.exponent = lf.slope;
    fit.r2 = lf.r2;
    return fit;
}

InterpStudy interpolation_lemma_study(double a, double beta, int levels, int n0) {
    if (a <= 0.0) throw std::invalid_argument("exponent a must be positive");
    InterpStudy st;
    st.a = a;
    st.beta = beta;
    st.predicted = std::min(beta * (a + 0.5), 2.0);
    std::vector<double> gx, gw;
    gauss_legendre_01(12, gx, gw);
    std::vector<double> lh, le;
    for (int lev = 0; lev < levels; ++lev) {
        int n = n0 << lev;
        double err2 = 0.0;
        for (int k = 0; k < n; ++k) {
            double y0 = std::pow(double(k) / n, beta), y1 = std::pow(double(k + 1) / n, beta);
            double f0 = std::pow(y0, a), f1 = std::pow(y1, a);
            for (std::size_t g = 0; g < gx.size(); ++g) {
                double y = y0 + (y1 - y0) * gx[g];
                double interp = f0 + (f1 - f0) * gx[g];
                double d = std::pow(y, a) - interp;
                err2 += gw[g] * (y1 - y0) * d * d;
            }
        }
        InterpRow row{n, 1.0 / n, std::sqrt(err2)};
        st.rows.push_back(row);
        lh.push_back(std::log(row.h));
        le.push_back(std::log(row.error));
    }
    st.rate = fit_line(lh, le).slope;  // positive: error ~ h^rate
    return st;
}

Spectrum amplification_spectrum(const std::vector<double>& scattered, const TimeGrid& grid,
                                const Vec3& y_src, const Vec3& x_fp,
                                const SpectrumOptions& opts) {
    if (scattered.size() != static_cast<std::size_t>(grid.n_steps + 1))
        throw std::invalid_argument("scattered series must sample t_0..t_N");
    std::size_t m = 1;
    while (m < scattered.size() * std::max(1, opts.pad_factor)) m <<= 1;

    double to_omega = 2.0 * kPi * opts.length_unit / opts.speed_of_sound;
    double w_lo = opts.f_lo_hz * to_omega, w_hi = opts.f_hi_hz * to_omega;

    Spectrum sp;
    for (std::size_t k = 1; k < m / 2; ++k) {
        double w = 2.0 * kPi * k / (m * grid.dt);
        if (w < w_lo || w > w_hi) continue;
        std::complex<double> ph = 0.0;
        for (std::size_t n = 0; n < scattered.size(); ++n)
            ph += scattered[n] * std::exp(std::complex<double>(0.0, -w * n * grid.dt));
        ph *= grid.dt;
        auto pi = incident_point_source_spectrum(y_src, x_fp, {w})[0];
        sp.omega.push_back(w);
        sp.freq_hz.push_back(w / to_omega);
        sp.db.push_back(20.0 * std::log10(std::abs(ph + pi) / std::abs(pi)));
    }
    return sp;
}

}  // namespace tdbem
