#include "tdbem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace tdbem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- 1D Gauss

const std::pair<std::vector<double>, std::vector<double>>& gauss_cache(int n) {
    static std::mutex mtx;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        // Newton iteration on P_n, nodes on (-1,1)
        double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt_step = p1 / dp;
            t -= dt_step;
            if (std::abs(dt_step) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[i] = 0.5 * (1.0 + t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

// ------------------------------------------------------------ distances

double dist_point_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
    Vec3 d = b - a;
    double dd = d.squaredNorm();
    double t = dd > 0 ? std::clamp((p - a).dot(d) / dd, 0.0, 1.0) : 0.0;
    return (p - (a + t * d)).norm();
}

double dist_segment_segment(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
    // Ericson, Real-Time Collision Detection, closest point of two segments
    Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
    double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
    double s = 0.0, t = 0.0;
    constexpr double eps = 1e-30;
    if (a <= eps && e <= eps) return r.norm();
    if (a <= eps) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        double c = d1.dot(r);
        if (e <= eps) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            double b = d1.dot(d2);
            double denom = a * e - b * b;
            if (denom > eps) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
            t = (b * s + f) / e;
            if (t < 0) {
                t = 0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1) {
                t = 1;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

bool inside_tri_2d(const std::array<Vec2, 3>& v, const Vec2& p, double eps) {
    double sgn = 0.0;
    for (int i = 0; i < 3; ++i) {
        Vec2 e = v[(i + 1) % 3] - v[i];
        double c = e.x() * (p.y() - v[i].y()) - e.y() * (p.x() - v[i].x());
        if (std::abs(c) <= eps) continue;
        if (sgn == 0.0) sgn = c;
        else if (c * sgn < 0) return false;
    }
    return true;
}

double dist_point_triangle(const Vec3& p, const TriangleGeom& T) {
    Vec3 e1 = (T.v[1] - T.v[0]).normalized();
    Vec3 n = T.normal;
    Vec3 e2 = n.cross(e1);
    Vec2 c((p - T.v[0]).dot(e1), (p - T.v[0]).dot(e2));
    double z = (p - T.v[0]).dot(n);
    std::array<Vec2, 3> v2;
    for (int i = 0; i < 3; ++i)
        v2[i] = Vec2((T.v[i] - T.v[0]).dot(e1), (T.v[i] - T.v[0]).dot(e2));
    if (inside_tri_2d(v2, c, 1e-14 * T.diameter)) return std::abs(z);
    double d2 = kInf;
    for (int i = 0; i < 3; ++i) {
        Vec2 a = v2[i], b = v2[(i + 1) % 3];
        Vec2 d = b - a;
        double dd = d.squaredNorm();
        double t = dd > 0 ? std::clamp((c - a).dot(d) / dd, 0.0, 1.0) : 0.0;
        d2 = std::min(d2, (c - (a + t * d)).norm());
    }
    return std::hypot(z, d2);
}

}  // namespace

double triangle_pair_min_distance(const TriangleGeom& Ta, const TriangleGeom& Tb) {
    double d = kInf;
    for (int i = 0; i < 3; ++i) {
        d = std::min(d, dist_point_triangle(Ta.v[i], Tb));
        d = std::min(d, dist_point_triangle(Tb.v[i], Ta));
        for (int j = 0; j < 3; ++j)
            d = std::min(d, dist_segment_segment(Ta.v[i], Ta.v[(i + 1) % 3],
                                                 Tb.v[j], Tb.v[(j + 1) % 3]));
    }
    return d;
}

double triangle_pair_max_distance(const TriangleGeom& Ta, const TriangleGeom& Tb) {
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            d2 = std::max(d2, (Ta.v[i] - Tb.v[j]).squaredNorm());
    return std::sqrt(d2);
}

namespace {

// ----------------------------------------------------- inner-triangle frame

struct FrameB {
    Vec3 O, e1, e2, n;
    std::array<Vec2, 3> v2;
    std::array<double, 3> hat_c;  // hats: lam[a](y2) = hat_c[a] + hat_g[a].y2
    std::array<Vec2, 3> hat_g;
    double scale;
};

FrameB make_frame(const TriangleGeom& B) {
    FrameB f;
    f.O = B.v[0];
    f.e1 = (B.v[1] - B.v[0]).normalized();
    f.n = B.normal;
    f.e2 = f.n.cross(f.e1);
    for (int i = 0; i < 3; ++i)
        f.v2[i] = Vec2((B.v[i] - f.O).dot(f.e1), (B.v[i] - f.O).dot(f.e2));
    Eigen::Matrix3d A;
    for (int i = 0; i < 3; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = f.v2[i].x();
        A(i, 2) = f.v2[i].y();
    }
    Eigen::Matrix3d Ai = A.inverse();
    for (int a = 0; a < 3; ++a) {
        f.hat_c[a] = Ai(0, a);
        f.hat_g[a] = Vec2(Ai(1, a), Ai(2, a));
    }
    f.scale = B.diameter;
    return f;
}

struct ArcMoments {
    double A0 = 0.0;  // total angle
    Vec2 Ay = Vec2::Zero();  // integral of y2(theta) d(theta)
};

// Angular intervals of the circle |y2-c| = rho inside the triangle, with
// integrated angle and first moment. Circle/triangle topology is constant
// within each radial segment (splits at critical radii), so midpoint
// classification is safe.
ArcMoments circle_tri_moments(const FrameB& f, const Vec2& c, double rho) {
    ArcMoments m;
    const double eps = 1e-13 * std::max(f.scale, rho);
    if (rho <= 0.0) {
        if (inside_tri_2d(f.v2, c, eps)) m.A0 = 2.0 * kPi;
        return m;
    }
    std::array<double, 8> angs{};
    int na = 0;
    for (int i = 0; i < 3 && na < 8; ++i) {
        Vec2 p = f.v2[i], q = f.v2[(i + 1) % 3];
        Vec2 d = q - p, g = p - c;
        double a = d.squaredNorm();
        double b = 2.0 * g.dot(d);
        double cc = g.squaredNorm() - rho * rho;
        double disc = b * b - 4.0 * a * cc;
        if (disc <= 0.0 || a <= 0.0) continue;
        double sq = std::sqrt(disc);
        for (double s : {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}) {
            if (s < -1e-12 || s > 1.0 + 1e-12 || na >= 8) continue;
            Vec2 pt = p + std::clamp(s, 0.0, 1.0) * d;
            angs[na++] = std::atan2(pt.y() - c.y(), pt.x() - c.x());
        }
    }
    auto add_arc = [&m, &c, rho](double a0, double a1) {
        m.A0 += a1 - a0;
        double C = std::sin(a1) - std::sin(a0);
        double S = std::cos(a0) - std::cos(a1);
        m.Ay += (a1 - a0) * c + rho * Vec2(C, S);
    };
    if (na == 0) {
        if (inside_tri_2d(f.v2, c + Vec2(rho, 0.0), eps)) add_arc(0.0, 2.0 * kPi);
        return m;
    }
    std::sort(angs.begin(), angs.begin() + na);
    for (int k = 0; k < na; ++k) {
        double a0 = angs[k];
        double a1 = (k + 1 < na) ? angs[k + 1] : angs[0] + 2.0 * kPi;
        if (a1 - a0 < 1e-14) continue;
        double mid = 0.5 * (a0 + a1);
        Vec2 pm = c + rho * Vec2(std::cos(mid), std::sin(mid));
        if (inside_tri_2d(f.v2, pm, eps)) add_arc(a0, a1);
    }
    return m;
}

// --------------------------------------------------------- outer points

const double kRadon7_w[3] = {9.0 / 40.0, (155.0 - std::sqrt(15.0)) / 1200.0,
                             (155.0 + std::sqrt(15.0)) / 1200.0};
const double kRadon7_a[3] = {1.0 / 3.0, (6.0 - std::sqrt(15.0)) / 21.0,
                             (6.0 + std::sqrt(15.0)) / 21.0};

void base_rule(int order, std::vector<std::array<double, 3>>& pts,
               std::vector<double>& wts) {
    pts.clear();
    wts.clear();
    if (order <= 1) {
        pts.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
        wts.push_back(1.0);
    } else if (order <= 3) {
        for (int i = 0; i < 3; ++i) {
            std::array<double, 3> b{1.0 / 6, 1.0 / 6, 1.0 / 6};
            b[i] = 2.0 / 3;
            pts.push_back(b);
            wts.push_back(1.0 / 3);
        }
    } else {
        pts.push_back({kRadon7_a[0], kRadon7_a[0], kRadon7_a[0]});
        wts.push_back(kRadon7_w[0]);
        for (int grp = 1; grp <= 2; ++grp) {
            double a = kRadon7_a[grp];
            double b = 1.0 - 2.0 * a;
            for (int i = 0; i < 3; ++i) {
                std::array<double, 3> bb{a, a, a};
                bb[i] = b;
                pts.push_back(bb);
                wts.push_back(kRadon7_w[grp]);
            }
        }
    }
}

// Adaptive outer rule: leaves refined toward Tb while diam > factor * dist.
void build_outer_points(const TriangleGeom& A, const TriangleGeom& B,
                        const QuadratureRule& rule, std::vector<SurfacePoint>& out) {
    const bool touching =
        triangle_pair_min_distance(A, B) < 1e-12 * std::max(A.diameter, B.diameter);
    const int cap = touching ? rule.singular_depth : rule.subdivision_depth;

    std::vector<std::array<double, 3>> base_pts;
    std::vector<double> base_wts;
    base_rule(rule.outer_order, base_pts, base_wts);

    struct Leaf {
        std::array<Vec3, 3> p;
        std::array<std::array<double, 3>, 3> bary;  // corner barycentrics wrt A
        int depth;
    };
    std::vector<Leaf> stack;
    stack.push_back({{A.v[0], A.v[1], A.v[2]},
                     {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},
                     0});
    out.clear();
    while (!stack.empty()) {
        Leaf lf = stack.back();
        stack.pop_back();
        double diam = std::max({(lf.p[1] - lf.p[0]).norm(), (lf.p[2] - lf.p[1]).norm(),
                                (lf.p[0] - lf.p[2]).norm()});
        Vec3 cen = (lf.p[0] + lf.p[1] + lf.p[2]) / 3.0;
        double d = std::max(0.0, dist_point_triangle(cen, B) - 0.55 * diam);
        if (lf.depth < cap && diam > rule.separation_factor * d) {
            std::array<Vec3, 3> mid = {0.5 * (lf.p[0] + lf.p[1]), 0.5 * (lf.p[1] + lf.p[2]),
                                       0.5 * (lf.p[2] + lf.p[0])};
            std::array<std::array<double, 3>, 3> mb;
            for (int k = 0; k < 3; ++k)
                for (int c = 0; c < 3; ++c)
                    mb[k][c] = 0.5 * (lf.bary[k][c] + lf.bary[(k + 1) % 3][c]);
            stack.push_back({{lf.p[0], mid[0], mid[2]}, {lf.bary[0], mb[0], mb[2]}, lf.depth + 1});
            stack.push_back({{mid[0], lf.p[1], mid[1]}, {mb[0], lf.bary[1], mb[1]}, lf.depth + 1});
            stack.push_back({{mid[2], mid[1], lf.p[2]}, {mb[2], mb[1], lf.bary[2]}, lf.depth + 1});
            stack.push_back({{mid[0], mid[1], mid[2]}, {mb[0], mb[1], mb[2]}, lf.depth + 1});
            continue;
        }
        double area = 0.5 * (lf.p[1] - lf.p[0]).cross(lf.p[2] - lf.p[0]).norm();
        for (size_t q = 0; q < base_pts.size(); ++q) {
            SurfacePoint sp;
            sp.x = base_pts[q][0] * lf.p[0] + base_pts[q][1] * lf.p[1] + base_pts[q][2] * lf.p[2];
            sp.w = base_wts[q] * area;
            for (int c = 0; c < 3; ++c)
                sp.bary[c] = base_pts[q][0] * lf.bary[0][c] + base_pts[q][1] * lf.bary[1][c] +
                             base_pts[q][2] * lf.bary[2][c];
            out.push_back(sp);
        }
    }
}

// --------------------------------------------------------- radial sweep

// Calls f(x, wx, baryA, shell_j, r, w, rho_norm, arcs) where w already
// includes the radial Gauss weight and the r-Jacobian (ds_y = r dr dtheta).
template <class F>
void pair_sweep(const TriangleGeom& A, const FrameB& fb, double r_lo, double r_hi,
                double dt, const QuadratureRule& rule,
                const std::vector<SurfacePoint>& outer, F&& f) {
    const auto& [gx, gw] = gauss_cache(std::max(1, rule.radial_order));
    std::vector<double> brk;
    for (const auto& op : outer) {
        const Vec3& x = op.x;
        Vec2 c((x - fb.O).dot(fb.e1), (x - fb.O).dot(fb.e2));
        double z = (x - fb.O).dot(fb.n);

        // radial range and critical radii (topology changes of the arcs);
        // the arc functions have sqrt cusps there, so segments touching a
        // critical radius are graded geometrically toward it
        double d2min, d2max = 0.0;
        std::vector<double> crit;
        brk.clear();
        bool inside = inside_tri_2d(fb.v2, c, 1e-14 * fb.scale);
        d2min = inside ? 0.0 : kInf;
        for (int i = 0; i < 3; ++i) {
            Vec2 a = fb.v2[i], b = fb.v2[(i + 1) % 3];
            double dv = (a - c).norm();
            d2max = std::max(d2max, dv);
            crit.push_back(std::hypot(z, dv));
            Vec2 d = b - a;
            double dd = d.squaredNorm();
            if (dd > 0) {
                double t = (c - a).dot(d) / dd;
                double dfoot = (c - (a + std::clamp(t, 0.0, 1.0) * d)).norm();
                if (!inside) d2min = std::min(d2min, dfoot);
                if (t > 0.0 && t < 1.0) crit.push_back(std::hypot(z, dfoot));
            }
        }
        double rmin = std::max(std::hypot(z, d2min), r_lo);
        double rmax = std::min(std::hypot(z, d2max), r_hi);
        if (!(rmax > rmin)) continue;
        crit.push_back(rmin);
        crit.push_back(rmax);

        brk = crit;
        if (dt > 0) {
            for (int j = int(rmin / dt) + 1; j * dt < rmax; ++j) brk.push_back(j * dt);
        }
        std::sort(brk.begin(), brk.end());

        double span = rmax - rmin;
        double ctol = 1e-12 * std::max(1.0, rmax);
        auto is_crit = [&crit, ctol](double r) {
            for (double cr : crit)
                if (std::abs(r - cr) <= ctol) return true;
            return false;
        };
        double max_len = span / std::max(1, rule.radial_min_segments);
        std::vector<double> sub;
        for (size_t s = 0; s + 1 < brk.size(); ++s) {
            double a = std::max(brk[s], rmin), b = std::min(brk[s + 1], rmax);
            if (b - a < 1e-15 * std::max(1.0, rmax)) continue;
            int nsub = std::max(1, int(std::ceil((b - a) / max_len)));
            sub.clear();
            for (int k = 0; k <= nsub; ++k) sub.push_back(double(k) / nsub);
            constexpr double q = 0.2;
            const int glev = std::max(0, rule.radial_grade_levels);
            if (is_crit(a)) {
                double f = q / nsub;
                for (int l = 0; l < glev && f > 1e-12; ++l, f *= q) sub.push_back(f);
            }
            if (is_crit(b)) {
                double f = q / nsub;
                for (int l = 0; l < glev && f > 1e-12; ++l, f *= q) sub.push_back(1.0 - f);
            }
            std::sort(sub.begin(), sub.end());
            for (size_t k = 0; k + 1 < sub.size(); ++k) {
                double aa = a + (b - a) * sub[k];
                double bb = a + (b - a) * sub[k + 1];
                if (bb - aa <= 0) continue;
                double mid = 0.5 * (aa + bb);
                int j = dt > 0 ? int(mid / dt) : 0;
                double rho_off = dt > 0 ? j * dt : 0.0;
                double rho_den = dt > 0 ? dt : 1.0;
                for (size_t q = 0; q < gx.size(); ++q) {
                    double r = aa + (bb - aa) * gx[q];
                    double wr = (bb - aa) * gw[q];
                    double rho2 = r * r - z * z;
                    double rho = rho2 > 0 ? std::sqrt(rho2) : 0.0;
                    ArcMoments am = circle_tri_moments(fb, c, rho);
                    if (am.A0 <= 0.0) continue;
                    f(x, op.w, op.bary, j, r, wr * r, (r - rho_off) / rho_den, am);
                }
            }
        }
    }
}

TriangleGeom make_geom(const Vec3& a, const Vec3& b, const Vec3& c) {
    TriangleGeom g;
    g.v = {a, b, c};
    Vec3 cr = (b - a).cross(c - a);
    g.area = 0.5 * cr.norm();
    g.normal = cr.normalized();
    g.centroid = (a + b + c) / 3.0;
    g.diameter = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    return g;
}

TriangleGeom reflect_geom_z(const TriangleGeom& T) {
    auto flip = [](Vec3 v) {
        v.z() = -v.z();
        return v;
    };
    // vertex order kept so hat indices still match; normal is recomputed
    return make_geom(flip(T.v[0]), flip(T.v[1]), flip(T.v[2]));
}

double pair_integral_single_shell(const TriangleGeom& Ta, const TriangleGeom& Tb,
                                  const ShellSpec& shell, KernelId kernel,
                                  const BasisSpec& ba, const BasisSpec& bb,
                                  const QuadratureRule& rule) {
    if (triangle_pair_min_distance(Ta, Tb) > shell.r_hi) return 0.0;
    if (triangle_pair_max_distance(Ta, Tb) < shell.r_lo) return 0.0;
    FrameB fb = make_frame(Tb);
    std::vector<SurfacePoint> outer;
    build_outer_points(Ta, Tb, rule, outer);

    double factor = 1.0;
    switch (kernel) {
        case KernelId::NormalDotInvDistance:
            factor = Ta.normal.dot(Tb.normal);
            break;
        case KernelId::GradGradInvDistance:
            factor = Ta.hat_grad[ba.vertex].dot(Tb.hat_grad[bb.vertex]);
            break;
        default:
            break;
    }
    const bool use_basis = kernel != KernelId::GradGradInvDistance;

    double total = 0.0;
    if (kernel == KernelId::HalfSpaceAdjointDL) {
        if (bb.p1)
            throw std::invalid_argument("HalfSpaceAdjointDL supports P0 in y only");
        auto run = [&](const TriangleGeom& Bg) {
            FrameB fr = make_frame(Bg);
            Vec3 n = Ta.normal;
            double nO = n.dot(fr.O);
            Vec2 ne(n.dot(fr.e1), n.dot(fr.e2));
            pair_sweep(Ta, fr, shell.r_lo, shell.r_hi, 0.0, rule, outer,
                       [&](const Vec3& x, double wx, const std::array<double, 3>& bary,
                           int, double r, double wrr, double, const ArcMoments& am) {
                           double va = ba.p1 ? bary[ba.vertex] : 1.0;
                           double arcdot = (nO - n.dot(x)) * am.A0 + ne.dot(am.Ay);
                           total += wx * wrr * va * arcdot / (r * r * r);
                       });
        };
        run(Tb);
        run(reflect_geom_z(Tb));
        return total;
    }

    pair_sweep(Ta, fb, shell.r_lo, shell.r_hi, 0.0, rule, outer,
               [&](const Vec3&, double wx, const std::array<double, 3>& bary, int,
                   double r, double wrr, double, const ArcMoments& am) {
                   double va = use_basis && ba.p1 ? bary[ba.vertex] : 1.0;
                   double vb = use_basis && bb.p1
                                   ? fb.hat_c[bb.vertex] * am.A0 + fb.hat_g[bb.vertex].dot(am.Ay)
                                   : am.A0;
                   total += wx * wrr * va * vb / r;
               });
    return factor * total;
}

}  // namespace

QuadratureRule study_quadrature_rule() {
    QuadratureRule r;
    r.outer_order = 7;
    r.subdivision_depth = 2;
    r.singular_depth = 3;
    r.radial_order = 3;
    r.radial_min_segments = 2;
    r.radial_grade_levels = 3;
    return r;
}

double shell_pair_integral(const TriangleGeom& Ta, const TriangleGeom& Tb,
                           const ShellSpec& shell, KernelId kernel,
                           const BasisSpec& basis_a, const BasisSpec& basis_b,
                           const QuadratureRule& rule) {
    if (!(shell.r_lo < shell.r_hi) || shell.r_lo < 0)
        throw std::invalid_argument("invalid shell");
    return pair_integral_single_shell(Ta, Tb, shell, kernel, basis_a, basis_b, rule);
}

double shell_partition_check(const TriangleGeom& Ta, const TriangleGeom& Tb,
                             const std::vector<ShellSpec>& shells,
                             const QuadratureRule& rule) {
    BasisSpec p0;
    double sum = 0.0;
    for (const auto& s : shells)
        sum += shell_pair_integral(Ta, Tb, s, KernelId::InvDistance, p0, p0, rule);
    ShellSpec all;
    double full = shell_pair_integral(Ta, Tb, all, KernelId::InvDistance, p0, p0, rule);
    return std::abs(sum - full);
}

double arc_length_in_triangle(const TriangleGeom& T, const Vec3& center, double radius) {
    if (radius <= 0) return 0.0;
    FrameB f = make_frame(T);
    Vec2 c((center - f.O).dot(f.e1), (center - f.O).dot(f.e2));
    double z = (center - f.O).dot(f.n);
    if (radius < std::abs(z)) return 0.0;
    double rho = std::sqrt(radius * radius - z * z);
    ArcMoments am = circle_tri_moments(f, c, rho);
    return rho * am.A0;
}

double arc_angle_in_triangle(const TriangleGeom& T, const Vec3& center, double radius) {
    if (radius <= 0) return 0.0;
    FrameB f = make_frame(T);
    Vec2 c((center - f.O).dot(f.e1), (center - f.O).dot(f.e2));
    double z = (center - f.O).dot(f.n);
    if (radius < std::abs(z)) return 0.0;
    double rho = std::sqrt(radius * radius - z * z);
    return circle_tri_moments(f, c, rho).A0;
}

double point_annulus_integral(const TriangleGeom& T, const Vec3& center, double r0,
                              double r1, int p, const QuadratureRule& rule) {
    FrameB f = make_frame(T);
    Vec2 c((center - f.O).dot(f.e1), (center - f.O).dot(f.e2));
    double z = (center - f.O).dot(f.n);

    std::vector<double> crit;
    bool inside = inside_tri_2d(f.v2, c, 1e-14 * f.scale);
    double d2min = inside ? 0.0 : kInf, d2max = 0.0;
    for (int i = 0; i < 3; ++i) {
        Vec2 a = f.v2[i], b = f.v2[(i + 1) % 3];
        double dv = (a - c).norm();
        d2max = std::max(d2max, dv);
        crit.push_back(std::hypot(z, dv));
        Vec2 d = b - a;
        double dd = d.squaredNorm();
        if (dd > 0) {
            double t = (c - a).dot(d) / dd;
            double dfoot = (c - (a + std::clamp(t, 0.0, 1.0) * d)).norm();
            if (!inside) d2min = std::min(d2min, dfoot);
            if (t > 0.0 && t < 1.0) crit.push_back(std::hypot(z, dfoot));
        }
    }
    double rmin = std::max(std::hypot(z, d2min), r0);
    double rmax = std::min(std::hypot(z, d2max), r1);
    if (!(rmax > rmin)) return 0.0;
    crit.push_back(rmin);
    crit.push_back(rmax);
    std::sort(crit.begin(), crit.end());

    const auto& [gx, gw] = gauss_cache(std::max(1, rule.radial_order));
    double ctol = 1e-12 * std::max(1.0, rmax);
    double total = 0.0;
    for (size_t s = 0; s + 1 < crit.size(); ++s) {
        double a = std::max(crit[s], rmin), b = std::min(crit[s + 1], rmax);
        if (b - a < 1e-15 * std::max(1.0, rmax)) continue;
        std::vector<double> sub{0.0, 1.0};
        constexpr double q = 0.2;
        const int glev = std::max(0, rule.radial_grade_levels);
        double fr = q;
        for (int l = 0; l < glev && fr > 1e-12; ++l, fr *= q) {
            sub.push_back(fr);
            sub.push_back(1.0 - fr);
        }
        std::sort(sub.begin(), sub.end());
        (void)ctol;
        for (size_t k = 0; k + 1 < sub.size(); ++k) {
            double aa = a + (b - a) * sub[k], bb = a + (b - a) * sub[k + 1];
            for (size_t g = 0; g < gx.size(); ++g) {
                double r = aa + (bb - aa) * gx[g];
                double rho2 = r * r - z * z;
                double rho = rho2 > 0 ? std::sqrt(rho2) : 0.0;
                double A0 = circle_tri_moments(f, c, rho).A0;
                total += (bb - aa) * gw[g] * A0 * std::pow(r, 1 - p);
            }
        }
    }
    return total;
}

ShellMomentsP0 shell_moments_p0(const TriangleGeom& Ta, const TriangleGeom& Tb,
                                double dt, const QuadratureRule& rule) {
    ShellMomentsP0 out;
    double dmin = triangle_pair_min_distance(Ta, Tb);
    double dmax = triangle_pair_max_distance(Ta, Tb);
    out.j0 = int(dmin / dt);
    int j1 = int(dmax / dt);
    out.invr.assign(j1 - out.j0 + 1, {0.0, 0.0, 0.0});
    FrameB fb = make_frame(Tb);
    std::vector<SurfacePoint> outer;
    build_outer_points(Ta, Tb, rule, outer);
    pair_sweep(Ta, fb, 0.0, kInf, dt, rule, outer,
               [&](const Vec3&, double wx, const std::array<double, 3>&, int j, double r,
                   double wrr, double rho, const ArcMoments& am) {
                   j = std::clamp(j, out.j0, j1);
                   double base = wx * wrr * am.A0 / r;
                   auto& m = out.invr[j - out.j0];
                   m[0] += base;
                   m[1] += base * rho;
                   m[2] += base * rho * rho;
               });
    return out;
}

ShellMomentsP1 shell_moments_p1(const TriangleGeom& Ta, const TriangleGeom& Tb,
                                double dt, const QuadratureRule& rule) {
    ShellMomentsP1 out;
    double dmin = triangle_pair_min_distance(Ta, Tb);
    double dmax = triangle_pair_max_distance(Ta, Tb);
    out.j0 = int(dmin / dt);
    int j1 = int(dmax / dt);
    int n = j1 - out.j0 + 1;
    out.scalar.assign(n, {0.0, 0.0, 0.0});
    out.bb.assign(n, {});
    FrameB fb = make_frame(Tb);
    std::vector<SurfacePoint> outer;
    build_outer_points(Ta, Tb, rule, outer);
    pair_sweep(Ta, fb, 0.0, kInf, dt, rule, outer,
               [&](const Vec3&, double wx, const std::array<double, 3>& bary, int j,
                   double r, double wrr, double rho, const ArcMoments& am) {
                   j = std::clamp(j, out.j0, j1);
                   double base = wx * wrr / r;
                   double pk[3] = {1.0, rho, rho * rho};
                   auto& sc = out.scalar[j - out.j0];
                   auto& bb = out.bb[j - out.j0];
                   double arcb[3];
                   for (int b = 0; b < 3; ++b)
                       arcb[b] = fb.hat_c[b] * am.A0 + fb.hat_g[b].dot(am.Ay);
                   for (int k = 0; k < 3; ++k) {
                       double bk = base * pk[k];
                       sc[k] += bk * am.A0;
                       for (int a = 0; a < 3; ++a) {
                           double ab = bk * bary[a];
                           for (int b = 0; b < 3; ++b) bb[k][a * 3 + b] += ab * arcb[b];
                       }
                   }
               });
    return out;
}

ShellMomentsAdjDL shell_moments_adjdl(const TriangleGeom& Ta, const TriangleGeom& Tb,
                                      double dt, const QuadratureRule& rule) {
    ShellMomentsAdjDL out;
    double dmin = triangle_pair_min_distance(Ta, Tb);
    double dmax = triangle_pair_max_distance(Ta, Tb);
    out.j0 = int(dmin / dt);
    int j1 = int(dmax / dt);
    int n = j1 - out.j0 + 1;
    out.k3.assign(n, {0.0, 0.0});
    out.k2.assign(n, 0.0);
    FrameB fb = make_frame(Tb);
    std::vector<SurfacePoint> outer;
    build_outer_points(Ta, Tb, rule, outer);
    Vec3 nrm = Ta.normal;
    double nO = nrm.dot(fb.O);
    Vec2 ne(nrm.dot(fb.e1), nrm.dot(fb.e2));
    pair_sweep(Ta, fb, 0.0, kInf, dt, rule, outer,
               [&](const Vec3& x, double wx, const std::array<double, 3>&, int j, double r,
                   double wrr, double rho, const ArcMoments& am) {
                   j = std::clamp(j, out.j0, j1);
                   double arcdot = (nO - nrm.dot(x)) * am.A0 + ne.dot(am.Ay);
                   double base = wx * wrr * arcdot;
                   double r2 = r * r;
                   out.k3[j - out.j0][0] += base / (r2 * r);
                   out.k3[j - out.j0][1] += base * rho / (r2 * r);
                   out.k2[j - out.j0] += base / r2;
               });
    return out;
}

std::vector<SurfacePoint> triangle_rule_points(const TriangleGeom& T) {
    std::vector<std::array<double, 3>> pts;
    std::vector<double> wts;
    base_rule(7, pts, wts);
    std::vector<SurfacePoint> out(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        out[i].x = pts[i][0] * T.v[0] + pts[i][1] * T.v[1] + pts[i][2] * T.v[2];
        out[i].w = wts[i] * T.area;
        out[i].bary = pts[i];
    }
    return out;
}

std::vector<SurfacePoint> tensor_gauss_points(const TriangleGeom& T, int n) {
    const auto& [gx, gw] = gauss_cache(n);
    std::vector<SurfacePoint> out;
    out.reserve(n * n);
    for (int i = 0; i < n; ++i) {
        double u = gx[i];
        for (int j = 0; j < n; ++j) {
            double v = gx[j];
            // collapsed map: p = v0 + u(v1-v0) + uv(v2-v1), ds = 2A u du dv
            SurfacePoint sp;
            sp.x = T.v[0] + u * (T.v[1] - T.v[0]) + u * v * (T.v[2] - T.v[1]);
            sp.w = 2.0 * T.area * u * gw[i] * gw[j];
            sp.bary = {1.0 - u, u * (1.0 - v), u * v};
            out.push_back(sp);
        }
    }
    return out;
}

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    const auto& [x, w] = gauss_cache(n);
    nodes = x;
    weights = w;
}

}  // namespace tdbem
