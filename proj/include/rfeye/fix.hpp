#pragma once

#include <cmath>

#include "clusterdoa.hpp"
#include "geometry.hpp"
#include "types.hpp"

namespace rfeye {

struct FixResult {
    double range = 0.0;           // a-hat
    SteeringDirection direction;  // bearing from location 1
    Vec3 local;                   // emitter relative to location 1
    Vec3 world;                   // p1 + local
    double residual = 0.0;        // closest approach of the two bearing rays
};

struct FixErrors {
    double dx = 0, dy = 0, dz = 0, e2d = 0, e3d = 0;
};

namespace detail {

// Minimum distance between rays p1 + s u1 and p2 + t u2 (s, t >= 0).
inline double ray_gap(const Vec3& p1, const Vec3& u1, const Vec3& p2, const Vec3& u2) {
    const Vec3 w = p1 - p2;
    const double b = dot(u1, u2);
    const double d = dot(u1, w);
    const double e = dot(u2, w);
    const double den = 1.0 - b * b;
    double s = 0.0, t = 0.0;
    if (den > 1e-12) {
        s = (b * e - d) / den;
        t = (e - b * d) / den;
    } else {
        t = e;
    }
    if (s < 0) {
        s = 0;
        t = std::max(0.0, e);
    }
    if (t < 0) {
        t = 0;
        s = std::max(0.0, -d);
    }
    return norm((p1 + s * u1) - (p2 + t * u2));
}

} // namespace detail

// Range from location 1 by intersecting the horizontal bearings of both DoAs across the
// baseline, then lifting by the polar angle at location 1.
inline FixResult localize(const DoaEstimate& doa1, const DoaEstimate& doa2, const Baseline& rel, const Vec3& p1 = {0, 0, 0}) {
    if (!(rel.d > 0)) throw Error(ErrorCode::DegenerateBaseline, "baseline length must be positive");
    const double t1 = doa1.theta, t2 = doa2.theta;
    const double tb = rel.theta;
    const double tan_a = std::tan(t1 - tb);
    const double tan_b = std::tan(tb - t2);
    const double den = (tan_a + tan_b) * std::cos(t1 - tb) * std::sin(doa1.phi);
    if (!std::isfinite(den) || std::abs(den) < 1e-9)
        throw Error(ErrorCode::ParallelBearings, "bearings do not intersect");
    const double a = rel.d * std::sin(rel.phi) * tan_b / den;
    if (!std::isfinite(a)) throw Error(ErrorCode::ParallelBearings, "bearings do not intersect");
    if (a <= 0) throw Error(ErrorCode::NegativeRange, "bearings diverge");

    FixResult f;
    f.range = a;
    f.direction = doa1.direction();
    f.local = a * unit_vector(f.direction);
    f.world = p1 + f.local;
    f.residual = detail::ray_gap({0, 0, 0}, unit_vector(doa1.direction()), baseline_to_rect(rel), unit_vector(doa2.direction()));
    return f;
}

inline FixErrors error_metrics(const Vec3& fix_world, const Vec3& truth_world) {
    FixErrors e;
    e.dx = fix_world[0] - truth_world[0];
    e.dy = fix_world[1] - truth_world[1];
    e.dz = fix_world[2] - truth_world[2];
    e.e2d = std::sqrt(e.dx * e.dx + e.dy * e.dy);
    e.e3d = std::sqrt(e.dx * e.dx + e.dy * e.dy + e.dz * e.dz);
    return e;
}

} // namespace rfeye
