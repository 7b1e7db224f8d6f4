#pragma once

// Angle convention used everywhere in the library.
//
// A point is (r, psi, zeta) and a steering direction is (phi, theta). Both map to
// the local east-north-up frame through the same unit vector
//
//     u(phi, theta) = (sin phi cos theta, sin phi sin theta, cos phi)
//
// so phi is measured from the local vertical (Up) and theta is the horizontal
// bearing counter-clockwise from East. The far-field path difference is then
// d'(point, dir) = r (sin phi sin psi cos(theta - zeta) + cos phi cos psi) = <p, u>.
//
// Because phi and theta both range over [-pi, pi), every direction has two
// representations: (phi, theta) and (-phi, theta + pi). Reported estimates are
// folded so that theta lies in [-pi/2, pi/2).

#include <algorithm>
#include <array>
#include <cmath>

#include "types.hpp"

namespace rfeye {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

struct LocalSpherical {
    double r = 0.0;
    double psi = 0.0;
    double zeta = 0.0;
};

struct SteeringDirection {
    double phi = 0.0;
    double theta = 0.0;
};

inline Vec3 unit_vector(double polar, double bearing) {
    const double sp = std::sin(polar);
    return {sp * std::cos(bearing), sp * std::sin(bearing), std::cos(polar)};
}

inline Vec3 unit_vector(const SteeringDirection& d) { return unit_vector(d.phi, d.theta); }

inline Vec3 to_rect(const LocalSpherical& p) { return p.r * unit_vector(p.psi, p.zeta); }

// Inverse of to_rect with psi in [0, pi] and zeta in [-pi, pi).
inline LocalSpherical to_spherical(const Vec3& v) {
    const double r = norm(v);
    if (r == 0.0) return {};
    const double psi = std::acos(std::clamp(v[2] / r, -1.0, 1.0));
    const double zeta = wrap_pi(std::atan2(v[1], v[0]));
    return {r, psi, zeta};
}

// Fold into phi in [-pi, pi), theta in [-pi/2, pi/2).
inline SteeringDirection canonical(SteeringDirection d) {
    double phi = wrap_pi(d.phi);
    double theta = wrap_pi(d.theta);
    if (theta >= kPi / 2 || theta < -kPi / 2) {
        phi = wrap_pi(-phi);
        theta = wrap_pi(theta + kPi);
    }
    return {phi, theta};
}

inline SteeringDirection direction_of(const Vec3& v) {
    const LocalSpherical s = to_spherical(v);
    return canonical({s.psi, s.zeta});
}

// Great-circle angle between two directions, radians.
inline double angular_distance(const SteeringDirection& a, const SteeringDirection& b) {
    const Vec3 ua = unit_vector(a);
    const Vec3 ub = unit_vector(b);
    const double c = std::clamp(dot(ua, ub), -1.0, 1.0);
    const double s = norm(cross(ua, ub));
    return std::atan2(s, c);
}

inline double d_prime(const LocalSpherical& p, const SteeringDirection& d) {
    return p.r * (std::sin(d.phi) * std::sin(p.psi) * std::cos(d.theta - p.zeta) +
                  std::cos(d.phi) * std::cos(p.psi));
}

inline cplx steering_weight(const LocalSpherical& p, const SteeringDirection& d, double lambda) {
    return std::polar(1.0, kTwoPi / lambda * d_prime(p, d));
}

// Horizontal bearing (from East, CCW) and elevation above the horizon of a direction.
struct AzEl {
    double az = 0.0;
    double el = 0.0;
};

inline AzEl az_el(const SteeringDirection& d) {
    const Vec3 u = unit_vector(d);
    return {std::atan2(u[1], u[0]), std::asin(std::clamp(u[2], -1.0, 1.0))};
}

struct Baseline {
    double d = 0.0;
    double phi = 0.0;   // polar angle of the baseline
    double theta = 0.0; // horizontal bearing of the baseline
};

inline Baseline relative_location(const Vec3& loc1, const Vec3& loc2) {
    const Vec3 v = loc2 - loc1;
    const LocalSpherical s = to_spherical(v);
    if (s.r == 0.0) throw Error(ErrorCode::DegenerateBaseline, "locations coincide");
    return {s.r, s.psi, s.zeta};
}

inline Vec3 baseline_to_rect(const Baseline& b) { return b.d * unit_vector(b.phi, b.theta); }

} // namespace rfeye
