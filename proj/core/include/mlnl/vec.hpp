#pragma once

#include <array>
#include <cmath>

namespace mlnl {

/// Point in R^n, n <= 2. One-dimensional code leaves y == 0.
struct Pt {
    double x = 0.0;
    double y = 0.0;

    double& operator[](int i) { return i == 0 ? x : y; }
    double operator[](int i) const { return i == 0 ? x : y; }
};

inline Pt operator+(Pt a, Pt b) { return {a.x + b.x, a.y + b.y}; }
inline Pt operator-(Pt a, Pt b) { return {a.x - b.x, a.y - b.y}; }
inline Pt operator*(double s, Pt a) { return {s * a.x, s * a.y}; }
inline Pt operator-(Pt a) { return {-a.x, -a.y}; }

inline double dot(Pt a, Pt b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Pt a) { return dot(a, a); }
inline double norm(Pt a) { return std::sqrt(norm2(a)); }
inline double dist(Pt a, Pt b) { return norm(a - b); }

inline Pt normalized(Pt a) {
    double m = norm(a);
    return {a.x / m, a.y / m};
}

/// Rotate 90 degrees counterclockwise.
inline Pt perp(Pt a) { return {-a.y, a.x}; }

} // namespace mlnl
