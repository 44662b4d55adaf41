#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace igatherm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Dense 2D array stored row-major over (i, j), i fastest along rows of j.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int ni, int nj, T fill = T{}) : ni_(ni), nj_(nj), data_(static_cast<size_t>(ni) * nj, fill) {}

    int ni() const { return ni_; }
    int nj() const { return nj_; }

    T& operator()(int i, int j) { return data_[static_cast<size_t>(j) * ni_ + i]; }
    const T& operator()(int i, int j) const { return data_[static_cast<size_t>(j) * ni_ + i]; }

    const std::vector<T>& data() const { return data_; }
    std::vector<T>& data() { return data_; }

private:
    int ni_ = 0;
    int nj_ = 0;
    std::vector<T> data_;
};

/// Gauss-Legendre rule on [0, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule gauss_rule(int n);

}  // namespace igatherm
