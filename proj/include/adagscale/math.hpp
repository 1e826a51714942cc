#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace ags {

struct Vec2f {
    float x = 0.0f, y = 0.0f;

    Vec2f operator+(Vec2f o) const { return {x + o.x, y + o.y}; }
    Vec2f operator-(Vec2f o) const { return {x - o.x, y - o.y}; }
    Vec2f operator*(float s) const { return {x * s, y * s}; }
    float dot(Vec2f o) const { return x * o.x + y * o.y; }
};

struct Vec3f {
    float x = 0.0f, y = 0.0f, z = 0.0f;

    Vec3f operator+(Vec3f o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3f operator-(Vec3f o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3f operator*(float s) const { return {x * s, y * s, z * s}; }
    float dot(Vec3f o) const { return x * o.x + y * o.y + z * o.z; }
    float norm() const { return std::sqrt(dot(*this)); }
    Vec3f normalized() const {
        const float n = norm();
        return n > 0.0f ? (*this) * (1.0f / n) : Vec3f{0, 0, 0};
    }
    Vec3f cross(Vec3f o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
};

// Row-major 3x3 matrix.
template <typename T>
struct Mat3 {
    std::array<T, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    T& operator()(int r, int c) { return m[r * 3 + c]; }
    T operator()(int r, int c) const { return m[r * 3 + c]; }

    Vec3f operator*(Vec3f v) const {
        auto dot = [&](int r) {
            return static_cast<float>(m[r * 3] * v.x + m[r * 3 + 1] * v.y +
                                      m[r * 3 + 2] * v.z);
        };
        return {dot(0), dot(1), dot(2)};
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 out;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                T s = 0;
                for (int k = 0; k < 3; ++k) s += (*this)(r, k) * o(k, c);
                out(r, c) = s;
            }
        return out;
    }
    Mat3 transposed() const {
        Mat3 out;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) out(r, c) = (*this)(c, r);
        return out;
    }

    template <typename U>
    Mat3<U> cast() const {
        Mat3<U> out;
        for (int i = 0; i < 9; ++i) out.m[i] = static_cast<U>(m[i]);
        return out;
    }
};

using Mat3f = Mat3<float>;
using Mat3d = Mat3<double>;

// Symmetric 2x2 matrix stored as (xx, xy, yy), pixel^2 units when used as a
// projected covariance.
struct SymMat2 {
    float xx = 0.0f, xy = 0.0f, yy = 0.0f;

    float det() const { return xx * yy - xy * xy; }

    SymMat2 inverse() const {
        const float inv_det = 1.0f / det();
        return {yy * inv_det, -xy * inv_det, xx * inv_det};
    }

    // d^T * M * d
    float quad(Vec2f d) const {
        return xx * d.x * d.x + 2.0f * xy * d.x * d.y + yy * d.y * d.y;
    }
};

struct Eigen2 {
    float l1 = 0.0f;  // larger eigenvalue
    float l2 = 0.0f;
    Vec2f v1{1, 0};   // unit eigenvector of l1
    Vec2f v2{0, 1};
};

// Closed-form eigen decomposition of a symmetric 2x2 matrix. For (near-)
// isotropic input the eigenvectors stay axis aligned.
inline Eigen2 eigen_sym2(const SymMat2& m) {
    Eigen2 e;
    const float mean = 0.5f * (m.xx + m.yy);
    const float half_diff = 0.5f * (m.xx - m.yy);
    const float r = std::sqrt(half_diff * half_diff + m.xy * m.xy);
    e.l1 = mean + r;
    e.l2 = mean - r;
    if (m.xy == 0.0f) {
        if (m.xx >= m.yy) {
            e.v1 = {1, 0};
            e.v2 = {0, 1};
        } else {
            e.v1 = {0, 1};
            e.v2 = {-1, 0};
        }
        return e;
    }
    // (l1 - yy, xy) and (xy, l1 - xx) are both eigenvectors of l1; pick the
    // numerically larger one.
    Vec2f a{e.l1 - m.yy, m.xy};
    Vec2f b{m.xy, e.l1 - m.xx};
    Vec2f v = (a.dot(a) >= b.dot(b)) ? a : b;
    const float n = std::sqrt(v.dot(v));
    e.v1 = {v.x / n, v.y / n};
    e.v2 = {-e.v1.y, e.v1.x};
    return e;
}

// Unit quaternion, scalar first.
struct Quatf {
    float w = 1.0f, x = 0.0f, y = 0.0f, z = 0.0f;

    float norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
    Quatf normalized() const {
        const float n = norm();
        return {w / n, x / n, y / n, z / n};
    }

    Mat3f to_matrix() const { return rotation_matrix<float>(); }

    // Re-normalizes in double so the result is orthonormal to full double
    // precision even when the stored quaternion only meets the 1e-6 invariant.
    template <typename T>
    Mat3<T> rotation_matrix() const {
        const double n =
            std::sqrt(double(w) * w + double(x) * x + double(y) * y +
                      double(z) * z);
        const double qw = w / n, qx = x / n, qy = y / n, qz = z / n;
        Mat3<double> r;
        r(0, 0) = 1 - 2 * (qy * qy + qz * qz);
        r(0, 1) = 2 * (qx * qy - qw * qz);
        r(0, 2) = 2 * (qx * qz + qw * qy);
        r(1, 0) = 2 * (qx * qy + qw * qz);
        r(1, 1) = 1 - 2 * (qx * qx + qz * qz);
        r(1, 2) = 2 * (qy * qz - qw * qx);
        r(2, 0) = 2 * (qx * qz - qw * qy);
        r(2, 1) = 2 * (qy * qz + qw * qx);
        r(2, 2) = 1 - 2 * (qx * qx + qy * qy);
        return r.cast<T>();
    }
};

// PCG32. All randomness in the project flows through this so scenes and
// reports are byte-identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        state_ = 0;
        inc_ = (stream << 1u) | 1u;
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint32_t next_u32() {
        const std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        const std::uint32_t xorshifted =
            static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        const std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
    }

    // Uniform in [0, 1).
    float uniform() { return static_cast<float>(next_u32() >> 8) * 0x1.0p-24f; }

    float uniform(float lo, float hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; one value per call, the pair's second half is cached.
    float normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        float u1 = uniform();
        while (u1 <= 1e-12f) u1 = uniform();
        const float u2 = uniform();
        const float r = std::sqrt(-2.0f * std::log(u1));
        const float a = 6.28318530717958648f * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_ = 0;
    std::uint64_t inc_ = 1;
    float spare_ = 0.0f;
    bool has_spare_ = false;
};

}  // namespace ags
