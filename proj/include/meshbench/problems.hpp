#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "meshbench/errors.hpp"

namespace meshbench {

/// Symmetric 2x2 diffusion tensor.
struct SymTensor2 {
    double k11 = 1.0;
    double k12 = 0.0;
    double k22 = 1.0;

    bool positive_definite() const {
        return k11 > 0.0 && k11 * k22 - k12 * k12 > 0.0;
    }
};

/// The four tensor partials entering the first-order operator moments:
/// d(K11)/dx, d(K12)/dy, d(K12)/dx, d(K22)/dy.
struct TensorPartials {
    double dk11_dx = 0.0;
    double dk12_dy = 0.0;
    double dk12_dx = 0.0;
    double dk22_dy = 0.0;
};

/// Diffusion problem -div(K grad u) = f with Dirichlet data g on the
/// boundary. Manufactured problems carry the exact solution and the
/// analytically derived source.
struct Problem {
    std::string name;
    std::function<SymTensor2(double, double)> K;
    std::function<TensorPartials(double, double)> dK;  // may be empty
    std::function<double(double, double)> u_exact;
    std::function<double(double, double)> f;
    std::function<double(double, double)> g;  // boundary data; equals u_exact here
};

/// Evaluates the tensor and checks it is positive definite; a failure here
/// means the problem definition itself is broken.
inline SymTensor2 tensor_eval(const Problem& prob, double x, double y) {
    const SymTensor2 k = prob.K(x, y);
    if (!k.positive_definite())
        throw Error("tensor_eval: K not positive definite at (" + std::to_string(x) +
                    ", " + std::to_string(y) + ") in problem " + prob.name);
    return k;
}

namespace detail {

// f = -(K11 uxx + 2 K12 uxy + K22 uyy + (dxK11 + dyK12) ux + (dxK12 + dyK22) uy),
// the expansion of -div(K grad u) for symmetric K. All pieces analytic.
struct UDerivs {
    double ux, uy, uxx, uxy, uyy;
};

inline double manufactured_f(const SymTensor2& k, const TensorPartials& dk,
                             const UDerivs& u) {
    return -(k.k11 * u.uxx + 2.0 * k.k12 * u.uxy + k.k22 * u.uyy +
             (dk.dk11_dx + dk.dk12_dy) * u.ux + (dk.dk12_dx + dk.dk22_dy) * u.uy);
}

}  // namespace detail

/// The three built-in manufactured problems on [0,1]^2. The K, dK and f
/// expressions were derived symbolically once (scripts/derive_problems.py)
/// and are frozen here.
inline Problem builtin_problem(int id) {
    constexpr double kPi = 3.14159265358979323846;
    Problem p;
    switch (id) {
        case 1: {
            p.name = "problem1";
            p.K = [](double, double) { return SymTensor2{1.0, 0.0, 1.0}; };
            p.dK = [](double, double) { return TensorPartials{}; };
            p.u_exact = [](double x, double y) { return 2.0 * std::exp(2.0 * x + y); };
            p.f = [](double x, double y) { return -10.0 * std::exp(2.0 * x + y); };
            break;
        }
        case 2: {
            // K = P^T diag(1+2x^2+y^2, 1+x^2+2y^2) P, P = rotation by pi/8:
            //   K11 = 1 + (1+c^2) x^2 + (1+s^2) y^2
            //   K12 = c s (x^2 - y^2)
            //   K22 = 1 + (1+s^2) x^2 + (1+c^2) y^2
            const double c = std::cos(kPi / 8.0), s = std::sin(kPi / 8.0);
            const double c2 = c * c, s2 = s * s, cs = c * s;
            p.name = "problem2";
            p.K = [=](double x, double y) {
                return SymTensor2{1.0 + (1.0 + c2) * x * x + (1.0 + s2) * y * y,
                                  cs * (x * x - y * y),
                                  1.0 + (1.0 + s2) * x * x + (1.0 + c2) * y * y};
            };
            p.dK = [=](double x, double y) {
                return TensorPartials{2.0 * (1.0 + c2) * x, -2.0 * cs * y,
                                      2.0 * cs * x, 2.0 * (1.0 + c2) * y};
            };
            p.u_exact = [](double x, double y) {
                return std::sin(kPi * x) * std::sin(kPi * y);
            };
            p.f = [=, K = p.K, dK = p.dK](double x, double y) {
                const double sx = std::sin(kPi * x), sy = std::sin(kPi * y);
                const double cx = std::cos(kPi * x), cy = std::cos(kPi * y);
                const detail::UDerivs u{kPi * cx * sy, kPi * sx * cy,
                                        -kPi * kPi * sx * sy, kPi * kPi * cx * cy,
                                        -kPi * kPi * sx * sy};
                return detail::manufactured_f(K(x, y), dK(x, y), u);
            };
            break;
        }
        case 3: {
            // Rotation by pi/4 with D = diag(1+2x^2+y^2+y^5, 1+x^2+2y^2+x^3):
            //   K11 = K22 = 1 + 1.5 x^2 + 1.5 y^2 + (x^3 + y^5)/2
            //   K12 = (x^2 - y^2 + y^5 - x^3)/2
            p.name = "problem3";
            p.K = [](double x, double y) {
                const double diag = 1.0 + 1.5 * x * x + 1.5 * y * y +
                                    0.5 * (x * x * x + y * y * y * y * y);
                const double off = 0.5 * (x * x - y * y + y * y * y * y * y - x * x * x);
                return SymTensor2{diag, off, diag};
            };
            p.dK = [](double x, double y) {
                const double y4 = y * y * y * y;
                return TensorPartials{3.0 * x + 1.5 * x * x, 2.5 * y4 - y,
                                      x - 1.5 * x * x, 3.0 * y + 2.5 * y4};
            };
            p.u_exact = [](double x, double y) {
                return std::sin(kPi * x) * std::sin(kPi * y);
            };
            p.f = [K = p.K, dK = p.dK](double x, double y) {
                const double sx = std::sin(kPi * x), sy = std::sin(kPi * y);
                const double cx = std::cos(kPi * x), cy = std::cos(kPi * y);
                const detail::UDerivs u{kPi * cx * sy, kPi * sx * cy,
                                        -kPi * kPi * sx * sy, kPi * kPi * cx * cy,
                                        -kPi * kPi * sx * sy};
                return detail::manufactured_f(K(x, y), dK(x, y), u);
            };
            break;
        }
        default:
            throw InvalidInput("builtin_problem: unknown id " + std::to_string(id));
    }
    p.g = p.u_exact;
    return p;
}

/// Numeric tensor partials for user problems that do not supply dK:
/// central differences with step 1e-6 times the domain diameter.
inline TensorPartials numeric_tensor_partials(const Problem& prob, double x, double y,
                                              double domain_diameter) {
    const double h = 1e-6 * domain_diameter;
    const SymTensor2 xp = prob.K(x + h, y), xm = prob.K(x - h, y);
    const SymTensor2 yp = prob.K(x, y + h), ym = prob.K(x, y - h);
    return TensorPartials{(xp.k11 - xm.k11) / (2 * h), (yp.k12 - ym.k12) / (2 * h),
                          (xp.k12 - xm.k12) / (2 * h), (yp.k22 - ym.k22) / (2 * h)};
}

}  // namespace meshbench
