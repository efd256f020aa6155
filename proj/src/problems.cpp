#include "almton/problem.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace almton {

DerivativeBundle Problem::evaluate(const Vector& x, int order) const {
    if (x.size() != n) {
        throw std::invalid_argument(name + ": point has dimension " + std::to_string(x.size()) + ", expected " +
                                    std::to_string(n));
    }
    if (order < 0 || order > 3) {
        throw std::invalid_argument("Problem::evaluate: order must be in 0..3");
    }
    return evaluator(x, order);
}

double Problem::value(const Vector& x) const { return evaluate(x, 0).f; }

namespace {

// Value and derivatives of a function of two variables.
struct Local2 {
    double f = 0.0;
    double gx = 0.0, gy = 0.0;
    double hxx = 0.0, hxy = 0.0, hyy = 0.0;
    double txxx = 0.0, txxy = 0.0, txyy = 0.0, tyyy = 0.0;
};

DerivativeBundle pack2(const Vector& x, const Local2& d, int order) {
    DerivativeBundle b;
    b.x = x;
    b.f = d.f;
    if (order >= 1) {
        b.g = Vector(2);
        b.g << d.gx, d.gy;
    }
    if (order >= 2) {
        Matrix h(2, 2);
        h << d.hxx, d.hxy, d.hxy, d.hyy;
        b.H = SymMatrix(h);
    }
    if (order >= 3) {
        const std::array<double, 4> t{d.txxx, d.txxy, d.txyy, d.tyyy};
        b.T = ThirdTensor::from_generator(2, [&](int i, int j, int k) { return t[static_cast<std::size_t>(i + j + k)]; });
    }
    return b;
}

Problem make2d(std::string name, std::function<Local2(double, double)> local, double lo, double hi) {
    Problem p;
    p.name = std::move(name);
    p.n = 2;
    p.evaluator = [local = std::move(local)](const Vector& x, int order) {
        return pack2(x, local(x(0), x(1)), order);
    };
    p.lo = Vector::Constant(2, lo);
    p.hi = Vector::Constant(2, hi);
    return p;
}

// Newton on the analytic gradient; sharpens tabulated minimizers.
Vector refine(const Problem& p, Vector x) {
    for (int it = 0; it < 50; ++it) {
        const DerivativeBundle b = p.evaluate(x, 2);
        if (b.g.norm() < 1e-15) {
            break;
        }
        x -= b.H.dense().ldlt().solve(b.g);
    }
    return x;
}

Vector point2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

// Root of a cubic polynomial by Newton from a starting guess.
double newton_root(double c3, double c2, double c1, double c0, double x) {
    for (int it = 0; it < 100; ++it) {
        const double f = ((c3 * x + c2) * x + c1) * x + c0;
        const double d = (3.0 * c3 * x + 2.0 * c2) * x + c1;
        const double dx = f / d;
        x -= dx;
        if (std::abs(dx) < 1e-16 * std::max(1.0, std::abs(x))) {
            break;
        }
    }
    return x;
}

// Dense polynomial in one variable, lowest degree first.
using Poly = std::vector<double>;

Poly multiply(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

Scalar3 eval_poly(const Poly& p, double x) {
    Scalar3 r;
    std::vector<double> pw(p.size() + 1, 1.0);
    for (std::size_t i = 1; i < pw.size(); ++i) {
        pw[i] = pw[i - 1] * x;
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double k = static_cast<double>(i);
        r.v += p[i] * pw[i];
        if (i >= 1) r.d1 += k * p[i] * pw[i - 1];
        if (i >= 2) r.d2 += k * (k - 1.0) * p[i] * pw[i - 2];
        if (i >= 3) r.d3 += k * (k - 1.0) * (k - 2.0) * p[i] * pw[i - 3];
    }
    return r;
}

}  // namespace

Problem rosenbrock(int n) {
    if (n < 2) {
        throw std::invalid_argument("rosenbrock: n must be at least 2");
    }
    Problem p;
    p.name = n == 2 ? "rosenbrock" : "rosenbrock:" + std::to_string(n);
    p.n = n;
    p.evaluator = [n](const Vector& x, int order) {
        DerivativeBundle b;
        b.x = x;
        Vector g = Vector::Zero(n);
        Matrix h = Matrix::Zero(n, n);
        Vector tiii = Vector::Zero(n);
        Vector tiij = Vector::Zero(n);  // T(i, i, i+1)
        double f = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            const double a = x(i + 1) - x(i) * x(i);
            const double r = 1.0 - x(i);
            f += 100.0 * a * a + r * r;
            g(i) += -400.0 * x(i) * a - 2.0 * r;
            g(i + 1) += 200.0 * a;
            h(i, i) += 1200.0 * x(i) * x(i) - 400.0 * x(i + 1) + 2.0;
            h(i, i + 1) += -400.0 * x(i);
            h(i + 1, i) += -400.0 * x(i);
            h(i + 1, i + 1) += 200.0;
            tiii(i) += 2400.0 * x(i);
            tiij(i) = -400.0;
        }
        b.f = f;
        if (order >= 1) {
            b.g = g;
        }
        if (order >= 2) {
            b.H = SymMatrix(h);
        }
        if (order >= 3) {
            b.T = ThirdTensor::from_generator(n, [&](int i, int j, int k) {
                if (i == j && j == k) {
                    return tiii(i);
                }
                if (i == j && k == i + 1) {
                    return tiij(i);
                }
                return 0.0;
            });
        }
        return b;
    };
    p.lo = Vector::Constant(n, -2.0);
    p.hi = Vector::Constant(n, 2.0);
    p.known_minimizers = {Vector::Ones(n)};
    p.f_low = 0.0;
    p.standard_start = Vector::Constant(n, -1.0);
    return p;
}

Problem himmelblau() {
    Problem p = make2d(
        "himmelblau",
        [](double x, double y) {
            Local2 d;
            const double a = x * x + y - 11.0;
            const double b = x + y * y - 7.0;
            d.f = a * a + b * b;
            d.gx = 4.0 * x * a + 2.0 * b;
            d.gy = 2.0 * a + 4.0 * y * b;
            d.hxx = 12.0 * x * x + 4.0 * y - 42.0;
            d.hxy = 4.0 * (x + y);
            d.hyy = 12.0 * y * y + 4.0 * x - 26.0;
            d.txxx = 24.0 * x;
            d.txxy = 4.0;
            d.txyy = 4.0;
            d.tyyy = 24.0 * y;
            return d;
        },
        -5.0, 5.0);
    p.known_minimizers = {point2(3.0, 2.0), refine(p, point2(-2.805118086952745, 3.131312518250573)),
                          refine(p, point2(-3.779310253377747, -3.283185991286170)),
                          refine(p, point2(3.584428340330492, -1.848126526964404))};
    p.f_low = 0.0;
    p.standard_start = Vector::Zero(2);
    return p;
}

Problem three_hump_camel() {
    Problem p = make2d(
        "camel3",
        [](double x, double y) {
            Local2 d;
            const double x2 = x * x;
            d.f = 2.0 * x2 - 1.05 * x2 * x2 + x2 * x2 * x2 / 6.0 + x * y + y * y;
            d.gx = 4.0 * x - 4.2 * x2 * x + x2 * x2 * x + y;
            d.gy = x + 2.0 * y;
            d.hxx = 4.0 - 12.6 * x2 + 5.0 * x2 * x2;
            d.hxy = 1.0;
            d.hyy = 2.0;
            d.txxx = -25.2 * x + 20.0 * x2 * x;
            return d;
        },
        -2.0, 2.0);
    // On y = -x/2 the stationarity condition is x (x^4 - 4.2 x^2 + 3.5) = 0.
    const double xm = std::sqrt((4.2 + std::sqrt(4.2 * 4.2 - 14.0)) / 2.0);
    p.known_minimizers = {point2(0.0, 0.0), point2(xm, -xm / 2.0), point2(-xm, xm / 2.0)};
    p.f_low = 0.0;
    p.standard_start = point2(1.0, 1.0);
    return p;
}

Problem styblinski_tang() {
    Problem p = make2d(
        "styblinski_tang",
        [](double x, double y) {
            Local2 d;
            d.f = 0.5 * (x * x * x * x - 16.0 * x * x + 5.0 * x + y * y * y * y - 16.0 * y * y + 5.0 * y);
            d.gx = 2.0 * x * x * x - 16.0 * x + 2.5;
            d.gy = 2.0 * y * y * y - 16.0 * y + 2.5;
            d.hxx = 6.0 * x * x - 16.0;
            d.hyy = 6.0 * y * y - 16.0;
            d.txxx = 12.0 * x;
            d.tyyy = 12.0 * y;
            return d;
        },
        -5.0, 5.0);
    const double a = newton_root(4.0, 0.0, -32.0, 5.0, -2.9);
    const double b = newton_root(4.0, 0.0, -32.0, 5.0, 2.75);
    p.known_minimizers = {point2(a, a), point2(a, b), point2(b, a), point2(b, b)};
    p.f_low = p.value(point2(a, a)) - 1e-9;
    p.standard_start = Vector::Zero(2);
    return p;
}

Problem two_well() {
    Problem p = make2d(
        "two_well",
        [](double x, double y) {
            Local2 d;
            const double q = x * x - 1.0;
            d.f = q * q + 2.0 * (y - x) * (y - x);
            d.gx = 4.0 * x * x * x - 4.0 * y;
            d.gy = 4.0 * (y - x);
            d.hxx = 12.0 * x * x;
            d.hxy = -4.0;
            d.hyy = 4.0;
            d.txxx = 24.0 * x;
            return d;
        },
        -2.0, 2.0);
    p.known_minimizers = {point2(1.0, 1.0), point2(-1.0, -1.0)};
    p.f_low = 0.0;
    p.standard_start = point2(0.5, -0.5);
    return p;
}

std::vector<Problem> classic_2d_suite() { return {himmelblau(), three_hump_camel(), styblinski_tang(), two_well()}; }

Problem quadratic(const Matrix& a, const Vector& b, std::string name) {
    const int n = static_cast<int>(b.size());
    if (a.rows() != n || a.cols() != n) {
        throw std::invalid_argument("quadratic: shape mismatch");
    }
    Problem p;
    p.name = std::move(name);
    p.n = n;
    const SymMatrix A(a);
    p.evaluator = [A, b, n](const Vector& x, int order) {
        DerivativeBundle out;
        out.x = x;
        const Vector ax = A.dense() * x;
        out.f = 0.5 * x.dot(ax) + b.dot(x);
        if (order >= 1) {
            out.g = ax + b;
        }
        if (order >= 2) {
            out.H = A;
        }
        if (order >= 3) {
            out.T = ThirdTensor::zero(n);
        }
        return out;
    };
    p.lo = Vector::Constant(n, -10.0);
    p.hi = Vector::Constant(n, 10.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(A.dense(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) > 0.0) {
        const Vector xs = -A.dense().ldlt().solve(b);
        p.known_minimizers = {xs};
        p.f_low = 0.5 * b.dot(xs) - 1e-12 * (1.0 + std::abs(b.dot(xs)));
    } else {
        p.f_low = -std::numeric_limits<double>::infinity();
    }
    p.standard_start = Vector::Zero(n);
    return p;
}

Scalar3 hairpin_barrier(double x, double xmin, double xmax) {
    Scalar3 r;
    double d = 0.0;
    if (x < xmin) {
        d = x - xmin;
    } else if (x > xmax) {
        d = x - xmax;
    } else {
        return r;
    }
    r.v = d * d * d * d;
    r.d1 = 4.0 * d * d * d;
    r.d2 = 12.0 * d * d;
    r.d3 = 24.0 * d;
    return r;
}

Problem hairpin_surrogate() {
    const Poly h{1.0, 0.0, 1.0};
    const Poly q{-0.25 / 0.75, 0.0, 1.0 / 0.75};
    const Poly w = multiply(q, q);
    Poly one_minus_w = w;
    for (double& c : one_minus_w) {
        c = -c;
    }
    one_minus_w[0] += 1.0;
    const Poly A = multiply(h, one_minus_w);
    const Poly B = multiply(h, w);
    Problem p = make2d(
        "hairpin_surrogate",
        [A, B](double x, double y) {
            const Scalar3 a = eval_poly(A, x);
            const Scalar3 c = eval_poly(B, x);
            // q = 1 / (1 + e^y) evaluated without overflow; u = 2q.
            const double e = std::exp(-std::abs(y));
            const double q = y > 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e);
            const double qq = q * (1.0 - q);
            Scalar3 u;
            u.v = 2.0 * q;
            u.d1 = -2.0 * qq;
            u.d2 = 2.0 * qq * (1.0 - 2.0 * q);
            u.d3 = -2.0 * qq * (1.0 - 6.0 * q + 6.0 * q * q);
            const Scalar3 bx = hairpin_barrier(x, -0.4, 0.5);
            const Scalar3 by = hairpin_barrier(y, 0.0, 5.0);
            const double r = 3e-4;
            Local2 d;
            d.f = a.v * u.v + c.v + r * x + 50.0 * (bx.v + by.v);
            d.gx = a.d1 * u.v + c.d1 + r + 50.0 * bx.d1;
            d.gy = a.v * u.d1 + 50.0 * by.d1;
            d.hxx = a.d2 * u.v + c.d2 + 50.0 * bx.d2;
            d.hxy = a.d1 * u.d1;
            d.hyy = a.v * u.d2 + 50.0 * by.d2;
            d.txxx = a.d3 * u.v + c.d3 + 50.0 * bx.d3;
            d.txxy = a.d2 * u.d1;
            d.txyy = a.d1 * u.d2;
            d.tyyy = a.v * u.d3 + 50.0 * by.d3;
            return d;
        },
        -1.0, 1.0);
    p.lo = point2(-1.0, -1.0);
    p.hi = point2(1.0, 6.0);
    p.f_low = -3e-4;  // h (1 - w) u + h w >= 0 for |x| <= 1
    p.standard_start = point2(0.9, 0.5);
    return p;
}

Problem fd_problem_wrapper(std::string name, std::function<double(const Vector&)> f, int n, Vector lo, Vector hi) {
    if (n < 1 || lo.size() != n || hi.size() != n) {
        throw std::invalid_argument("fd_problem_wrapper: inconsistent dimensions");
    }
    Problem p;
    p.name = std::move(name);
    p.n = n;
    p.approximate = true;
    p.evaluator = [f, n](const Vector& x, int order) {
        DerivativeBundle b;
        b.x = x;
        b.f = f(x);
        auto at = [&](int i, double di, int j, double dj, int k, double dk) {
            Vector y = x;
            if (i >= 0) y(i) += di;
            if (j >= 0) y(j) += dj;
            if (k >= 0) y(k) += dk;
            return f(y);
        };
        if (order >= 1) {
            const double h = 1e-6;
            b.g = Vector(n);
            for (int i = 0; i < n; ++i) {
                b.g(i) = (at(i, h, -1, 0, -1, 0) - at(i, -h, -1, 0, -1, 0)) / (2.0 * h);
            }
        }
        if (order >= 2) {
            const double h = 1e-4;
            Matrix hm(n, n);
            for (int i = 0; i < n; ++i) {
                for (int j = i; j < n; ++j) {
                    const double v = at(i, h, j, h, -1, 0) - at(i, h, j, -h, -1, 0) - at(i, -h, j, h, -1, 0) +
                                     at(i, -h, j, -h, -1, 0);
                    hm(i, j) = hm(j, i) = v / (4.0 * h * h);
                }
            }
            b.H = SymMatrix(hm);
        }
        if (order >= 3) {
            const double h = 1e-4;
            b.T = ThirdTensor::from_generator(n, [&](int i, int j, int k) {
                double sum = 0.0;
                for (int a = -1; a <= 1; a += 2) {
                    for (int c = -1; c <= 1; c += 2) {
                        for (int e = -1; e <= 1; e += 2) {
                            sum += a * c * e * at(i, a * h, j, c * h, k, e * h);
                        }
                    }
                }
                return sum / (8.0 * h * h * h);
            });
        }
        return b;
    };
    p.lo = std::move(lo);
    p.hi = std::move(hi);
    p.f_low = -std::numeric_limits<double>::infinity();
    p.standard_start = 0.5 * (p.lo + p.hi);
    return p;
}

Problem make_problem(const std::string& name) {
    if (name == "rosenbrock") {
        return rosenbrock(2);
    }
    const std::string prefix = "rosenbrock:";
    if (name.rfind(prefix, 0) == 0) {
        const std::string tail = name.substr(prefix.size());
        std::size_t used = 0;
        int n = 0;
        try {
            n = std::stoi(tail, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tail.size()) {
            throw std::invalid_argument("bad rosenbrock dimension in '" + name + "'");
        }
        return rosenbrock(n);
    }
    if (name == "himmelblau") return himmelblau();
    if (name == "camel3") return three_hump_camel();
    if (name == "styblinski_tang") return styblinski_tang();
    if (name == "two_well") return two_well();
    if (name == "hairpin_surrogate") return hairpin_surrogate();
    throw std::invalid_argument("unknown problem '" + name + "'");
}

std::vector<Problem> problems_by_name(const std::string& name) {
    if (name == "classic") {
        return classic_2d_suite();
    }
    return {make_problem(name)};
}

std::vector<std::string> problem_names() {
    return {"rosenbrock", "rosenbrock:N", "himmelblau", "camel3", "styblinski_tang", "two_well", "hairpin_surrogate",
            "classic"};
}

}  // namespace almton
