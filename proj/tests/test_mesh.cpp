#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "hystrelax/mesh.hpp"
#include "oracles.hpp"

using namespace hystrelax;

namespace {

double eigen_error(int n, double x_len) {
    const Mesh mesh(x_len, n);
    const Field x = mesh.coords();
    const Field f = (std::numbers::pi * x / x_len).cos();
    const Field lap = laplacian_apply(mesh, f);
    const double ev = std::pow(std::numbers::pi / x_len, 2);
    return (lap + ev * f).abs().maxCoeff();
}

}  // namespace

TEST_CASE("mesh invariants") {
    const Mesh mesh(2.0, 5);
    CHECK(mesh.h == doctest::Approx(0.5));
    CHECK(std::abs(mesh.h * (mesh.n - 1) - mesh.x_len) <= 1e-12 * mesh.x_len);
    CHECK_THROWS_AS(Mesh(1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(Mesh(0.0, 11), std::invalid_argument);
}

TEST_CASE("laplacian of a constant vanishes") {
    const Mesh mesh(3.0, 17);
    const Field f = Field::Constant(mesh.n, 4.2);
    CHECK(laplacian_apply(mesh, f).abs().maxCoeff() <= 1e-13);
}

TEST_CASE("laplacian stencil hand check on three nodes") {
    const Mesh mesh(2.0, 3);  // h = 1
    Field f(3);
    f << 0.0, 1.0, 0.0;
    const Field lap = laplacian_apply(mesh, f);
    CHECK(lap(0) == doctest::Approx(2.0));
    CHECK(lap(1) == doctest::Approx(-2.0));
    CHECK(lap(2) == doctest::Approx(2.0));
}

TEST_CASE("Neumann eigenfunction error is second order") {
    const double e1 = eigen_error(101, 1.0);
    const double e2 = eigen_error(201, 1.0);
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 4.5);
}

TEST_CASE("laplacian is self-adjoint and mass conserving") {
    const Mesh mesh(1.7, 31);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const Field ones = Field::Ones(mesh.n);
    for (int k = 0; k < 50; ++k) {
        Field f(mesh.n), g(mesh.n);
        for (int i = 0; i < mesh.n; ++i) {
            f(i) = uni(rng);
            g(i) = uni(rng);
        }
        const double lhs = inner_h(mesh, laplacian_apply(mesh, f), g);
        const double rhs = inner_h(mesh, f, laplacian_apply(mesh, g));
        CHECK(std::abs(lhs - rhs) <= 1e-10);
        CHECK(std::abs(inner_h(mesh, laplacian_apply(mesh, f), ones)) <= 1e-10);
    }
}

TEST_CASE("helmholtz solve: constants, identity limit, residual") {
    const Mesh mesh(1.0, 64);
    const Field c = Field::Constant(mesh.n, 2.5);
    CHECK((solve_helmholtz(mesh, c, 0.37) - c).abs().maxCoeff() <= 1e-12);

    // identity limit on a smooth field: |g - f| ~ alpha * |lap f|
    const Field smooth = (std::numbers::pi * mesh.coords()).cos();
    CHECK((solve_helmholtz(mesh, smooth, 1e-12) - smooth).abs().maxCoeff() <= 1e-8);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Field f(mesh.n);
    for (int i = 0; i < mesh.n; ++i) f(i) = uni(rng);

    const double alpha = 0.05;
    const Field g = solve_helmholtz(mesh, f, alpha);
    const Field residual = g - alpha * laplacian_apply(mesh, g) - f;
    CHECK(norm_h(mesh, residual) <= 1e-10 * norm_h(mesh, f));
    CHECK_THROWS_AS(solve_helmholtz(mesh, f, 0.0), std::invalid_argument);
}

TEST_CASE("helmholtz solve matches the dense oracle and the eigen relation") {
    const Mesh mesh(1.0, 101);
    const Field x = mesh.coords();
    const Field f = (std::numbers::pi * x).cos();
    const double alpha = 0.2;
    const Field g = solve_helmholtz(mesh, f, alpha);

    const Field dense = oracles::helmholtz_dense(mesh, f, alpha);
    CHECK((g - dense).abs().maxCoeff() <= 1e-10);

    // cos is an exact discrete eigenvector of the reflection stencil
    const double ev_h = (2.0 - 2.0 * std::cos(std::numbers::pi * mesh.h)) / (mesh.h * mesh.h);
    const Field predicted = f / (1.0 + alpha * ev_h);
    CHECK((g - predicted).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("inner products and norms") {
    const Mesh mesh2(2.0, 41);
    const Field ones = Field::Ones(mesh2.n);
    CHECK(inner_h(mesh2, ones, ones) == doctest::Approx(2.0));
    CHECK(norm_grad(mesh2, Field::Constant(mesh2.n, 3.0)) == doctest::Approx(0.0));

    const Mesh mesh(1.0, 101);
    const Field x = mesh.coords();
    CHECK(std::abs(inner_h(mesh, x, x) - 1.0 / 3.0) <= 1e-4);

    const Mesh other(1.0, 51);
    CHECK_THROWS_AS(inner_h(mesh, x, other.coords()), std::invalid_argument);
    CHECK_THROWS_AS(norm_grad(mesh, other.coords()), std::invalid_argument);
}
