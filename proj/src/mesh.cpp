#include "hystrelax/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace hystrelax {

Mesh::Mesh(double x_len_, int n_) : x_len(x_len_), n(n_) {
    if (!(x_len > 0.0)) throw std::invalid_argument("Mesh: x_len must be positive");
    if (n < 3) throw std::invalid_argument("Mesh: need at least 3 nodes");
    h = x_len / static_cast<double>(n - 1);
}

Field Mesh::coords() const {
    return Field::LinSpaced(n, 0.0, x_len);
}

Field Mesh::quad_weights() const {
    Field w = Field::Constant(n, h);
    w(0) = 0.5 * h;
    w(n - 1) = 0.5 * h;
    return w;
}

namespace {

void check_field(const Mesh& mesh, const Field& f, const char* where) {
    if (!mesh.matches(f)) {
        throw std::invalid_argument(std::string(where) + ": field/mesh mismatch");
    }
}

}  // namespace

Field laplacian_apply(const Mesh& mesh, const Field& f) {
    check_field(mesh, f, "laplacian_apply");
    const int n = mesh.n;
    const double inv_h2 = 1.0 / (mesh.h * mesh.h);
    Field out(n);
    out(0) = 2.0 * (f(1) - f(0)) * inv_h2;
    out.segment(1, n - 2) =
        (f.head(n - 2) - 2.0 * f.segment(1, n - 2) + f.tail(n - 2)) * inv_h2;
    out(n - 1) = 2.0 * (f(n - 2) - f(n - 1)) * inv_h2;
    return out;
}

Field solve_helmholtz(const Mesh& mesh, const Field& f, double alpha) {
    check_field(mesh, f, "solve_helmholtz");
    if (!(alpha > 0.0)) throw std::invalid_argument("solve_helmholtz: alpha must be positive");

    const int n = mesh.n;
    const double a = alpha / (mesh.h * mesh.h);
    const double diag = 1.0 + 2.0 * a;

    // Rows: [diag, -2a | -a, diag, -a | ... | -2a, diag]; strictly
    // diagonally dominant, so the elimination never breaks down.
    Field cp(n - 1), dp(n);
    cp(0) = -2.0 * a / diag;
    dp(0) = f(0) / diag;
    for (int i = 1; i < n - 1; ++i) {
        const double m = diag + a * cp(i - 1);
        cp(i) = -a / m;
        dp(i) = (f(i) + a * dp(i - 1)) / m;
    }
    const double m_last = diag + 2.0 * a * cp(n - 2);
    dp(n - 1) = (f(n - 1) + 2.0 * a * dp(n - 2)) / m_last;

    Field g(n);
    g(n - 1) = dp(n - 1);
    for (int i = n - 2; i >= 0; --i) {
        g(i) = dp(i) - cp(i) * g(i + 1);
    }
    return g;
}

double inner_h(const Mesh& mesh, const Field& f, const Field& g) {
    check_field(mesh, f, "inner_h");
    check_field(mesh, g, "inner_h");
    return (f * g * mesh.quad_weights()).sum();
}

double norm_h(const Mesh& mesh, const Field& f) {
    return std::sqrt(std::max(inner_h(mesh, f, f), 0.0));
}

double norm_grad(const Mesh& mesh, const Field& f) {
    check_field(mesh, f, "norm_grad");
    const int n = mesh.n;
    const Field d = (f.tail(n - 1) - f.head(n - 1)) / mesh.h;
    return std::sqrt((d * d).sum() * mesh.h);
}

}  // namespace hystrelax
