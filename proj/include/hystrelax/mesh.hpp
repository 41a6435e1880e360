#pragma once

#include <Eigen/Dense>

namespace hystrelax {

/// Nodal grid function on a Mesh.
using Field = Eigen::ArrayXd;

/// Uniform 1-D grid on [0, x_len] with n nodes and zero-flux boundary
/// semantics. Inner products use the trapezoidal rule, which makes the
/// discrete Neumann Laplacian below exactly self-adjoint and mass
/// conserving.
struct Mesh {
    double x_len;
    int n;
    double h;

    Mesh(double x_len_, int n_);

    /// Node coordinates 0, h, ..., x_len.
    Field coords() const;

    /// Trapezoidal quadrature weights: h/2 at the ends, h inside.
    Field quad_weights() const;

    bool matches(const Field& f) const { return f.size() == n; }
};

/// Second-difference Laplacian with ghost-node reflection at both ends.
Field laplacian_apply(const Mesh& mesh, const Field& f);

/// Solves (I - alpha * laplacian) g = f by the Thomas algorithm.
Field solve_helmholtz(const Mesh& mesh, const Field& f, double alpha);

/// Trapezoidal L2 inner product, norm, and H1-seminorm (forward
/// differences on gradient cells).
double inner_h(const Mesh& mesh, const Field& f, const Field& g);
double norm_h(const Mesh& mesh, const Field& f);
double norm_grad(const Mesh& mesh, const Field& f);

}  // namespace hystrelax
