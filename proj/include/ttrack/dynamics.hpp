#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "ttrack/errors.hpp"
#include "ttrack/model.hpp"

namespace ttrack {

/// The terms of the plant equation  M(q) q" + C(q,q') q' + G(q) = u + u_f,
/// with u_f = -B q' (viscous, always dissipative).
struct DynamicsTerms {
  MatrixXd M;
  MatrixXd C;
  VectorXd G;
  VectorXd u_f;
};

namespace detail {

/// Kinematic scratch for one configuration.
///
/// With phi_j = q_0 + ... + q_j the absolute angle of link j from the
/// downward vertical, the COM of link j sits at
///   p_j = sum_{b<j} l_b e(phi_b) + lc_j e(phi_j),   e(phi) = (sin, -cos).
/// Column k of the COM Jacobian J_j is the suffix sum
///   R_j(k) = sum_{b in [k, j)} l_b r(phi_b) + [k <= j] lc_j r(phi_j)
/// with r(phi) = (cos, sin) = e'(phi), and the derivative of that column
/// w.r.t. q_g is -A_j(max(k, g)) where A_j has the same suffix structure
/// over e(phi). Everything below reduces to dot products of R and A.
struct ChainGeometry {
  int n;
  // r_suffix[j] and e_suffix[j] hold R_j(k), A_j(k) for k = 0..j, as 2x(j+1)
  std::vector<Eigen::Matrix2Xd> r_suffix;
  std::vector<Eigen::Matrix2Xd> e_suffix;

  ChainGeometry(const MechanismModel& model, const VectorXd& q) : n(model.n()) {
    r_suffix.resize(n);
    e_suffix.resize(n);
    VectorXd phi(n);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      acc += q[j];
      phi[j] = acc;
    }
    for (int j = 0; j < n; ++j) {
      Eigen::Matrix2Xd R(2, j + 1), A(2, j + 1);
      const double lc = model.links[j].com_distance;
      Eigen::Vector2d r_acc(lc * std::cos(phi[j]), lc * std::sin(phi[j]));
      Eigen::Vector2d e_acc(lc * std::sin(phi[j]), -lc * std::cos(phi[j]));
      R.col(j) = r_acc;
      A.col(j) = e_acc;
      for (int k = j - 1; k >= 0; --k) {
        const double l = model.links[k].length;
        r_acc += l * Eigen::Vector2d(std::cos(phi[k]), std::sin(phi[k]));
        e_acc += l * Eigen::Vector2d(std::sin(phi[k]), -std::cos(phi[k]));
        R.col(k) = r_acc;
        A.col(k) = e_acc;
      }
      r_suffix[j] = std::move(R);
      e_suffix[j] = std::move(A);
    }
  }
};

inline MatrixXd mass_matrix_impl(const MechanismModel& model,
                                 const ChainGeometry& geom) {
  const int n = geom.n;
  MatrixXd M = MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const double m = model.links[j].mass;
    const double inertia = model.links[j].inertia_com;
    const auto& R = geom.r_suffix[j];
    for (int i = 0; i <= j; ++i) {
      for (int k = 0; k <= i; ++k) {
        M(i, k) += m * R.col(i).dot(R.col(k)) + inertia;
      }
    }
  }
  // fill the upper triangle from the lower one, exact symmetry by copy
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) M(i, k) = M(k, i);
  return M;
}

/// Analytic dM/dq_g for all g; each slice is symmetric.
inline std::vector<MatrixXd> mass_matrix_partials_impl(
    const MechanismModel& model, const ChainGeometry& geom) {
  const int n = geom.n;
  std::vector<MatrixXd> dM(n, MatrixXd::Zero(n, n));
  for (int j = 0; j < n; ++j) {
    const double m = model.links[j].mass;
    const auto& R = geom.r_suffix[j];
    const auto& A = geom.e_suffix[j];
    for (int g = 0; g <= j; ++g) {
      MatrixXd& D = dM[g];
      for (int i = 0; i <= j; ++i) {
        for (int k = 0; k <= i; ++k) {
          const double v = -m * (A.col(std::max(i, g)).dot(R.col(k)) +
                                 R.col(i).dot(A.col(std::max(k, g))));
          D(i, k) += v;
        }
      }
    }
  }
  for (int g = 0; g < n; ++g)
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k) dM[g](i, k) = dM[g](k, i);
  return dM;
}

}  // namespace detail

/// Mass matrix M(q); symmetric positive definite for a valid model.
inline MatrixXd mass_matrix(const MechanismModel& model, const VectorXd& q) {
  detail::require_dim(q, model.n(), "q");
  detail::ChainGeometry geom(model, q);
  return detail::mass_matrix_impl(model, geom);
}

/// Analytic partial derivatives dM/dq_g, g = 0..n-1.
inline std::vector<MatrixXd> mass_matrix_partials(const MechanismModel& model,
                                                  const VectorXd& q) {
  detail::require_dim(q, model.n(), "q");
  detail::ChainGeometry geom(model, q);
  return detail::mass_matrix_partials_impl(model, geom);
}

/// Coriolis matrix from Christoffel symbols of the first kind,
///   C_ij = sum_k 1/2 (dM_ij/dq_k + dM_ik/dq_j - dM_jk/dq_i) qdot_k,
/// so that Mdot - 2C is skew-symmetric.
inline MatrixXd coriolis_matrix(const MechanismModel& model, const VectorXd& q,
                                const VectorXd& qdot) {
  const int n = model.n();
  detail::require_dim(q, n, "q");
  detail::require_dim(qdot, n, "qdot");
  detail::ChainGeometry geom(model, q);
  const std::vector<MatrixXd> dM = detail::mass_matrix_partials_impl(model, geom);
  MatrixXd C = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double cij = 0.0;
      for (int k = 0; k < n; ++k) {
        cij += 0.5 * (dM[k](i, j) + dM[j](i, k) - dM[i](j, k)) * qdot[k];
      }
      C(i, j) = cij;
    }
  }
  return C;
}

/// Gravity torque G(q) = grad_q V(q).
inline VectorXd gravity_vector(const MechanismModel& model, const VectorXd& q) {
  const int n = model.n();
  detail::require_dim(q, n, "q");
  detail::ChainGeometry geom(model, q);
  VectorXd G = VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const double mg = model.links[j].mass * model.gravity;
    const auto& R = geom.r_suffix[j];
    for (int k = 0; k <= j; ++k) G[k] += mg * R(1, k);  // y-row of the Jacobian
  }
  return G;
}

/// Viscous joint friction u_f = -B qdot, B = diag(damping_i).
/// The delivered power qdot . u_f is never positive.
inline VectorXd friction_force(const MechanismModel& model,
                               const VectorXd& qdot) {
  const int n = model.n();
  detail::require_dim(qdot, n, "qdot");
  VectorXd f(n);
  for (int i = 0; i < n; ++i) f[i] = -model.links[i].damping * qdot[i];
  return f;
}

inline DynamicsTerms dynamics_terms(const MechanismModel& model,
                                    const JointState& state) {
  validate_state(model, state);
  detail::ChainGeometry geom(model, state.q);
  DynamicsTerms t;
  t.M = detail::mass_matrix_impl(model, geom);
  const std::vector<MatrixXd> dM =
      detail::mass_matrix_partials_impl(model, geom);
  const int n = model.n();
  t.C = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double cij = 0.0;
      for (int k = 0; k < n; ++k)
        cij += 0.5 * (dM[k](i, j) + dM[j](i, k) - dM[i](j, k)) * state.qdot[k];
      t.C(i, j) = cij;
    }
  t.G = VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const double mg = model.links[j].mass * model.gravity;
    const auto& R = geom.r_suffix[j];
    for (int k = 0; k <= j; ++k) t.G[k] += mg * R(1, k);
  }
  t.u_f = friction_force(model, state.qdot);
  return t;
}

/// Joint accelerations under applied torque u:
///   q" = M^-1 (u + u_f - C q' - G),
/// solved through an LLT factorization. A failed factorization signals a
/// degenerate model and raises NumericalError.
inline VectorXd forward_dynamics(const MechanismModel& model,
                                 const JointState& state, const VectorXd& u) {
  detail::require_dim(u, model.n(), "u");
  const DynamicsTerms t = dynamics_terms(model, state);
  const VectorXd rhs = u + t.u_f - t.C * state.qdot - t.G;
  Eigen::LLT<MatrixXd> llt(t.M);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("mass matrix is not positive definite");
  }
  return llt.solve(rhs);
}

/// Torque that realizes acceleration v exactly under the model dynamics:
///   u = M v + C q' + G - u_f.
inline VectorXd inverse_dynamics(const MechanismModel& model,
                                 const JointState& state, const VectorXd& v) {
  detail::require_dim(v, model.n(), "v");
  const DynamicsTerms t = dynamics_terms(model, state);
  return t.M * v + t.C * state.qdot + t.G - t.u_f;
}

inline double kinetic_energy(const MechanismModel& model,
                             const JointState& state) {
  validate_state(model, state);
  const MatrixXd M = mass_matrix(model, state.q);
  return 0.5 * state.qdot.dot(M * state.qdot);
}

/// Gravitational potential, zeroed at the hanging configuration q = 0.
inline double potential_energy(const MechanismModel& model, const VectorXd& q) {
  const int n = model.n();
  detail::require_dim(q, n, "q");
  double V = 0.0;
  double phi = 0.0;
  double base_y = 0.0;    // joint height relative to the base joint
  double base_depth = 0.0;  // joint depth below the base when hanging
  for (int j = 0; j < n; ++j) {
    phi += q[j];
    const LinkParams& lk = model.links[j];
    const double com_y = base_y - lk.com_distance * std::cos(phi);
    const double com_depth = base_depth + lk.com_distance;
    V += lk.mass * model.gravity * (com_y + com_depth);
    base_y -= lk.length * std::cos(phi);
    base_depth += lk.length;
  }
  return V;
}

inline double total_energy(const MechanismModel& model,
                           const JointState& state) {
  return kinetic_energy(model, state) + potential_energy(model, state.q);
}

}  // namespace ttrack
