#include "raman/least_squares.hpp"

#include <cmath>
#include <limits>

namespace raman {

Eigen::MatrixXd numeric_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r0 = f(x);
  Eigen::MatrixXd jac(r0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
    xp(j) = x(j) + h;
    const Eigen::VectorXd fp = f(xp);
    xp(j) = x(j) - h;
    const Eigen::VectorXd fm = f(xp);
    xp(j) = x(j);
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

LmResult levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd x,
                             const LmOptions& opt) {
  LmResult out;
  Eigen::VectorXd r = f(x);
  double cost = r.squaredNorm();
  out.cost_history.push_back(cost);
  double lambda = opt.initial_damping;

  for (int it = 0; it < opt.max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::MatrixXd jac = numeric_jacobian(f, x);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (cost == 0.0 || grad.cwiseAbs().maxCoeff() <= opt.g_tol * std::max(cost, 1e-300)) {
      out.converged = true;
      out.message = "gradient below tolerance";
      break;
    }

    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index j = 0; j < a.rows(); ++j)
        a(j, j) += lambda * std::max(jtj(j, j), 1e-12);
      const Eigen::VectorXd step = a.ldlt().solve(-grad);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd x_new = x + step;
      const Eigen::VectorXd r_new = f(x_new);
      const double cost_new = r_new.allFinite() ? r_new.squaredNorm()
                                                : std::numeric_limits<double>::infinity();
      if (cost_new < cost) {
        const double rel_decrease = (cost - cost_new) / cost;
        const bool small_step = step.norm() <= opt.x_tol * (x.norm() + opt.x_tol);
        x = x_new;
        r = r_new;
        cost = cost_new;
        out.cost_history.push_back(cost);
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (small_step || rel_decrease <= opt.f_tol) {
          out.converged = true;
          out.message = small_step ? "parameter step below tolerance" : "cost decrease below tolerance";
        }
      } else {
        lambda *= 4.0;
      }
    }
    if (out.converged) break;
    if (!accepted) {
      // No descent direction left at any damping: a (possibly flat) minimum.
      out.converged = true;
      out.message = "no further decrease possible";
      break;
    }
  }
  if (!out.converged) out.message = "maximum iterations reached";
  out.params = x;
  out.residuals = r;
  out.cost = cost;
  out.jacobian = numeric_jacobian(f, x);
  return out;
}

}  // namespace raman
