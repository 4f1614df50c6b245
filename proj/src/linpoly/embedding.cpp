#include <Eigen/SVD>

#include "imk/error.hpp"
#include "imk/linpoly.hpp"

namespace imk {

Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& A, const Eigen::RowVectorXd& c,
                                     int k) {
  Eigen::MatrixXd o(k, A.cols());
  Eigen::RowVectorXd row = c;
  for (int i = 0; i < k; ++i) {
    o.row(i) = row;
    row = row * A;
  }
  return o;
}

namespace {

struct Reduced {
  Eigen::MatrixXd A;
  Eigen::RowVectorXd c;
  bool reduced = false;
};

// Observable quotient: V spans the row space of the observability matrix,
// A_o = V A V^T, c_o = c V^T.
Reduced observable_part(const Eigen::MatrixXd& A, const Eigen::RowVectorXd& c) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd o = observability_matrix(A, c, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(o, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double thresh = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rank;
  if (rank == n) return {A, c, false};
  if (rank == 0) throw NoEmbedding("output map is zero; nothing is observable");
  Eigen::MatrixXd v = svd.matrixV().leftCols(rank).transpose();
  return {v * A * v.transpose(), c * v.transpose(), true};
}

double inf_norm(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

EmbeddingResult solve_embedding(const Eigen::MatrixXd& Q, const Eigen::RowVectorXd& theta,
                                const Eigen::MatrixXd& F, const Eigen::RowVectorXd& phi,
                                double tol) {
  if (Q.rows() != Q.cols() || Q.rows() < 1 || theta.size() != Q.rows())
    throw InvalidInput("(Q, theta) has inconsistent dimensions");
  if (F.rows() != F.cols() || F.rows() < 1 || phi.size() != F.rows())
    throw InvalidInput("(F, phi) has inconsistent dimensions");

  Reduced q = observable_part(Q, theta);
  Reduced f = observable_part(F, phi);
  EmbeddingResult out;
  out.Q_used = q.A;
  out.theta_used = q.c;
  out.F_used = f.A;
  out.phi_used = f.c;
  out.reduced_Q = q.reduced;
  out.reduced_F = f.reduced;

  const int m = static_cast<int>(q.A.rows());
  const int nf = static_cast<int>(f.A.rows());
  if (nf < m)
    throw NoEmbedding("observable part of F (dim " + std::to_string(nf) +
                      ") is smaller than that of Q (dim " + std::to_string(m) + ")");
  const int depth = nf + m;
  Eigen::MatrixXd of = observability_matrix(f.A, f.c, depth);
  Eigen::MatrixXd oq = observability_matrix(q.A, q.c, depth);
  out.T = of.completeOrthogonalDecomposition().solve(oq);
  out.matching_residual = inf_norm(of * out.T - oq);
  out.residual_FT = inf_norm(f.A * out.T - out.T * q.A);
  out.residual_phi = inf_norm(f.c * out.T - q.c);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.T);
  out.min_singular_value = svd.singularValues()(m - 1);

  if (out.matching_residual > tol || out.residual_FT > tol || out.residual_phi > tol)
    throw NoEmbedding("no T with FT = TQ and phi T = theta: matching residual " +
                      std::to_string(out.matching_residual) + ", ||FT - TQ|| " +
                      std::to_string(out.residual_FT) + ", ||phi T - theta|| " +
                      std::to_string(out.residual_phi));
  if (out.min_singular_value <= tol)
    throw NoEmbedding("T is rank deficient (smallest singular value " +
                      std::to_string(out.min_singular_value) + ")");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(out.T);
  Eigen::MatrixXd full_q = qr.householderQ() * Eigen::MatrixXd::Identity(nf, nf);
  out.P.resize(nf, nf);
  out.P.leftCols(m) = out.T;
  out.P.rightCols(nf - m) = full_q.rightCols(nf - m);
  out.block_form = out.P.fullPivLu().solve(f.A * out.P);
  out.orientation = "upper";
  return out;
}

}  // namespace imk
