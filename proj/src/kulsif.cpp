#include "aosr/kulsif.hpp"

#include <cmath>
#include <string>

#include "aosr/error.hpp"
#include "aosr/kernel.hpp"

namespace aosr {

namespace {

Eigen::MatrixXd stack_rows(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  Eigen::MatrixXd z(top.rows() + bottom.rows(), top.cols());
  z << top, bottom;
  return z;
}

void check_inputs(const KulsifModel& model, const Eigen::VectorXd& coefficients, const Eigen::MatrixXd& source,
                  const Eigen::MatrixXd& aux) {
  require(source.rows() >= 1 && aux.rows() >= 1, "kulsif: empty sample set");
  require(source.cols() == model.dim() && aux.cols() == model.dim(), "kulsif: dimension mismatch");
  require(coefficients.size() == model.centers.rows(), "kulsif: coefficient count does not match centers");
}

}  // namespace

KulsifModel kulsif_fit(const Eigen::MatrixXd& source, const Eigen::MatrixXd& aux, double lambda, double sigma) {
  require(source.rows() >= 1 && aux.rows() >= 1, "kulsif_fit: S and T must be nonempty");
  require(source.cols() == aux.cols(), "kulsif_fit: S and T dimensions differ");
  require(lambda > 0.0 && std::isfinite(lambda), "kulsif_fit: lambda must be positive");
  require(sigma > 0.0 && std::isfinite(sigma), "kulsif_fit: sigma must be positive");

  KulsifModel model;
  model.centers = stack_rows(source, aux);
  model.sigma = sigma;
  model.lambda = lambda;
  model.num_source = source.rows();
  model.num_aux = aux.rows();

  const auto n = static_cast<double>(source.rows());
  const auto m = static_cast<double>(aux.rows());
  const Eigen::MatrixXd k_zz = gaussian_gram(model.centers, model.centers, sigma);
  const auto k_zs = k_zz.leftCols(source.rows());
  const auto k_zt = k_zz.rightCols(aux.rows());

  Eigen::MatrixXd lower = lambda * k_zz;
  lower.selfadjointView<Eigen::Lower>().rankUpdate(k_zt, 1.0 / m);
  Eigen::MatrixXd system = lower.selfadjointView<Eigen::Lower>();
  system.diagonal().array() += kKulsifJitter;
  const Eigen::VectorXd rhs = k_zs.rowwise().sum() / n;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::numerical, "kulsif_fit: factorization failed");
  model.coefficients = ldlt.solve(rhs);
  const double residual = (system * model.coefficients - rhs).norm();
  const double scale = rhs.norm();
  if (!model.coefficients.allFinite() || residual > 1e-8 * std::max(scale, 1e-300)) {
    // Symmetric indefinite fallback for badly conditioned systems.
    model.coefficients = system.colPivHouseholderQr().solve(rhs);
    const double retry = (system * model.coefficients - rhs).norm();
    if (!model.coefficients.allFinite() || retry > 1e-8 * std::max(scale, 1e-300)) {
      throw Error(ErrorKind::numerical,
                  "kulsif_fit: singular system (relative residual " + std::to_string(retry / scale) + ")");
    }
  }
  return model;
}

double kulsif_objective(const KulsifModel& model, const Eigen::VectorXd& coefficients, const Eigen::MatrixXd& source,
                        const Eigen::MatrixXd& aux) {
  check_inputs(model, coefficients, source, aux);
  const Eigen::VectorXd w_t = gaussian_gram(aux, model.centers, model.sigma) * coefficients;
  const Eigen::VectorXd w_s = gaussian_gram(source, model.centers, model.sigma) * coefficients;
  const Eigen::MatrixXd k_zz = gaussian_gram(model.centers, model.centers, model.sigma);
  const double norm_sq = coefficients.dot(k_zz * coefficients);
  return w_t.squaredNorm() / static_cast<double>(aux.rows()) - 2.0 * w_s.sum() / static_cast<double>(source.rows()) +
         model.lambda * norm_sq;
}

double kulsif_objective(const KulsifModel& model, const Eigen::MatrixXd& source, const Eigen::MatrixXd& aux) {
  return kulsif_objective(model, model.coefficients, source, aux);
}

Eigen::VectorXd kulsif_gradient(const KulsifModel& model, const Eigen::VectorXd& coefficients,
                                const Eigen::MatrixXd& source, const Eigen::MatrixXd& aux) {
  check_inputs(model, coefficients, source, aux);
  const Eigen::MatrixXd k_tz = gaussian_gram(aux, model.centers, model.sigma);
  const Eigen::MatrixXd k_sz = gaussian_gram(source, model.centers, model.sigma);
  const Eigen::MatrixXd k_zz = gaussian_gram(model.centers, model.centers, model.sigma);
  const auto n = static_cast<double>(source.rows());
  const auto m = static_cast<double>(aux.rows());
  return (2.0 / m) * (k_tz.transpose() * (k_tz * coefficients)) - (2.0 / n) * k_sz.transpose().rowwise().sum() +
         2.0 * model.lambda * (k_zz * coefficients);
}

Eigen::VectorXd kulsif_expansion(const KulsifModel& model, const Eigen::MatrixXd& x) {
  require(x.cols() == model.dim(),
          "ratio_predict: expected " + std::to_string(model.dim()) + " columns, got " + std::to_string(x.cols()));
  return gaussian_gram(x, model.centers, model.sigma) * model.coefficients;
}

Eigen::VectorXd ratio_predict(const KulsifModel& model, const Eigen::MatrixXd& x) {
  return kulsif_expansion(model, x).cwiseMax(0.0);
}

}  // namespace aosr
