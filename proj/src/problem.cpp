#include "neardgd/problem.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "neardgd/format.hpp"
#include "neardgd/rng.hpp"

namespace neardgd {

double Problem::value(const Vector& x) const {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += local_value(i, x);
  return sum / n;
}

Vector Problem::grad(const Vector& x) const {
  Vector g = Vector::Zero(p);
  for (int i = 0; i < n; ++i) g += local_grad(i, x);
  return g / n;
}

BlockMatrix Problem::stacked_grad(const BlockMatrix& X) const {
  if (X.rows() != n || X.cols() != p)
    throw std::invalid_argument("stacked_grad: state must be n x p");
  BlockMatrix G(n, p);
  for (int i = 0; i < n; ++i) G.row(i) = local_grad(i, X.row(i).transpose()).transpose();
  return G;
}

namespace {

constexpr double kRankTolerance = 1e-10;  // relative to the top singular value

// Shared assembly: local oracles from the data blocks, then the composite
// structure of the aggregate f(x) = ||(H/sqrt n) x - (y/sqrt n)||^2.
Problem build_regression(std::shared_ptr<RegressionData> data, int p, int n, int s,
                         std::uint64_t seed, double scale) {
  Problem prob;
  prob.kind = ProblemKind::kRegression;
  prob.p = p;
  prob.n = n;
  prob.s = s;
  prob.seed = seed;
  prob.scale = scale;
  prob.regression = data;

  prob.L_local.resize(n);
  for (int i = 0; i < n; ++i) {
    Eigen::JacobiSVD<Matrix> svd(data->h[i]);
    const double smax = svd.singularValues()(0);
    prob.L_local[i] = 2.0 * smax * smax;
  }
  prob.L = *std::max_element(prob.L_local.begin(), prob.L_local.end());

  prob.local_value = [data](int i, const Vector& x) {
    return (data->h[i].transpose() * x - data->y[i]).squaredNorm();
  };
  prob.local_grad = [data](int i, const Vector& x) {
    return Vector(2.0 * (data->h[i] * (data->h[i].transpose() * x - data->y[i])));
  };

  CompositeStructure cs;
  const double root_n = std::sqrt(static_cast<double>(n));
  cs.H.resize(n * s, p);
  cs.y.resize(n * s);
  for (int i = 0; i < n; ++i) {
    cs.H.middleRows(i * s, s) = data->h[i].transpose() / root_n;
    cs.y.segment(i * s, s) = data->y[i] / root_n;
  }

  Eigen::JacobiSVD<Matrix> svd(cs.H, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  cs.sigma_max = sv(0);
  if (!(cs.sigma_max > 0.0)) throw std::invalid_argument("make_regression: zero design matrix");
  const double tol = kRankTolerance * cs.sigma_max;
  int rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  cs.rank = rank;
  cs.c_hoffman = sv(rank - 1) * sv(rank - 1);
  cs.C_H = 1.0 / (cs.sigma_max * cs.sigma_max);
  cs.kernel_basis = svd.matrixV().rightCols(p - rank);

  // Minimum-norm least-squares solution via the thin SVD.
  Vector coef = svd.matrixU().leftCols(rank).transpose() * cs.y;
  coef.array() /= sv.head(rank).array();
  cs.x_hat = svd.matrixV().leftCols(rank) * coef;

  prob.f_star = (cs.H * cs.x_hat - cs.y).squaredNorm();
  prob.minimizer = cs.x_hat;
  cs.D = 0.0;  // filled below, constant_D wants the full problem
  prob.composite = std::move(cs);
  prob.composite->D = constant_D(prob, *prob.composite);
  return prob;
}

std::shared_ptr<RegressionData> sample_regression_data(int p, int n, int s, std::uint64_t seed,
                                                       double scale, bool shared_planted) {
  if (p < 1 || n < 1 || s < 1)
    throw std::invalid_argument("make_regression: p, n, s must all be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("make_regression: scale must be positive");
  Rng data_rng = Rng::stream(seed, "data");
  Rng planted_rng = Rng::stream(seed, "planted");
  auto data = std::make_shared<RegressionData>();
  data->h.reserve(n);
  for (int i = 0; i < n; ++i) data->h.push_back(Matrix(scale * data_rng.matrix(p, s, 0.0, 1.0)));
  Vector planted = planted_rng.vector(p, 0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    if (i > 0 && !shared_planted) planted = planted_rng.vector(p, 0.0, 1.0);
    data->y.push_back(data->h[i].transpose() * planted);
  }
  return data;
}

}  // namespace

Problem make_regression(int p, int n, int s, std::uint64_t seed, double scale) {
  auto data = sample_regression_data(p, n, s, seed, scale, false);
  return build_regression(std::move(data), p, n, s, seed, scale);
}

Problem make_regression_normalized(int p, int n, int s, std::uint64_t seed) {
  const Problem raw = make_regression(p, n, s, seed, 1.0);
  const double scale = 1.0 / raw.composite->sigma_max;
  return make_regression(p, n, s, seed, scale);
}

Problem make_regression_interpolating(int p, int n, int s, std::uint64_t seed, double scale) {
  auto data = sample_regression_data(p, n, s, seed, scale, true);
  return build_regression(std::move(data), p, n, s, seed, scale);
}

Problem make_piecewise_quartic(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("make_piecewise_quartic: n must be >= 1");
  Problem prob;
  prob.kind = ProblemKind::kPiecewiseQuartic;
  prob.p = 1;
  prob.n = n;
  prob.seed = seed;

  Vector b = Rng::stream(seed, "offsets").vector(n, -1.0, 1.0);
  b.array() -= b.mean();
  prob.quartic_offsets = b;

  prob.L_local.assign(n, 3.0);
  prob.L = 3.0;
  prob.local_value = [b](int i, const Vector& x) { return quartic_hinge(x[0]) + b[i] * x[0]; };
  prob.local_grad = [b](int i, const Vector& x) {
    return Vector::Constant(1, quartic_hinge_deriv(x[0]) + b[i]).eval();
  };
  prob.minimizer = Vector::Zero(1);
  prob.f_star = 0.0;
  return prob;
}

Vector project_to_optimal(const CompositeStructure& cs, const Vector& z) {
  if (z.size() != cs.x_hat.size())
    throw std::invalid_argument("project_to_optimal: dimension mismatch");
  if (cs.kernel_basis.cols() == 0) return cs.x_hat;
  return cs.x_hat + cs.kernel_basis * (cs.kernel_basis.transpose() * (z - cs.x_hat));
}

double hoffman_constant(const Matrix& H) {
  if (H.size() == 0) throw std::invalid_argument("hoffman_constant: empty matrix");
  Eigen::JacobiSVD<Matrix> svd(H);
  const Vector& sv = svd.singularValues();
  const double smax = sv(0);
  if (!(smax > 0.0)) throw std::invalid_argument("hoffman_constant: zero matrix has no nonzero singular value");
  const double tol = kRankTolerance * smax;
  int rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  return sv(rank - 1) * sv(rank - 1);
}

double constant_D(const Problem& prob, const CompositeStructure& cs) {
  const Vector& x_hat = cs.x_hat;
  std::vector<Vector> grads(prob.n);
  double sum = 0.0;
  for (int j = 0; j < prob.n; ++j) {
    grads[j] = prob.local_grad(j, x_hat);
    sum += grads[j].squaredNorm();
  }

  const int d = static_cast<int>(cs.kernel_basis.cols());
  if (d > 0) {
    Rng rng = Rng::stream(prob.seed, "kernel-check");
    const double span = 1.0 + x_hat.norm();
    for (int trial = 0; trial < 8; ++trial) {
      Vector g = rng.vector(d, -1.0, 1.0);
      if (g.norm() == 0.0) continue;
      const Vector v = cs.kernel_basis * (span * g / g.norm());
      for (int j = 0; j < prob.n; ++j) {
        const double f0 = prob.local_value(j, x_hat);
        const double f1 = prob.local_value(j, x_hat + v);
        if (std::abs(f1 - f0) > 1e-8 * (1.0 + std::abs(f0)))
          throw std::invalid_argument("constant_D: local cost varies along a kernel direction");
        const Vector dg = prob.local_grad(j, x_hat + v) - grads[j];
        if (dg.norm() > 1e-8 * (1.0 + grads[j].norm()))
          throw std::invalid_argument("constant_D: local gradient varies along a kernel direction");
      }
    }
  }
  return std::sqrt(sum);
}

double coercivity_slack(const Problem& prob, const CompositeStructure& cs, const Vector& x) {
  const Vector proj = project_to_optimal(cs, x);
  const Vector d = x - proj;
  const Vector gd = prob.grad(x) - prob.grad(proj);
  const double lhs = gd.dot(d);
  const double rhs = (cs.L_g * cs.alpha * cs.c_hoffman) / (cs.L_g + cs.alpha) * d.squaredNorm() +
                     cs.C_H / (cs.L_g + cs.alpha) * gd.squaredNorm();
  return lhs - rhs;
}

namespace {

void write_vector(std::ostream& os, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (i) os << ' ';
    os << format_double(v[i]);
  }
}

Vector read_vector(const std::string& line, Index expect) {
  std::istringstream ss(line);
  std::vector<double> vals;
  std::string tok;
  while (ss >> tok) vals.push_back(parse_double(tok));
  if (expect >= 0 && static_cast<Index>(vals.size()) != expect)
    throw std::invalid_argument("fixture: vector length mismatch");
  return Eigen::Map<Vector>(vals.data(), static_cast<Index>(vals.size()));
}

}  // namespace

void save_fixture(const Problem& prob, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_fixture: cannot open " + path);
  os << "format = neardgd-problem/1\n";
  os << "kind = " << (prob.kind == ProblemKind::kRegression ? "regression" : "piecewise-quartic") << "\n";
  os << "p = " << prob.p << "\n";
  os << "n = " << prob.n << "\n";
  os << "s = " << prob.s << "\n";
  os << "seed = " << prob.seed << "\n";
  os << "scale = " << format_double(prob.scale) << "\n";
  if (prob.kind == ProblemKind::kRegression) {
    for (int i = 0; i < prob.n; ++i) {
      for (Index r = 0; r < prob.regression->h[i].rows(); ++r) {
        os << "h." << i << "." << r << " = ";
        write_vector(os, prob.regression->h[i].row(r).transpose());
        os << "\n";
      }
      os << "y." << i << " = ";
      write_vector(os, prob.regression->y[i]);
      os << "\n";
    }
  } else {
    os << "b = ";
    write_vector(os, prob.quartic_offsets);
    os << "\n";
  }
}

Problem load_fixture(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_fixture: cannot open " + path);
  std::string line;
  std::string kind;
  int p = 0, n = 0, s = 0;
  std::uint64_t seed = 0;
  double scale = 1.0;
  std::vector<std::pair<std::string, std::string>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("fixture: malformed line '" + line + "'");
    auto trim = [](std::string t) {
      const auto a = t.find_first_not_of(" \t");
      const auto b = t.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "format") {
      if (val != "neardgd-problem/1") throw std::invalid_argument("fixture: unknown format " + val);
    } else if (key == "kind") {
      kind = val;
    } else if (key == "p") {
      p = static_cast<int>(parse_int(val));
    } else if (key == "n") {
      n = static_cast<int>(parse_int(val));
    } else if (key == "s") {
      s = static_cast<int>(parse_int(val));
    } else if (key == "seed") {
      seed = static_cast<std::uint64_t>(parse_int(val));
    } else if (key == "scale") {
      scale = parse_double(val);
    } else {
      rows.emplace_back(key, val);
    }
  }

  if (kind == "piecewise-quartic") {
    Problem prob = make_piecewise_quartic(n, seed);
    for (const auto& [key, val] : rows) {
      if (key != "b") throw std::invalid_argument("fixture: unknown key " + key);
      prob.quartic_offsets = read_vector(val, n);
    }
    if (std::abs(prob.quartic_offsets.mean()) > 1e-12)
      throw std::invalid_argument("fixture: offsets must average to zero");
    // rebuild oracles on the stored offsets
    const Vector b = prob.quartic_offsets;
    prob.local_value = [b](int i, const Vector& x) { return quartic_hinge(x[0]) + b[i] * x[0]; };
    prob.local_grad = [b](int i, const Vector& x) {
      return Vector::Constant(1, quartic_hinge_deriv(x[0]) + b[i]).eval();
    };
    return prob;
  }
  if (kind != "regression") throw std::invalid_argument("fixture: unknown kind " + kind);

  auto data = std::make_shared<RegressionData>();
  data->h.assign(n, Matrix::Zero(p, s));
  data->y.assign(n, Vector::Zero(s));
  for (const auto& [key, val] : rows) {
    if (key.rfind("h.", 0) == 0) {
      const auto dot = key.find('.', 2);
      if (dot == std::string::npos) throw std::invalid_argument("fixture: bad key " + key);
      const int i = static_cast<int>(parse_int(key.substr(2, dot - 2)));
      const int r = static_cast<int>(parse_int(key.substr(dot + 1)));
      data->h.at(i).row(r) = read_vector(val, s).transpose();
    } else if (key.rfind("y.", 0) == 0) {
      const int i = static_cast<int>(parse_int(key.substr(2)));
      data->y.at(i) = read_vector(val, s);
    } else {
      throw std::invalid_argument("fixture: unknown key " + key);
    }
  }
  return build_regression(std::move(data), p, n, s, seed, scale);
}

}  // namespace neardgd
