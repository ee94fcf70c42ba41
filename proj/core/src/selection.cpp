#include "saver/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace saver {

namespace {

constexpr double kDegenerateDet = 1e-12;
constexpr double kEigenvalueClamp = 1e-12;

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// C(n, k) saturating at a cap so the enumeration/eigen dispatch never
// overflows.
std::uint64_t binomial_capped(int n, int k, std::uint64_t cap) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    if (result > cap) return cap + 1;
  }
  return result;
}

double principal_minor_det(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  const int k = static_cast<int>(idx.size());
  if (k == 0) return 1.0;
  Eigen::MatrixXd sub(k, k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      sub(r, c) = m(idx[static_cast<size_t>(r)], idx[static_cast<size_t>(c)]);
    }
  }
  return sub.determinant();
}

SubsetSample degenerate_fallback(const KernelMatrix& kernel, int k, std::uint64_t seed) {
  std::vector<int> order(static_cast<size_t>(kernel.size()));
  for (int i = 0; i < kernel.size(); ++i) order[static_cast<size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    double qa = a < static_cast<int>(kernel.q_tilde.size()) ? kernel.q_tilde[static_cast<size_t>(a)] : 0.0;
    double qb = b < static_cast<int>(kernel.q_tilde.size()) ? kernel.q_tilde[static_cast<size_t>(b)] : 0.0;
    if (qa != qb) return qa > qb;
    return a < b;
  });
  SubsetSample sample;
  sample.indices.assign(order.begin(), order.begin() + k);
  std::sort(sample.indices.begin(), sample.indices.end());
  double det = principal_minor_det(kernel.entries, sample.indices);
  sample.log_det = det > 0.0 ? std::log(det) : -std::numeric_limits<double>::infinity();
  sample.rng_seed = seed;
  sample.degenerate_kernel = true;
  return sample;
}

void check_args(const KernelMatrix& kernel, int k) {
  if (k < 1) throw std::invalid_argument("subset size must be >= 1");
  if (k > kernel.size()) throw std::invalid_argument("subset size exceeds candidate count");
}

SubsetSample full_set_sample(const KernelMatrix& kernel, std::uint64_t seed) {
  SubsetSample sample;
  sample.indices.resize(static_cast<size_t>(kernel.size()));
  for (int i = 0; i < kernel.size(); ++i) sample.indices[static_cast<size_t>(i)] = i;
  double det = kernel.entries.determinant();
  sample.log_det = det > 0.0 ? std::log(det) : -std::numeric_limits<double>::infinity();
  sample.rng_seed = seed;
  return sample;
}

}  // namespace

KernelMatrix build_kernel_from_vectors(const std::vector<Eigen::VectorXd>& phi,
                                       const std::vector<double>& q_tilde,
                                       KernelOptions options) {
  if (phi.empty() || phi.size() != q_tilde.size()) {
    throw std::invalid_argument("feature and quality lists must be nonempty and equal length");
  }
  const int m = static_cast<int>(phi.size());
  for (const auto& v : phi) {
    if (!v.allFinite()) throw std::invalid_argument("non-finite feature vector");
  }
  for (double q : q_tilde) {
    if (!std::isfinite(q)) throw std::invalid_argument("non-finite quality score");
  }

  Eigen::MatrixXd sq_dist(m, m);
  std::vector<double> pairwise;
  pairwise.reserve(static_cast<size_t>(m) * (m - 1) / 2);
  for (int i = 0; i < m; ++i) {
    sq_dist(i, i) = 0.0;
    for (int j = i + 1; j < m; ++j) {
      double d2 = (phi[static_cast<size_t>(i)] - phi[static_cast<size_t>(j)]).squaredNorm();
      sq_dist(i, j) = d2;
      sq_dist(j, i) = d2;
      pairwise.push_back(d2);
    }
  }
  double sigma2 = options.sigma2.value_or(median(pairwise));
  if (sigma2 <= 0.0) sigma2 = 1.0;

  KernelMatrix kernel;
  kernel.beta = options.beta;
  kernel.sigma2 = sigma2;
  kernel.phi = phi;
  kernel.q_tilde = q_tilde;
  kernel.entries.resize(m, m);
  for (int i = 0; i < m; ++i) {
    const double qi = std::exp(options.beta * q_tilde[static_cast<size_t>(i)]);
    for (int j = 0; j < m; ++j) {
      const double qj = std::exp(options.beta * q_tilde[static_cast<size_t>(j)]);
      kernel.entries(i, j) = qi * qj * std::exp(-sq_dist(i, j) / (2.0 * sigma2));
    }
  }
  return kernel;
}

KernelMatrix build_kernel(const std::vector<FeatureVector>& features,
                          const std::vector<double>& q_tilde, KernelOptions options) {
  return build_kernel_from_vectors(normalize_features(features), q_tilde, options);
}

std::vector<SubsetWeight> enumerate_subset_weights(const KernelMatrix& kernel, int k) {
  check_args(kernel, k);
  const int m = kernel.size();
  std::vector<SubsetWeight> weights;
  std::vector<int> idx(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i;
  while (true) {
    weights.push_back({idx, std::max(0.0, principal_minor_det(kernel.entries, idx))});
    // next lexicographic combination
    int pos = k - 1;
    while (pos >= 0 && idx[static_cast<size_t>(pos)] == m - k + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<size_t>(pos)];
    for (int j = pos + 1; j < k; ++j) {
      idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
    }
  }
  return weights;
}

SubsetSample kdpp_sample(const KernelMatrix& kernel, int k, Rng& rng) {
  check_args(kernel, k);
  if (k == kernel.size()) return full_set_sample(kernel, rng.seed());
  if (binomial_capped(kernel.size(), k, 10000) > 10000) return eig_kdpp(kernel, k, rng);

  std::vector<SubsetWeight> weights = enumerate_subset_weights(kernel, k);
  double total = 0.0;
  for (const auto& w : weights) total += w.det;
  if (total <= kDegenerateDet) return degenerate_fallback(kernel, k, rng.seed());

  double target = rng.uniform() * total;
  double acc = 0.0;
  size_t chosen = weights.size() - 1;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i].det;
    if (target < acc) {
      chosen = i;
      break;
    }
  }
  SubsetSample sample;
  sample.indices = weights[chosen].indices;
  sample.log_det = weights[chosen].det > 0.0 ? std::log(weights[chosen].det)
                                             : -std::numeric_limits<double>::infinity();
  sample.rng_seed = rng.seed();
  return sample;
}

SubsetSample eig_kdpp(const KernelMatrix& kernel, int k, Rng& rng) {
  check_args(kernel, k);
  if (k == kernel.size()) return full_set_sample(kernel, rng.seed());
  const int m = kernel.size();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(kernel.entries);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }
  Eigen::VectorXd lambda = solver.eigenvalues();
  for (int i = 0; i < m; ++i) {
    if (lambda[i] < kEigenvalueClamp) lambda[i] = 0.0;
  }
  int rank = 0;
  for (int i = 0; i < m; ++i) {
    if (lambda[i] > 0.0) ++rank;
  }
  if (rank < k) return degenerate_fallback(kernel, k, rng.seed());

  // Elementary symmetric polynomials: esp(r, n) = e_r(lambda_1..lambda_n).
  Eigen::MatrixXd esp = Eigen::MatrixXd::Zero(k + 1, m + 1);
  esp.row(0).setOnes();
  for (int n = 1; n <= m; ++n) {
    for (int r = 1; r <= k; ++r) {
      esp(r, n) = esp(r, n - 1) + lambda[n - 1] * esp(r - 1, n - 1);
    }
  }
  if (esp(k, m) <= 0.0) return degenerate_fallback(kernel, k, rng.seed());

  // Phase 1: choose K eigenvector indices.
  std::vector<int> selected;
  selected.reserve(static_cast<size_t>(k));
  int remaining = k;
  for (int n = m; n >= 1 && remaining > 0; --n) {
    if (n == remaining) {
      // all remaining eigenvalues must be taken
      for (int j = n; j >= 1; --j) selected.push_back(j - 1);
      remaining = 0;
      break;
    }
    double denom = esp(remaining, n);
    double take_prob = denom > 0.0 ? lambda[n - 1] * esp(remaining - 1, n - 1) / denom : 1.0;
    if (rng.uniform() < take_prob) {
      selected.push_back(n - 1);
      --remaining;
    }
  }

  // Phase 2: sequential projection sampling of items.
  Eigen::MatrixXd v(m, k);
  for (int c = 0; c < k; ++c) {
    v.col(c) = solver.eigenvectors().col(selected[static_cast<size_t>(c)]);
  }

  SubsetSample sample;
  sample.rng_seed = rng.seed();
  int cols = k;
  for (int t = k; t >= 1; --t) {
    Eigen::VectorXd row_mass(m);
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      double s = v.row(i).head(cols).squaredNorm();
      row_mass[i] = s;
      total += s;
    }
    // total == t up to roundoff
    double target = rng.uniform() * total;
    int item = m - 1;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      acc += row_mass[i];
      if (target < acc) {
        item = i;
        break;
      }
    }
    sample.indices.push_back(item);
    if (t == 1) break;

    // Project the span orthogonally to e_item: eliminate with the column
    // having the largest component at `item`, then re-orthonormalize.
    int pivot = 0;
    double best = -1.0;
    for (int c = 0; c < cols; ++c) {
      double a = std::abs(v(item, c));
      if (a > best) {
        best = a;
        pivot = c;
      }
    }
    Eigen::VectorXd pivot_col = v.col(pivot);
    double pivot_val = pivot_col[item];
    v.col(pivot) = v.col(cols - 1);
    --cols;
    if (pivot_val != 0.0) {
      for (int c = 0; c < cols; ++c) {
        v.col(c) -= pivot_col * (v(item, c) / pivot_val);
      }
    }
    // Gram-Schmidt for numerical stability.
    for (int c = 0; c < cols; ++c) {
      for (int p = 0; p < c; ++p) {
        v.col(c) -= v.col(p) * v.col(p).dot(v.col(c));
      }
      double norm = v.col(c).norm();
      if (norm > 1e-12) {
        v.col(c) /= norm;
      } else {
        v.col(c).setZero();
      }
    }
  }

  std::sort(sample.indices.begin(), sample.indices.end());
  double det = principal_minor_det(kernel.entries, sample.indices);
  sample.log_det = det > 0.0 ? std::log(det) : -std::numeric_limits<double>::infinity();
  return sample;
}

}  // namespace saver
