#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "saver/features.hpp"
#include "saver/rng.hpp"

namespace saver {

struct KernelOptions {
  double beta = 1.0;
  // RBF bandwidth override. Default: median of pairwise squared distances
  // between the (normalized) feature vectors, falling back to 1 when the
  // median is 0 or there is a single candidate.
  std::optional<double> sigma2;
};

// Quality-aware diversity kernel I_ij = e^{beta q_i} e^{beta q_j} k(phi_i, phi_j)
// with k an RBF over the normalized structural features. Symmetric and PSD
// by construction (diagonal scaling of an RBF Gram matrix).
struct KernelMatrix {
  Eigen::MatrixXd entries;
  double beta = 1.0;
  double sigma2 = 1.0;
  // Provenance: what the kernel was built from.
  std::vector<Eigen::VectorXd> phi;  // normalized feature vectors
  std::vector<double> q_tilde;

  int size() const { return static_cast<int>(entries.rows()); }
};

KernelMatrix build_kernel(const std::vector<FeatureVector>& features,
                          const std::vector<double>& q_tilde, KernelOptions options = {});

// As above but over pre-normalized vectors; the test seam for pinned-sigma
// fixtures.
KernelMatrix build_kernel_from_vectors(const std::vector<Eigen::VectorXd>& phi,
                                       const std::vector<double>& q_tilde,
                                       KernelOptions options = {});

struct SubsetSample {
  std::vector<int> indices;  // sorted, 0-based, |indices| == K
  double log_det = 0.0;      // log det(I_S); -inf when the minor is singular
  std::uint64_t rng_seed = 0;
  bool degenerate_kernel = false;  // deterministic top-q fallback was used
};

// All K-subsets with their principal-minor determinants, in lexicographic
// subset order. Exact reference distribution for tests, dumps, and the
// enumeration sampler.
struct SubsetWeight {
  std::vector<int> indices;
  double det = 0.0;
};
std::vector<SubsetWeight> enumerate_subset_weights(const KernelMatrix& kernel, int k);

// Exact k-DPP sample: P(S) proportional to det(I_S). Enumerates when
// C(M,K) <= 10000, otherwise runs the eigendecomposition sampler. K == M
// returns the full set with probability 1. If every subset determinant is
// <= 1e-12 the kernel is degenerate and the sample falls back to the
// deterministic top-K by quality (ties by lowest index).
SubsetSample kdpp_sample(const KernelMatrix& kernel, int k, Rng& rng);

// Eigendecomposition-based exact sampler: picks K eigenvectors via
// elementary symmetric polynomials, then items by sequential projection.
// Eigenvalues below 1e-12 are clamped to zero; rank < K triggers the same
// degenerate fallback as kdpp_sample.
SubsetSample eig_kdpp(const KernelMatrix& kernel, int k, Rng& rng);

}  // namespace saver
