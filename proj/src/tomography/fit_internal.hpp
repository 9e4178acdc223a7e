#pragma once

// Binned form of the tomography likelihood shared by the fit, the bootstrap and the sweep.

#include <vector>

#include "zeno/tomography.hpp"

namespace zeno::detail {

struct BinnedProblem {
  int n_ions = 2;
  int n_bins = 0;
  std::vector<std::vector<double>> ref_classes;  // [phase][class]
  std::vector<std::vector<long>> ref_counts;     // [phase][bin]
  std::vector<std::vector<long>> data_counts;    // [rotation][bin]
  std::vector<std::vector<CMatrix>> class_ops;   // [rotation][class] = U^dag A_k U
  std::vector<CMatrix> povm;
  CVector target;
};

BinnedProblem make_problem(const FitInputs& inputs);

/// Reference class probabilities for a given initialization error.
std::vector<std::vector<double>> reference_classes(int n_ions, const std::vector<double>& phases, double epsilon);

TomographyEstimate fit_binned(const BinnedProblem& problem, const FitOptions& opts, const TomographyEstimate* warm);

/// Bin probabilities of every histogram under the fitted model, references first.
std::vector<std::vector<double>> model_bin_probabilities(const BinnedProblem& problem, const CMatrix& rho,
                                                         const std::vector<std::vector<double>>& pi);

/// 2 sum n log(freq / model) over all histograms.
double saturated_llr(const BinnedProblem& problem, const CMatrix& rho, const std::vector<std::vector<double>>& pi);

}  // namespace zeno::detail
