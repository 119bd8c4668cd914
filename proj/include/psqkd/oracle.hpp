// Copyright 2026 The psqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PSQKD_ORACLE_HPP
#define PSQKD_ORACLE_HPP

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "psqkd/types.hpp"

// Brute-force reference implementation that evolves dense truncated
// Fock-space states through the protocol's optical circuit. It shares no
// formulas with the closed-form sum engine, which makes it a suitable
// independent check: both routes describe the same truncated state, so
// matching results are expected to full numerical precision, not merely to
// truncation accuracy.
namespace psqkd::oracle {

/// Dense pure state over named bosonic modes. Amplitudes are stored
/// row-major over the occupation numbers, last mode fastest.
struct FockState {
    std::vector<std::string> labels;
    std::vector<int> dims;
    Eigen::VectorXcd amps;

    static FockState vacuum(std::vector<std::string> labels, std::vector<int> dims);

    int mode_index(const std::string &label) const;
    Eigen::Index total_dim() const;
    std::vector<Eigen::Index> strides() const;
    Eigen::Index flatten(const std::vector<int> &occupation) const;

    std::complex<double> &at(const std::vector<int> &occupation);
    std::complex<double> at(const std::vector<int> &occupation) const;

    double norm_sq() const;
    void normalize();
    void validate() const;
};

/// Dense density matrix over named bosonic modes, basis ordered like
/// FockState amplitudes.
struct DensityMatrix {
    std::vector<std::string> labels;
    std::vector<int> dims;
    Eigen::MatrixXcd rho;

    double trace() const;
    void validate(double tol = 1e-9) const;
};

/// One orthogonal outcome of a non-projective post-selection; weights over a
/// branch list sum to 1.
struct Branch {
    double weight = 1.0;
    FockState state;
};

/// Two-mode squeezed vacuum truncated at n_max photons per arm. The state is
/// deliberately left subnormalized: the missing weight is exactly the
/// truncation tail, matching the closed-form sums.
FockState tmsv_state(double mean_photons, int n_max, const std::string &label_a,
                     const std::string &label_b, int dim_a, int dim_b);

/// Tensor product; mode labels must be disjoint.
FockState tensor(const FockState &left, const FockState &right);

/// Single matrix element <out_a, out_b | BS(T) | in_a, in_b> of the two-mode
/// beam splitter with Heisenberg action
///
///     a_out = sqrt(T) a + sqrt(1 - T) b
///     b_out = sqrt(T) b - sqrt(1 - T) a.
double bs_element(double T, int in_a, int in_b, int out_a, int out_b);

/// Applies BS(T) to two modes in place, block by photon-number block. Exact
/// (unitary on the state's support) as long as the joint photon number fits
/// within both mode dimensions.
void apply_beam_splitter(FockState &state, const std::string &mode_a, const std::string &mode_b,
                         double T);

/// (a psi): lowers `mode` by one photon, scaling by sqrt(n).
FockState apply_annihilation(const FockState &state, const std::string &mode);

/// Five-mode state over A, B, E, F, C after the channel splitter (B x E,
/// transmissivity channel_T) and the tap splitter (B x C, transmissivity
/// tap_T1), before any measurement of the tap mode C.
FockState build_joint_state(const ProtocolParams &params);

/// Four-mode state over A, B, E, F after the channel splitter only (the
/// conventional protocol has no tap).
FockState build_channel_state(const ProtocolParams &params);

/// Projects `mode` onto exactly `count` photons. Returns the normalized
/// remaining state (without that mode) and the outcome probability relative
/// to the given (possibly subnormalized) state. Throws postselection_error
/// when the outcome probability vanishes.
std::pair<FockState, double> postselect_exact(const FockState &state, const std::string &mode,
                                              int count);

/// Threshold ("click") post-selection of `mode`: one orthogonal branch per
/// photon count >= 1, weights summing to 1, plus the total click probability.
std::pair<std::vector<Branch>, double> postselect_threshold(const FockState &state,
                                                            const std::string &mode);

/// Exact-count post-selection behind a lossy counter of efficiency eta: the
/// detector announces `count` while s >= count photons actually arrived.
std::pair<std::vector<Branch>, double> postselect_counter_thinned(const FockState &state,
                                                                  const std::string &mode, int count,
                                                                  double eta);

/// Threshold post-selection behind a lossy detector of efficiency eta.
std::pair<std::vector<Branch>, double> postselect_threshold_thinned(const FockState &state,
                                                                    const std::string &mode,
                                                                    double eta);

/// Partial trace down to the kept modes, in the order given.
DensityMatrix reduce(const FockState &state, const std::vector<std::string> &keep);
DensityMatrix reduce(const std::vector<Branch> &branches, const std::vector<std::string> &keep);

/// Quadrature covariance matrix (q = a + a^dag, p = i (a^dag - a), vacuum
/// variance 1) of the kept modes, computed from annihilation-operator
/// moments so the truncation never spills outside the stored amplitudes.
CovarianceMatrix covariance_from_state(const FockState &state, const std::vector<std::string> &keep);
CovarianceMatrix covariance_from_branches(const std::vector<Branch> &branches,
                                          const std::vector<std::string> &keep);
CovarianceMatrix covariance_from_density(const DensityMatrix &dm);

/// Von Neumann entropy -Tr[rho log2 rho] in bits; eigenvalues below 1e-14
/// are treated as exact zeros.
double entropy_exact(const DensityMatrix &dm);

/// <n> of one mode of a density matrix.
double number_expectation(const DensityMatrix &dm, const std::string &mode);

/// Exact Holevo information chi(bob : eve_modes) for an ideal homodyne
/// measurement of the bob mode's q quadrature:
///
///     chi = S(rho_eve) - Integral dq p(q) S(rho_eve | q)
///
/// evaluated by Gauss-Legendre quadrature with `nodes` points over a range
/// covering the homodyne distribution's support. Branch weights must sum
/// to 1.
double exact_holevo_homodyne(const std::vector<Branch> &branches, const std::string &bob_mode,
                             const std::vector<std::string> &eve_modes, int nodes = 96);

}  // namespace psqkd::oracle

#endif  // PSQKD_ORACLE_HPP
