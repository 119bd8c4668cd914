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

#include "psqkd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace psqkd::oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;

double log_factorial(int n) {
    return std::lgamma(n + 1.0);
}

double log_choose(int n, int k) {
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

/// Row-major odometer step; returns false after the last configuration.
bool next_config(std::vector<int> &cfg, const std::vector<int> &dims) {
    for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
        if (++cfg[i] < dims[i]) {
            return true;
        }
        cfg[i] = 0;
    }
    return false;
}

void check_branch_weights(const std::vector<Branch> &branches) {
    if (branches.empty()) {
        throw std::invalid_argument("branch list must not be empty");
    }
    double total = 0.0;
    for (const Branch &b : branches) {
        if (!(b.weight >= 0)) {
            throw std::invalid_argument("branch weights must be nonnegative");
        }
        total += b.weight;
    }
    if (std::abs(total - 1.0) > 1e-6) {
        throw std::invalid_argument("branch weights must sum to 1, got " + std::to_string(total));
    }
}

double entropy_from_hermitian(const Eigen::MatrixXcd &rho) {
    const double scale = 1.0 + rho.cwiseAbs().maxCoeff();
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw std::invalid_argument("density matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigenvalue iteration failed on a density matrix");
    }
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const double lambda = solver.eigenvalues()(i);
        if (lambda < -1e-10) {
            throw physicality_error("density matrix has negative eigenvalue " + std::to_string(lambda));
        }
        if (lambda >= 1e-14) {
            entropy -= lambda * std::log2(lambda);
        }
    }
    return entropy;
}

/// Probability that a lossy counter with efficiency eta announces `seen` of
/// `arrived` photons.
double thinning_probability(int arrived, int seen, double eta) {
    if (seen > arrived) {
        return 0.0;
    }
    // pow keeps the eta = 1 endpoint exact: 0^0 == 1.
    return std::exp(log_choose(arrived, seen)) * std::pow(eta, seen) *
           std::pow(1.0 - eta, arrived - seen);
}

}  // namespace

// ---------------------------------------------------------------------------
// FockState / DensityMatrix plumbing.

FockState FockState::vacuum(std::vector<std::string> labels, std::vector<int> dims) {
    FockState state;
    state.labels = std::move(labels);
    state.dims = std::move(dims);
    Eigen::Index total = 1;
    for (int d : state.dims) {
        if (d < 1) {
            throw std::invalid_argument("mode dimensions must be >= 1");
        }
        total *= d;
    }
    state.amps = Eigen::VectorXcd::Zero(total);
    state.amps(0) = 1.0;
    state.validate();
    return state;
}

int FockState::mode_index(const std::string &label) const {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
        throw std::invalid_argument("no mode labeled '" + label + "'");
    }
    return static_cast<int>(it - labels.begin());
}

Eigen::Index FockState::total_dim() const {
    Eigen::Index total = 1;
    for (int d : dims) {
        total *= d;
    }
    return total;
}

std::vector<Eigen::Index> FockState::strides() const {
    std::vector<Eigen::Index> s(dims.size());
    Eigen::Index acc = 1;
    for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
        s[i] = acc;
        acc *= dims[i];
    }
    return s;
}

Eigen::Index FockState::flatten(const std::vector<int> &occupation) const {
    if (occupation.size() != dims.size()) {
        throw std::invalid_argument("occupation list length does not match mode count");
    }
    const auto s = strides();
    Eigen::Index flat = 0;
    for (size_t i = 0; i < dims.size(); ++i) {
        if (occupation[i] < 0 || occupation[i] >= dims[i]) {
            throw std::invalid_argument("occupation number out of range");
        }
        flat += occupation[i] * s[i];
    }
    return flat;
}

std::complex<double> &FockState::at(const std::vector<int> &occupation) {
    return amps(flatten(occupation));
}

std::complex<double> FockState::at(const std::vector<int> &occupation) const {
    return amps(flatten(occupation));
}

double FockState::norm_sq() const {
    return amps.squaredNorm();
}

void FockState::normalize() {
    const double n2 = norm_sq();
    if (n2 <= 0) {
        throw std::invalid_argument("cannot normalize a zero state");
    }
    amps /= std::sqrt(n2);
}

void FockState::validate() const {
    if (labels.size() != dims.size()) {
        throw std::invalid_argument("label and dimension lists must have equal length");
    }
    if (amps.size() != total_dim()) {
        throw std::invalid_argument("amplitude vector size does not match mode dimensions");
    }
    for (size_t i = 0; i < labels.size(); ++i) {
        for (size_t j = i + 1; j < labels.size(); ++j) {
            if (labels[i] == labels[j]) {
                throw std::invalid_argument("duplicate mode label '" + labels[i] + "'");
            }
        }
    }
}

double DensityMatrix::trace() const {
    return rho.trace().real();
}

void DensityMatrix::validate(double tol) const {
    Eigen::Index total = 1;
    for (int d : dims) {
        total *= d;
    }
    if (rho.rows() != total || rho.cols() != total || labels.size() != dims.size()) {
        throw std::invalid_argument("density matrix shape does not match mode dimensions");
    }
    const double scale = 1.0 + rho.cwiseAbs().maxCoeff();
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol * scale) {
        throw physicality_error("density matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-10) {
        throw physicality_error("density matrix has a negative eigenvalue");
    }
    if (trace() > 1.0 + tol) {
        throw physicality_error("density matrix trace exceeds 1");
    }
}

// ---------------------------------------------------------------------------
// State construction.

FockState tmsv_state(double mean_photons, int n_max, const std::string &label_a,
                     const std::string &label_b, int dim_a, int dim_b) {
    if (!(mean_photons >= 0)) {
        throw std::invalid_argument("mean photon number must be >= 0");
    }
    if (n_max < 0) {
        throw std::invalid_argument("n_max must be >= 0");
    }
    FockState state = FockState::vacuum({label_a, label_b}, {dim_a, dim_b});
    state.amps(0) = 0.0;
    const int top = std::min({n_max, dim_a - 1, dim_b - 1});
    for (int n = 0; n <= top; ++n) {
        double amp = 0.0;
        if (mean_photons == 0.0) {
            amp = n == 0 ? 1.0 : 0.0;
        } else {
            amp = std::exp(0.5 * (n * std::log(mean_photons) - (n + 1) * std::log1p(mean_photons)));
        }
        state.at({n, n}) = amp;
    }
    return state;
}

FockState tensor(const FockState &left, const FockState &right) {
    left.validate();
    right.validate();
    FockState out;
    out.labels = left.labels;
    out.labels.insert(out.labels.end(), right.labels.begin(), right.labels.end());
    out.dims = left.dims;
    out.dims.insert(out.dims.end(), right.dims.begin(), right.dims.end());
    out.amps = Eigen::VectorXcd(left.amps.size() * right.amps.size());
    for (Eigen::Index i = 0; i < left.amps.size(); ++i) {
        out.amps.segment(i * right.amps.size(), right.amps.size()) = left.amps(i) * right.amps;
    }
    out.validate();
    return out;
}

double bs_element(double T, int in_a, int in_b, int out_a, int out_b) {
    if (in_a < 0 || in_b < 0 || out_a < 0 || out_b < 0) {
        throw std::invalid_argument("photon numbers must be >= 0");
    }
    if (!(T >= 0 && T <= 1)) {
        throw std::invalid_argument("transmissivity must lie in [0, 1]");
    }
    if (in_a + in_b != out_a + out_b) {
        return 0.0;  // photon-number conserving
    }
    // Expand (sqrt(T) a^dag - sqrt(1-T) b^dag)^in_a (sqrt(1-T) a^dag + sqrt(T) b^dag)^in_b
    // over the number of in_a photons that exit through port a.
    const double base = 0.5 * (log_factorial(out_a) + log_factorial(out_b) - log_factorial(in_a) -
                               log_factorial(in_b));
    double total = 0.0;
    const int p_lo = std::max(0, out_a - in_b);
    const int p_hi = std::min(in_a, out_a);
    for (int p = p_lo; p <= p_hi; ++p) {
        const double magnitude = std::exp(base + log_choose(in_a, p) + log_choose(in_b, out_a - p)) *
                                 std::pow(T, 0.5 * (p + in_b - out_a + p)) *
                                 std::pow(1.0 - T, 0.5 * (in_a - p + out_a - p));
        total += ((in_a - p) % 2 != 0) ? -magnitude : magnitude;
    }
    return total;
}

void apply_beam_splitter(FockState &state, const std::string &mode_a, const std::string &mode_b,
                         double T) {
    state.validate();
    const int ia = state.mode_index(mode_a);
    const int ib = state.mode_index(mode_b);
    if (ia == ib) {
        throw std::invalid_argument("beam splitter needs two distinct modes");
    }
    const auto strides = state.strides();
    const Eigen::Index sa = strides[ia];
    const Eigen::Index sb = strides[ib];
    const int da = state.dims[ia];
    const int db = state.dims[ib];

    // Base offsets of every joint configuration of the spectator modes.
    std::vector<Eigen::Index> offsets{0};
    for (size_t m = 0; m < state.dims.size(); ++m) {
        if (static_cast<int>(m) == ia || static_cast<int>(m) == ib) {
            continue;
        }
        std::vector<Eigen::Index> grown;
        grown.reserve(offsets.size() * state.dims[m]);
        for (Eigen::Index off : offsets) {
            for (int v = 0; v < state.dims[m]; ++v) {
                grown.push_back(off + v * strides[m]);
            }
        }
        offsets = std::move(grown);
    }

    // The splitter conserves a + b, so it acts block-diagonally on the
    // photon-number sectors. Within a sector the restriction to the stored
    // dimensions is unitary as long as the state has no support on the
    // clipped corners, which the circuit builders guarantee by construction.
    for (int total_q = 0; total_q <= (da - 1) + (db - 1); ++total_q) {
        std::vector<std::pair<int, int>> sector;
        for (int a = std::max(0, total_q - (db - 1)); a <= std::min(da - 1, total_q); ++a) {
            sector.emplace_back(a, total_q - a);
        }
        const int dim = static_cast<int>(sector.size());
        Eigen::MatrixXd u(dim, dim);
        for (int r = 0; r < dim; ++r) {
            for (int c = 0; c < dim; ++c) {
                u(r, c) = bs_element(T, sector[c].first, sector[c].second, sector[r].first,
                                     sector[r].second);
            }
        }
        Eigen::VectorXcd in(dim), out(dim);
        for (Eigen::Index off : offsets) {
            for (int c = 0; c < dim; ++c) {
                in(c) = state.amps(off + sector[c].first * sa + sector[c].second * sb);
            }
            out.noalias() = u * in;
            for (int r = 0; r < dim; ++r) {
                state.amps(off + sector[r].first * sa + sector[r].second * sb) = out(r);
            }
        }
    }
}

FockState apply_annihilation(const FockState &state, const std::string &mode) {
    const int im = state.mode_index(mode);
    const auto strides = state.strides();
    FockState out = state;
    out.amps.setZero();
    std::vector<int> cfg(state.dims.size(), 0);
    Eigen::Index flat = 0;
    do {
        const int n = cfg[im];
        if (n >= 1) {
            out.amps(flat - strides[im]) = std::sqrt(static_cast<double>(n)) * state.amps(flat);
        }
        ++flat;
    } while (next_config(cfg, state.dims));
    return out;
}

FockState build_joint_state(const ProtocolParams &params) {
    params.validate();
    const int n = params.trunc.n_max;
    const int wide = 2 * n + 1;  // holds every photon count the mixing can reach

    FockState state = tensor(tmsv_state(params.alpha_sq, n, "A", "B", n + 1, wide),
                             tmsv_state(params.beta_sq, n, "E", "F", wide, n + 1));
    state = tensor(state, FockState::vacuum({"C"}, {wide}));
    apply_beam_splitter(state, "B", "E", params.channel_T);
    apply_beam_splitter(state, "C", "B", params.tap_T1);
    return state;
}

FockState build_channel_state(const ProtocolParams &params) {
    params.validate();
    const int n = params.trunc.n_max;
    const int wide = 2 * n + 1;

    FockState state = tensor(tmsv_state(params.alpha_sq, n, "A", "B", n + 1, wide),
                             tmsv_state(params.beta_sq, n, "E", "F", wide, n + 1));
    apply_beam_splitter(state, "B", "E", params.channel_T);
    return state;
}

// ---------------------------------------------------------------------------
// Post-selection.

namespace {

/// Unnormalized slice of `state` with `mode` pinned to `count`, the mode
/// removed. Second return is the slice's squared norm (the outcome
/// probability relative to the input state's own normalization).
std::pair<FockState, double> slice_mode(const FockState &state, const std::string &mode, int count) {
    const int im = state.mode_index(mode);
    if (count < 0 || count >= state.dims[im]) {
        throw std::invalid_argument("pinned photon count out of range");
    }
    FockState out;
    for (size_t i = 0; i < state.labels.size(); ++i) {
        if (static_cast<int>(i) != im) {
            out.labels.push_back(state.labels[i]);
            out.dims.push_back(state.dims[i]);
        }
    }
    out.amps = Eigen::VectorXcd::Zero(state.total_dim() / state.dims[im]);

    std::vector<int> cfg(state.dims.size(), 0);
    Eigen::Index flat = 0;
    Eigen::Index kept = 0;
    do {
        if (cfg[im] == count) {
            out.amps(kept++) = state.amps(flat);
        }
        ++flat;
    } while (next_config(cfg, state.dims));
    const double prob = out.amps.squaredNorm();
    return {std::move(out), prob};
}

std::pair<std::vector<Branch>, double> branches_from_weights(const FockState &state,
                                                             const std::string &mode,
                                                             const std::vector<double> &weights,
                                                             const char *what) {
    std::vector<Branch> branches;
    double total = 0.0;
    for (size_t s = 0; s < weights.size(); ++s) {
        if (weights[s] == 0.0) {
            continue;
        }
        auto [slice, p] = slice_mode(state, mode, static_cast<int>(s));
        const double w = weights[s] * p;
        if (w <= 0.0) {
            continue;
        }
        slice.normalize();
        branches.push_back({w, std::move(slice)});
        total += w;
    }
    if (branches.empty() || total < 1e-300) {
        throw postselection_error(std::string(what) + " has vanishing probability");
    }
    for (Branch &b : branches) {
        b.weight /= total;
    }
    return {std::move(branches), total};
}

}  // namespace

std::pair<FockState, double> postselect_exact(const FockState &state, const std::string &mode,
                                              int count) {
    auto [slice, p] = slice_mode(state, mode, count);
    if (p < 1e-300) {
        throw postselection_error("outcome " + std::to_string(count) + " photons on mode '" + mode +
                                  "' has vanishing probability");
    }
    slice.normalize();
    return {std::move(slice), p};
}

std::pair<std::vector<Branch>, double> postselect_threshold(const FockState &state,
                                                            const std::string &mode) {
    const int dim = state.dims[state.mode_index(mode)];
    std::vector<double> weights(dim, 1.0);
    weights[0] = 0.0;
    return branches_from_weights(state, mode, weights, "threshold click");
}

std::pair<std::vector<Branch>, double> postselect_counter_thinned(const FockState &state,
                                                                  const std::string &mode, int count,
                                                                  double eta) {
    if (!(eta > 0 && eta <= 1)) {
        throw std::invalid_argument("counter efficiency must lie in (0, 1]");
    }
    if (count < 0) {
        throw std::invalid_argument("announced count must be >= 0");
    }
    const int dim = state.dims[state.mode_index(mode)];
    std::vector<double> weights(dim, 0.0);
    for (int s = count; s < dim; ++s) {
        weights[s] = thinning_probability(s, count, eta);
    }
    return branches_from_weights(state, mode, weights, "thinned exact count");
}

std::pair<std::vector<Branch>, double> postselect_threshold_thinned(const FockState &state,
                                                                    const std::string &mode,
                                                                    double eta) {
    if (!(eta > 0 && eta <= 1)) {
        throw std::invalid_argument("detector efficiency must lie in (0, 1]");
    }
    const int dim = state.dims[state.mode_index(mode)];
    std::vector<double> weights(dim, 0.0);
    for (int s = 1; s < dim; ++s) {
        weights[s] = 1.0 - std::pow(1.0 - eta, s);
    }
    return branches_from_weights(state, mode, weights, "thinned threshold click");
}

// ---------------------------------------------------------------------------
// Reductions and moments.

DensityMatrix reduce(const FockState &state, const std::vector<std::string> &keep) {
    state.validate();
    if (keep.empty()) {
        throw std::invalid_argument("must keep at least one mode");
    }
    std::vector<int> keep_idx;
    keep_idx.reserve(keep.size());
    for (const std::string &label : keep) {
        keep_idx.push_back(state.mode_index(label));
    }

    // Strides of the kept (in the requested order) and traced sub-bases.
    std::vector<Eigen::Index> keep_strides(keep.size());
    Eigen::Index keep_dim = 1;
    for (int i = static_cast<int>(keep.size()) - 1; i >= 0; --i) {
        keep_strides[i] = keep_dim;
        keep_dim *= state.dims[keep_idx[i]];
    }
    std::vector<int> traced_idx;
    for (size_t i = 0; i < state.dims.size(); ++i) {
        if (std::find(keep_idx.begin(), keep_idx.end(), static_cast<int>(i)) == keep_idx.end()) {
            traced_idx.push_back(static_cast<int>(i));
        }
    }
    std::vector<Eigen::Index> traced_strides(traced_idx.size());
    Eigen::Index traced_dim = 1;
    for (int i = static_cast<int>(traced_idx.size()) - 1; i >= 0; --i) {
        traced_strides[i] = traced_dim;
        traced_dim *= state.dims[traced_idx[i]];
    }

    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(keep_dim, traced_dim);
    std::vector<int> cfg(state.dims.size(), 0);
    Eigen::Index flat = 0;
    do {
        Eigen::Index r = 0;
        for (size_t i = 0; i < keep_idx.size(); ++i) {
            r += cfg[keep_idx[i]] * keep_strides[i];
        }
        Eigen::Index c = 0;
        for (size_t i = 0; i < traced_idx.size(); ++i) {
            c += cfg[traced_idx[i]] * traced_strides[i];
        }
        m(r, c) = state.amps(flat);
        ++flat;
    } while (next_config(cfg, state.dims));

    DensityMatrix dm;
    dm.labels = keep;
    for (int idx : keep_idx) {
        dm.dims.push_back(state.dims[idx]);
    }
    dm.rho = m * m.adjoint();
    return dm;
}

DensityMatrix reduce(const std::vector<Branch> &branches, const std::vector<std::string> &keep) {
    check_branch_weights(branches);
    DensityMatrix out = reduce(branches.front().state, keep);
    out.rho *= branches.front().weight;
    for (size_t i = 1; i < branches.size(); ++i) {
        const DensityMatrix part = reduce(branches[i].state, keep);
        if (part.dims != out.dims) {
            throw std::invalid_argument("branches disagree on kept mode dimensions");
        }
        out.rho += branches[i].weight * part.rho;
    }
    return out;
}

namespace {

struct LadderMoments {
    Eigen::MatrixXcd aa;   // <a_i a_j>, symmetric
    Eigen::MatrixXcd ada;  // <a_i^dag a_j>, Hermitian
    Eigen::VectorXcd mean;  // <a_i>
};

LadderMoments state_moments(const FockState &state, const std::vector<int> &keep_idx) {
    const int m = static_cast<int>(keep_idx.size());
    const double n2 = state.norm_sq();
    if (n2 <= 0) {
        throw std::invalid_argument("cannot take moments of a zero state");
    }

    std::vector<FockState> lowered;
    lowered.reserve(m);
    for (int idx : keep_idx) {
        lowered.push_back(apply_annihilation(state, state.labels[idx]));
    }

    LadderMoments out;
    out.aa.resize(m, m);
    out.ada.resize(m, m);
    out.mean.resize(m);
    for (int i = 0; i < m; ++i) {
        out.mean(i) = state.amps.dot(lowered[i].amps) / n2;
        for (int j = 0; j < m; ++j) {
            out.ada(i, j) = lowered[i].amps.dot(lowered[j].amps) / n2;
            const FockState twice = apply_annihilation(lowered[j], state.labels[keep_idx[i]]);
            out.aa(i, j) = state.amps.dot(twice.amps) / n2;
        }
    }
    return out;
}

CovarianceMatrix gamma_from_moments(const LadderMoments &mom, const std::vector<std::string> &labels) {
    const int m = static_cast<int>(labels.size());
    CovarianceMatrix gamma;
    gamma.mode_order = labels;
    gamma.entries.resize(2 * m, 2 * m);
    for (int i = 0; i < m; ++i) {
        const double qi = 2.0 * mom.mean(i).real();
        const double pi = 2.0 * mom.mean(i).imag();
        for (int j = 0; j < m; ++j) {
            const double qj = 2.0 * mom.mean(j).real();
            const double pj = 2.0 * mom.mean(j).imag();
            const double delta = i == j ? 1.0 : 0.0;
            const std::complex<double> aa = mom.aa(i, j);
            const std::complex<double> ada = mom.ada(i, j);
            // q = a + a^dag, p = i (a^dag - a); raw symmetrized moments in
            // terms of <a a> and <a^dag a>, then means subtracted.
            gamma.entries(2 * i, 2 * j) = 2.0 * aa.real() + 2.0 * ada.real() + delta - qi * qj;
            gamma.entries(2 * i + 1, 2 * j + 1) = -2.0 * aa.real() + 2.0 * ada.real() + delta - pi * pj;
            gamma.entries(2 * i, 2 * j + 1) = 2.0 * (aa.imag() + ada.imag()) - qi * pj;
            gamma.entries(2 * i + 1, 2 * j) = 2.0 * (aa.imag() - ada.imag()) - pi * qj;
        }
    }
    return gamma;
}

}  // namespace

CovarianceMatrix covariance_from_state(const FockState &state, const std::vector<std::string> &keep) {
    state.validate();
    std::vector<int> keep_idx;
    keep_idx.reserve(keep.size());
    for (const std::string &label : keep) {
        keep_idx.push_back(state.mode_index(label));
    }
    return gamma_from_moments(state_moments(state, keep_idx), keep);
}

CovarianceMatrix covariance_from_branches(const std::vector<Branch> &branches,
                                          const std::vector<std::string> &keep) {
    check_branch_weights(branches);
    LadderMoments total;
    bool first = true;
    for (const Branch &branch : branches) {
        std::vector<int> keep_idx;
        keep_idx.reserve(keep.size());
        for (const std::string &label : keep) {
            keep_idx.push_back(branch.state.mode_index(label));
        }
        const LadderMoments part = state_moments(branch.state, keep_idx);
        if (first) {
            total.aa = branch.weight * part.aa;
            total.ada = branch.weight * part.ada;
            total.mean = branch.weight * part.mean;
            first = false;
        } else {
            total.aa += branch.weight * part.aa;
            total.ada += branch.weight * part.ada;
            total.mean += branch.weight * part.mean;
        }
    }
    return gamma_from_moments(total, keep);
}

CovarianceMatrix covariance_from_density(const DensityMatrix &dm) {
    const int m = static_cast<int>(dm.dims.size());
    std::vector<Eigen::Index> strides(m);
    Eigen::Index acc = 1;
    for (int i = m - 1; i >= 0; --i) {
        strides[i] = acc;
        acc *= dm.dims[i];
    }
    const double tr = dm.trace();
    if (!(tr > 0)) {
        throw std::invalid_argument("density matrix trace must be positive");
    }

    LadderMoments mom;
    mom.aa = Eigen::MatrixXcd::Zero(m, m);
    mom.ada = Eigen::MatrixXcd::Zero(m, m);
    mom.mean = Eigen::VectorXcd::Zero(m);

    std::vector<int> cfg(dm.dims.size(), 0);
    Eigen::Index flat = 0;
    do {
        for (int i = 0; i < m; ++i) {
            // <a_i>: couples |cfg> to <cfg - e_i|.
            if (cfg[i] >= 1) {
                mom.mean(i) += dm.rho(flat - strides[i], flat) * std::sqrt(static_cast<double>(cfg[i]));
            }
            for (int j = 0; j < m; ++j) {
                if (cfg[j] < 1) {
                    continue;
                }
                // <a_i a_j>: lowers j then i; couples |cfg> to <cfg - e_j - e_i|.
                const int ni = i == j ? cfg[i] - 1 : cfg[i];
                if (ni >= 1) {
                    mom.aa(i, j) += dm.rho(flat - strides[j] - strides[i], flat) *
                                    std::sqrt(static_cast<double>(cfg[j]) * ni);
                }
                // <a_i^dag a_j>: lowers j, raises i; couples |cfg> to <cfg - e_j + e_i|.
                if (i == j) {
                    mom.ada(i, j) += dm.rho(flat, flat) * static_cast<double>(cfg[j]);
                } else if (cfg[i] + 1 < dm.dims[i]) {
                    mom.ada(i, j) += dm.rho(flat - strides[j] + strides[i], flat) *
                                     std::sqrt(static_cast<double>(cfg[j]) * (cfg[i] + 1.0));
                }
            }
        }
        ++flat;
    } while (next_config(cfg, dm.dims));

    mom.aa /= tr;
    mom.ada /= tr;
    mom.mean /= tr;
    return gamma_from_moments(mom, dm.labels);
}

double entropy_exact(const DensityMatrix &dm) {
    return entropy_from_hermitian(dm.rho);
}

double number_expectation(const DensityMatrix &dm, const std::string &mode) {
    const auto it = std::find(dm.labels.begin(), dm.labels.end(), mode);
    if (it == dm.labels.end()) {
        throw std::invalid_argument("no mode labeled '" + mode + "'");
    }
    const int im = static_cast<int>(it - dm.labels.begin());
    std::vector<int> cfg(dm.dims.size(), 0);
    Eigen::Index flat = 0;
    double total = 0.0;
    do {
        total += dm.rho(flat, flat).real() * cfg[im];
        ++flat;
    } while (next_config(cfg, dm.dims));
    return total / dm.trace();
}

// ---------------------------------------------------------------------------
// Exact Holevo information for a homodyne measurement.

namespace {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    if (n < 2) {
        throw std::invalid_argument("quadrature needs at least 2 nodes");
    }
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    return {std::move(x), std::move(w)};
}

/// Position-representation amplitudes <q|n> for n = 0 .. dim-1, in the
/// convention q = a + a^dag (vacuum variance 1).
std::vector<double> homodyne_amplitudes(double q, int dim) {
    std::vector<double> vals(dim);
    const double x = q / std::sqrt(2.0);
    double phi_prev = 0.0;
    double phi = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
    vals[0] = std::pow(2.0, -0.25) * phi;
    for (int n = 1; n < dim; ++n) {
        const double phi_next = x * std::sqrt(2.0 / n) * phi - std::sqrt((n - 1.0) / n) * phi_prev;
        phi_prev = phi;
        phi = phi_next;
        vals[n] = std::pow(2.0, -0.25) * phi;
    }
    return vals;
}

}  // namespace

double exact_holevo_homodyne(const std::vector<Branch> &branches, const std::string &bob_mode,
                             const std::vector<std::string> &eve_modes, int nodes) {
    check_branch_weights(branches);

    const double s_eve = entropy_exact(reduce(branches, eve_modes));

    // Quadrature window covering the homodyne outcome distribution.
    const CovarianceMatrix bob_gamma = covariance_from_branches(branches, {bob_mode});
    const double half_width = 8.0 * std::sqrt(std::max(1.0, bob_gamma.entries(0, 0)));
    auto [xs, ws] = gauss_legendre(nodes);
    for (int i = 0; i < nodes; ++i) {
        xs[i] *= half_width;
        ws[i] *= half_width;
    }

    // Per-branch layout: eve modes (requested order) x bob mode x the rest.
    struct BranchLayout {
        const Branch *branch;
        int bob_idx;
        std::vector<int> eve_idx;
        std::vector<Eigen::Index> eve_strides;
        Eigen::Index eve_dim = 1;
        Eigen::Index rest_dim = 1;
    };
    std::vector<BranchLayout> layouts;
    layouts.reserve(branches.size());
    for (const Branch &branch : branches) {
        BranchLayout lay;
        lay.branch = &branch;
        lay.bob_idx = branch.state.mode_index(bob_mode);
        lay.eve_strides.resize(eve_modes.size());
        for (const std::string &label : eve_modes) {
            lay.eve_idx.push_back(branch.state.mode_index(label));
        }
        for (int i = static_cast<int>(eve_modes.size()) - 1; i >= 0; --i) {
            lay.eve_strides[i] = lay.eve_dim;
            lay.eve_dim *= branch.state.dims[lay.eve_idx[i]];
        }
        lay.rest_dim = branch.state.total_dim() / (lay.eve_dim * branch.state.dims[lay.bob_idx]);
        layouts.push_back(std::move(lay));
    }
    const Eigen::Index eve_dim = layouts.front().eve_dim;

    double s_cond = 0.0;
    double prob_total = 0.0;
    for (int t = 0; t < nodes; ++t) {
        Eigen::MatrixXcd rho_q = Eigen::MatrixXcd::Zero(eve_dim, eve_dim);
        for (const BranchLayout &lay : layouts) {
            const FockState &state = lay.branch->state;
            const auto herm = homodyne_amplitudes(xs[t], state.dims[lay.bob_idx]);

            // Contract the bob mode with <q|.> into a (rest x eve) matrix.
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(lay.rest_dim, eve_dim);
            std::vector<int> cfg(state.dims.size(), 0);
            Eigen::Index flat = 0;
            do {
                Eigen::Index eve_flat = 0;
                for (size_t i = 0; i < lay.eve_idx.size(); ++i) {
                    eve_flat += cfg[lay.eve_idx[i]] * lay.eve_strides[i];
                }
                Eigen::Index rest_flat = 0;
                for (size_t i = 0; i < state.dims.size(); ++i) {
                    const int ii = static_cast<int>(i);
                    if (ii == lay.bob_idx ||
                        std::find(lay.eve_idx.begin(), lay.eve_idx.end(), ii) != lay.eve_idx.end()) {
                        continue;
                    }
                    rest_flat = rest_flat * state.dims[i] + cfg[i];
                }
                m(rest_flat, eve_flat) += state.amps(flat) * herm[cfg[lay.bob_idx]];
                ++flat;
            } while (next_config(cfg, state.dims));

            // Trace over the rest: rho(e, e') = sum_r m(r, e) conj(m(r, e')).
            rho_q.noalias() += lay.branch->weight * (m.transpose() * m.conjugate()).eval();
        }
        const double p = rho_q.trace().real();
        if (p > 1e-300) {
            s_cond += ws[t] * p * entropy_from_hermitian(rho_q / p);
            prob_total += ws[t] * p;
        }
    }

    if (std::abs(prob_total - 1.0) > 1e-6) {
        throw std::runtime_error("homodyne quadrature self-check failed: total probability " +
                                 std::to_string(prob_total));
    }
    return s_eve - s_cond;
}

}  // namespace psqkd::oracle
