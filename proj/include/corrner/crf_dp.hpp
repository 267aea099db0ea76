// Copyright 2026 The Corrner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Linear-chain CRF recursions over dense potentials. Everything here is a
// free function of an emission matrix (positions x labels) and a ChainWeights
// block, so the same code serves training, decoding and the enumeration
// oracles in the tests.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace corrner::crf {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Stand-in for -infinity in log space. Sums of a few sentinels stay finite.
template <typename Scalar>
inline constexpr Scalar kNegInf = Scalar(-1e30);

// transitions(i, j) scores label i followed by label j.
template <typename Scalar>
struct ChainWeights {
  Matrix<Scalar> transitions;
  Vector<Scalar> start;
  Vector<Scalar> stop;

  Eigen::Index labels() const { return start.size(); }
};

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = x.maxCoeff();
  if (m <= kNegInf<Scalar> / 2) return m;
  return m + std::log((x.derived().array() - m).exp().sum());
}

// Sum of potentials along one label path.
template <typename Scalar>
Scalar path_score(const Matrix<Scalar>& emissions, const ChainWeights<Scalar>& chain,
                  std::span<const int> path) {
  Scalar s = chain.start(path[0]) + emissions(0, path[0]);
  for (std::size_t t = 1; t < path.size(); ++t) {
    s += chain.transitions(path[t - 1], path[t]) +
         emissions(static_cast<Eigen::Index>(t), path[t]);
  }
  return s + chain.stop(path.back());
}

namespace detail {

// out(j) = log sum_i exp(prev(i) + T(i, j)), using one shifted
// matrix-vector product; columns that underflow fall back to a direct
// log-sum-exp.
template <typename Scalar>
void log_matvec(const Vector<Scalar>& prev, const Matrix<Scalar>& logits,
                const Matrix<Scalar>& shifted_exp, const Vector<Scalar>& col_max,
                Vector<Scalar>& out) {
  const Scalar m = prev.maxCoeff();
  if (m <= kNegInf<Scalar> / 2) {
    out.setConstant(prev.size(), kNegInf<Scalar>);
    return;
  }
  const Vector<Scalar> p = (prev.array() - m).exp().matrix();
  const Vector<Scalar> q = shifted_exp.transpose() * p;
  out.resize(q.size());
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (q(j) > Scalar(1e-250)) {
      out(j) = m + col_max(j) + std::log(q(j));
    } else {
      out(j) = log_sum_exp((prev + logits.col(j)).eval());
      if (out(j) < kNegInf<Scalar>) out(j) = kNegInf<Scalar>;
    }
  }
}

template <typename Scalar>
std::pair<Matrix<Scalar>, Vector<Scalar>> column_shift(const Matrix<Scalar>& t) {
  const Vector<Scalar> col_max = t.colwise().maxCoeff().transpose();
  Matrix<Scalar> shifted = (t.rowwise() - col_max.transpose()).array().exp().matrix();
  return {std::move(shifted), col_max};
}

}  // namespace detail

// alpha(t, j): log-sum of all prefixes ending in label j at position t,
// including the emission at t.
template <typename Scalar>
Matrix<Scalar> forward(const Matrix<Scalar>& emissions,
                       const ChainWeights<Scalar>& chain) {
  const Eigen::Index n = emissions.rows();
  const Eigen::Index labels = emissions.cols();
  Matrix<Scalar> alpha(n, labels);
  alpha.row(0) = chain.start.transpose() + emissions.row(0);
  const auto [shifted, col_max] = detail::column_shift(chain.transitions);
  Vector<Scalar> prev(labels), next(labels);
  for (Eigen::Index t = 1; t < n; ++t) {
    prev = alpha.row(t - 1).transpose();
    detail::log_matvec(prev, chain.transitions, shifted, col_max, next);
    alpha.row(t) = next.transpose() + emissions.row(t);
  }
  return alpha;
}

// beta(t, i): log-sum of all suffixes after position t given label i at t,
// including the stop score, excluding the emission at t.
template <typename Scalar>
Matrix<Scalar> backward(const Matrix<Scalar>& emissions,
                        const ChainWeights<Scalar>& chain) {
  const Eigen::Index n = emissions.rows();
  const Eigen::Index labels = emissions.cols();
  Matrix<Scalar> beta(n, labels);
  beta.row(n - 1) = chain.stop.transpose();
  const Matrix<Scalar> reversed = chain.transitions.transpose();
  const auto [shifted, col_max] = detail::column_shift(reversed);
  Vector<Scalar> prev(labels), next(labels);
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    prev = (emissions.row(t + 1) + beta.row(t + 1)).transpose();
    detail::log_matvec(prev, reversed, shifted, col_max, next);
    beta.row(t) = next.transpose();
  }
  return beta;
}

template <typename Scalar>
Scalar log_partition(const Matrix<Scalar>& emissions,
                     const ChainWeights<Scalar>& chain) {
  const Matrix<Scalar> alpha = forward(emissions, chain);
  return log_sum_exp((alpha.row(alpha.rows() - 1).transpose() + chain.stop).eval());
}

// Posterior expectations under the chain distribution.
template <typename Scalar>
struct Marginals {
  Scalar log_z = 0;
  Matrix<Scalar> nodes;        // positions x labels
  Matrix<Scalar> transitions;  // labels x labels, summed over positions
};

template <typename Scalar>
Marginals<Scalar> marginals(const Matrix<Scalar>& emissions,
                            const ChainWeights<Scalar>& chain) {
  const Eigen::Index n = emissions.rows();
  const Matrix<Scalar> alpha = forward(emissions, chain);
  const Matrix<Scalar> beta = backward(emissions, chain);
  Marginals<Scalar> m;
  m.log_z = log_sum_exp((alpha.row(n - 1).transpose() + chain.stop).eval());
  m.nodes = ((alpha + beta).array() - m.log_z).exp().matrix();
  m.transitions = Matrix<Scalar>::Zero(chain.labels(), chain.labels());
  for (Eigen::Index t = 1; t < n; ++t) {
    const Vector<Scalar> from = alpha.row(t - 1).transpose();
    const Vector<Scalar> to = (emissions.row(t) + beta.row(t)).transpose();
    m.transitions.array() +=
        (((chain.transitions.colwise() + from).rowwise() + to.transpose()).array() -
         m.log_z)
            .exp();
  }
  return m;
}

template <typename Scalar>
struct Decoded {
  std::vector<int> path;
  Scalar score = 0;
};

// Max-scoring path. Among equal-scoring paths the lexicographically smallest
// label sequence wins: best completions are computed right to left, then
// labels are chosen left to right taking the lowest index on ties.
template <typename Scalar>
Decoded<Scalar> viterbi(const Matrix<Scalar>& emissions,
                        const ChainWeights<Scalar>& chain) {
  const Eigen::Index n = emissions.rows();
  const Eigen::Index labels = emissions.cols();
  Matrix<Scalar> best(n, labels);
  best.row(n - 1) = chain.stop.transpose();
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> tail =
        emissions.row(t + 1) + best.row(t + 1);
    best.row(t) = (chain.transitions.rowwise() + tail).rowwise().maxCoeff().transpose();
  }

  Decoded<Scalar> out;
  out.path.resize(static_cast<std::size_t>(n));
  auto pick = [&](auto&& score_of) {
    int arg = 0;
    Scalar top = score_of(0);
    for (int j = 1; j < labels; ++j) {
      const Scalar s = score_of(j);
      if (s > top) {
        top = s;
        arg = j;
      }
    }
    return std::pair{arg, top};
  };
  auto [first, total] = pick([&](int j) {
    return chain.start(j) + emissions(0, j) + best(0, j);
  });
  out.path[0] = first;
  out.score = total;
  for (Eigen::Index t = 1; t < n; ++t) {
    const int prev = out.path[static_cast<std::size_t>(t - 1)];
    out.path[static_cast<std::size_t>(t)] = pick([&](int j) {
      // Same association as the backward pass so ties compare exactly.
      return chain.transitions(prev, j) + (emissions(t, j) + best(t, j));
    }).first;
  }
  return out;
}

}  // namespace corrner::crf
