#pragma once

// Pointwise algebra of (0,q)-forms on C^n.
//
// Axes are 1-based throughout, matching the usual dz̄_1 ∧ ... ∧ dz̄_n labelling.
// Nothing here holds state; every function is pure.

#include <complex>
#include <compare>
#include <map>
#include <vector>

#include <Eigen/Dense>

namespace dbr {

using cplx = std::complex<double>;

/// Strictly increasing list of axes in [1, n]. Construction rejects anything
/// that is not already canonical, so no sign is ever silently absorbed.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> axes);

  /// Validates against an ambient dimension as well.
  MultiIndex(std::vector<int> axes, int n);

  const std::vector<int>& axes() const noexcept { return axes_; }
  int size() const noexcept { return static_cast<int>(axes_.size()); }
  bool contains(int axis) const noexcept;

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::vector<int> axes_;
};

/// All increasing multi-indices of length q over n axes, lexicographic order.
std::vector<MultiIndex> increasing_indices(int n, int q);

/// A (0,q)-form at one point: coefficients u_I keyed by increasing I, |I| = q.
/// Missing keys are zero coefficients.
class FormValue {
 public:
  FormValue(int n, int q);

  int n() const noexcept { return n_; }
  int q() const noexcept { return q_; }

  void set(const MultiIndex& index, cplx value);
  cplx get(const MultiIndex& index) const;
  const std::map<MultiIndex, cplx>& coeffs() const noexcept { return coeffs_; }

  /// Σ'_{|I|=q} |u_I|^2
  double norm_sq() const;

 private:
  void check_key(const MultiIndex& index) const;

  int n_;
  int q_;
  std::map<MultiIndex, cplx> coeffs_;
};

/// Second-order data of a real C^2 function at one point.
///   matrix(l-1, k-1) = ∂²f / ∂z_l ∂z̄_k   (conjugate symmetric)
///   gradient(j-1)    = ∂f / ∂z_j
struct HermitianField {
  int n = 0;
  Eigen::MatrixXcd matrix;
  Eigen::VectorXcd gradient;
  double value = 0.0;

  HermitianField() = default;
  HermitianField(Eigen::MatrixXcd m, Eigen::VectorXcd g, double v);

  static HermitianField zero(int n);
  /// Constant function: zero gradient and Hessian.
  static HermitianField constant(int n, double value);
};

int perm_sign(int m, const MultiIndex& h, int n);

/// u_{mH} = ε^{mH}_{<mH>} u_{<mH>}, zero when m ∈ H.
cplx coeff_mH(const FormValue& u, int m, const MultiIndex& h);

/// i∂∂̄f(u,u) = Σ'_{|J|=q-1} Σ_{k,l} f_{l k̄} u_{lJ} conj(u_{kJ})
double hessian_action(const HermitianField& f, const FormValue& u);

/// Σ'_{|J|=q-1} |Σ_l g_l u_{lJ}|^2 for a (1,0)-covector g. For q = 1 this is
/// |Σ_j g_j u_j|^2; larger q pairs per J through coeff_mH.
double gradient_pairing_sq(const Eigen::VectorXcd& g, const FormValue& u);

/// Θ_{λ,τ}(u,u) = τ i∂∂̄λ(u,u) − i∂∂̄τ(u,u) − |⟨∂τ,u⟩|² / τ.
double theta(const HermitianField& lambda, const HermitianField& tau, const FormValue& u);

/// K² i∂∂̄ψ(u,u) − i∂ψ∧∂̄ψ(u,u); nonnegative iff the self-bound K holds at (z, u).
double self_bound_margin(const HermitianField& psi, const FormValue& u, double k);

/// Fields for λ = αψ and τ = e^{−αψ}, given ψ's pointwise data.
std::pair<HermitianField, HermitianField> self_bounded_pair(const HermitianField& psi, double alpha);

}  // namespace dbr
