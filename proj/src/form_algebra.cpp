#include "dbar_range/form_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dbar_range/errors.hpp"

namespace dbr {

namespace {

std::string describe(const std::vector<int>& axes) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < axes.size(); ++i) os << (i ? "," : "") << axes[i];
  os << ")";
  return os.str();
}

void check_dims(const HermitianField& f, const FormValue& u, const char* who) {
  require(f.n == u.n(), ErrorKind::Argument,
          std::string(who) + ": field dimension " + std::to_string(f.n) + " does not match form dimension " +
              std::to_string(u.n()));
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> axes) : axes_(std::move(axes)) {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    require(axes_[i] >= 1, ErrorKind::Argument, "multi-index axes are 1-based: " + describe(axes_));
    if (i > 0)
      require(axes_[i - 1] < axes_[i], ErrorKind::Argument,
              "multi-index must be strictly increasing: " + describe(axes_));
  }
}

MultiIndex::MultiIndex(std::vector<int> axes, int n) : MultiIndex(std::move(axes)) {
  if (!axes_.empty())
    require(axes_.back() <= n, ErrorKind::Argument,
            "multi-index " + describe(axes_) + " exceeds dimension " + std::to_string(n));
}

bool MultiIndex::contains(int axis) const noexcept {
  return std::binary_search(axes_.begin(), axes_.end(), axis);
}

std::vector<MultiIndex> increasing_indices(int n, int q) {
  require(n >= 0 && q >= 0, ErrorKind::Argument, "increasing_indices: negative size");
  std::vector<MultiIndex> out;
  if (q > n) return out;
  std::vector<int> cur(q);
  for (int i = 0; i < q; ++i) cur[i] = i + 1;
  while (true) {
    out.emplace_back(cur);
    int pos = q - 1;
    while (pos >= 0 && cur[pos] == n - q + pos + 1) --pos;
    if (pos < 0) break;
    ++cur[pos];
    for (int i = pos + 1; i < q; ++i) cur[i] = cur[i - 1] + 1;
  }
  return out;
}

FormValue::FormValue(int n, int q) : n_(n), q_(q) {
  require(n >= 1, ErrorKind::Argument, "FormValue: dimension must be >= 1");
  require(q >= 0 && q <= n, ErrorKind::Argument, "FormValue: degree must lie in [0, n]");
}

void FormValue::check_key(const MultiIndex& index) const {
  require(index.size() == q_, ErrorKind::Argument,
          "FormValue: index " + describe(index.axes()) + " has length " + std::to_string(index.size()) +
              ", form degree is " + std::to_string(q_));
  if (q_ > 0)
    require(index.axes().back() <= n_, ErrorKind::Argument,
            "FormValue: index " + describe(index.axes()) + " exceeds dimension " + std::to_string(n_));
}

void FormValue::set(const MultiIndex& index, cplx value) {
  check_key(index);
  if (value == cplx(0.0))
    coeffs_.erase(index);
  else
    coeffs_[index] = value;
}

cplx FormValue::get(const MultiIndex& index) const {
  check_key(index);
  auto it = coeffs_.find(index);
  return it == coeffs_.end() ? cplx(0.0) : it->second;
}

double FormValue::norm_sq() const {
  double s = 0.0;
  for (const auto& [_, c] : coeffs_) s += std::norm(c);
  return s;
}

HermitianField::HermitianField(Eigen::MatrixXcd m, Eigen::VectorXcd g, double v)
    : n(static_cast<int>(m.rows())), matrix(std::move(m)), gradient(std::move(g)), value(v) {
  require(matrix.rows() == matrix.cols(), ErrorKind::Argument, "HermitianField: matrix must be square");
  require(gradient.size() == matrix.rows(), ErrorKind::Argument,
          "HermitianField: gradient length must match matrix size");
}

HermitianField HermitianField::zero(int n) { return constant(n, 0.0); }

HermitianField HermitianField::constant(int n, double value) {
  return HermitianField(Eigen::MatrixXcd::Zero(n, n), Eigen::VectorXcd::Zero(n), value);
}

int perm_sign(int m, const MultiIndex& h, int n) {
  require(m >= 1 && m <= n, ErrorKind::Argument,
          "perm_sign: axis " + std::to_string(m) + " outside [1, " + std::to_string(n) + "]");
  require(h.size() == 0 || h.axes().back() <= n, ErrorKind::Argument, "perm_sign: H exceeds dimension");
  if (h.contains(m)) return 0;
  // Moving m past every smaller entry of H is one adjacent transposition each.
  const auto smaller = std::count_if(h.axes().begin(), h.axes().end(), [m](int a) { return a < m; });
  return (smaller % 2 == 0) ? 1 : -1;
}

cplx coeff_mH(const FormValue& u, int m, const MultiIndex& h) {
  require(u.q() == h.size() + 1, ErrorKind::Argument,
          "coeff_mH: form degree " + std::to_string(u.q()) + " needs |H| = " + std::to_string(u.q() - 1));
  const int sign = perm_sign(m, h, u.n());
  if (sign == 0) return 0.0;
  std::vector<int> merged = h.axes();
  merged.insert(std::upper_bound(merged.begin(), merged.end(), m), m);
  return static_cast<double>(sign) * u.get(MultiIndex(std::move(merged)));
}

namespace {

// Rows u_{·J} for every increasing J of length q-1: result(J, l-1) = u_{lJ}.
Eigen::MatrixXcd contracted_rows(const FormValue& u) {
  const auto js = increasing_indices(u.n(), u.q() - 1);
  Eigen::MatrixXcd rows(static_cast<Eigen::Index>(js.size()), u.n());
  for (std::size_t r = 0; r < js.size(); ++r)
    for (int l = 1; l <= u.n(); ++l) rows(static_cast<Eigen::Index>(r), l - 1) = coeff_mH(u, l, js[r]);
  return rows;
}

}  // namespace

double hessian_action(const HermitianField& f, const FormValue& u) {
  check_dims(f, u, "hessian_action");
  require(u.q() >= 1, ErrorKind::Argument, "hessian_action: form degree must be >= 1");
  const Eigen::MatrixXcd rows = contracted_rows(u);
  double total = 0.0;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const Eigen::VectorXcd v = rows.row(r).transpose();
    // Σ_{k,l} f_{l k̄} v_l conj(v_k) = v^T F conj(v)
    total += (v.transpose() * f.matrix * v.conjugate()).value().real();
  }
  return total;
}

double gradient_pairing_sq(const Eigen::VectorXcd& g, const FormValue& u) {
  require(g.size() == u.n(), ErrorKind::Argument, "gradient_pairing_sq: dimension mismatch");
  require(u.q() >= 1, ErrorKind::Argument, "gradient_pairing_sq: form degree must be >= 1");
  const Eigen::MatrixXcd rows = contracted_rows(u);
  double total = 0.0;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) total += std::norm((rows.row(r) * g).value());
  return total;
}

double theta(const HermitianField& lambda, const HermitianField& tau, const FormValue& u) {
  check_dims(lambda, u, "theta");
  check_dims(tau, u, "theta");
  require(tau.value > 0.0, ErrorKind::Domain, "theta: tau must be positive, got " + std::to_string(tau.value));
  if (u.coeffs().empty()) return 0.0;
  return tau.value * hessian_action(lambda, u) - hessian_action(tau, u) -
         gradient_pairing_sq(tau.gradient, u) / tau.value;
}

double self_bound_margin(const HermitianField& psi, const FormValue& u, double k) {
  check_dims(psi, u, "self_bound_margin");
  require(k > 0.0, ErrorKind::Argument, "self_bound_margin: K must be positive");
  if (u.coeffs().empty()) return 0.0;
  return k * k * hessian_action(psi, u) - gradient_pairing_sq(psi.gradient, u);
}

std::pair<HermitianField, HermitianField> self_bounded_pair(const HermitianField& psi, double alpha) {
  require(alpha > 0.0, ErrorKind::Argument, "self_bounded_pair: alpha must be positive");
  HermitianField lambda(alpha * psi.matrix, alpha * psi.gradient, alpha * psi.value);
  const double tau_value = std::exp(-alpha * psi.value);
  // ∂²τ/∂z_l∂z̄_k = τ (α² ψ_l conj(ψ_k) − α ψ_{l k̄})
  Eigen::MatrixXcd outer = psi.gradient * psi.gradient.adjoint();
  HermitianField tau(tau_value * (alpha * alpha * outer - alpha * psi.matrix), -alpha * tau_value * psi.gradient,
                     tau_value);
  return {std::move(lambda), std::move(tau)};
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Query: return "query";
    case ErrorKind::Config: return "config";
    case ErrorKind::Mesh: return "mesh";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Internal: return "internal";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace dbr
