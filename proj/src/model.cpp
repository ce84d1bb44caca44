#include "sweep/model.hpp"

#include <algorithm>
#include <cmath>

namespace sweep {

// ---------------------------------------------------------------- perturbation

PerturbationMap PerturbationMap::affine(Mat G, Mat B, Vec b) {
  PerturbationMap p;
  p.kind_ = Kind::kAffine;
  p.n_ = static_cast<int>(G.rows());
  p.d_ = static_cast<int>(B.cols());
  if (G.cols() != G.rows() || B.rows() != G.rows() || b.size() != G.rows())
    throw Error(ErrorCode::kInvalidArgument, "affine perturbation: inconsistent shapes");
  if (!G.allFinite() || !B.allFinite() || !b.allFinite())
    throw Error(ErrorCode::kInvalidArgument, "affine perturbation: non-finite data");
  p.G_ = std::move(G);
  p.B_ = std::move(B);
  p.b_ = std::move(b);
  return p;
}

PerturbationMap PerturbationMap::catalog(const std::string& name, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "catalog perturbation: dimension must be positive");
  PerturbationMap p;
  if (name == "sine_drift") p.kind_ = Kind::kSineDrift;
  else if (name == "saturated") p.kind_ = Kind::kSaturated;
  else throw Error(ErrorCode::kInvalidArgument, "unknown perturbation '" + name + "'");
  p.n_ = n;
  p.d_ = n;
  return p;
}

Vec PerturbationMap::operator()(const Vec& x, const Vec& u) const {
  switch (kind_) {
    case Kind::kAffine: return G_ * x + B_ * u + b_;
    case Kind::kSineDrift: return u - x.array().sin().matrix();
    case Kind::kSaturated: return u.array().tanh().matrix() - 0.5 * x;
  }
  return {};
}

Mat PerturbationMap::jacobian_x(const Vec& x, const Vec&) const {
  switch (kind_) {
    case Kind::kAffine: return G_;
    case Kind::kSineDrift: return (-x.array().cos()).matrix().asDiagonal();
    case Kind::kSaturated: return -0.5 * Mat::Identity(n_, n_);
  }
  return {};
}

Mat PerturbationMap::jacobian_u(const Vec&, const Vec& u) const {
  switch (kind_) {
    case Kind::kAffine: return B_;
    case Kind::kSineDrift: return Mat::Identity(n_, n_);
    case Kind::kSaturated: {
      Vec t = u.array().tanh();
      return (1.0 - t.array().square()).matrix().asDiagonal();
    }
  }
  return {};
}

double PerturbationMap::self_test(const Vec& x, const Vec& u, double step) const {
  Mat Jx = jacobian_x(x, u), Ju = jacobian_u(x, u);
  Mat Fx(n_, n_), Fu(n_, d_);
  for (int k = 0; k < n_; ++k) {
    Vec e = Vec::Zero(n_);
    e(k) = step;
    Fx.col(k) = ((*this)(x + e, u) - (*this)(x - e, u)) / (2 * step);
  }
  for (int k = 0; k < d_; ++k) {
    Vec e = Vec::Zero(d_);
    e(k) = step;
    Fu.col(k) = ((*this)(x, u + e) - (*this)(x, u - e)) / (2 * step);
  }
  double ex = (Jx - Fx).norm() / (1.0 + Jx.norm());
  double eu = (Ju - Fu).norm() / (1.0 + Ju.norm());
  return std::max(ex, eu);
}

// ---------------------------------------------------------------- control set

ControlSet ControlSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw Error(ErrorCode::kInvalidArgument, "box: bounds must have equal positive length");
  if (!lo.allFinite() || !hi.allFinite()) throw Error(ErrorCode::kInvalidArgument, "box: bounds must be finite");
  if ((lo.array() > hi.array()).any()) throw Error(ErrorCode::kInvalidArgument, "box: lo > hi");
  ControlSet U;
  U.kind_ = Kind::kBox;
  U.dim_ = static_cast<int>(lo.size());
  U.lo_ = std::move(lo);
  U.hi_ = std::move(hi);
  return U;
}

ControlSet ControlSet::finite(std::vector<Vec> points) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "finite control set is empty");
  for (const auto& p : points)
    if (p.size() != points.front().size() || !p.allFinite())
      throw Error(ErrorCode::kInvalidArgument, "finite control set: inconsistent points");
  ControlSet U;
  U.kind_ = Kind::kFinite;
  U.dim_ = static_cast<int>(points.front().size());
  U.points_ = std::move(points);
  return U;
}

ControlSet ControlSet::ball(Vec center, double radius) {
  if (center.size() == 0 || !center.allFinite() || !(radius >= 0.0) || !std::isfinite(radius))
    throw Error(ErrorCode::kInvalidArgument, "ball: bad center or radius");
  ControlSet U;
  U.kind_ = Kind::kBall;
  U.dim_ = static_cast<int>(center.size());
  U.lo_ = std::move(center);
  U.radius_ = radius;
  return U;
}

bool ControlSet::contains(const Vec& u, double tol) const {
  if (u.size() != dim_) return false;
  switch (kind_) {
    case Kind::kBox:
      return (u.array() >= lo_.array() - tol).all() && (u.array() <= hi_.array() + tol).all();
    case Kind::kBall: return (u - lo_).norm() <= radius_ + tol;
    case Kind::kFinite:
      return std::any_of(points_.begin(), points_.end(), [&](const Vec& p) { return (p - u).norm() <= tol; });
  }
  return false;
}

Vec ControlSet::project(const Vec& u) const {
  switch (kind_) {
    case Kind::kBox: return u.cwiseMax(lo_).cwiseMin(hi_);
    case Kind::kBall: {
      Vec r = u - lo_;
      double nr = r.norm();
      return nr <= radius_ ? u : Vec(lo_ + r * (radius_ / nr));
    }
    case Kind::kFinite: {
      size_t best = 0;
      for (size_t k = 1; k < points_.size(); ++k)
        if ((points_[k] - u).norm() < (points_[best] - u).norm()) best = k;
      return points_[best];
    }
  }
  return u;
}

double ControlSet::normal_cone_residual(const Vec& u, const Vec& psi, double tol) const {
  switch (kind_) {
    case Kind::kBox: {
      Vec viol(dim_);
      for (int k = 0; k < dim_; ++k) {
        bool at_lo = u(k) <= lo_(k) + tol, at_hi = u(k) >= hi_(k) - tol;
        if (at_lo && at_hi) viol(k) = 0.0;
        else if (at_hi) viol(k) = std::max(0.0, -psi(k));
        else if (at_lo) viol(k) = std::max(0.0, psi(k));
        else viol(k) = std::abs(psi(k));
      }
      return viol.norm();
    }
    case Kind::kBall: {
      Vec r = u - lo_;
      double nr = r.norm();
      if (nr < radius_ - tol || nr == 0.0) return radius_ == 0.0 ? 0.0 : psi.norm();
      Vec dir = r / nr;
      return (psi - std::max(0.0, psi.dot(dir)) * dir).norm();
    }
    case Kind::kFinite: return 0.0;
  }
  return 0.0;
}

double ControlSet::support(const Vec& psi) const {
  switch (kind_) {
    case Kind::kBox: return (psi.array() * lo_.array()).max(psi.array() * hi_.array()).sum();
    case Kind::kBall: return psi.dot(lo_) + radius_ * psi.norm();
    case Kind::kFinite: {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& p : points_) best = std::max(best, psi.dot(p));
      return best;
    }
  }
  return 0.0;
}

Vec ControlSet::argmax(const Vec& psi) const {
  switch (kind_) {
    case Kind::kBox: {
      Vec out = center();
      for (int k = 0; k < dim_; ++k) {
        if (psi(k) > 0) out(k) = hi_(k);
        else if (psi(k) < 0) out(k) = lo_(k);
      }
      return out;
    }
    case Kind::kBall: {
      double np = psi.norm();
      return np == 0.0 ? lo_ : Vec(lo_ + psi * (radius_ / np));
    }
    case Kind::kFinite: {
      size_t best = 0;
      for (size_t k = 1; k < points_.size(); ++k)
        if (psi.dot(points_[k]) > psi.dot(points_[best])) best = k;
      return points_[best];
    }
  }
  return {};
}

Mat ControlSet::free_directions(const Vec& u, double tol) const {
  switch (kind_) {
    case Kind::kBox: {
      std::vector<int> free;
      for (int k = 0; k < dim_; ++k)
        if (u(k) > lo_(k) + tol && u(k) < hi_(k) - tol) free.push_back(k);
      Mat Z = Mat::Zero(static_cast<Eigen::Index>(free.size()), dim_);
      for (size_t c = 0; c < free.size(); ++c) Z(c, free[c]) = 1.0;
      return Z;
    }
    case Kind::kBall: {
      Vec r = u - lo_;
      double nr = r.norm();
      if (radius_ == 0.0) return Mat(0, dim_);
      if (nr < radius_ - tol) return Mat::Identity(dim_, dim_);
      // orthogonal complement of the outward direction
      Eigen::HouseholderQR<Mat> qr(r / nr);
      Mat Q = qr.householderQ();
      return Q.rightCols(dim_ - 1).transpose();
    }
    case Kind::kFinite: return Mat(0, dim_);
  }
  return Mat(0, dim_);
}

Vec ControlSet::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  switch (kind_) {
    case Kind::kBox: {
      Vec out(dim_);
      for (int k = 0; k < dim_; ++k) out(k) = lo_(k) + (hi_(k) - lo_(k)) * unif(rng);
      return out;
    }
    case Kind::kBall: {
      std::normal_distribution<double> gauss;
      Vec dir(dim_);
      for (int k = 0; k < dim_; ++k) dir(k) = gauss(rng);
      double nd = dir.norm();
      if (nd == 0.0) return lo_;
      double rad = radius_ * std::pow(unif(rng), 1.0 / dim_);
      return lo_ + dir * (rad / nd);
    }
    case Kind::kFinite: {
      std::uniform_int_distribution<size_t> pick(0, points_.size() - 1);
      return points_[pick(rng)];
    }
  }
  return {};
}

Vec ControlSet::center() const {
  switch (kind_) {
    case Kind::kBox: return 0.5 * (lo_ + hi_);
    case Kind::kBall: return lo_;
    case Kind::kFinite: return points_.front();
  }
  return {};
}

std::vector<Vec> ControlSet::vertices() const {
  std::vector<Vec> out;
  if (kind_ == Kind::kFinite) return points_;
  if (kind_ != Kind::kBox || dim_ > 16) return out;
  for (unsigned mask = 0; mask < (1u << dim_); ++mask) {
    Vec v(dim_);
    for (int k = 0; k < dim_; ++k) v(k) = (mask >> k) & 1u ? hi_(k) : lo_(k);
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------- BV control

BVControl::BVControl(std::vector<double> breakpoints, std::vector<Vec> values)
    : breaks_(std::move(breakpoints)), values_(std::move(values)) {
  if (breaks_.empty() || breaks_.size() != values_.size())
    throw Error(ErrorCode::kInvalidArgument, "control: breakpoints and values must match and be nonempty");
  if (breaks_.front() != 0.0) throw Error(ErrorCode::kInvalidArgument, "control: first breakpoint must be 0");
  for (size_t k = 1; k < breaks_.size(); ++k)
    if (!(breaks_[k] > breaks_[k - 1]))
      throw Error(ErrorCode::kInvalidArgument, "control: breakpoints must increase");
  for (const auto& v : values_)
    if (v.size() != values_.front().size() || !v.allFinite())
      throw Error(ErrorCode::kInvalidArgument, "control: inconsistent values");
}

BVControl BVControl::constant(const Vec& value) { return BVControl({0.0}, {value}); }

Vec BVControl::operator()(double t) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  size_t k = it == breaks_.begin() ? 0 : static_cast<size_t>(it - breaks_.begin()) - 1;
  return values_[k];
}

double BVControl::total_variation() const {
  double tv = 0.0;
  for (size_t k = 1; k < values_.size(); ++k) tv += (values_[k] - values_[k - 1]).norm();
  return tv;
}

// ---------------------------------------------------------------- cost

CostFunction CostFunction::linear(Vec a) {
  CostFunction f;
  f.kind_ = Kind::kLinear;
  f.n_ = static_cast<int>(a.size());
  f.a_ = std::move(a);
  return f;
}

CostFunction CostFunction::quadratic(Mat Q, Vec a) {
  if (Q.rows() != Q.cols() || Q.rows() != a.size())
    throw Error(ErrorCode::kInvalidArgument, "quadratic cost: inconsistent shapes");
  CostFunction f;
  f.kind_ = Kind::kQuadratic;
  f.n_ = static_cast<int>(a.size());
  f.Q_ = 0.5 * (Q + Q.transpose());
  f.a_ = std::move(a);
  return f;
}

CostFunction CostFunction::half_norm_sq(int n) {
  CostFunction f;
  f.kind_ = Kind::kHalfNormSq;
  f.n_ = n;
  return f;
}

double CostFunction::operator()(const Vec& x) const {
  switch (kind_) {
    case Kind::kLinear: return a_.dot(x);
    case Kind::kQuadratic: return 0.5 * x.dot(Q_ * x) + a_.dot(x);
    case Kind::kHalfNormSq: return 0.5 * x.squaredNorm();
  }
  return 0.0;
}

Vec CostFunction::gradient(const Vec& x) const {
  switch (kind_) {
    case Kind::kLinear: return a_;
    case Kind::kQuadratic: return Q_ * x + a_;
    case Kind::kHalfNormSq: return x;
  }
  return {};
}

double CostFunction::self_test(const Vec& x, double step) const {
  Vec g = gradient(x), fd(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vec e = Vec::Zero(x.size());
    e(k) = step;
    fd(k) = ((*this)(x + e) - (*this)(x - e)) / (2 * step);
  }
  return (g - fd).norm() / (1.0 + g.norm());
}

void SweepingProblem::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorCode::kInvalidArgument, "horizon T must be positive");
  if (x0.size() != n()) throw Error(ErrorCode::kInvalidArgument, "x0 dimension does not match the polyhedron");
  if (g.state_dim() != n() || g.control_dim() != d())
    throw Error(ErrorCode::kInvalidArgument, "perturbation dimensions do not match state/control");
  if (!C.contains(x0, 1e-9)) throw Error(ErrorCode::kInfeasiblePoint, "x0 is not in C");
}

}  // namespace sweep
