#include "tenring/transform.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace tenring {

namespace {

constexpr double kSingularFloor = 1e-14;

// Faces that need an explicit computation; for the DFT of real data the
// remaining faces are complex conjugates of these.
std::size_t independent_faces(const TransformSpec& spec) {
  return spec.kind() == TransformKind::fft ? spec.n3() / 2 + 1 : spec.n3();
}

void mirror_conjugates(std::vector<CMatrix>& faces, const TransformSpec& spec) {
  if (spec.kind() != TransformKind::fft) return;
  const std::size_t n = spec.n3();
  for (std::size_t j = n / 2 + 1; j < n; ++j) faces[j] = faces[n - j].conjugate();
}

void check_spec(const Dims3& d, const TransformSpec& spec) {
  if (d.n3 != spec.n3()) fail(ErrorCode::dimension_mismatch, "transform length does not match n3");
}

struct FaceSvd {
  CMatrix u;
  Vector s;
  CMatrix v;
};

FaceSvd face_svd(const CMatrix& face, bool real_only) {
  if (real_only) {
    Eigen::JacobiSVD<Matrix> svd(face.real(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU().cast<Complex>(), svd.singularValues(), svd.matrixV().cast<Complex>()};
  }
  Eigen::JacobiSVD<CMatrix> svd(face, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::fft: return "fft";
    case TransformKind::dct: return "dct";
    case TransformKind::identity: return "identity";
  }
  return "fft";
}

TransformKind parse_transform_kind(std::string_view name) {
  if (name == "fft") return TransformKind::fft;
  if (name == "dct") return TransformKind::dct;
  if (name == "identity") return TransformKind::identity;
  fail(ErrorCode::invalid_argument, "unknown transform '" + std::string(name) + "'");
}

TransformSpec::TransformSpec(TransformKind kind, std::size_t n3) : kind_(kind), n3_(n3), u_(n3, n3) {
  if (n3 == 0) fail(ErrorCode::invalid_argument, "transform length must be positive");
  const double n = double(n3);
  for (std::size_t j = 0; j < n3; ++j)
    for (std::size_t k = 0; k < n3; ++k) {
      switch (kind) {
        case TransformKind::fft: {
          const double angle = -2.0 * std::numbers::pi * double((j * k) % n3) / n;
          u_(j, k) = Complex(std::cos(angle), std::sin(angle));
          break;
        }
        case TransformKind::dct: {
          const double s = j == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
          u_(j, k) = s * std::cos(std::numbers::pi * double((2 * k + 1) * j) / (2.0 * n));
          break;
        }
        case TransformKind::identity: u_(j, k) = j == k ? 1.0 : 0.0; break;
      }
    }
}

SpectralTensor3 apply_transform(const Tensor3& t, const TransformSpec& spec) {
  const Dims3& d = t.dims();
  check_spec(d, spec);
  SpectralTensor3 s{d, std::vector<CMatrix>(d.n3, CMatrix::Zero(d.n1, d.n2))};
  const CMatrix& u = spec.matrix();
  for (std::size_t k = 0; k < d.n3; ++k) {
    const Eigen::Map<const Matrix> slice(t.values().data() + k * d.n1 * d.n2, d.n1, d.n2);
    if (spec.kind() == TransformKind::identity) {
      s.faces[k] = slice.cast<Complex>();
      continue;
    }
    for (std::size_t j = 0; j < d.n3; ++j) s.faces[j] += u(j, k) * slice.cast<Complex>();
  }
  return s;
}

Tensor3 inverse_transform(const SpectralTensor3& s, const TransformSpec& spec) {
  const Dims3& d = s.dims;
  check_spec(d, spec);
  if (s.faces.size() != d.n3) fail(ErrorCode::dimension_mismatch, "spectral tensor face count mismatch");
  std::vector<double> out(d.volume(), 0.0);
  const CMatrix& u = spec.matrix();
  const double inv_rho = 1.0 / spec.rho();
  for (std::size_t k = 0; k < d.n3; ++k) {
    Eigen::Map<Matrix> slice(out.data() + k * d.n1 * d.n2, d.n1, d.n2);
    if (spec.kind() == TransformKind::identity) {
      slice = s.faces[k].real();
      continue;
    }
    CMatrix acc = CMatrix::Zero(d.n1, d.n2);
    // U^{-1} = U^H / rho
    for (std::size_t j = 0; j < d.n3; ++j) acc += std::conj(u(j, k)) * s.faces[j];
    slice = acc.real() * inv_rho;
  }
  return Tensor3(d, std::move(out));
}

Tensor3 t_product(const Tensor3& a, const Tensor3& b, const TransformSpec& spec) {
  if (a.dims().n2 != b.dims().n1 || a.dims().n3 != b.dims().n3)
    fail(ErrorCode::dimension_mismatch, "t-product: inner dimensions differ");
  const SpectralTensor3 fa = apply_transform(a, spec);
  const SpectralTensor3 fb = apply_transform(b, spec);
  SpectralTensor3 c{{a.dims().n1, b.dims().n2, a.dims().n3}, std::vector<CMatrix>(a.dims().n3)};
  for (std::size_t j = 0; j < c.faces.size(); ++j) c.faces[j] = fa.faces[j] * fb.faces[j];
  return inverse_transform(c, spec);
}

Tensor3 t_identity(std::size_t n, const TransformSpec& spec) {
  SpectralTensor3 s{{n, n, spec.n3()}, std::vector<CMatrix>(spec.n3(), CMatrix::Identity(n, n))};
  return inverse_transform(s, spec);
}

TSVDFactors tsvd(const Tensor3& a, const TransformSpec& spec) {
  if (!a.all_finite()) fail(ErrorCode::non_finite, "tsvd: non-finite input");
  const SpectralTensor3 fa = apply_transform(a, spec);
  const Dims3& d = a.dims();
  const std::size_t m = std::min(d.n1, d.n2);
  TSVDFactors f{{{d.n1, m, d.n3}, std::vector<CMatrix>(d.n3)},
                {{m, m, d.n3}, std::vector<CMatrix>(d.n3)},
                {{d.n2, m, d.n3}, std::vector<CMatrix>(d.n3)}};
  const bool real_only = spec.kind() != TransformKind::fft;
  for (std::size_t j = 0; j < independent_faces(spec); ++j) {
    FaceSvd svd = face_svd(fa.faces[j], real_only);
    f.u.faces[j] = std::move(svd.u);
    f.v.faces[j] = std::move(svd.v);
    f.k.faces[j] = svd.s.cast<Complex>().asDiagonal();
  }
  mirror_conjugates(f.u.faces, spec);
  mirror_conjugates(f.k.faces, spec);
  mirror_conjugates(f.v.faces, spec);
  return f;
}

Tensor3 reconstruct(const TSVDFactors& f, const TransformSpec& spec) {
  SpectralTensor3 c{{f.u.dims.n1, f.v.dims.n1, f.u.dims.n3}, std::vector<CMatrix>(f.u.dims.n3)};
  for (std::size_t j = 0; j < c.faces.size(); ++j) c.faces[j] = f.u.faces[j] * f.k.faces[j] * f.v.faces[j].adjoint();
  return inverse_transform(c, spec);
}

Matrix transform_singular_values(const Tensor3& a, const TransformSpec& spec) {
  const SpectralTensor3 fa = apply_transform(a, spec);
  const Dims3& d = a.dims();
  Matrix sv(std::min(d.n1, d.n2), d.n3);
  const bool real_only = spec.kind() != TransformKind::fft;
  for (std::size_t j = 0; j < independent_faces(spec); ++j) {
    if (real_only) {
      sv.col(j) = Eigen::JacobiSVD<Matrix>(fa.faces[j].real()).singularValues();
    } else {
      sv.col(j) = Eigen::JacobiSVD<CMatrix>(fa.faces[j]).singularValues();
    }
  }
  if (spec.kind() == TransformKind::fft)
    for (std::size_t j = d.n3 / 2 + 1; j < d.n3; ++j) sv.col(j) = sv.col(d.n3 - j);
  return sv;
}

double spectral_penalty(const Tensor3& a, const TransformSpec& spec, const PenaltySpec& phi) {
  const Matrix sv = transform_singular_values(a, spec);
  double s = 0.0;
  for (Eigen::Index j = 0; j < sv.cols(); ++j)
    for (Eigen::Index i = 0; i < sv.rows(); ++i) s += phi.eval(sv(i, j) < kSingularFloor ? 0.0 : sv(i, j));
  return s / spec.rho();
}

Tensor3 gntsvt(const Tensor3& a, const TransformSpec& spec, const PenaltySpec& phi, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) fail(ErrorCode::invalid_argument, "gntsvt: tau must be positive");
  check_spec(a.dims(), spec);
  SpectralTensor3 fa = apply_transform(a, spec);
  const bool real_only = spec.kind() != TransformKind::fft;
  for (std::size_t j = 0; j < independent_faces(spec); ++j) {
    FaceSvd svd = face_svd(fa.faces[j], real_only);
    Vector shrunk(svd.s.size());
    for (Eigen::Index i = 0; i < svd.s.size(); ++i)
      shrunk(i) = svd.s(i) < kSingularFloor ? 0.0 : phi.prox(tau, svd.s(i));
    fa.faces[j] = svd.u * shrunk.cast<Complex>().asDiagonal() * svd.v.adjoint();
  }
  mirror_conjugates(fa.faces, spec);
  return inverse_transform(fa, spec);
}

double gntctv_norm(const Tensor3& t, const std::vector<int>& gamma_set, const TransformSpec& spec,
                   const PenaltySpec& phi) {
  if (gamma_set.empty()) fail(ErrorCode::invalid_argument, "gntctv: direction set must be nonempty");
  const std::set<int> unique(gamma_set.begin(), gamma_set.end());
  if (unique.size() != gamma_set.size()) fail(ErrorCode::invalid_argument, "gntctv: repeated direction");
  double total = 0.0;
  for (int k : gamma_set) {
    check_mode(k);
    total += spectral_penalty(gradient(t, k), spec, phi);
  }
  return total / double(gamma_set.size());
}

Matrix matrix_svt(const Matrix& a, const PenaltySpec& phi, double tau) {
  if (!(tau > 0.0)) fail(ErrorCode::invalid_argument, "svt: tau must be positive");
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = s(i) < kSingularFloor ? 0.0 : phi.prox(tau, s(i));
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

}  // namespace tenring
