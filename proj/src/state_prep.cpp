#include "ptwell/state_prep.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ptwell/errors.hpp"

namespace ptwell {

double ConstraintResiduals::max_abs() const {
    double m = 0.0;
    for (double v : r) m = std::max(m, std::abs(v));
    return m;
}

MeanFieldSeed MeanFieldSeed::from_target(const TwoModeTarget& target, double n1_0, double n4_0) {
    const Complex i(0.0, 1.0);
    const double phi = target.phi();
    MeanFieldSeed seed;
    seed.n1_0 = n1_0;
    seed.n4_0 = n4_0;
    seed.n = target.n;
    seed.phi = phi;
    seed.psi[0] = -i * std::sqrt(n1_0) * std::exp(i * phi);
    seed.psi[1] = std::sqrt(target.n) * std::exp(i * phi);
    seed.psi[2] = std::sqrt(target.n) * std::exp(-i * phi);
    seed.psi[3] = i * std::sqrt(n4_0) * std::exp(-i * phi);
    return seed;
}

ManyBodyState product_state(const std::vector<Complex>& psi,
                            const std::shared_ptr<const FockBasis>& basis) {
    const int wells = basis->wells();
    const int n_total = basis->n_total();
    if (static_cast<int>(psi.size()) != wells)
        throw std::invalid_argument("mean-field vector length mismatch");
    double norm2 = 0.0;
    for (const Complex& p : psi) norm2 += std::norm(p);
    if (std::abs(norm2 - n_total) > 1e-8 * n_total)
        throw SeedNormError("mean-field coefficients do not sum to n_total");

    // Single-particle coefficients rescaled to unit norm give a normalized
    // multinomial expansion directly.
    std::vector<Complex> phi(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) phi[i] = psi[i] / std::sqrt(norm2);

    const std::size_t dim = basis->dimension();
    Vector amp(static_cast<long>(dim));
    const double log_nfac = std::lgamma(n_total + 1.0);
    for (std::size_t idx = 0; idx < dim; ++idx) {
        double log_mult = log_nfac;
        Complex phase_part(1.0, 0.0);
        for (int w = 0; w < wells; ++w) {
            const int nw = basis->occupation(idx, w);
            log_mult -= std::lgamma(nw + 1.0);
            for (int q = 0; q < nw; ++q) phase_part *= phi[static_cast<std::size_t>(w)];
        }
        amp[static_cast<long>(idx)] = std::exp(0.5 * log_mult) * phase_part;
    }
    ManyBodyState state(basis, std::move(amp));
    state.normalize();  // removes residual rounding in the multinomial sum
    return state;
}

ManyBodyState product_state(const std::array<Complex, 4>& psi,
                            const std::shared_ptr<const FockBasis>& basis) {
    return product_state(std::vector<Complex>(psi.begin(), psi.end()), basis);
}

ManyBodyState perturb(const ManyBodyState& state, const PerturbationSpec& spec) {
    if (spec.variance < 0.0) throw std::invalid_argument("variance must be >= 0");
    ManyBodyState out = state;
    if (spec.variance == 0.0) return out;
    std::mt19937_64 rng(spec.seed);
    const double part = spec.complex_multipliers ? 0.5 * spec.variance : spec.variance;
    std::normal_distribution<double> real_part(1.0, std::sqrt(part));
    std::normal_distribution<double> imag_part(0.0, std::sqrt(part));
    for (long i = 0; i < out.amplitudes.size(); ++i) {
        Complex z(real_part(rng), spec.complex_multipliers ? imag_part(rng) : 0.0);
        out.amplitudes[i] *= z;
    }
    out.normalize();
    return out;
}

ConstraintResiduals constraint_residuals(const Matrix& sigma1, const TwoModeTarget& target) {
    const double n2 = sigma1(1, 1).real();
    const double n3 = sigma1(2, 2).real();
    const double jt12 = 2.0 * sigma1(0, 1).imag();
    const double jt34 = 2.0 * sigma1(2, 3).imag();
    const double j12 = 2.0 * target.gamma * n2 / jt12;
    const double j34 = 2.0 * target.gamma * n3 / jt34;
    const double s = std::sqrt(n2 * n3);
    const double ratio = target.gamma / target.j;
    ConstraintResiduals res;
    res.r[0] = -j12 * sigma1(0, 2).real() + j34 * sigma1(1, 3).real();
    res.r[1] = -j12 * sigma1(0, 2).imag() + j34 * sigma1(1, 3).imag();
    res.r[2] = n2 - n3;
    res.r[3] = sigma1(1, 2).imag() - s * ratio;
    res.r[4] = sigma1(1, 2).real() - s * std::sqrt(1.0 - ratio * ratio);
    return res;
}

namespace {

// sigma_kl of c = z .* a with its gradient with respect to the complex
// multipliers z, parametrized by 2D real coordinates (Re z, Im z). The
// gradient splits into the half acting through c (gs) and the half acting
// through conj(c) (gt):
//   d sigma / d Re(z_j) = gs_j + gt_j
//   d sigma / d Im(z_j) = i (gs_j - gt_j)
struct SigmaWithGrad {
    Complex value;
    Vector gs, gt;
};

// Stacked [x-block; y-block] gradient of the real part of sigma.
Eigen::VectorXd re_grad(const SigmaWithGrad& s) {
    const long dim = s.gs.size();
    Eigen::VectorXd g(2 * dim);
    g.head(dim) = (s.gs + s.gt).real();
    g.tail(dim) = s.gt.imag() - s.gs.imag();
    return g;
}

// Stacked gradient of the imaginary part of sigma.
Eigen::VectorXd im_grad(const SigmaWithGrad& s) {
    const long dim = s.gs.size();
    Eigen::VectorXd g(2 * dim);
    g.head(dim) = (s.gs + s.gt).imag();
    g.tail(dim) = (s.gs - s.gt).real();
    return g;
}

SigmaWithGrad sigma_offdiag(const FockBasis& basis, const Vector& c, const Vector& a,
                            int k, int l) {
    const auto& fwd = basis.hop_table(k, l);
    SigmaWithGrad out;
    out.value = Complex(0.0, 0.0);
    out.gs = Vector::Zero(c.size());
    out.gt = Vector::Zero(c.size());
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        if (fwd[i].target < 0) continue;
        const long li = static_cast<long>(i);
        const long t = fwd[i].target;
        out.value += std::conj(c[t]) * fwd[i].factor * c[li];
        out.gs[li] += fwd[i].factor * std::conj(c[t]) * a[li];
        out.gt[t] += fwd[i].factor * std::conj(a[t]) * c[li];
    }
    return out;
}

SigmaWithGrad sigma_diag(const FockBasis& basis, const Vector& c, const Vector& a, int k) {
    SigmaWithGrad out;
    double v = 0.0;
    out.gs = Vector::Zero(c.size());
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        const long li = static_cast<long>(i);
        const double nk = basis.occupation(i, k);
        v += std::norm(c[li]) * nk;
        out.gs[li] = nk * std::conj(c[li]) * a[li];
    }
    out.gt = out.gs.conjugate();
    out.value = Complex(v, 0.0);
    return out;
}

struct ResidualSystem {
    Eigen::Matrix<double, 5, 1> r;
    Eigen::MatrixXd jac;  // 5 x 2D
};

ResidualSystem assemble(const FockBasis& basis, const Vector& c, const Vector& a,
                        const TwoModeTarget& target) {
    const SigmaWithGrad s01 = sigma_offdiag(basis, c, a, 0, 1);
    const SigmaWithGrad s23 = sigma_offdiag(basis, c, a, 2, 3);
    const SigmaWithGrad s02 = sigma_offdiag(basis, c, a, 0, 2);
    const SigmaWithGrad s13 = sigma_offdiag(basis, c, a, 1, 3);
    const SigmaWithGrad s12 = sigma_offdiag(basis, c, a, 1, 2);
    const SigmaWithGrad d2 = sigma_diag(basis, c, a, 1);
    const SigmaWithGrad d3 = sigma_diag(basis, c, a, 2);

    const double n2 = d2.value.real();
    const double n3 = d3.value.real();
    const double jt12 = 2.0 * s01.value.imag();
    const double jt34 = 2.0 * s23.value.imag();
    const double gamma = target.gamma;
    const double j12 = 2.0 * gamma * n2 / jt12;
    const double j34 = 2.0 * gamma * n3 / jt34;
    const double s = std::sqrt(n2 * n3);
    const double ratio = gamma / target.j;
    const double croot = std::sqrt(1.0 - ratio * ratio);

    const Eigen::VectorXd dn2 = re_grad(d2);
    const Eigen::VectorXd dn3 = re_grad(d3);
    const Eigen::VectorXd djt12 = 2.0 * im_grad(s01);
    const Eigen::VectorXd djt34 = 2.0 * im_grad(s23);
    const Eigen::VectorXd dj12 =
        (2.0 * gamma / jt12) * dn2 - (j12 / jt12) * djt12;
    const Eigen::VectorXd dj34 =
        (2.0 * gamma / jt34) * dn3 - (j34 / jt34) * djt34;
    const Eigen::VectorXd ds = (n3 * dn2 + n2 * dn3) / (2.0 * s);

    ResidualSystem sys;
    sys.r[0] = -j12 * s02.value.real() + j34 * s13.value.real();
    sys.r[1] = -j12 * s02.value.imag() + j34 * s13.value.imag();
    sys.r[2] = n2 - n3;
    sys.r[3] = s12.value.imag() - s * ratio;
    sys.r[4] = s12.value.real() - s * croot;

    sys.jac.resize(5, 2 * c.size());
    sys.jac.row(0) = (-s02.value.real() * dj12 - j12 * re_grad(s02) +
                      s13.value.real() * dj34 + j34 * re_grad(s13))
                         .transpose();
    sys.jac.row(1) = (-s02.value.imag() * dj12 - j12 * im_grad(s02) +
                      s13.value.imag() * dj34 + j34 * im_grad(s13))
                         .transpose();
    sys.jac.row(2) = (dn2 - dn3).transpose();
    sys.jac.row(3) = (im_grad(s12) - ratio * ds).transpose();
    sys.jac.row(4) = (re_grad(s12) - croot * ds).transpose();
    return sys;
}

// The coherence rows vanish quadratically at the solution: demanding
// |sigma_23| = sqrt(n2 n3) saturates a Cauchy-Schwarz bound, so their
// gradients shrink with the residual and plain Gauss-Newton degrades to a
// sublinear crawl along a curved valley. The Newton model therefore keeps
// the exact curvature of rows 3-4: sigma_23 is a bilinear form in the
// multipliers (constant sparse Hessian from the hop table) and
// sqrt(n2 n3) has a closed-form Hessian from the diagonal moments.
struct CoherenceCurvature {
    const FockBasis& basis;
    const Vector& a;
    double ratio, croot;
    Eigen::VectorXd h2, h3;  // n_k(i) |a_i|^2 in both coordinate blocks

    CoherenceCurvature(const FockBasis& b, const Vector& base, const TwoModeTarget& target)
        : basis(b), a(base), ratio(target.gamma / target.j),
          croot(std::sqrt(1.0 - ratio * ratio)) {
        const long dim = a.size();
        h2.resize(2 * dim);
        h3.resize(2 * dim);
        for (long i = 0; i < dim; ++i) {
            const double w = std::norm(a[i]);
            h2[i] = h2[dim + i] = basis.occupation(static_cast<std::size_t>(i), 1) * w;
            h3[i] = h3[dim + i] = basis.occupation(static_cast<std::size_t>(i), 2) * w;
        }
    }

    // Hessian-vector products for the sesquilinear form
    // sigma_23 = sum_e g_e conj(z_t) z_s: the differential of the gradient
    // halves along V follows the same structure as the gradient itself.
    struct HopProduct {
        Eigen::VectorXd re, im;  // for the Re- and Im-part Hessians
    };
    HopProduct hop_form(const Eigen::VectorXd& v) const {
        const long dim = a.size();
        Vector hs = Vector::Zero(dim), ht = Vector::Zero(dim);
        const auto& fwd = basis.hop_table(1, 2);
        for (std::size_t i = 0; i < basis.dimension(); ++i) {
            if (fwd[i].target < 0) continue;
            const long li = static_cast<long>(i);
            const long t = fwd[i].target;
            const Complex g = fwd[i].factor * std::conj(a[t]) * a[li];
            const Complex vs(v[li], v[dim + li]);
            const Complex vt(v[t], v[dim + t]);
            hs[li] += g * std::conj(vt);
            ht[t] += g * vs;
        }
        const Vector hx = hs + ht;
        const Vector hy = Complex(0.0, 1.0) * (hs - ht);
        HopProduct out;
        out.re.resize(2 * dim);
        out.re.head(dim) = hx.real();
        out.re.tail(dim) = hy.real();
        out.im.resize(2 * dim);
        out.im.head(dim) = hx.imag();
        out.im.tail(dim) = hy.imag();
        return out;
    }
};

// Moment-dependent pieces of the curvature, refreshed every outer iteration.
struct CurvatureAt {
    double s, r3, r4;
    Eigen::VectorXd dn2, dn3, ds, diag;  // diag: pointwise part of d2(sqrt(n2 n3))

    CurvatureAt(const CoherenceCurvature& ctx, const ResidualSystem& sys,
                const Eigen::VectorXd& n2_grad, const Eigen::VectorXd& n3_grad,
                double n2, double n3)
        : s(std::sqrt(n2 * n3)), r3(sys.r[3]), r4(sys.r[4]),
          dn2(n2_grad), dn3(n3_grad) {
        ds = (n3 * dn2 + n2 * dn3) / (2.0 * s);
        diag = (n3 * ctx.h2 + n2 * ctx.h3) / s;
    }

    Eigen::VectorXd sqrt_hessian(const Eigen::VectorXd& v) const {
        return (dn2 * dn3.dot(v) + dn3 * dn2.dot(v)) / (2.0 * s)
            - ds * (ds.dot(v) / s) + diag.cwiseProduct(v);
    }

    // H v with H = J^T J + r3 d2r3 + r4 d2r4.
    Eigen::VectorXd apply(const CoherenceCurvature& ctx, const ResidualSystem& sys,
                          const Eigen::VectorXd& v) const {
        Eigen::VectorXd out = sys.jac.transpose() * (sys.jac * v);
        const CoherenceCurvature::HopProduct hop = ctx.hop_form(v);
        const Eigen::VectorXd sq = sqrt_hessian(v);
        out += r3 * (hop.im - ctx.ratio * sq);
        out += r4 * (hop.re - ctx.croot * sq);
        return out;
    }

    double diagonal_scale(const CoherenceCurvature& ctx, const ResidualSystem& sys) const {
        const Eigen::VectorXd jtj_diag = sys.jac.colwise().squaredNorm().transpose();
        const Eigen::VectorXd sqrt_diag = dn2.cwiseProduct(dn3) / s
            - ds.cwiseProduct(ds) / s + diag;
        const double curv = ((-r3 * ctx.ratio - r4 * ctx.croot) * sqrt_diag + jtj_diag)
                                .cwiseAbs().maxCoeff();
        return std::max(curv, 1e-300);
    }
};

// Conjugate gradients on (H + shift I) x = rhs; bails out on negative
// curvature so the caller can raise the damping instead.
bool damped_newton_step(const CoherenceCurvature& ctx, const CurvatureAt& curv,
                        const ResidualSystem& sys, double shift,
                        Eigen::VectorXd& x) {
    const long dim = sys.jac.cols();
    x = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd r = -(sys.jac.transpose() * sys.r);
    const double rhs_norm = r.norm();
    if (rhs_norm == 0.0) return true;
    Eigen::VectorXd p = r;
    double rho = r.squaredNorm();
    const int max_cg = static_cast<int>(std::min<long>(dim, 400));
    for (int k = 0; k < max_cg; ++k) {
        Eigen::VectorXd hp = curv.apply(ctx, sys, p) + shift * p;
        const double php = p.dot(hp);
        if (php <= 0.0) return false;
        const double alpha = rho / php;
        x += alpha * p;
        r -= alpha * hp;
        const double rho_new = r.squaredNorm();
        if (std::sqrt(rho_new) < 1e-2 * rhs_norm) break;
        p = r + (rho_new / rho) * p;
        rho = rho_new;
    }
    return true;
}

}  // namespace

std::pair<ManyBodyState, ConstraintResiduals> project_constraints(
    const ManyBodyState& state, const TwoModeTarget& target,
    const ProjectionOptions& options) {
    const FockBasis& basis = *state.basis;
    const Vector a = state.amplitudes;  // base amplitudes, multipliers act on these
    Vector c = a;

    const CoherenceCurvature ctx(basis, a, target);
    ResidualSystem sys = assemble(basis, c, a, target);
    double lambda = 1e-4;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        if (sys.r.cwiseAbs().maxCoeff() < options.tolerance) break;

        const SigmaWithGrad d2 = sigma_diag(basis, c, a, 1);
        const SigmaWithGrad d3 = sigma_diag(basis, c, a, 2);
        const CurvatureAt curv(ctx, sys, re_grad(d2), re_grad(d3),
                               d2.value.real(), d3.value.real());
        const double scale = curv.diagonal_scale(ctx, sys);

        bool accepted = false;
        for (int damp = 0; damp < 60 && !accepted; ++damp) {
            Eigen::VectorXd dz;
            if (damped_newton_step(ctx, curv, sys, lambda * scale, dz)) {
                const long dim = c.size();
                Vector step = dz.head(dim).cast<Complex>()
                    + Complex(0.0, 1.0) * dz.tail(dim).cast<Complex>();
                Vector c_trial = c + a.cwiseProduct(step);
                c_trial /= c_trial.norm();
                ResidualSystem trial = assemble(basis, c_trial, a, target);
                if (trial.r.norm() < sys.r.norm()) {
                    c = std::move(c_trial);
                    sys = std::move(trial);
                    lambda = std::max(lambda * 0.25, 1e-14);
                    accepted = true;
                    continue;
                }
            }
            lambda *= 4.0;
        }
        if (!accepted) break;
    }

    ManyBodyState projected(state.basis, c);
    projected.normalize();
    const ConstraintResiduals res =
        constraint_residuals(single_particle_matrix(projected), target);
    // Renormalization can cost one digit over the iteration tolerance.
    if (res.max_abs() > std::max(10.0 * options.tolerance, 1e-8)) {
        throw ConstraintSolveError("constraint projection did not reach tolerance",
                                   res.max_abs());
    }
    return {projected, res};
}

}  // namespace ptwell
