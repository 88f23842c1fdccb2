#include "degenlab/propagator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace degenlab {

namespace {

void require_time(double t, const char* what, bool allow_zero) {
    if (!std::isfinite(t) || t < 0.0 || (!allow_zero && t == 0.0))
        throw ParameterError(std::string(what) + ": time must be " + (allow_zero ? "non-negative" : "positive") +
                             ", got " + std::to_string(t));
}

// Chebyshev coefficients of f on [-1, 1] from M Gauss nodes.
std::vector<double> chebyshev_coefficients(const std::function<double(double)>& f, int degree) {
    const int m = 2 * degree + 2;
    std::vector<double> fv(static_cast<std::size_t>(m));
    std::vector<double> theta(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        theta[static_cast<std::size_t>(j)] = std::numbers::pi * (j + 0.5) / m;
        fv[static_cast<std::size_t>(j)] = f(std::cos(theta[static_cast<std::size_t>(j)]));
    }
    std::vector<double> c(static_cast<std::size_t>(degree + 1), 0.0);
    for (int k = 0; k <= degree; ++k) {
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += fv[static_cast<std::size_t>(j)] * std::cos(k * theta[static_cast<std::size_t>(j)]);
        c[static_cast<std::size_t>(k)] = 2.0 * s / m;
    }
    return c;
}

constexpr double kModeCutoff = 1e-20;

bool is_chain(const Eigen::MatrixXd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (std::abs(i - j) > 1 && m(i, j) != 0.0) return false;
    return true;
}

}  // namespace

Propagator::Propagator(DiscreteForm form, PropagatorOptions options)
    : form_(std::move(form)), options_(options) {
    if (options_.dense_limit < 0 || options_.krylov_max_dimension < 2 || options_.krylov_tolerance <= 0.0 ||
        options_.chebyshev_tolerance <= 0.0)
        throw ParameterError("invalid propagator options");
    sqrt_vol_ = form_.volumes().cwiseSqrt();
    h_sym_ = form_.symmetric_operator();
}

const std::vector<SpectralComponent>& Propagator::spectrum() const {
    if (!dense())
        throw ParameterError("grid of " + std::to_string(form_.size()) + " cells exceeds the dense spectral limit");
    std::call_once(spectrum_once_, [this] {
        int count = 0;
        const std::vector<int> comp = form_.components(&count);
        std::vector<std::vector<int>> members(static_cast<std::size_t>(count));
        for (int i = 0; i < form_.size(); ++i) members[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])].push_back(i);
        std::vector<int> local(static_cast<std::size_t>(form_.size()), -1);
        std::vector<SpectralComponent> out;
        out.reserve(members.size());
        for (auto& cells : members) {
            const int m = static_cast<int>(cells.size());
            for (int k = 0; k < m; ++k) local[static_cast<std::size_t>(cells[static_cast<std::size_t>(k)])] = k;
            Eigen::MatrixXd block = Eigen::MatrixXd::Zero(m, m);
            for (int k = 0; k < m; ++k) {
                const int row = cells[static_cast<std::size_t>(k)];
                for (Eigen::SparseMatrix<double>::InnerIterator it(h_sym_, row); it; ++it) {
                    const int l = local[static_cast<std::size_t>(it.row())];
                    if (l >= 0) block(l, k) = it.value();
                }
            }
            SpectralComponent sc;
            sc.cells = std::move(cells);
            if (m == 1) {
                sc.eigenvalues = block.diagonal();
                sc.eigenvectors = Eigen::MatrixXd::Ones(1, 1);
            } else if (is_chain(block)) {
                // 1D components are tridiagonal in cell order; skip the Householder reduction.
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
                const Eigen::VectorXd diag = block.diagonal();
                const Eigen::VectorXd sub = block.diagonal(-1);
                es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
                if (es.info() != Eigen::Success) throw AssemblyError("eigendecomposition failed");
                sc.eigenvalues = es.eigenvalues();
                sc.eigenvectors = es.eigenvectors();
            } else {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
                if (es.info() != Eigen::Success) throw AssemblyError("eigendecomposition failed");
                sc.eigenvalues = es.eigenvalues();
                sc.eigenvectors = es.eigenvectors();
            }
            for (int k = 0; k < m; ++k) local[static_cast<std::size_t>(sc.cells[static_cast<std::size_t>(k)])] = -1;
            out.push_back(std::move(sc));
        }
        spectrum_ = std::move(out);
    });
    return spectrum_;
}

double Propagator::max_eigenvalue() const {
    double best = 0.0;
    for (const SpectralComponent& sc : spectrum())
        if (sc.eigenvalues.size() > 0) best = std::max(best, sc.eigenvalues.maxCoeff());
    return best;
}

double Propagator::gershgorin_bound() const {
    double best = 0.0;
    for (int k = 0; k < h_sym_.outerSize(); ++k) {
        double row = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(h_sym_, k); it; ++it) row += std::abs(it.value());
        best = std::max(best, row);
    }
    return best;
}

StateVector Propagator::spectral_apply(const StateVector& u, const std::function<double(double)>& f) const {
    StateVector out = StateVector::Zero(u.size());
    for (const SpectralComponent& sc : spectrum()) {
        const int m = static_cast<int>(sc.cells.size());
        Eigen::VectorXd local(m);
        for (int k = 0; k < m; ++k) local(k) = u(sc.cells[static_cast<std::size_t>(k)]);
        if (local.isZero(0.0)) continue;
        Eigen::VectorXd coeff = sc.eigenvectors.transpose() * local;
        for (int k = 0; k < m; ++k) coeff(k) *= f(sc.eigenvalues(k));
        const Eigen::VectorXd back = sc.eigenvectors * coeff;
        for (int k = 0; k < m; ++k) out(sc.cells[static_cast<std::size_t>(k)]) = back(k);
    }
    return out;
}

StateVector Propagator::lanczos_heat(const StateVector& u, double t) const {
    const double beta0 = u.norm();
    if (beta0 == 0.0) return u;
    const int n = static_cast<int>(u.size());
    const int kmax = std::min(options_.krylov_max_dimension, n);
    Eigen::MatrixXd q(n, kmax);
    std::vector<double> alpha;
    std::vector<double> beta;
    q.col(0) = u / beta0;
    // Iterates are kept as e^{t theta_min} y so that early Ritz values far above
    // the true bottom of the spectrum cannot underflow everything to zero.
    Eigen::VectorXd previous;
    double previous_shift = 0.0;
    for (int j = 0; j < kmax; ++j) {
        Eigen::VectorXd w = h_sym_ * q.col(j);
        alpha.push_back(q.col(j).dot(w));
        for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
        const double b = w.norm();
        const int dim = j + 1;
        const bool breakdown = b <= 1e-14 * std::max(1.0, std::abs(alpha.back())) || dim == n;
        if (dim % 5 == 0 || breakdown || dim == kmax) {
            Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(dim, dim);
            for (int k = 0; k < dim; ++k) {
                tri(k, k) = alpha[static_cast<std::size_t>(k)];
                if (k + 1 < dim) tri(k, k + 1) = tri(k + 1, k) = beta[static_cast<std::size_t>(k)];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
            const double shift = es.eigenvalues()(0);
            const Eigen::VectorXd ex = (-t * (es.eigenvalues().array() - shift)).exp();
            const Eigen::VectorXd y =
                beta0 * (es.eigenvectors() * ex.cwiseProduct(es.eigenvectors().row(0).transpose()));
            const double scale = std::exp(-t * shift);
            bool done = breakdown;
            if (!done && previous.size() > 0) {
                // Residual estimate of the Krylov approximation plus agreement with the last check.
                const double ynorm = y.norm();
                const bool small_tail = std::abs(b * y(dim - 1)) <= options_.krylov_tolerance * ynorm;
                Eigen::VectorXd padded = Eigen::VectorXd::Zero(dim);
                padded.head(previous.size()) = previous * std::exp(-t * (previous_shift - shift));
                done = small_tail && (y - padded).norm() <= options_.krylov_tolerance * ynorm;
            }
            if (done) return scale * (q.leftCols(dim) * y);
            previous = y;
            previous_shift = shift;
        }
        if (dim == kmax) break;
        beta.push_back(b);
        q.col(j + 1) = w / b;
    }
    // Not converged: split the time step; each half is an easier exponential.
    return lanczos_heat(lanczos_heat(u, 0.5 * t), 0.5 * t);
}

StateVector Propagator::heat(const StateVector& phi, double t) const {
    form_.check(phi, "heat");
    require_time(t, "heat", false);
    const StateVector u = phi.cwiseProduct(sqrt_vol_);
    const StateVector out =
        dense() ? spectral_apply(u, [t](double lam) { return std::exp(-t * std::max(lam, 0.0)); }) : lanczos_heat(u, t);
    return out.cwiseQuotient(sqrt_vol_);
}

StateVector Propagator::resolvent(const StateVector& phi, double lambda) const {
    form_.check(phi, "resolvent");
    if (!std::isfinite(lambda) || lambda <= 0.0) throw ParameterError("resolvent: lambda must be positive");
    Eigen::SparseMatrix<double> a = form_.stiffness();
    for (int i = 0; i < form_.size(); ++i) a.coeffRef(i, i) += lambda * form_.volumes()(i);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
    if (solver.info() != Eigen::Success) throw AssemblyError("resolvent factorisation failed");
    const Eigen::VectorXd rhs = phi.cwiseProduct(form_.volumes());
    Eigen::VectorXd x = solver.solve(rhs);
    const Eigen::VectorXd r = rhs - a * x;
    x += solver.solve(r);
    return x;
}

StateVector Propagator::chebyshev_wave(const StateVector& u, double t) const {
    const double b = gershgorin_bound() * (1.0 + 1e-12) + 1e-300;
    const double scale = std::abs(t) * std::sqrt(b);
    auto f = [&](double y) { return std::cos(std::abs(t) * std::sqrt(std::max(0.0, 0.5 * b * (y + 1.0)))); };
    int degree = std::max(32, static_cast<int>(std::ceil(1.1 * scale)) + 40);
    std::vector<double> c;
    for (;;) {
        c = chebyshev_coefficients(f, degree);
        double tail = 0.0;
        for (int k = degree - 8; k <= degree; ++k) tail = std::max(tail, std::abs(c[static_cast<std::size_t>(k)]));
        // The node sums carry round-off of order eps * sqrt(nodes); no degree gets below that.
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::sqrt(2.0 * degree + 2.0);
        if (tail <= std::max(0.1 * options_.chebyshev_tolerance, floor)) break;
        degree *= 2;
        if (degree > 1 << 22) throw AssemblyError("chebyshev wave expansion did not converge");
    }
    // Y = (2/b) H - I maps the spectrum into [-1, 1].
    auto apply_y = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return (2.0 / b) * (h_sym_ * v) - v; };
    Eigen::VectorXd t_prev = u;
    Eigen::VectorXd t_cur = apply_y(u);
    Eigen::VectorXd out = 0.5 * c[0] * t_prev + c[1] * t_cur;
    for (int k = 2; k <= degree; ++k) {
        Eigen::VectorXd t_next = 2.0 * apply_y(t_cur) - t_prev;
        out += c[static_cast<std::size_t>(k)] * t_next;
        t_prev = std::move(t_cur);
        t_cur = std::move(t_next);
    }
    return out;
}

StateVector Propagator::wave(const StateVector& phi, double t, WaveMethod method) const {
    form_.check(phi, "wave");
    if (!std::isfinite(t)) throw ParameterError("wave: time must be finite");
    const StateVector u = phi.cwiseProduct(sqrt_vol_);
    if (t == 0.0) return phi;
    const bool spectral = method == WaveMethod::spectral || (method == WaveMethod::automatic && dense());
    const StateVector out =
        spectral ? spectral_apply(u, [t](double lam) { return std::cos(t * std::sqrt(std::max(lam, 0.0))); })
                 : chebyshev_wave(u, t);
    return out.cwiseQuotient(sqrt_vol_);
}

double Propagator::cross_inner(const SetMask& a, const SetMask& b, double t, PropagatorKind kind) const {
    if (a.grid_size() != form_.size() || b.grid_size() != form_.size()) throw GridMismatch("cross_inner: set on another grid");
    if (a.empty() || b.empty()) throw ParameterError("cross_inner: sets must be non-empty");
    if (kind == PropagatorKind::heat) require_time(t, "cross_inner", true);
    if (!std::isfinite(t)) throw ParameterError("cross_inner: time must be finite");
    const StateVector ia = a.indicator();
    const StateVector ib = b.indicator();
    if (t == 0.0) return inner(form_, ia, ib);
    if (dense()) {
        // Pair the spectral coefficients directly; components not meeting both sets contribute exact zeros.
        const StateVector ua = ia.cwiseProduct(sqrt_vol_);
        const StateVector ub = ib.cwiseProduct(sqrt_vol_);
        double total = 0.0;
        for (const SpectralComponent& sc : spectrum()) {
            bool hit_a = false;
            bool hit_b = false;
            for (int cell : sc.cells) {
                hit_a = hit_a || a.contains(cell);
                hit_b = hit_b || b.contains(cell);
            }
            if (!hit_a || !hit_b) continue;
            const int m = static_cast<int>(sc.cells.size());
            Eigen::VectorXd la(m);
            Eigen::VectorXd lb(m);
            for (int k = 0; k < m; ++k) {
                la(k) = ua(sc.cells[static_cast<std::size_t>(k)]);
                lb(k) = ub(sc.cells[static_cast<std::size_t>(k)]);
            }
            const Eigen::VectorXd ca = sc.eigenvectors.transpose() * la;
            const Eigen::VectorXd cb = sc.eigenvectors.transpose() * lb;
            for (int k = 0; k < m; ++k) {
                const double lam = std::max(sc.eigenvalues(k), 0.0);
                const double f = kind == PropagatorKind::heat ? std::exp(-t * lam) : std::cos(t * std::sqrt(lam));
                total += ca(k) * f * cb(k);
            }
        }
        return total;
    }
    const StateVector kb = kind == PropagatorKind::heat ? heat(ib, t) : wave(ib, t);
    return inner(form_, ia, kb);
}

Eigen::MatrixXd Propagator::heat_block(const SetMask& rows, const SetMask& cols, double t) const {
    require_time(t, "heat_block", true);
    if (rows.grid_size() != form_.size() || cols.grid_size() != form_.size())
        throw GridMismatch("heat_block: set on another grid");
    const std::vector<int> ri = rows.indices();
    const std::vector<int> ci = cols.indices();
    std::vector<int> rpos(static_cast<std::size_t>(form_.size()), -1);
    std::vector<int> cpos(static_cast<std::size_t>(form_.size()), -1);
    for (std::size_t k = 0; k < ri.size(); ++k) rpos[static_cast<std::size_t>(ri[k])] = static_cast<int>(k);
    for (std::size_t k = 0; k < ci.size(); ++k) cpos[static_cast<std::size_t>(ci[k])] = static_cast<int>(k);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ri.size()), static_cast<Eigen::Index>(ci.size()));
    for (const SpectralComponent& sc : spectrum()) {
        std::vector<int> rl;
        std::vector<int> cl;
        for (int k = 0; k < static_cast<int>(sc.cells.size()); ++k) {
            const int cell = sc.cells[static_cast<std::size_t>(k)];
            if (rpos[static_cast<std::size_t>(cell)] >= 0) rl.push_back(k);
            if (cpos[static_cast<std::size_t>(cell)] >= 0) cl.push_back(k);
        }
        if (rl.empty() || cl.empty()) continue;
        // Modes with weight below 1e-20 change the block by less than that in norm;
        // dropping them also keeps subnormals out of the product.
        std::vector<int> modes;
        for (int k = 0; k < sc.eigenvalues.size(); ++k)
            if (std::exp(-t * std::max(sc.eigenvalues(k), 0.0)) > kModeCutoff) modes.push_back(k);
        const auto nm = static_cast<Eigen::Index>(modes.size());
        Eigen::MatrixXd vr(static_cast<Eigen::Index>(rl.size()), nm);
        Eigen::MatrixXd vc(static_cast<Eigen::Index>(cl.size()), nm);
        for (Eigen::Index m = 0; m < nm; ++m) {
            const int k = modes[static_cast<std::size_t>(m)];
            const double f = std::exp(-t * std::max(sc.eigenvalues(k), 0.0));
            for (std::size_t r = 0; r < rl.size(); ++r) vr(static_cast<Eigen::Index>(r), m) = f * sc.eigenvectors(rl[r], k);
            for (std::size_t c = 0; c < cl.size(); ++c) vc(static_cast<Eigen::Index>(c), m) = sc.eigenvectors(cl[c], k);
        }
        const Eigen::MatrixXd& scaled_rows = vr;
        Eigen::MatrixXd blk(scaled_rows.rows(), vc.rows());
        blk.noalias() = scaled_rows * vc.transpose();
        for (std::size_t r = 0; r < rl.size(); ++r)
            for (std::size_t c = 0; c < cl.size(); ++c)
                out(rpos[static_cast<std::size_t>(sc.cells[static_cast<std::size_t>(rl[r])])],
                    cpos[static_cast<std::size_t>(sc.cells[static_cast<std::size_t>(cl[c])])]) =
                    blk(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    return out;
}

Eigen::MatrixXd Propagator::heat_matrix(double t) const {
    const SetMask every = SetMask::all(form_.grid());
    return heat_block(every, every, t);
}

double spectral_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    if (m.isZero(0.0)) return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

namespace {

// Largest singular value of a linear map given by forward and adjoint actions.
double power_norm(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fwd,
                  const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& adj, int n, double tol, int max_it) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
    double sigma = 0.0;
    for (int it = 0; it < max_it; ++it) {
        Eigen::VectorXd w = adj(fwd(v));
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        const double next = std::sqrt(nw);
        v = w / nw;
        if (std::abs(next - sigma) <= tol * next) return next;
        sigma = next;
    }
    return sigma;
}

}  // namespace

double leakage_norm(const Propagator& prop, const SetMask& a, double t) {
    if (a.grid_size() != prop.form().size()) throw GridMismatch("leakage_norm: set on another grid");
    const SetMask out = a.complement();
    if (a.empty() || out.empty()) return 0.0;
    if (prop.dense()) return spectral_norm(prop.heat_block(out, a, t));
    const Eigen::VectorXd ia = a.indicator();
    const Eigen::VectorXd io = out.indicator();
    const Eigen::VectorXd s = prop.form().volumes().cwiseSqrt();
    // Orthonormal coordinates: P_out S P_a, with S symmetric.
    auto apply = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& pre, const Eigen::VectorXd& post) {
        const Eigen::VectorXd phi = u.cwiseProduct(pre).cwiseQuotient(s);
        return Eigen::VectorXd(prop.heat(phi, t).cwiseProduct(s).cwiseProduct(post));
    };
    return power_norm([&](const Eigen::VectorXd& u) { return apply(u, ia, io); },
                      [&](const Eigen::VectorXd& u) { return apply(u, io, ia); }, prop.form().size(),
                      prop.options().power_tolerance, prop.options().power_max_iterations);
}

double twisted_norm(const Propagator& prop, const StateVector& psi, double t) {
    prop.form().check(psi, "twisted_norm");
    require_time(t, "twisted_norm", false);
    const Eigen::VectorXd up = psi.array().exp();
    const Eigen::VectorXd down = (-psi.array()).exp();
    if (prop.dense()) {
        const Eigen::MatrixXd m = up.asDiagonal() * prop.heat_matrix(t) * down.asDiagonal();
        return spectral_norm(m);
    }
    const Eigen::VectorXd s = prop.form().volumes().cwiseSqrt();
    auto apply = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& pre, const Eigen::VectorXd& post) {
        const Eigen::VectorXd phi = u.cwiseProduct(pre).cwiseQuotient(s);
        return Eigen::VectorXd(prop.heat(phi, t).cwiseProduct(s).cwiseProduct(post));
    };
    return power_norm([&](const Eigen::VectorXd& u) { return apply(u, down, up); },
                      [&](const Eigen::VectorXd& u) { return apply(u, up, down); }, prop.form().size(),
                      prop.options().power_tolerance, prop.options().power_max_iterations);
}

double exponential_twist_growth(const DiscreteForm& form, const StateVector& psi) {
    form.check(psi, "exponential_twist_growth");
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(form.size());
    for (const FormEdge& e : form.edges()) {
        if (e.is_ghost() || e.transmissibility == 0.0) continue;
        const double s = std::sinh(0.5 * (psi(e.first) - psi(e.second)));
        const double w = 2.0 * e.transmissibility * s * s;
        acc(e.first) += w;
        acc(e.second) += w;
    }
    return acc.cwiseQuotient(form.volumes()).maxCoeff();
}

ViscosityStudy viscosity_limit_study(const CoefficientField& field, const Grid& grid, BoundaryCondition bc,
                                     const StateVector& phi, double lambda, const std::vector<double>& eps_sequence) {
    if (eps_sequence.empty()) throw ParameterError("viscosity study: empty eps sequence");
    for (std::size_t k = 0; k < eps_sequence.size(); ++k) {
        const double e = eps_sequence[k];
        if (!(e > 0.0) || !std::isfinite(e)) throw ParameterError("viscosity study: eps values must be positive");
        if (k > 0 && !(e < eps_sequence[k - 1]))
            throw ParameterError("viscosity study: eps sequence must be strictly decreasing");
    }
    if (eps_sequence.back() > 1e-8) throw ParameterError("viscosity study: eps sequence must reach 1e-8 or below");
    if (!std::isfinite(lambda) || lambda <= 0.0) throw ParameterError("viscosity study: lambda must be positive");

    ViscosityStudy study;
    study.lambda = lambda;
    const Propagator limit_prop(assemble_form(field, grid, bc, 0.0));
    study.limit = limit_prop.resolvent(phi, lambda);
    for (double e : eps_sequence) {
        const Propagator prop(assemble_form(field, grid, bc, e));
        ViscosityStep step;
        step.eps = e;
        step.resolvent = prop.resolvent(phi, lambda);
        step.test_form_value = form_energy(prop.form(), phi, phi);
        step.own_form_value = form_energy(prop.form(), step.resolvent, step.resolvent);
        step.gap_to_limit = l2_norm(prop.form(), step.resolvent - study.limit);
        study.steps.push_back(std::move(step));
    }
    for (std::size_t k = 1; k < study.steps.size(); ++k)
        study.steps[k].gap_to_previous =
            l2_norm(limit_prop.form(), study.steps[k].resolvent - study.steps[k - 1].resolvent);

    study.cauchy = true;
    for (std::size_t k = 2; k < study.steps.size(); ++k)
        if (!(study.steps[k].gap_to_previous < study.steps[k - 1].gap_to_previous) &&
            study.steps[k - 1].gap_to_previous > 1e-14)
            study.cauchy = false;
    study.form_values_nonincreasing = true;
    for (std::size_t k = 1; k < study.steps.size(); ++k)
        if (study.steps[k].test_form_value > study.steps[k - 1].test_form_value * (1.0 + 1e-12))
            study.form_values_nonincreasing = false;
    for (std::size_t k = 2; k < study.steps.size(); ++k) {
        const double g1 = study.steps[k].gap_to_previous;
        const double g0 = study.steps[k - 1].gap_to_previous;
        if (g1 > 0.0 && g0 > 0.0)
            study.observed_rates.push_back(std::log(g1 / g0) /
                                           std::log(study.steps[k].eps / study.steps[k - 1].eps));
    }
    study.final_gap = study.steps.back().gap_to_limit;
    return study;
}

}  // namespace degenlab
