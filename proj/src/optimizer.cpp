// optimizer.cpp
// Log-barrier interior-point solver for the bound-minimizing covariance
// design and its rate-feasibility probe.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

#include "bsisac/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>

#include "bsisac/errors.hpp"
#include "bsisac/rate.hpp"

namespace bsisac::opt {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;
using std::complex;

/// Real coordinates of an M x M Hermitian matrix: M diagonal entries followed
/// by (real, imag) pairs for each off-diagonal i < j in row-major order.
struct HermitianCoords {
    Index m = 0;
    Index dim = 0;  ///< m * m real coordinates.

    explicit HermitianCoords(Index size) : m(size), dim(size * size) {}

    [[nodiscard]] MatrixXcd matrix(const VectorXd& x) const
    {
        MatrixXcd r = MatrixXcd::Zero(m, m);
        for (Index k = 0; k < m; ++k) r(k, k) = x(k);
        Index p = m;
        for (Index i = 0; i < m; ++i) {
            for (Index j = i + 1; j < m; ++j) {
                r(i, j) = complex<double>(x(p), x(p + 1));
                r(j, i) = std::conj(r(i, j));
                p += 2;
            }
        }
        return r;
    }

    [[nodiscard]] VectorXd coords(const MatrixXcd& r) const
    {
        VectorXd x(dim);
        for (Index k = 0; k < m; ++k) x(k) = r(k, k).real();
        Index p = m;
        for (Index i = 0; i < m; ++i) {
            for (Index j = i + 1; j < m; ++j) {
                x(p) = r(i, j).real();
                x(p + 1) = r(i, j).imag();
                p += 2;
            }
        }
        return x;
    }

    /// Basis element for coordinate k as an explicit matrix (setup only).
    [[nodiscard]] MatrixXcd basis(Index k) const
    {
        VectorXd x = VectorXd::Zero(dim);
        x(k) = 1.0;
        return matrix(x);
    }

    /// Index pair (i, j, is_imag) for coordinate k >= m; diagonal otherwise.
    struct Slot {
        Index i = 0, j = 0;
        bool diagonal = true;
        bool imag = false;
    };
    [[nodiscard]] Slot slot(Index k) const
    {
        Slot s;
        if (k < m) {
            s.i = s.j = k;
            return s;
        }
        Index p = m;
        for (Index i = 0; i < m; ++i) {
            for (Index j = i + 1; j < m; ++j) {
                if (k == p || k == p + 1) {
                    s.i = i;
                    s.j = j;
                    s.diagonal = false;
                    s.imag = (k == p + 1);
                    return s;
                }
                p += 2;
            }
        }
        throw NumericalError("coordinate index out of range");
    }
};

/// Precomputed, iterate-independent problem data in scaled units
/// (covariance divided by P0/p_g so the trace budget is 1).
struct ProblemData {
    Index L = 0;
    Index mt = 0;
    HermitianCoords coords{1};
    double cov_scale = 1.0;          ///< P0 / p_g.
    double rate_c = 0.0;             ///< N / sigma^2.
    double n_symbols = 0.0;
    double energy = 0.0, msb = 0.0;
    complex<double> overlap{0.0, 0.0};
    VectorXd xi, c_weight;
    MatrixXd map_f, map_h, map_chi;  ///< L x dim linear maps on scaled coords.
    std::vector<MatrixXcd> rate_basis;  ///< Rate Gram of cov_scale * E_k.
    VectorXd a_coef, b_coef;         ///< Objective weights on 1/omega', 1/nu'.
    std::vector<geometry::BdGeometry> geom;
};

ProblemData make_problem_data(const geometry::Scenario& scenario,
                              const pulses::PulseConstants& pulse)
{
    geometry::validate_scenario(scenario);
    if (std::abs(pulse.dt - scenario.symbol_duration) >
        1e-12 * std::max(pulse.dt, scenario.symbol_duration)) {
        throw ConfigError("pulse constants were computed for a different symbol "
                          "duration than the scenario uses");
    }
    if (!(pulse.energy > 0.0) || !(pulse.msb > 0.0) || !(pulse.avg_power > 0.0)) {
        throw ConfigError("pulse constants are degenerate (non-positive energy, "
                          "mean-square bandwidth, or average power)");
    }

    ProblemData d;
    d.geom = geometry::scene_geometry(scenario);
    d.L = static_cast<Index>(d.geom.size());
    d.mt = static_cast<Index>(scenario.array.num_tx);
    d.coords = HermitianCoords(d.mt);
    d.cov_scale = scenario.power_budget / pulse.avg_power;
    d.n_symbols = static_cast<double>(scenario.symbols_per_slot);
    d.rate_c = d.n_symbols / scenario.total_noise();
    d.energy = pulse.energy;
    d.msb = pulse.msb;
    d.overlap = pulse.deriv_overlap;
    d.xi = fim::xi_coefficients(scenario, d.geom);

    d.c_weight.resize(d.L);
    for (Index l = 0; l < d.L; ++l) {
        const double kappa = 2.0 * std::numbers::pi * scenario.array.spacing_ratio *
                             std::cos(d.geom[static_cast<std::size_t>(l)].phi);
        if (std::abs(kappa) < 1e-12) {
            throw GeometryError("device " + std::to_string(l + 1) +
                                " sits endfire to the receive array; the angle "
                                "bound diverges and the design is ill-posed");
        }
        d.c_weight(l) = 1.0 / (kappa * kappa);
    }

    const Index dim = d.coords.dim;
    d.map_f.resize(d.L, dim);
    d.map_h.resize(d.L, dim);
    d.map_chi.resize(d.L, dim);
    const double chi_norm = d.energy * std::sqrt(d.msb);
    for (Index k = 0; k < dim; ++k) {
        const MatrixXcd ek = d.coords.basis(k);
        for (Index l = 0; l < d.L; ++l) {
            const fim::ChannelTraces tr =
                fim::channel_traces(ek, d.geom[static_cast<std::size_t>(l)].channel);
            d.map_f(l, k) = tr.f;
            d.map_h(l, k) = tr.h;
            d.map_chi(l, k) = std::real(d.overlap * tr.g) / chi_norm;
        }
    }

    d.rate_basis.reserve(static_cast<std::size_t>(dim));
    for (Index k = 0; k < dim; ++k) {
        d.rate_basis.push_back(rate::build_rate_matrix(
            scenario, d.geom, d.cov_scale * d.coords.basis(k)));
    }

    d.a_coef.resize(d.L);
    d.b_coef.resize(d.L);
    for (Index l = 0; l < d.L; ++l) {
        d.a_coef(l) = 1.0 / (d.xi(l) * d.energy * d.msb * d.cov_scale);
        d.b_coef(l) = d.c_weight(l) / (d.xi(l) * d.energy * d.cov_scale);
    }
    return d;
}

/// Values of everything the barrier needs at one iterate.
struct Eval {
    bool ok = false;
    double lndet_r = 0.0;
    double trace_r = 0.0;
    double rate = 0.0;          ///< C_sum at the scaled point.
    VectorXd ft, ht, chi;       ///< Per-device linear forms.
    double objective = 0.0;     ///< Normalized objective J~.
    double barrier = 0.0;       ///< Barrier Phi (without the 1/t weight).
    double psi = 0.0;           ///< J~ + Phi / t.
};

/// Shared interior-point engine.  In design mode the variables are
/// z = [x (dim), omega' (L), nu' (L)]; in probe mode z = x alone and the
/// objective is the (normalized, negated) sum rate.
class Barrier {
public:
    Barrier(const ProblemData& data, bool design, double gamma_eff)
        : d_(data), design_(design), gamma_(gamma_eff)
    {
        n_vars_ = d_.coords.dim + (design_ ? 2 * d_.L : 0);
        dof_ = design_ ? static_cast<double>(d_.mt + 2 + 6 * d_.L)
                       : static_cast<double>(d_.mt + 1);
    }

    [[nodiscard]] Index n_vars() const { return n_vars_; }
    [[nodiscard]] double dof() const { return dof_; }
    void set_objective_scale(double s) { obj_scale_ = std::max(s, 1e-300); }
    [[nodiscard]] double objective_scale() const { return obj_scale_; }

    [[nodiscard]] double rate_at(const VectorXd& x) const
    {
        MatrixXcd a = MatrixXcd::Identity(d_.L, d_.L);
        for (Index k = 0; k < d_.coords.dim; ++k) {
            a += (d_.rate_c * x(k)) * d_.rate_basis[static_cast<std::size_t>(k)];
        }
        Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(0.5 * (a + a.adjoint()),
                                                     Eigen::EigenvaluesOnly);
        double acc = 0.0;
        for (Index i = 0; i < d_.L; ++i) {
            acc += std::log(std::max(eig.eigenvalues()(i), 1e-300));
        }
        return acc / (d_.n_symbols * std::numbers::ln2_v<double>);
    }

    /// Raw (unnormalized) design objective sum_l(a/omega' + b/nu').
    [[nodiscard]] double raw_objective(const VectorXd& z) const
    {
        double j = 0.0;
        for (Index l = 0; l < d_.L; ++l) {
            j += d_.a_coef(l) / z(d_.coords.dim + l) +
                 d_.b_coef(l) / z(d_.coords.dim + d_.L + l);
        }
        return j;
    }

    Eval evaluate(const VectorXd& z, double t) const
    {
        Eval e;
        const Index dim = d_.coords.dim;
        const VectorXd x = z.head(dim);

        const MatrixXcd rt = d_.coords.matrix(x);
        Eigen::LLT<MatrixXcd> llt(rt);
        if (llt.info() != Eigen::Success) return e;
        e.lndet_r = 0.0;
        for (Index i = 0; i < d_.mt; ++i) {
            const double piv = llt.matrixL()(i, i).real();
            if (!(piv > 0.0)) return e;
            e.lndet_r += 2.0 * std::log(piv);
        }
        e.trace_r = x.head(d_.mt).sum();
        if (!(e.trace_r < 1.0)) return e;

        e.rate = rate_at(x);
        double phi = -e.lndet_r - std::log(1.0 - e.trace_r);

        if (design_) {
            const double slack = e.rate - gamma_;
            if (!(slack > 0.0)) return e;
            phi -= std::log(slack);

            e.ft = d_.map_f * x;
            e.ht = d_.map_h * x;
            e.chi = d_.map_chi * x;
            double j_raw = 0.0;
            for (Index l = 0; l < d_.L; ++l) {
                const double w = z(dim + l);
                const double v = z(dim + d_.L + l);
                if (!(w > 0.0) || !(v > 0.0)) return e;
                const double m11 = e.ft(l) - w;
                const double det1 = m11 * e.ht(l) - e.chi(l) * e.chi(l);
                const double m11b = e.ht(l) - v;
                const double det2 = m11b * e.ft(l) - e.chi(l) * e.chi(l);
                if (!(m11 > 0.0) || !(det1 > 0.0) || !(m11b > 0.0) || !(det2 > 0.0)) {
                    return e;
                }
                phi -= std::log(det1) + std::log(det2) + std::log(w) + std::log(v);
                j_raw += d_.a_coef(l) / w + d_.b_coef(l) / v;
            }
            e.objective = j_raw / obj_scale_;
        } else {
            e.objective = -e.rate / obj_scale_;
        }
        e.barrier = phi;
        e.psi = e.objective + phi / t;
        if (!std::isfinite(e.psi)) return e;
        e.ok = true;
        return e;
    }

    /// Gradient and Hessian of psi_t = J~ + Phi/t at a feasible point.
    void derivatives(const VectorXd& z, double t, VectorXd& grad, MatrixXd& hess) const
    {
        const Index dim = d_.coords.dim;
        const VectorXd x = z.head(dim);
        grad = VectorXd::Zero(n_vars_);
        hess = MatrixXd::Zero(n_vars_, n_vars_);
        const double wt = 1.0 / t;

        // --- log-det barrier on the covariance -------------------------------
        const MatrixXcd rt = d_.coords.matrix(x);
        const MatrixXcd p = rt.llt().solve(MatrixXcd::Identity(d_.mt, d_.mt));
        // First derivatives Tr(P E_k) and the pair contractions
        // Tr(P E_a P E_b) via the rank-<=2 structure of the basis.
        std::vector<HermitianCoords::Slot> slots(static_cast<std::size_t>(dim));
        for (Index k = 0; k < dim; ++k) {
            slots[static_cast<std::size_t>(k)] = d_.coords.slot(k);
        }
        auto term_count = [](const HermitianCoords::Slot& s) { return s.diagonal ? 1 : 2; };
        auto term = [](const HermitianCoords::Slot& s, int idx, Index& row, Index& col,
                       complex<double>& coef) {
            if (s.diagonal) {
                row = s.i;
                col = s.j;
                coef = 1.0;
            } else if (idx == 0) {
                row = s.i;
                col = s.j;
                coef = s.imag ? complex<double>(0.0, 1.0) : complex<double>(1.0, 0.0);
            } else {
                row = s.j;
                col = s.i;
                coef = s.imag ? complex<double>(0.0, -1.0) : complex<double>(1.0, 0.0);
            }
        };
        for (Index a = 0; a < dim; ++a) {
            const auto& sa = slots[static_cast<std::size_t>(a)];
            complex<double> tr_pa{0.0, 0.0};
            for (int s = 0; s < term_count(sa); ++s) {
                Index i, j;
                complex<double> c;
                term(sa, s, i, j, c);
                tr_pa += c * p(j, i);
            }
            grad(a) += -wt * tr_pa.real();
            for (Index b = a; b < dim; ++b) {
                const auto& sb = slots[static_cast<std::size_t>(b)];
                complex<double> acc{0.0, 0.0};
                for (int s = 0; s < term_count(sa); ++s) {
                    Index i1, j1;
                    complex<double> c1;
                    term(sa, s, i1, j1, c1);
                    for (int u = 0; u < term_count(sb); ++u) {
                        Index i2, j2;
                        complex<double> c2;
                        term(sb, u, i2, j2, c2);
                        // Tr(P e_i1 e_j1^T P e_i2 e_j2^T) = P(j1,i2) P(j2,i1)
                        acc += c1 * c2 * p(j1, i2) * p(j2, i1);
                    }
                }
                hess(a, b) += wt * acc.real();
                if (b != a) hess(b, a) += wt * acc.real();
            }
        }

        // --- trace barrier ----------------------------------------------------
        const double slack_tr = 1.0 - x.head(d_.mt).sum();
        for (Index a = 0; a < d_.mt; ++a) {
            grad(a) += wt / slack_tr;
            for (Index b = 0; b < d_.mt; ++b) {
                hess(a, b) += wt / (slack_tr * slack_tr);
            }
        }

        // --- sum rate: barrier term (design) or objective (probe) --------------
        {
            MatrixXcd a = MatrixXcd::Identity(d_.L, d_.L);
            for (Index k = 0; k < dim; ++k) {
                a += (d_.rate_c * x(k)) * d_.rate_basis[static_cast<std::size_t>(k)];
            }
            const MatrixXcd kinv =
                a.llt().solve(MatrixXcd::Identity(d_.L, d_.L));
            const double cp =
                d_.rate_c / (d_.n_symbols * std::numbers::ln2_v<double>);
            std::vector<MatrixXcd> u(static_cast<std::size_t>(dim));
            VectorXd c1(dim);
            for (Index k = 0; k < dim; ++k) {
                u[static_cast<std::size_t>(k)] =
                    kinv * d_.rate_basis[static_cast<std::size_t>(k)];
                c1(k) = cp * u[static_cast<std::size_t>(k)].trace().real();
            }
            MatrixXd c2(dim, dim);
            for (Index ka = 0; ka < dim; ++ka) {
                for (Index kb = ka; kb < dim; ++kb) {
                    const double v =
                        -cp * d_.rate_c *
                        (u[static_cast<std::size_t>(ka)].cwiseProduct(
                             u[static_cast<std::size_t>(kb)].transpose()))
                            .sum()
                            .real();
                    c2(ka, kb) = v;
                    c2(kb, ka) = v;
                }
            }
            if (design_) {
                const double slack = rate_at(x) - gamma_;
                grad.head(dim) += (-wt / slack) * c1;
                hess.topLeftCorner(dim, dim) +=
                    (wt / (slack * slack)) * (c1 * c1.transpose()) -
                    (wt / slack) * c2;
            } else {
                grad.head(dim) += (-c1) / obj_scale_;
                hess.topLeftCorner(dim, dim) += (-c2) / obj_scale_;
            }
        }

        if (!design_) return;

        // --- objective in the auxiliary variables -----------------------------
        for (Index l = 0; l < d_.L; ++l) {
            const double w = z(dim + l);
            const double v = z(dim + d_.L + l);
            grad(dim + l) += -d_.a_coef(l) / (obj_scale_ * w * w);
            grad(dim + d_.L + l) += -d_.b_coef(l) / (obj_scale_ * v * v);
            hess(dim + l, dim + l) += 2.0 * d_.a_coef(l) / (obj_scale_ * w * w * w);
            hess(dim + d_.L + l, dim + d_.L + l) +=
                2.0 * d_.b_coef(l) / (obj_scale_ * v * v * v);
            // Positivity barriers on omega', nu'.
            grad(dim + l) += -wt / w;
            grad(dim + d_.L + l) += -wt / v;
            hess(dim + l, dim + l) += wt / (w * w);
            hess(dim + d_.L + l, dim + d_.L + l) += wt / (v * v);
        }

        // --- 2x2 Schur constraint barriers -------------------------------------
        const VectorXd ft = d_.map_f * x;
        const VectorXd ht = d_.map_h * x;
        const VectorXd chi = d_.map_chi * x;
        VectorXd p00(dim), p01(dim), p10(dim), p11(dim);
        for (Index l = 0; l < d_.L; ++l) {
            for (int family = 0; family < 2; ++family) {
                const bool first = family == 0;
                const double aux = first ? z(dim + l) : z(dim + d_.L + l);
                const Index aux_idx = first ? dim + l : dim + d_.L + l;
                const double m11 = (first ? ft(l) : ht(l)) - aux;
                const double m22 = first ? ht(l) : ft(l);
                const double m12 = chi(l);
                const double det = m11 * m22 - m12 * m12;
                const double w11 = m22 / det;
                const double w22 = m11 / det;
                const double w12 = -m12 / det;

                // P_a = W * D_a for covariance coordinates; D_a entries are
                // the per-coordinate derivatives of [m11, m12; m12, m22].
                for (Index k = 0; k < dim; ++k) {
                    const double da11 = first ? d_.map_f(l, k) : d_.map_h(l, k);
                    const double da22 = first ? d_.map_h(l, k) : d_.map_f(l, k);
                    const double da12 = d_.map_chi(l, k);
                    p00(k) = w11 * da11 + w12 * da12;
                    p01(k) = w11 * da12 + w12 * da22;
                    p10(k) = w12 * da11 + w22 * da12;
                    p11(k) = w12 * da12 + w22 * da22;
                    grad(k) += -wt * (p00(k) + p11(k));
                }
                for (Index ka = 0; ka < dim; ++ka) {
                    for (Index kb = ka; kb < dim; ++kb) {
                        const double v = wt * (p00(ka) * p00(kb) + p01(ka) * p10(kb) +
                                               p10(ka) * p01(kb) + p11(ka) * p11(kb));
                        hess(ka, kb) += v;
                        if (kb != ka) hess(kb, ka) += v;
                    }
                }
                // Auxiliary coordinate: D = [[-1,0],[0,0]], P = [[-w11,0],[-w12,0]].
                grad(aux_idx) += wt * w11;
                hess(aux_idx, aux_idx) += wt * w11 * w11;
                for (Index k = 0; k < dim; ++k) {
                    const double v = wt * (-w11 * p00(k) - w12 * p01(k));
                    hess(aux_idx, k) += v;
                    hess(k, aux_idx) += v;
                }
            }
        }
    }

private:
    const ProblemData& d_;
    bool design_;
    double gamma_;
    double obj_scale_ = 1.0;
    Index n_vars_ = 0;
    double dof_ = 0.0;
};

struct CenterResult {
    bool converged = false;
    int iterations = 0;
    double decrement_sq_half = 0.0;
};

/// Damped-Newton centering of psi_t from a feasible start (modified in place).
CenterResult center(const Barrier& barrier, VectorXd& z, double t,
                    const SolverOptions& options)
{
    CenterResult res;
    Eval cur = barrier.evaluate(z, t);
    if (!cur.ok) {
        throw NumericalError("interior-point centering started from an "
                             "infeasible point");
    }
    VectorXd grad;
    MatrixXd hess;
    for (int iter = 0; iter < options.max_newton; ++iter) {
        barrier.derivatives(z, t, grad, hess);
        VectorXd step;
        double descent = 0.0;
        double ridge = 0.0;
        for (int attempt = 0; attempt < 8; ++attempt) {
            MatrixXd h = hess;
            if (ridge > 0.0) {
                h.diagonal().array() += ridge;
            }
            Eigen::LDLT<MatrixXd> ldlt(h);
            step = ldlt.solve(-grad);
            descent = grad.dot(step);
            if (ldlt.info() == Eigen::Success && step.allFinite() && descent < 0.0) {
                break;
            }
            ridge = (ridge == 0.0)
                        ? 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff())
                        : ridge * 1e3;
            step.setZero();
        }
        if (descent >= 0.0) {
            // Gradient numerically zero (or Hessian hopeless): call it centered.
            res.converged = grad.norm() < 1e-6;
            res.decrement_sq_half = 0.0;
            return res;
        }
        res.decrement_sq_half = -0.5 * descent;
        if (res.decrement_sq_half <= options.newton_tol) {
            res.converged = true;
            return res;
        }

        double alpha = 1.0;
        bool accepted = false;
        while (alpha >= 1e-14) {
            const VectorXd trial = z + alpha * step;
            const Eval e = barrier.evaluate(trial, t);
            if (e.ok && e.psi <= cur.psi + 0.25 * alpha * descent) {
                z = trial;
                cur = e;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        ++res.iterations;
        if (!accepted) {
            // Line search stalled at machine precision; accept the point if it
            // is already close to centered.
            res.converged = res.decrement_sq_half < 1e-6;
            return res;
        }
    }
    res.converged = false;
    return res;
}

/// Full path-following loop; returns the final barrier weight.
struct PathResult {
    double t_final = 0.0;
    int stages = 0;
    int newton_total = 0;
    double decrement_sq_half = 0.0;
    bool converged = true;
};

PathResult follow_path(const Barrier& barrier, VectorXd& z,
                       const SolverOptions& options)
{
    PathResult out;
    double t = options.mu0;
    for (int stage = 0; stage < options.max_stages; ++stage) {
        const CenterResult c = center(barrier, z, t, options);
        ++out.stages;
        out.newton_total += c.iterations;
        out.decrement_sq_half = c.decrement_sq_half;
        out.t_final = t;
        if (!c.converged) {
            out.converged = false;
            return out;
        }
        const Eval e = barrier.evaluate(z, t);
        const double scale = std::max(std::abs(e.objective), 1e-3);
        if (barrier.dof() / t < options.gap_tol * scale) {
            return out;
        }
        t *= options.mu_growth;
        if (options.verbose) {
            std::cerr << "stage " << stage << " t=" << t
                      << " obj=" << e.objective << "\n";
        }
    }
    out.converged = false;
    return out;
}

/// Strictly feasible design start: blend the reference point toward the
/// probe covariance until the rate floor holds with headroom, then put the
/// auxiliary variables at half their Schur boundaries.
VectorXd design_start(const ProblemData& d, const Barrier& barrier,
                      double gamma_eff, const VectorXd& probe_coords,
                      const VectorXd* warm_coords)
{
    const Index dim = d.coords.dim;
    VectorXd base = VectorXd::Zero(dim);
    for (Index k = 0; k < d.mt; ++k) base(k) = 1.0 / (2.0 * static_cast<double>(d.mt));
    if (warm_coords != nullptr) base = *warm_coords;

    const double c_base = barrier.rate_at(base);
    const double c_probe = barrier.rate_at(probe_coords);
    const double target = gamma_eff + 0.05 * std::max(c_probe - gamma_eff, 0.0);
    VectorXd x = base;
    if (!(c_base > target)) {
        if (!(c_probe > gamma_eff)) {
            throw NumericalError("probe certificate does not dominate the rate "
                                 "floor; cannot construct an interior start");
        }
        double s = (target - c_base) / (c_probe - c_base);
        s = std::clamp(s, 0.0, 1.0 - 1e-9);
        x = (1.0 - s) * base + s * probe_coords;
    }

    const VectorXd ft = d.map_f * x;
    const VectorXd ht = d.map_h * x;
    const VectorXd chi = d.map_chi * x;
    VectorXd z(dim + 2 * d.L);
    z.head(dim) = x;
    for (Index l = 0; l < d.L; ++l) {
        const double wb = ft(l) - chi(l) * chi(l) / ht(l);
        const double vb = ht(l) - chi(l) * chi(l) / ft(l);
        if (!(wb > 0.0) || !(vb > 0.0)) {
            throw NumericalError("pulse cross term saturates the energy bound; "
                                 "the Schur constraints have empty interior");
        }
        z(dim + l) = 0.5 * wb;
        z(dim + d.L + l) = 0.5 * vb;
    }
    return z;
}

/// Probe start and shared probe loop, returning the final scaled coordinates.
VectorXd run_probe(const ProblemData& d, const SolverOptions& options,
                   double& gamma_max_out)
{
    Barrier barrier(d, /*design=*/false, 0.0);
    VectorXd x = VectorXd::Zero(d.coords.dim);
    for (Index k = 0; k < d.mt; ++k) x(k) = 1.0 / (2.0 * static_cast<double>(d.mt));
    barrier.set_objective_scale(std::max(barrier.rate_at(x), 1e-6));
    PathResult path = follow_path(barrier, x, options);
    if (!path.converged) {
        throw NumericalError("rate-feasibility probe failed to converge");
    }
    gamma_max_out = barrier.rate_at(x);
    return x;
}

Solution solve_impl(const TradeoffProblem& problem, const SolverOptions& options,
                    const ProblemData& d, double gamma_max,
                    const VectorXd& probe_coords, const VectorXd* warm_coords)
{
    Solution sol;
    sol.gamma_th = problem.gamma_th;
    sol.gamma_max = gamma_max;

    if (problem.gamma_th > gamma_max * (1.0 + 1e-12)) {
        sol.status = SolveStatus::kInfeasible;
        sol.covariance = d.cov_scale * d.coords.matrix(probe_coords);
        sol.achieved_rate = gamma_max;
        return sol;
    }
    double gamma_eff = problem.gamma_th;
    bool relaxed = false;
    if (problem.gamma_th > gamma_max * (1.0 - 1e-9)) {
        gamma_eff = gamma_max * (1.0 - 1e-9);
        relaxed = true;
    }

    Barrier barrier(d, /*design=*/true, gamma_eff);
    VectorXd z = design_start(d, barrier, gamma_eff, probe_coords, warm_coords);
    barrier.set_objective_scale(barrier.raw_objective(z));
    const PathResult path = follow_path(barrier, z, options);

    const Index dim = d.coords.dim;
    const MatrixXcd r = d.cov_scale * d.coords.matrix(z.head(dim));
    sol.covariance = r;
    sol.omega.resize(d.L);
    sol.nu.resize(d.L);
    double objective = 0.0;
    for (Index l = 0; l < d.L; ++l) {
        sol.omega(l) = z(dim + l) * d.xi(l) * d.energy * d.msb * d.cov_scale;
        sol.nu(l) = z(dim + d.L + l) * d.xi(l) * d.energy * d.cov_scale / d.c_weight(l);
        objective += 1.0 / sol.omega(l) + 1.0 / sol.nu(l);
    }
    sol.objective = objective;
    sol.status = path.converged ? SolveStatus::kOptimal : SolveStatus::kMaxIterations;

    sol.diag.mu_final = path.t_final;
    sol.diag.gap_estimate = barrier.dof() / path.t_final * barrier.objective_scale();
    sol.diag.newton_decrement_sq = path.decrement_sq_half;
    sol.diag.stages = path.stages;
    sol.diag.newton_iterations = path.newton_total;
    sol.diag.boundary_relaxed = relaxed;
    return sol;
}

/// Fills the diagnostics that are recomputed from the returned covariance.
void finalize_solution(const TradeoffProblem& problem, const ProblemData& d,
                       Solution& sol)
{
    sol.crb = fim::crb_report(problem.scenario, d.geom, problem.pulse,
                              sol.covariance);
    sol.achieved_rate = rate::sum_rate(problem.scenario, d.geom, sol.covariance);

    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(sol.covariance,
                                                 Eigen::EigenvaluesOnly);
    sol.diag.min_eig_covariance = eig.eigenvalues().minCoeff();
    sol.diag.power_slack = problem.scenario.power_budget -
                           problem.pulse.avg_power * sol.covariance.trace().real();
    sol.diag.rate_slack = sol.achieved_rate - sol.gamma_th;

    // Infeasible results carry the probe covariance but no auxiliary
    // variables, so there are no constraint matrices to inspect.
    if (sol.omega.size() == d.L && sol.nu.size() == d.L) {
        const auto lmis = assemble_lmis(problem, sol.covariance, sol.omega, sol.nu);
        double min_eig = std::numeric_limits<double>::infinity();
        for (const auto& m : lmis) {
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> e2(m,
                                                              Eigen::EigenvaluesOnly);
            min_eig = std::min(min_eig, e2.eigenvalues().minCoeff());
        }
        sol.diag.min_lmi_eig = min_eig;
    }
}

void check_designable(const geometry::Scenario& scenario)
{
    if (scenario.array.num_rx < 2) {
        throw ConfigError("angle estimation needs at least 2 receive elements");
    }
    for (std::size_t l = 0; l < scenario.devices.size(); ++l) {
        if (scenario.devices[l].symbol == 0.0) {
            throw ConfigError("device " + std::to_string(l + 1) +
                              " has a zero symbol; its bound is unbounded and the "
                              "design problem is ill-posed");
        }
        if (!(scenario.devices[l].reflection_fraction > 0.0)) {
            throw ConfigError("device " + std::to_string(l + 1) +
                              " has a non-positive reflection fraction");
        }
    }
}

} // namespace

std::string to_string(SolveStatus status)
{
    switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kMaxIterations: return "max-iterations";
    }
    return "unknown";
}

std::vector<Eigen::Matrix2d> assemble_lmis(const TradeoffProblem& problem,
                                           const Eigen::MatrixXcd& covariance,
                                           const Eigen::VectorXd& omega,
                                           const Eigen::VectorXd& nu)
{
    const auto geom = geometry::scene_geometry(problem.scenario);
    const auto L = static_cast<Index>(geom.size());
    if (omega.size() != L || nu.size() != L) {
        throw ConfigError("omega/nu size must match the device count");
    }
    const VectorXd xi = fim::xi_coefficients(problem.scenario, geom);
    const double energy = problem.pulse.energy;
    const double msb = problem.pulse.msb;
    const complex<double> overlap = problem.pulse.deriv_overlap;

    std::vector<Eigen::Matrix2d> out;
    out.reserve(static_cast<std::size_t>(2 * L));
    std::vector<Eigen::Matrix2d> second;
    second.reserve(static_cast<std::size_t>(L));
    for (Index l = 0; l < L; ++l) {
        const auto& gl = geom[static_cast<std::size_t>(l)];
        const fim::ChannelTraces tr = fim::channel_traces(covariance, gl.channel);
        const double cross = std::real(overlap * tr.g);
        const double kappa = 2.0 * std::numbers::pi *
                             problem.scenario.array.spacing_ratio * std::cos(gl.phi);
        const double cw = 1.0 / (kappa * kappa);
        Eigen::Matrix2d m1, m2;
        m1 << energy * msb * tr.f - omega(l) / xi(l), cross, cross, energy * tr.h;
        m2 << energy * tr.h - cw * nu(l) / xi(l), cross, cross, energy * msb * tr.f;
        out.push_back(m1);
        second.push_back(m2);
    }
    out.insert(out.end(), second.begin(), second.end());
    return out;
}

ProbeResult feasibility_probe(const TradeoffProblem& problem,
                              const SolverOptions& options)
{
    const ProblemData d = make_problem_data(problem.scenario, problem.pulse);
    ProbeResult res;
    const VectorXd x = run_probe(d, options, res.gamma_max);
    res.covariance = d.cov_scale * d.coords.matrix(x);
    return res;
}

Solution solve(const TradeoffProblem& problem, const SolverOptions& options)
{
    if (problem.gamma_th < 0.0) {
        throw ConfigError("gamma_th must be non-negative");
    }
    check_designable(problem.scenario);
    const ProblemData d = make_problem_data(problem.scenario, problem.pulse);
    double gamma_max = 0.0;
    const VectorXd probe_coords = run_probe(d, options, gamma_max);
    Solution sol =
        solve_impl(problem, options, d, gamma_max, probe_coords, nullptr);
    finalize_solution(problem, d, sol);
    return sol;
}

std::vector<TradeoffPoint> sweep(const TradeoffProblem& problem,
                                 const std::vector<double>& gamma_grid,
                                 const SolverOptions& options)
{
    if (gamma_grid.empty()) {
        throw ConfigError("sweep grid is empty");
    }
    if (!std::is_sorted(gamma_grid.begin(), gamma_grid.end())) {
        throw ConfigError("sweep grid must be sorted ascending");
    }
    for (double g : gamma_grid) {
        if (g < 0.0) throw ConfigError("sweep grid contains a negative rate floor");
    }
    check_designable(problem.scenario);

    const ProblemData d = make_problem_data(problem.scenario, problem.pulse);
    double gamma_max = 0.0;
    const VectorXd probe_coords = run_probe(d, options, gamma_max);

    std::vector<TradeoffPoint> points;
    points.reserve(gamma_grid.size());
    std::optional<VectorXd> warm;
    for (double gamma : gamma_grid) {
        TradeoffProblem p = problem;
        p.gamma_th = gamma;
        const auto start = std::chrono::steady_clock::now();
        Solution sol = solve_impl(p, options, d, gamma_max, probe_coords,
                                  (options.warm_start && warm) ? &*warm : nullptr);
        TradeoffPoint pt;
        pt.gamma_th = gamma;
        pt.status = sol.status;
        pt.boundary_relaxed = sol.diag.boundary_relaxed;
        if (sol.status != SolveStatus::kInfeasible) {
            finalize_solution(p, d, sol);
            pt.crb_total = sol.crb.total;
            pt.crb_delay = sol.crb.delay_total;
            pt.crb_doa = sol.crb.doa_total;
            pt.achieved_rate = sol.achieved_rate;
            if (options.warm_start && sol.status == SolveStatus::kOptimal) {
                warm = d.coords.coords(sol.covariance / d.cov_scale);
            }
        }
        const auto stop = std::chrono::steady_clock::now();
        pt.seconds = std::chrono::duration<double>(stop - start).count();
        points.push_back(pt);
    }
    return points;
}

std::vector<double> auto_gamma_grid(double gamma_max, int count)
{
    if (count < 1) {
        throw ConfigError("sweep grid needs at least one point");
    }
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double hi = 1.1 * gamma_max;
    for (int i = 0; i < count; ++i) {
        grid[static_cast<std::size_t>(i)] =
            (count == 1) ? 0.0
                         : hi * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return grid;
}

} // namespace bsisac::opt
