#include "delamfem/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

namespace delamfem {

namespace {

struct DofPartition {
    std::vector<int> free_list;
    std::vector<int> free_of_full;  ///< -1 for constrained dofs

    static DofPartition build(int n_dofs, const std::vector<DirichletBC>& bcs) {
        DofPartition p;
        p.free_of_full.assign(n_dofs, 0);
        for (const auto& bc : bcs) {
            if (bc.dof < 0 || bc.dof >= n_dofs)
                throw SolveError("Dirichlet dof out of range");
            p.free_of_full[bc.dof] = -1;
        }
        for (int i = 0; i < n_dofs; ++i) {
            if (p.free_of_full[i] == 0) {
                p.free_of_full[i] = static_cast<int>(p.free_list.size());
                p.free_list.push_back(i);
            } else {
                p.free_of_full[i] = -1;
            }
        }
        return p;
    }

    Eigen::VectorXd reduce(const Eigen::VectorXd& full) const {
        Eigen::VectorXd r(free_list.size());
        for (size_t i = 0; i < free_list.size(); ++i) r(i) = full(free_list[i]);
        return r;
    }

    Eigen::SparseMatrix<double> reduce(const Eigen::SparseMatrix<double>& K) const {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(K.nonZeros());
        for (int col = 0; col < K.outerSize(); ++col) {
            const int rc = free_of_full[col];
            if (rc < 0) continue;
            for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
                const int rr = free_of_full[it.row()];
                if (rr >= 0) trips.emplace_back(rr, rc, it.value());
            }
        }
        Eigen::SparseMatrix<double> R(free_list.size(), free_list.size());
        R.setFromTriplets(trips.begin(), trips.end());
        return R;
    }
};

} // namespace

void LinearSolver::factorize(const Eigen::SparseMatrix<double>& K) {
    if (K.rows() != K.cols()) throw SolveError("linear_solve: matrix not square");
    current_ = K;
    current_.makeCompressed();
    // The symbolic analysis is value-aware for some backends (UMFPACK
    // preselects pivots from magnitudes), so it is redone per matrix.
    lu_.analyzePattern(current_);
    lu_.factorize(current_);
    if (lu_.info() != Eigen::Success)
        throw SolveError("linear_solve: factorization failed (singular or structurally deficient)");
    factorized_ = true;
}

Eigen::VectorXd LinearSolver::backsolve(const Eigen::VectorXd& r) const {
    if (!factorized_) throw SolveError("backsolve before factorize");
    return lu_.solve(r);
}

Eigen::VectorXd LinearSolver::solve_refined(const Eigen::VectorXd& r) const {
    if (!factorized_) throw SolveError("solve before factorize");
    if (current_.rows() != r.size()) throw SolveError("linear_solve: dimension mismatch");
    if (r.size() == 0) return Eigen::VectorXd();

    Eigen::VectorXd du = lu_.solve(r);
    const double rnorm = r.lpNorm<Eigen::Infinity>();
    if (rnorm == 0.0) return Eigen::VectorXd::Zero(r.size());

    // Iterative refinement toward the 1e-10 residual contract. Heavily
    // penalized systems (cohesive stiffness orders above the bulk) can
    // floor above it from cancellation in the residual; they are accepted
    // as long as the defect stays far below the nonlinear force tolerance.
    for (int pass = 0; pass < 6; ++pass) {
        const Eigen::VectorXd resid = r - current_ * du;
        if (resid.lpNorm<Eigen::Infinity>() <= 1e-10 * rnorm) return du;
        du += lu_.solve(resid);
    }
    const double final_res = (r - current_ * du).lpNorm<Eigen::Infinity>();
    if (final_res > 1e-6 * rnorm) {
        if (std::getenv("DELAMFEM_DEBUG"))
            fprintf(stderr, "[dbg] solve_refined fail: n=%ld rnorm=%g final=%g\n",
                    (long)r.size(), rnorm, final_res);
        throw SolveError("linear_solve: residual " + std::to_string(final_res / rnorm) +
                         " (relative) exceeds contract; system near-singular");
    }
    return du;
}

Eigen::VectorXd LinearSolver::solve(const Eigen::SparseMatrix<double>& K,
                                    const Eigen::VectorXd& r) {
    if (K.rows() != r.size()) throw SolveError("linear_solve: dimension mismatch");
    factorize(K);
    return solve_refined(r);
}

Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& r) {
    LinearSolver s;
    return s.solve(K, r);
}

IncrementOutcome solve_increment(const DiscreteModel& model, const Problem& problem,
                                 const SolverConfig& config, LinearSolver& solver,
                                 SolverState& state, double target_load_factor,
                                 double reference_load_step) {
    const DofPartition part = DofPartition::build(model.n_dofs, problem.dirichlet);

    if (reference_load_step <= 0.0)
        reference_load_step = target_load_factor - state.load_factor;
    Eigen::VectorXd u = state.u;
    double delta_applied = 0.0;
    for (const auto& bc : problem.dirichlet) {
        u(bc.dof) = bc.final_value * target_load_factor;
        delta_applied = std::max(delta_applied, std::abs(bc.final_value) * reference_load_step);
    }

    // The trial history latches across iterations within the increment
    // (kappa only grows), which keeps the secant fixed-point iteration from
    // cycling between damage states; it resets when the increment is cut.
    //
    // The correction loop runs chord iterations: the secant stiffness is
    // refactorized on the first two corrections, at a fixed cadence, and
    // whenever the residual stops falling; the cheap backsolves in between
    // carry the slow linear tail of the fixed-point iteration. Aitken
    // relaxation extrapolates the dominant mode between refreshes.
    std::vector<SeparationState> trial = state.states;
    std::vector<double> d_at_factor;
    std::vector<bool> contact_at_factor;
    std::vector<bool> prev_contact;
    int corrections = 0;
    double relax = 1.0;
    double last_du = 0.0;
    double prev_res = std::numeric_limits<double>::infinity();
    int last_factor = -1000;

    // The secant operator changes whenever damage moves or any point
    // switches between the tensile and contact branches (the normal
    // stiffness jumps by the full undamaged value there); a stale chord
    // matrix across such a switch can diverge.
    auto state_moved = [&](const std::vector<SeparationState>& s) {
        if (d_at_factor.size() != s.size()) return true;
        for (size_t i = 0; i < s.size(); ++i) {
            if (std::abs(s[i].d_s - d_at_factor[i]) > 5e-3) return true;
            if ((s[i].delta_n < 0.0) != contact_at_factor[i]) return true;
        }
        return false;
    };

    for (;;) {
        trial = update_states(model, u, trial);
        int flips = 0;
        if (prev_contact.size() == trial.size()) {
            for (size_t i = 0; i < trial.size(); ++i)
                flips += (trial[i].delta_n < 0.0) != prev_contact[i];
        } else {
            prev_contact.resize(trial.size());
        }
        for (size_t i = 0; i < trial.size(); ++i) prev_contact[i] = trial[i].delta_n < 0.0;

        // Refactorize while the interface state is actually moving and at a
        // slow cadence otherwise; in between, chord iterations reuse the
        // factorization and only the force vector is rebuilt.
        const bool refresh =
            corrections <= 1 || state_moved(trial) || corrections - last_factor >= 8;
        Eigen::VectorXd f_int;
        bool have_matrix = false;
        if (std::getenv("DELAMFEM_DEBUG"))
            fprintf(stderr, "[dbg] corr=%d refresh=%d flips=%d\n", corrections, (int)refresh, flips);
        if (refresh) {
            GlobalSystem sys = assemble(model, u, trial, config.formulation);
            f_int = std::move(sys.f_int);
            solver.factorize(part.reduce(sys.K));
            last_factor = corrections;
            d_at_factor.resize(trial.size());
            contact_at_factor.resize(trial.size());
            for (size_t i = 0; i < trial.size(); ++i) {
                d_at_factor[i] = trial[i].d_s;
                contact_at_factor[i] = trial[i].delta_n < 0.0;
            }
            have_matrix = true;
        } else {
            f_int = assemble_force(model, u, trial, config.formulation);
        }
        const Eigen::VectorXd R_f = part.reduce(-f_int);

        const double f_ref = std::max(f_int.lpNorm<Eigen::Infinity>(), config.force_floor);
        const double res = R_f.lpNorm<Eigen::Infinity>();
        // A growing residual on a chord segment means the frozen matrix no
        // longer contracts: rebuild it before the next correction.
        if (!have_matrix && res > prev_res) {
            const GlobalSystem sys = assemble(model, u, trial, config.formulation);
            solver.factorize(part.reduce(sys.K));
            last_factor = corrections;
            for (size_t i = 0; i < trial.size(); ++i) {
                d_at_factor[i] = trial[i].d_s;
                contact_at_factor[i] = trial[i].delta_n < 0.0;
            }
            have_matrix = true;
        }
        prev_res = res;
        const bool force_ok = res <= config.tol_force_rel * f_ref;
        if (std::getenv("DELAMFEM_DEBUG"))
            fprintf(stderr, "[dbg]   res=%g fref=%g rel=%g\n", res, f_ref, res / f_ref);
        const bool disp_ok =
            corrections <= 1 || last_du <= config.tol_disp_rel * std::max(delta_applied, 1e-300);
        if (force_ok && disp_ok) {
            state.u = u;
            state.states = std::move(trial);
            state.load_factor = target_load_factor;
            state.reactions = f_int;
            return {true, corrections};
        }
        // Post-peak increments often crawl: the crack front advances one
        // integration point at a time and the residual plateaus before it
        // finally contracts. The iteration cap is the only budget; cutback
        // handles what it cannot finish.
        if (corrections >= config.max_newton_iters) return {false, corrections};

        const Eigen::VectorXd du = have_matrix ? solver.solve_refined(R_f) : solver.backsolve(R_f);
        // Stiff contact makes the converged normal separations sit at the
        // tension/compression knife edge; persistent switching is damped
        // away by shrinking the update until the active set settles.
        if (flips > 0)
            relax = std::max(0.05, 0.7 * relax);
        else
            relax = std::min(1.0, relax / 0.7);
        for (size_t i = 0; i < part.free_list.size(); ++i) u(part.free_list[i]) += relax * du(i);
        last_du = du.size() ? relax * du.lpNorm<Eigen::Infinity>() : 0.0;
        ++corrections;
    }
}

RunResults run_simulation(const Problem& problem, const SolverConfig& config) {
    RunResults results;
    const DiscreteModel model =
        build_model(problem.mesh, problem.material, problem.czm, problem.model_options);

    SolverState state;
    state.u = Eigen::VectorXd::Zero(model.n_dofs);
    state.states = initial_states(model);
    state.reactions = Eigen::VectorXd::Zero(model.n_dofs);

    LinearSolver solver;
    results.curve.points.push_back({0.0, 0.0});
    double work = 0.0, dissipated = 0.0;

    auto load_sum = [&](const Eigen::VectorXd& f) {
        double p = 0.0;
        for (const auto& ld : problem.load_dofs) p += ld.sign * f(ld.dof);
        return p;
    };

    // Work/dissipation bookkeeping across one committed (sub)increment.
    auto account = [&](const SolverState& before, const SolverState& after) {
        const double dl = after.load_factor - before.load_factor;
        for (const auto& bc : problem.dirichlet) {
            if (bc.final_value == 0.0) continue;
            work += 0.5 * (before.reactions(bc.dof) + after.reactions(bc.dof)) * bc.final_value * dl;
        }
        const auto& cz = model.czm;
        for (size_t f = 0; f < model.iface.size(); ++f) {
            for (int g = 0; g < 2; ++g) {
                const auto& s0 = before.states[2 * f + g];
                const auto& s1 = after.states[2 * f + g];
                const double dd = s1.d_s - s0.d_s;
                if (dd <= 0.0) continue;
                auto rate = [&cz](const SeparationState& s) {
                    const double dn = std::max(0.0, s.delta_n);
                    return 0.5 * (cz.alpha_t0 * s.delta_t * s.delta_t + cz.alpha_n0 * dn * dn);
                };
                dissipated += 0.5 * (rate(s0) + rate(s1)) * dd * model.iface[f].gp[g].weight_len;
            }
        }
    };

    std::function<void(double, int, int&, int&)> advance = [&](double target, int depth,
                                                               int& iters, int& cutbacks) {
        SolverState snapshot = state;
        const IncrementOutcome out = solve_increment(model, problem, config, solver, state,
                                                     target, 1.0 / std::max(1, config.n_increments));
        if (out.converged) {
            iters += out.iterations;
            account(snapshot, state);
            return;
        }
        state = std::move(snapshot);
        if (depth >= config.max_cutbacks) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "no convergence at load factor %.6g after %d cutbacks (%d iterations)",
                          target, depth, out.iterations);
            throw SolveError(buf);
        }
        ++cutbacks;
        const double mid = 0.5 * (state.load_factor + target);
        advance(mid, depth + 1, iters, cutbacks);
        advance(target, depth + 1, iters, cutbacks);
    };

    const int N = std::max(1, config.n_increments);
    try {
        for (int step = 1; step <= N; ++step) {
            int iters = 0, cutbacks = 0;
            advance(static_cast<double>(step) / N, 0, iters, cutbacks);
            state.step = step;

            IncrementRecord rec;
            rec.step = step;
            rec.applied = state.load_factor * problem.applied_magnitude;
            rec.reaction = load_sum(state.reactions);
            for (const auto& bc : problem.dirichlet) rec.balance += state.reactions(bc.dof);
            rec.iterations = iters;
            rec.cutbacks = cutbacks;
            for (const auto& s : state.states)
                if (!s.precracked) rec.max_damage = std::max(rec.max_damage, s.d_s);
            results.log.push_back(rec);
            results.curve.points.push_back({rec.applied, rec.reaction});
            results.profiles.push_back(
                extract_profile(model, state.u, state.states, config.formulation));
            results.external_work.push_back(work);
            results.dissipated.push_back(dissipated);

            if (config.log) {
                char buf[200];
                std::snprintf(buf, sizeof(buf),
                              "step=%d disp=%.9g reaction=%.9g iters=%d cutbacks=%d max_ds=%.6g\n",
                              rec.step, rec.applied, rec.reaction, rec.iterations, rec.cutbacks,
                              rec.max_damage);
                (*config.log) << buf;
            }
        }
    } catch (const SolveError& err) {
        results.aborted = true;
        results.abort_reason = err.what();
    }
    results.final_state = std::move(state);
    return results;
}

} // namespace delamfem
