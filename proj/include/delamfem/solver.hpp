#pragma once

#include "delamfem/assembly.hpp"
#include "delamfem/bench.hpp"

#include <Eigen/SparseLU>
#ifdef DELAMFEM_WITH_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <iosfwd>
#include <vector>

namespace delamfem {

class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    int n_increments = 1;
    int max_newton_iters = 1500;
    double tol_force_rel = 1.0e-3;
    double tol_disp_rel = 1.0e-2;
    double force_floor = 1.0e-8;  ///< absolute force reference floor (N)
    int max_cutbacks = 8;
    Formulation formulation = Formulation::stabilized;
    std::ostream* log = nullptr;  ///< per-increment key=value progress lines
};

/// Direct sparse solver for the (generally unsymmetric) Newton systems.
/// solve() applies iterative refinement until the residual meets the
/// contract |K du - r|_inf <= 1e-10 |r|_inf. The factorize/backsolve split
/// lets the increment loop run chord iterations on a frozen factorization.
class LinearSolver {
public:
    void factorize(const Eigen::SparseMatrix<double>& K);
    Eigen::VectorXd backsolve(const Eigen::VectorXd& r) const;
    /// Refined solve against the most recently factorized matrix.
    Eigen::VectorXd solve_refined(const Eigen::VectorXd& r) const;
    Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& r);

private:
#ifdef DELAMFEM_WITH_UMFPACK
    Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu_;
#else
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
#endif
    Eigen::SparseMatrix<double> current_;
    bool factorized_ = false;
};

/// One-shot convenience wrapper around LinearSolver.
Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& r);

struct SolverState {
    Eigen::VectorXd u;
    std::vector<SeparationState> states;  ///< committed history
    int step = 0;
    double load_factor = 0.0;
    Eigen::VectorXd reactions;  ///< internal force at the last converged state
};

struct IncrementRecord {
    int step = 0;
    double applied = 0.0;
    double reaction = 0.0;
    int iterations = 0;
    int cutbacks = 0;
    double max_damage = 0.0;
    double balance = 0.0;  ///< plain sum of reactions over all Dirichlet dofs
};

struct RunResults {
    LoadDispCurve curve;  ///< one point per outer increment, starting at (0,0)
    std::vector<TractionProfile> profiles;  ///< per outer increment (index 0 = step 1)
    std::vector<IncrementRecord> log;
    std::vector<double> external_work;    ///< cumulative, per outer increment
    std::vector<double> dissipated;       ///< cumulative cohesive dissipation
    bool aborted = false;
    std::string abort_reason;
    SolverState final_state;
};

/// Displacement-controlled quasi-static run: fixed uniform outer increments
/// with halving cutbacks, Newton iterations on the secant-linearized
/// system, irreversible history committed per converged (sub)increment.
RunResults run_simulation(const Problem& problem, const SolverConfig& config);

/// Newton solve of a single increment of the load factor. Returns the
/// number of corrections on success; throws SolveError after exhausting
/// max_newton_iters (callers cut back), with history/u restored by the
/// caller from its own copies.
struct IncrementOutcome {
    bool converged = false;
    int iterations = 0;
};
/// reference_load_step scales the displacement-correction tolerance: the
/// run loop passes the outer increment's load-factor step so cutback
/// sub-increments are not held to an ever-shrinking threshold. Zero means
/// "use the attempted step itself".
IncrementOutcome solve_increment(const DiscreteModel& model, const Problem& problem,
                                 const SolverConfig& config, LinearSolver& solver,
                                 SolverState& state, double target_load_factor,
                                 double reference_load_step = 0.0);

} // namespace delamfem
