#pragma once

// Dense two-phase primal simplex over the standard computational form
//
//   maximize c·x  subject to  A x {<=,=,>=} b,  x >= 0.
//
// Pricing is Dantzig's rule with Bland's smallest-index rule as the
// anti-cycling safeguard once progress stalls. The leaving row is chosen
// among the minimum-ratio ties by largest pivot magnitude, which keeps the
// tableau well conditioned on the heavily degenerate mechanism-design LPs
// this solver exists for; if entries still blow up, the tableau is
// refactorized from the original data and the current basis. Every rule is
// deterministic, so identical problems yield identical solutions.
//
// The solution carries a dual vector read off the final tableau; callers can
// use the reported duality gap and primal violation as an optimality
// certificate.

#include <cstdint>
#include <string>

#include "util.hpp"

namespace mrfmech {

enum class Relation { le, eq, ge };

struct LinearConstraint {
    std::vector<double> coeffs;
    Relation rel = Relation::le;
    double rhs = 0.0;
};

struct LpProblem {
    int num_vars = 0;
    std::vector<double> objective;  // maximize objective · x
    std::vector<LinearConstraint> constraints;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
    LpStatus status = LpStatus::optimal;
    double objective = 0.0;
    std::vector<double> x;
    std::vector<double> dual;        // one multiplier per original constraint
    double dual_objective = 0.0;
    double max_violation = 0.0;      // primal residual over the original constraints
    double duality_gap = 0.0;        // |primal - dual| / max(1, |primal|)
    int iterations = 0;
};

namespace detail {

class SimplexTableau {
  public:
    SimplexTableau(const LpProblem& p) : n_orig_(p.num_vars) {
        const std::size_t m = p.constraints.size();
        flipped_.assign(m, false);
        rel_.resize(m);
        b_.resize(m);
        std::vector<std::vector<double>> rows(m);
        for (std::size_t i = 0; i < m; ++i) {
            const auto& c = p.constraints[i];
            if (static_cast<int>(c.coeffs.size()) != p.num_vars)
                throw std::invalid_argument("lp: constraint width mismatch");
            rows[i] = c.coeffs;
            rel_[i] = c.rel;
            b_[i] = c.rhs;
            if (b_[i] < 0) {  // normalize to b >= 0
                flipped_[i] = true;
                b_[i] = -b_[i];
                for (auto& v : rows[i]) v = -v;
                rel_[i] = c.rel == Relation::le ? Relation::ge : c.rel == Relation::ge ? Relation::le : Relation::eq;
            }
            if (rel_[i] == Relation::ge && b_[i] == 0.0) {
                // a·x >= 0 becomes -a·x <= 0: the slack basis is feasible and
                // no artificial is needed
                flipped_[i] = !flipped_[i];
                for (auto& v : rows[i]) v = -v;
                rel_[i] = Relation::le;
            }
        }
        // column layout: originals | slack/surplus | artificials | rhs
        slack_col_.assign(m, -1);
        art_col_.assign(m, -1);
        int extra = 0;
        for (std::size_t i = 0; i < m; ++i)
            extra += (rel_[i] == Relation::eq ? 1 : rel_[i] == Relation::ge ? 2 : 1);
        width_ = n_orig_ + extra + 1;
        int col = n_orig_;
        for (std::size_t i = 0; i < m; ++i) {
            if (rel_[i] == Relation::le || rel_[i] == Relation::ge) slack_col_[i] = col++;
            if (rel_[i] == Relation::ge || rel_[i] == Relation::eq) art_col_[i] = col++;
        }
        tab_.assign(m, std::vector<double>(static_cast<std::size_t>(width_), 0.0));
        basis_.assign(m, -1);
        is_artificial_.assign(static_cast<std::size_t>(width_ - 1), false);
        for (std::size_t i = 0; i < m; ++i) {
            auto& r = tab_[i];
            for (int j = 0; j < n_orig_; ++j) r[static_cast<std::size_t>(j)] = rows[i][static_cast<std::size_t>(j)];
            if (slack_col_[i] >= 0) r[static_cast<std::size_t>(slack_col_[i])] = rel_[i] == Relation::le ? 1.0 : -1.0;
            if (art_col_[i] >= 0) {
                r[static_cast<std::size_t>(art_col_[i])] = 1.0;
                is_artificial_[static_cast<std::size_t>(art_col_[i])] = true;
            }
            r.back() = b_[i];
            basis_[i] = rel_[i] == Relation::le ? slack_col_[i] : art_col_[i];
        }
        orig_ = tab_;  // kept for refactorization
    }

    // minimize cost·x_all for the current tableau; cost indexed over all
    // columns except rhs
    bool run_phase(const std::vector<double>& cost, bool allow_artificial_entering, int& iterations,
                   int iteration_cap) {
        reset_objective_row(cost);
        int stall = 0;
        int rebuilds = 0;
        int since_refactor = 0;
        bool bland = false;
        double best_obj = obj_.back();
        std::vector<char> blocked(static_cast<std::size_t>(width_), 0);
        bool refactored_this_round = false;
        while (true) {
            if (iterations >= iteration_cap) return false;
            int enter = -1;
            if (bland) {
                for (int j = 0; j + 1 < width_; ++j) {
                    if (blocked[static_cast<std::size_t>(j)]) continue;
                    if (!allow_artificial_entering && is_artificial_[static_cast<std::size_t>(j)]) continue;
                    if (obj_[static_cast<std::size_t>(j)] < -kReducedTol) {
                        enter = j;
                        break;
                    }
                }
            } else {
                double best = -kReducedTol;
                for (int j = 0; j + 1 < width_; ++j) {
                    if (blocked[static_cast<std::size_t>(j)]) continue;
                    if (!allow_artificial_entering && is_artificial_[static_cast<std::size_t>(j)]) continue;
                    if (obj_[static_cast<std::size_t>(j)] < best) {
                        best = obj_[static_cast<std::size_t>(j)];
                        enter = j;
                    }
                }
            }
            if (enter < 0) {
                bool any_blocked = std::find(blocked.begin(), blocked.end(), char(1)) != blocked.end();
                if (!any_blocked) return true;  // optimal for this phase
                // only ill-conditioned columns remain: refresh the numerics
                // once, then accept the current (validated downstream) point
                std::fill(blocked.begin(), blocked.end(), char(0));
                if (refactored_this_round) return true;
                refactored_this_round = true;
                if (!refactorize(cost)) return true;
                continue;
            }
            // ratio test: exact minimum, then the best-conditioned pivot in a
            // tiny relative window around it (smallest basis index breaks
            // remaining ties)
            double best_ratio = kInf;
            for (std::size_t i = 0; i < tab_.size(); ++i) {
                double a = tab_[i][static_cast<std::size_t>(enter)];
                if (a > kPivotTol) best_ratio = std::min(best_ratio, tab_[i].back() / a);
            }
            if (!std::isfinite(best_ratio)) {
                unbounded_ = true;
                return true;
            }
            const double window = best_ratio + 1e-9 * std::abs(best_ratio) + 1e-15;
            int leave = -1;
            double leave_a = 0.0;
            for (std::size_t i = 0; i < tab_.size(); ++i) {
                double a = tab_[i][static_cast<std::size_t>(enter)];
                if (a <= kPivotTol || tab_[i].back() / a > window) continue;
                bool better;
                if (leave < 0) better = true;
                else if (bland) {
                    // smallest basis index, but never trade a stable pivot
                    // for an unstable one
                    bool cand_stable = a >= kStablePivot, have_stable = leave_a >= kStablePivot;
                    if (cand_stable != have_stable) better = cand_stable;
                    else better = basis_[i] < basis_[static_cast<std::size_t>(leave)];
                } else if (a > leave_a * (1.0 + 1e-12)) better = true;
                else if (a >= leave_a * (1.0 - 1e-12)) better = basis_[i] < basis_[static_cast<std::size_t>(leave)];
                else better = false;
                if (better) {
                    leave = static_cast<int>(i);
                    leave_a = a;
                }
            }
            if (!bland && leave_a < kStablePivot) {
                // the whole candidate row set is ill-conditioned for this
                // column; look for a better entering column first
                blocked[static_cast<std::size_t>(enter)] = 1;
                continue;
            }
            pivot(static_cast<std::size_t>(leave), enter);
            ++iterations;
            ++since_refactor;
            std::fill(blocked.begin(), blocked.end(), char(0));
            refactored_this_round = false;
            // refactorize from the original data when entries blow up and
            // periodically, before slow drift can corrupt the basis
            if (entries_blown() || since_refactor >= 1024) {
                if (++rebuilds > 64 || !refactorize(cost)) return false;
                since_refactor = 0;
            }
            // Bland's rule is the anti-cycling safeguard: engage it once
            // Dantzig stops making real progress (the objective row tracks
            // -cost), hand back as soon as the objective moves again
            if (obj_.back() > best_obj + kDegenTol) {
                best_obj = obj_.back();
                stall = 0;
                bland = false;
                rebuilds = 0;
            } else if (!bland && ++stall >= 256) {
                bland = true;
            }
        }
    }

    void pivot(std::size_t row, int col) {
        auto& pr = tab_[row];
        double inv = 1.0 / pr[static_cast<std::size_t>(col)];
        for (auto& v : pr) v *= inv;
        pr[static_cast<std::size_t>(col)] = 1.0;  // clamp the pivot entry exactly
        for (std::size_t i = 0; i < tab_.size(); ++i) {
            if (i == row) continue;
            double f = tab_[i][static_cast<std::size_t>(col)];
            if (f == 0.0) continue;
            auto& r = tab_[i];
            for (int j = 0; j < width_; ++j) r[static_cast<std::size_t>(j)] -= f * pr[static_cast<std::size_t>(j)];
            r[static_cast<std::size_t>(col)] = 0.0;
            if (r.back() < 0.0 && r.back() > -1e-9) r.back() = 0.0;
        }
        double f = obj_[static_cast<std::size_t>(col)];
        if (f != 0.0) {
            for (int j = 0; j < width_; ++j) obj_[static_cast<std::size_t>(j)] -= f * pr[static_cast<std::size_t>(j)];
            obj_[static_cast<std::size_t>(col)] = 0.0;
        }
        basis_[row] = col;
    }

    // drive artificial variables out of the basis after phase 1
    void expel_artificials() {
        for (std::size_t i = 0; i < tab_.size(); ++i) {
            if (!is_artificial_[static_cast<std::size_t>(basis_[i])]) continue;
            int piv = -1;
            for (int j = 0; j + 1 < width_; ++j) {
                if (is_artificial_[static_cast<std::size_t>(j)]) continue;
                if (std::abs(tab_[i][static_cast<std::size_t>(j)]) > 1e-8) {
                    piv = j;
                    break;
                }
            }
            if (piv >= 0) pivot(i, piv);
            // else: redundant row, the artificial stays basic at level ~0
        }
    }

    double phase1_cost() const { return -obj_.back(); }

    std::vector<double> primal(int n) const {
        std::vector<double> x(static_cast<std::size_t>(n), 0.0);
        for (std::size_t i = 0; i < tab_.size(); ++i)
            if (basis_[i] < n) x[static_cast<std::size_t>(basis_[i])] = tab_[i].back();
        return x;
    }

    // duals of the internal minimization, one per (transformed) row
    std::vector<double> duals(const std::vector<double>& cost) const {
        std::vector<double> y(tab_.size(), 0.0);
        for (std::size_t i = 0; i < tab_.size(); ++i) {
            int sc = slack_col_[i], ac = art_col_[i];
            if (rel_[i] == Relation::le) {
                y[i] = -(obj_[static_cast<std::size_t>(sc)] - cost[static_cast<std::size_t>(sc)]);
            } else if (rel_[i] == Relation::ge) {
                y[i] = obj_[static_cast<std::size_t>(sc)] - cost[static_cast<std::size_t>(sc)];
            } else {
                y[i] = -(obj_[static_cast<std::size_t>(ac)] - cost[static_cast<std::size_t>(ac)]);
            }
        }
        return y;
    }

    int width() const { return width_; }
    bool unbounded() const { return unbounded_; }
    const std::vector<bool>& artificial_mask() const { return is_artificial_; }
    const std::vector<double>& transformed_rhs() const { return b_; }
    const std::vector<bool>& flipped() const { return flipped_; }

  private:
    static constexpr double kPivotTol = 1e-8;
    static constexpr double kReducedTol = 1e-9;
    static constexpr double kDegenTol = 1e-12;
    static constexpr double kStablePivot = 1e-4;
    static constexpr double kBlowup = 1e9;

    void reset_objective_row(const std::vector<double>& cost) {
        obj_.assign(static_cast<std::size_t>(width_), 0.0);
        for (int j = 0; j + 1 < width_; ++j) obj_[static_cast<std::size_t>(j)] = cost[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < tab_.size(); ++i) {
            double cb = cost[static_cast<std::size_t>(basis_[i])];
            if (cb == 0.0) continue;
            const auto& r = tab_[i];
            for (int j = 0; j < width_; ++j) obj_[static_cast<std::size_t>(j)] -= cb * r[static_cast<std::size_t>(j)];
        }
    }

    bool entries_blown() const {
        for (const auto& r : tab_)
            for (double v : r)
                if (std::abs(v) > kBlowup) return true;
        return false;
    }

    // Recompute tab_ = B^{-1} * orig_ for the current basis by Gaussian
    // elimination, then rebuild the reduced-cost row. Returns false when the
    // basis matrix is numerically singular.
    bool refactorize(const std::vector<double>& cost) {
        const std::size_t m = tab_.size();
        std::vector<std::vector<double>> work(m, std::vector<double>(static_cast<std::size_t>(width_) + m, 0.0));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t k = 0; k < m; ++k)
                work[i][k] = orig_[i][static_cast<std::size_t>(basis_[k])];
            for (int j = 0; j < width_; ++j)
                work[i][m + static_cast<std::size_t>(j)] = orig_[i][static_cast<std::size_t>(j)];
        }
        for (std::size_t col = 0; col < m; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < m; ++r)
                if (std::abs(work[r][col]) > std::abs(work[piv][col])) piv = r;
            if (std::abs(work[piv][col]) < 1e-12) return false;
            std::swap(work[piv], work[col]);
            double inv = 1.0 / work[col][col];
            for (std::size_t j = col; j < work[col].size(); ++j) work[col][j] *= inv;
            for (std::size_t r = 0; r < m; ++r) {
                if (r == col) continue;
                double f = work[r][col];
                if (f == 0.0) continue;
                for (std::size_t j = col; j < work[r].size(); ++j) work[r][j] -= f * work[col][j];
            }
        }
        // row k of B^{-1}*orig corresponds to basic variable basis_[k]
        for (std::size_t k = 0; k < m; ++k) {
            for (int j = 0; j < width_; ++j) tab_[k][static_cast<std::size_t>(j)] = work[k][m + static_cast<std::size_t>(j)];
            if (tab_[k].back() < 0.0 && tab_[k].back() > -1e-7) tab_[k].back() = 0.0;
        }
        reset_objective_row(cost);
        return true;
    }

    int n_orig_;
    int width_ = 0;
    bool unbounded_ = false;
    std::vector<std::vector<double>> tab_, orig_;
    std::vector<double> obj_;
    std::vector<double> b_;
    std::vector<int> basis_;
    std::vector<int> slack_col_, art_col_;
    std::vector<Relation> rel_;
    std::vector<bool> flipped_;
    std::vector<bool> is_artificial_;
};

}  // namespace detail

inline LpSolution lp_solve(const LpProblem& p, int iteration_cap = 50'000) {
    if (static_cast<int>(p.objective.size()) != p.num_vars)
        throw std::invalid_argument("lp: objective width mismatch");
    detail::SimplexTableau tb(p);
    LpSolution sol;
    const int width = tb.width();

    // phase 1: minimize the sum of artificials
    std::vector<double> cost1(static_cast<std::size_t>(width), 0.0);
    for (int j = 0; j + 1 < width; ++j)
        if (tb.artificial_mask()[static_cast<std::size_t>(j)]) cost1[static_cast<std::size_t>(j)] = 1.0;
    if (!tb.run_phase(cost1, true, sol.iterations, iteration_cap)) {
        sol.status = LpStatus::iteration_limit;
        return sol;
    }
    if (tb.phase1_cost() > 1e-7) {
        sol.status = LpStatus::infeasible;
        return sol;
    }
    tb.expel_artificials();

    // phase 2: minimize -c·x with artificials barred from entering
    std::vector<double> cost2(static_cast<std::size_t>(width), 0.0);
    for (int j = 0; j < p.num_vars; ++j) cost2[static_cast<std::size_t>(j)] = -p.objective[static_cast<std::size_t>(j)];
    if (!tb.run_phase(cost2, false, sol.iterations, iteration_cap)) {
        sol.status = LpStatus::iteration_limit;
        return sol;
    }
    if (tb.unbounded()) {
        sol.status = LpStatus::unbounded;
        return sol;
    }

    sol.x = tb.primal(p.num_vars);
    sol.objective = 0.0;
    for (int j = 0; j < p.num_vars; ++j) sol.objective += p.objective[static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];

    // dual certificate: internal duals are for the minimization on the
    // transformed rows; flip to the maximization and undo row negations
    auto yin = tb.duals(cost2);
    sol.dual.assign(yin.size(), 0.0);
    sol.dual_objective = 0.0;
    for (std::size_t i = 0; i < yin.size(); ++i) {
        double y = -yin[i];
        sol.dual_objective += y * tb.transformed_rhs()[i];
        sol.dual[i] = tb.flipped()[i] ? -y : y;
    }
    sol.duality_gap = std::abs(sol.dual_objective - sol.objective) / std::max(1.0, std::abs(sol.objective));

    sol.max_violation = 0.0;
    for (const auto& c : p.constraints) {
        double lhs = 0.0;
        for (int j = 0; j < p.num_vars; ++j) lhs += c.coeffs[static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];
        double viol = 0.0;
        if (c.rel == Relation::le) viol = lhs - c.rhs;
        else if (c.rel == Relation::ge) viol = c.rhs - lhs;
        else viol = std::abs(lhs - c.rhs);
        sol.max_violation = std::max(sol.max_violation, viol);
    }
    for (double v : sol.x) sol.max_violation = std::max(sol.max_violation, -v);
    return sol;
}

}  // namespace mrfmech
