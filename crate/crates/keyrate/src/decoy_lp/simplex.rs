//! Dense two-phase simplex for small box-bounded linear programs.
//!
//! The decoy programs have at most a few dozen variables and under a
//! hundred rows once box bounds are expanded, so a dense tableau with full
//! eliminations is simple and fast.  Entering columns follow Dantzig's
//! rule (most negative reduced cost, lowest index on ties); if the
//! objective stalls through a run of degenerate pivots the solver switches
//! permanently to Bland's rule, which cannot cycle.
//!
//! These programs are numerically nasty: paired ±rows whose gap is a
//! Poisson tail near f64 resolution, columns spanning forty orders of
//! magnitude, right-hand sides crossing zero at rounding scale.  The
//! tableau iterations therefore carry several safeguards — ratio tests
//! clamp slightly negative right-hand sides to zero so a −1e−16 residual
//! cannot become a large negative step, ratio ties go to the largest pivot
//! element (smallest basis index under Bland's rule) — but their result is
//! treated only as a warm start.  Once the tableau terminates, an exact
//! loop re-derives everything from the untouched row data through LU
//! solves of the current basis matrix: dual steps pivot out basic values
//! that exact algebra shows negative, primal steps price all columns
//! against exact duals and finish the last distance to the true vertex
//! that eliminated-tableau arithmetic cannot resolve.  The returned point
//! is the better of the exact and tableau candidates, and a final audit
//! against the original rows turns any basis gone numerically bad into an
//! error instead of a wrong answer.

use super::{LpError, LpProblem};

const PIVOT_TOL: f64 = 1e-9;
const MAX_ITERS: usize = 200_000;
const STALL_LIMIT: usize = 50;
const POLISH_TOL: f64 = 1e-13;
const POLISH_ITERS: usize = 1_000;

pub(super) enum Outcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

pub(super) fn solve(problem: &LpProblem) -> Result<Outcome, LpError> {
    let n = problem.objective.len();
    let tol = problem.tolerance;

    // Shift to x' = x - lo >= 0; finite upper bounds become ordinary rows,
    // so a variable with an infinite upper bound is simply never capped
    // (that is what makes genuine unboundedness detectable).
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(problem.constraints.len() + n);
    for c in &problem.constraints {
        let mut rhs = c.rhs;
        for (a, (lo, _)) in c.coeffs.iter().zip(&problem.bounds) {
            if *a != 0.0 && *lo != 0.0 {
                rhs -= a * lo;
            }
        }
        rows.push((c.coeffs.clone(), rhs));
    }
    for (j, (lo, hi)) in problem.bounds.iter().enumerate() {
        if hi.is_finite() {
            let mut row = vec![0.0; n];
            row[j] = 1.0;
            rows.push((row, hi - lo));
        }
    }
    let m = rows.len();
    let n_slack = m;
    let n_art = rows.iter().filter(|(_, rhs)| *rhs < 0.0).count();
    let ncols = n + n_slack + n_art + 1;
    let rhs_col = ncols - 1;
    // Original row index behind each tableau row, maintained through the
    // redundant-row drops so the final basis can be re-solved from
    // untouched data.
    let mut row_ids: Vec<usize> = (0..m).collect();

    let mut tab: Vec<Vec<f64>> = vec![vec![0.0; ncols]; m];
    let mut basis: Vec<usize> = vec![0; m];
    let mut next_art = n + n_slack;
    for (i, (row, rhs)) in rows.iter().enumerate() {
        let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
        for (j, a) in row.iter().enumerate() {
            if *a != 0.0 {
                tab[i][j] = sign * a;
            }
        }
        tab[i][n + i] = sign;
        tab[i][rhs_col] = sign * rhs;
        if *rhs < 0.0 {
            tab[i][next_art] = 1.0;
            basis[i] = next_art;
            next_art += 1;
        } else {
            basis[i] = n + i;
        }
    }

    if n_art > 0 {
        // Phase 1: minimize the artificial sum, starting from the canonical
        // reduced-cost row for the all-slack/artificial basis.
        let mut cost = vec![0.0; ncols];
        for j in n + n_slack..ncols - 1 {
            cost[j] = 1.0;
        }
        for i in 0..m {
            if basis[i] >= n + n_slack {
                for j in 0..ncols {
                    cost[j] -= tab[i][j];
                }
            }
        }
        if !run_phase(&mut tab, &mut basis, &mut cost, n + n_slack, tol)? {
            // A sum of nonnegative variables cannot be unbounded below.
            return Err(LpError::SolverStall);
        }
        let residual: f64 = basis
            .iter()
            .zip(&tab)
            .filter(|(b, _)| **b >= n + n_slack)
            .map(|(_, row)| row[rhs_col])
            .sum();
        if residual > tol {
            return Ok(Outcome::Infeasible);
        }
        // Pivot leftover (value ~0) artificials out of the basis on the
        // best-conditioned column; rows that offer no pivot are redundant
        // and dropped.
        let mut keep = vec![true; m];
        for r in 0..m {
            if basis[r] >= n + n_slack {
                let j_best = (0..n + n_slack)
                    .max_by(|&a, &b| tab[r][a].abs().total_cmp(&tab[r][b].abs()))
                    .filter(|&j| tab[r][j].abs() > PIVOT_TOL);
                match j_best {
                    Some(j) => pivot(&mut tab, &mut basis, None, r, j),
                    None => keep[r] = false,
                }
            }
        }
        if keep.contains(&false) {
            let mut kept_tab = Vec::new();
            let mut kept_basis = Vec::new();
            let mut kept_ids = Vec::new();
            for (r, keep_row) in keep.iter().enumerate() {
                if *keep_row {
                    kept_tab.push(std::mem::take(&mut tab[r]));
                    kept_basis.push(basis[r]);
                    kept_ids.push(row_ids[r]);
                }
            }
            tab = kept_tab;
            basis = kept_basis;
            row_ids = kept_ids;
        }
    }

    // Phase 2 on the original objective (artificial columns stay frozen out
    // via the entering cutoff).
    let mut cost = rebuilt_cost(&problem.objective, &tab, &basis, ncols);
    if !run_phase(&mut tab, &mut basis, &mut cost, n + n_slack, tol)? {
        return Ok(Outcome::Unbounded);
    }

    // Polish with exact pricing: every quantity the eliminated tableau
    // accumulates rounding in — duals, reduced costs, entering columns,
    // basic values — is recomputed from the untouched row data through LU
    // solves of the current basis matrix.  The tableau's job ends here; it
    // only had to find a near-optimal basis for this loop to finish from.
    let m_kept = tab.len();
    let mut kept_pos = vec![usize::MAX; m];
    for (i, &rid) in row_ids.iter().enumerate() {
        kept_pos[rid] = i;
    }
    let column = |j: usize| -> Vec<f64> {
        let mut col = vec![0.0; m_kept];
        if j < n {
            for (i, &rid) in row_ids.iter().enumerate() {
                col[i] = rows[rid].0[j];
            }
        } else if kept_pos[j - n] != usize::MAX {
            col[kept_pos[j - n]] = 1.0;
        }
        col
    };
    let bvec: Vec<f64> = row_ids.iter().map(|&rid| rows[rid].1).collect();
    // Basic values beyond this are impossible for the actual polytope
    // (variables are boxed, slacks are row-sized); reaching them means the
    // basis is singular at working precision even if its LU pivots pass.
    let xb_cap = 1e6 * (1.0 + bvec.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let factor_basis = |basis: &[usize]| -> Option<(LuFactors, Vec<f64>)> {
        let mut bmat = vec![vec![0.0; m_kept]; m_kept];
        for (k, &bj) in basis.iter().enumerate() {
            for (row, v) in bmat.iter_mut().zip(column(bj)) {
                row[k] = v;
            }
        }
        let lu = LuFactors::factor(bmat)?;
        let xb = lu.solve(&bvec);
        if !xb.iter().all(|v| v.abs() <= xb_cap) {
            return None;
        }
        Some((lu, xb))
    };
    let shift_clamp = |x: &mut Vec<f64>| {
        for (xj, (lo, hi)) in x.iter_mut().zip(&problem.bounds) {
            *xj += lo;
            *xj = xj.max(*lo);
            if hi.is_finite() {
                *xj = xj.min(*hi);
            }
        }
    };
    let max_violation = |x: &[f64]| -> f64 {
        problem
            .constraints
            .iter()
            .map(|c| {
                let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
                (lhs - c.rhs) / (1.0 + c.rhs.abs())
            })
            .fold(0.0, f64::max)
    };
    // Snapshot the tableau's answer before the exact loop moves the basis;
    // it is the floor the loop must beat.
    let mut x_tab = vec![0.0; n];
    for (row, b) in tab.iter().zip(&basis) {
        if *b < n {
            x_tab[*b] = row[rhs_col];
        }
    }
    shift_clamp(&mut x_tab);

    // Invariant: `current` basic values always belong to `basis`; a pivot
    // whose refactor fails is reverted so the invariant survives.  `None`
    // only before the first pivot, where the tableau is still in charge.
    let mut current = factor_basis(&basis);
    'exact: for _ in 0..POLISH_ITERS {
        let Some((lu, xb)) = &current else {
            break;
        };
        let mut in_basis = vec![false; n + n_slack];
        for &bj in &basis {
            in_basis[bj] = true;
        }
        let priceable =
            |j: usize| !in_basis[j] && (j < n || kept_pos[j - n] != usize::MAX);
        let cb: Vec<f64> = basis
            .iter()
            .map(|&bj| if bj < n { problem.objective[bj] } else { 0.0 })
            .collect();
        let y = lu.solve_transposed(&cb);

        // Feasibility restoration (dual step): exact algebra can reveal a
        // basic value the eliminated tableau believed was nonnegative.
        // Pivot the most negative one out on the column minimizing the
        // dual ratio, which keeps the reduced costs nonnegative.
        let worst = xb
            .iter()
            .enumerate()
            .filter(|(_, v)| **v < -1e-12)
            .min_by(|a, b| a.1.total_cmp(b.1));
        if let Some((rl, _)) = worst {
            let mut e_r = vec![0.0; m_kept];
            e_r[rl] = 1.0;
            let v = lu.solve_transposed(&e_r);
            let mut dual_cands: Vec<(usize, f64)> = (0..n + n_slack)
                .filter(|&j| priceable(j))
                .filter_map(|j| {
                    let aj = column(j);
                    let wj: f64 = aj.iter().zip(&v).map(|(a, vi)| a * vi).sum();
                    (wj < -1e-11).then(|| {
                        let cj = if j < n { problem.objective[j] } else { 0.0 };
                        let rj =
                            cj - aj.iter().zip(&y).map(|(a, yi)| a * yi).sum::<f64>();
                        (j, rj / -wj)
                    })
                })
                .collect();
            dual_cands.sort_by(|a, b| a.1.total_cmp(&b.1));
            for (je, _) in dual_cands {
                let prev = basis[rl];
                basis[rl] = je;
                match factor_basis(&basis) {
                    Some(next) => {
                        current = Some(next);
                        continue 'exact;
                    }
                    None => basis[rl] = prev,
                }
            }
            break;
        }

        // Optimality (primal step): price every nonbasic column against
        // exact duals and bring in the most negative one that admits a
        // blocking row.
        let mut candidates: Vec<(usize, f64)> = (0..n + n_slack)
            .filter(|&j| priceable(j))
            .filter_map(|j| {
                let cj = if j < n { problem.objective[j] } else { 0.0 };
                let rj = cj - column(j).iter().zip(&y).map(|(a, yi)| a * yi).sum::<f64>();
                (rj < -POLISH_TOL).then_some((j, rj))
            })
            .collect();
        candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
        for (je, _) in candidates {
            let u = lu.solve(&column(je));
            let mut leave: Option<(usize, f64)> = None;
            for (i, (&ui, &xi)) in u.iter().zip(xb).enumerate() {
                if ui > 1e-11 {
                    let t = xi.max(0.0) / ui;
                    if leave.map_or(true, |(_, best)| t < best) {
                        leave = Some((i, t));
                    }
                }
            }
            let Some((rl, _)) = leave else {
                continue;
            };
            let prev = basis[rl];
            basis[rl] = je;
            match factor_basis(&basis) {
                Some(next) => current = Some(next),
                None => {
                    basis[rl] = prev;
                    break 'exact;
                }
            }
            continue 'exact;
        }
        break;
    }

    // Prefer the exact loop's vertex, but never accept a regression over
    // the tableau's answer: whichever candidate violates the original rows
    // least wins, and the winner still has to clear the audit.
    let x = match &current {
        Some((_, xb)) => {
            let mut x_exact = vec![0.0; n];
            for (&bj, v) in basis.iter().zip(xb) {
                if bj < n {
                    x_exact[bj] = *v;
                }
            }
            shift_clamp(&mut x_exact);
            // Below 1e-9 both are clean and the exact vertex is the more
            // accurate answer; the tableau only wins on a real regression.
            if max_violation(&x_exact) <= max_violation(&x_tab).max(1e-9) {
                x_exact
            } else {
                x_tab
            }
        }
        None => x_tab,
    };
    let worst_violation = max_violation(&x);
    if worst_violation > 1e-6 {
        return Err(LpError::NumericalAudit {
            violation: worst_violation,
        });
    }
    let value = x
        .iter()
        .zip(&problem.objective)
        .map(|(xj, cj)| xj * cj)
        .sum();
    Ok(Outcome::Optimal { value, x })
}

/// Dense LU with partial pivoting for the basis systems of the exact
/// pricing loop.  `lu` stores the unit-lower factor below the diagonal and
/// the upper factor on and above it; `perm[i]` is the original index of
/// the row placed at position `i`.
struct LuFactors {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl LuFactors {
    /// `None` when a pivot column is numerically zero (singular basis).
    fn factor(mut a: Vec<Vec<f64>>) -> Option<Self> {
        let m = a.len();
        let mut perm: Vec<usize> = (0..m).collect();
        for col in 0..m {
            let piv = (col..m).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
            if a[piv][col].abs() < 1e-14 {
                return None;
            }
            a.swap(col, piv);
            perm.swap(col, piv);
            let inv = 1.0 / a[col][col];
            for r in col + 1..m {
                let f = a[r][col] * inv;
                a[r][col] = f;
                if f != 0.0 {
                    for k in col + 1..m {
                        a[r][k] = a[r][k] - f * a[col][k];
                    }
                }
            }
        }
        Some(Self { lu: a, perm })
    }

    /// Solve `B x = b`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = b.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..m {
            let mut v = x[i];
            for k in 0..i {
                v -= self.lu[i][k] * x[k];
            }
            x[i] = v;
        }
        for i in (0..m).rev() {
            let mut v = x[i];
            for k in i + 1..m {
                v -= self.lu[i][k] * x[k];
            }
            x[i] = v / self.lu[i][i];
        }
        x
    }

    /// Solve `Bᵀ y = c` (the dual system) on the same factorization:
    /// with `PB = LU`, this is `Uᵀ z = c`, `Lᵀ w = z`, `y = Pᵀ w`.
    fn solve_transposed(&self, c: &[f64]) -> Vec<f64> {
        let m = c.len();
        let mut z = vec![0.0; m];
        for i in 0..m {
            let mut v = c[i];
            for k in 0..i {
                v -= self.lu[k][i] * z[k];
            }
            z[i] = v / self.lu[i][i];
        }
        for i in (0..m).rev() {
            let mut v = z[i];
            for k in i + 1..m {
                v -= self.lu[k][i] * z[k];
            }
            z[i] = v;
        }
        let mut y = vec![0.0; m];
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = z[i];
        }
        y
    }
}

fn rebuilt_cost(objective: &[f64], tab: &[Vec<f64>], basis: &[usize], ncols: usize) -> Vec<f64> {
    let n = objective.len();
    let mut cost = vec![0.0; ncols];
    cost[..n].copy_from_slice(objective);
    for (row, b) in tab.iter().zip(basis) {
        let cb = if *b < n { objective[*b] } else { 0.0 };
        if cb != 0.0 {
            for (c, a) in cost.iter_mut().zip(row) {
                *c -= cb * a;
            }
        }
    }
    cost
}

/// Minimum-ratio row for entering column `je`, or `None` when no positive
/// pivot exists (the column is unblocked).  Right-hand sides are clamped
/// at zero so rounding residue below zero yields a degenerate pivot rather
/// than a negative step.  Ties at the minimum go to the largest pivot
/// element, or to the smallest basis index when `bland` is set.
fn leaving_row(
    tab: &[Vec<f64>],
    basis: &[usize],
    je: usize,
    rhs_col: usize,
    bland: bool,
) -> Option<usize> {
    let mut min_ratio = f64::INFINITY;
    for row in tab.iter() {
        let a = row[je];
        if a > PIVOT_TOL {
            min_ratio = min_ratio.min(row[rhs_col].max(0.0) / a);
        }
    }
    if min_ratio == f64::INFINITY {
        return None;
    }
    // The tie window only needs to absorb the rounding of rhs/a itself —
    // a few ulps.  Anything wider lets a genuinely larger ratio win the
    // tie-break, which drives the true blocking row's rhs negative by the
    // ratio difference times its pivot size.
    let cutoff = min_ratio + 1e-12 * (1.0 + min_ratio);
    let mut leaving: Option<usize> = None;
    for (r, row) in tab.iter().enumerate() {
        let a = row[je];
        if a > PIVOT_TOL && row[rhs_col].max(0.0) / a <= cutoff {
            let better = match leaving {
                None => true,
                Some(l) => {
                    if bland {
                        basis[r] < basis[l]
                    } else {
                        a > tab[l][je]
                    }
                }
            };
            if better {
                leaving = Some(r);
            }
        }
    }
    leaving
}

/// Run one simplex phase to optimality.  Returns `Ok(true)` at an optimum,
/// `Ok(false)` if the phase objective is unbounded below, and
/// `SolverStall` only if the iteration cap is exhausted.
fn run_phase(
    tab: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &mut [f64],
    enterable: usize,
    tol: f64,
) -> Result<bool, LpError> {
    let rhs_col = cost.len() - 1;
    let mut bland = false;
    let mut stalled = 0usize;
    let mut best_seen = f64::INFINITY;
    for _ in 0..MAX_ITERS {
        let mut entering = None;
        if bland {
            entering = (0..enterable).find(|&j| cost[j] < -tol);
        } else {
            let mut most_negative = -tol;
            for (j, c) in cost.iter().enumerate().take(enterable) {
                if *c < most_negative {
                    most_negative = *c;
                    entering = Some(j);
                }
            }
        }
        let Some(je) = entering else {
            return Ok(true);
        };

        let Some(rl) = leaving_row(tab, basis, je, rhs_col, bland) else {
            return Ok(false);
        };
        pivot(tab, basis, Some(cost), rl, je);

        let objective = -cost[rhs_col];
        if objective < best_seen - tol * (1.0 + objective.abs()) {
            best_seen = objective;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > STALL_LIMIT {
                bland = true;
            }
        }
    }
    Err(LpError::SolverStall)
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], cost: Option<&mut [f64]>, r: usize, j: usize) {
    let rhs_col = tab[r].len() - 1;
    // A pivot row whose rhs has drifted below zero describes a step of
    // negative length; dividing that residue by a small pivot element
    // would hand the entering variable a large negative value.  The true
    // step is zero — make the pivot exactly degenerate.
    if tab[r][rhs_col] < 0.0 {
        tab[r][rhs_col] = 0.0;
    }
    let inv = 1.0 / tab[r][j];
    for v in tab[r].iter_mut() {
        *v *= inv;
    }
    tab[r][j] = 1.0;
    let (head, rest) = tab.split_at_mut(r);
    let (pivot_row, tail) = rest.split_first_mut().expect("pivot row exists");
    for row in head.iter_mut().chain(tail.iter_mut()) {
        let factor = row[j];
        if factor != 0.0 {
            for (v, p) in row.iter_mut().zip(pivot_row.iter()) {
                *v -= factor * p;
            }
            row[j] = 0.0;
        }
    }
    if let Some(cost) = cost {
        let factor = cost[j];
        if factor != 0.0 {
            for (c, p) in cost.iter_mut().zip(pivot_row.iter()) {
                *c -= factor * p;
            }
            cost[j] = 0.0;
        }
    }
    basis[r] = j;
}
