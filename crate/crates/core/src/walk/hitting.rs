use super::linalg::{solve, Matrix};
use super::{AugmentedGraph, StepCounting, WalkError, WalkParams};

/// Row-stochastic transition matrix of the walk; the exit row is absorbing.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    matrix: Matrix,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.matrix.row(i)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.matrix
    }
}

pub fn transition_matrix(
    aug: &AugmentedGraph,
    params: &WalkParams,
) -> Result<TransitionMatrix, WalkError> {
    let n = aug.n();
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        if i == aug.exit_index() {
            m[(i, i)] = 1.0;
            continue;
        }
        let out = aug.successors(i);
        if out.is_empty() {
            return Err(WalkError::Construction(format!(
                "state {} has no outgoing advance edge",
                aug.states()[i].label()
            )));
        }
        m[(i, i)] += params.stay_prob();
        m[(i, aug.root_index())] += params.restart_prob();
        let share = params.advance_prob() / out.len() as f64;
        for &j in out {
            m[(i, j)] += share;
        }
    }
    Ok(TransitionMatrix { matrix: m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Absorbing,
    Laplacian,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Absorbing => "absorbing",
            Method::Laplacian => "laplacian",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HittingTimeReport {
    pub method: Method,
    pub source: usize,
    pub target: usize,
    /// Estimate from `source` to `target`.
    pub value: f64,
    /// Per-state solution vector (empty for Monte Carlo). For the absorbing
    /// method this is the expected steps from every state to the target;
    /// for the Laplacian method it is the grounded potential `x`.
    pub per_state: Vec<f64>,
    pub stderr: Option<f64>,
    pub walks: Option<u64>,
    /// `‖Lx − b‖∞` for the Laplacian method.
    pub residual: Option<f64>,
}

/// Expected steps from every state until first reaching `target` under
/// the chain `p`, treating `target` as absorbing.
fn hitting_times_to(
    p: &Matrix,
    target: usize,
    counting: StepCounting,
) -> Result<Vec<f64>, WalkError> {
    let n = p.n();
    let transient: Vec<usize> = (0..n).filter(|&i| i != target).collect();
    let mut a = Matrix::zeros(transient.len());
    let mut rhs = vec![1.0; transient.len()];
    for (r, &i) in transient.iter().enumerate() {
        let leave = 1.0 - p[(i, i)];
        for (c, &j) in transient.iter().enumerate() {
            let pij = match counting {
                StepCounting::EveryStep => p[(i, j)],
                StepCounting::MovesOnly if i == j => 0.0,
                StepCounting::MovesOnly => p[(i, j)] / leave,
            };
            a[(r, c)] = if r == c { 1.0 - pij } else { -pij };
        }
        if counting == StepCounting::MovesOnly && leave <= 0.0 {
            rhs[r] = f64::INFINITY;
        }
    }
    let h = solve(&a, &rhs)?;
    let mut out = vec![0.0; n];
    for (r, &i) in transient.iter().enumerate() {
        out[i] = h[r];
    }
    if out.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(WalkError::Singular("non-finite hitting time".into()));
    }
    Ok(out)
}

/// Expected steps from every state to the exit, by first-step analysis on
/// the absorbing chain. Staying in place counts as a step.
pub fn hitting_time_absorbing(
    aug: &AugmentedGraph,
    params: &WalkParams,
) -> Result<HittingTimeReport, WalkError> {
    hitting_time_absorbing_counted(aug, params, StepCounting::EveryStep)
}

pub fn hitting_time_absorbing_counted(
    aug: &AugmentedGraph,
    params: &WalkParams,
    counting: StepCounting,
) -> Result<HittingTimeReport, WalkError> {
    let p = transition_matrix(aug, params)?;
    let h = hitting_times_to(p.as_matrix(), aug.exit_index(), counting)?;
    Ok(HittingTimeReport {
        method: Method::Absorbing,
        source: aug.root_index(),
        target: aug.exit_index(),
        value: h[aug.root_index()],
        per_state: h,
        stderr: None,
        walks: None,
        residual: None,
    })
}

/// Solves `L x = b` with `x_t = 0`, `b_s = 1`, `b_t = -1` for a symmetric
/// weight matrix, where `L = D - W`. Returns `(x, ‖Lx − b‖∞)`.
pub fn grounded_solve(weights: &Matrix, s: usize, t: usize) -> Result<(Vec<f64>, f64), WalkError> {
    let n = weights.n();
    if s == t || s >= n || t >= n {
        return Err(WalkError::InvalidArgument(format!(
            "need distinct s, t < {n}, got {s}, {t}"
        )));
    }
    let mut lap = Matrix::zeros(n);
    for i in 0..n {
        let degree: f64 = weights.row(i).iter().sum();
        for j in 0..n {
            lap[(i, j)] = if i == j {
                degree - weights[(i, i)]
            } else {
                -weights[(i, j)]
            };
        }
    }
    let mut b = vec![0.0; n];
    b[s] = 1.0;
    b[t] = -1.0;
    let keep: Vec<usize> = (0..n).filter(|&i| i != t).collect();
    let reduced = lap.submatrix(&keep);
    let rhs: Vec<f64> = keep.iter().map(|&i| b[i]).collect();
    let y = solve(&reduced, &rhs)?;
    let mut x = vec![0.0; n];
    for (r, &i) in keep.iter().enumerate() {
        x[i] = y[r];
    }
    let lx = lap.mul_vec(&x);
    let residual = lx
        .iter()
        .zip(&b)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((x, residual))
}

/// Grounded Laplacian solve on the symmetrized advance graph with unit
/// edge weights, `W = (A + Aᵀ) / 2`.
///
/// This is a potential, not a directed hitting time: the augmented walk is
/// not reversible, so it is reported alongside the absorbing solve rather
/// than in place of it.
pub fn grounded_laplacian_solve(
    aug: &AugmentedGraph,
    s: usize,
    t: usize,
) -> Result<HittingTimeReport, WalkError> {
    let n = aug.n();
    let mut w = Matrix::zeros(n);
    for i in 0..n {
        for &j in aug.successors(i) {
            if i != j {
                w[(i, j)] += 0.5;
                w[(j, i)] += 0.5;
            }
        }
    }
    let (x, residual) = grounded_solve(&w, s, t)?;
    Ok(HittingTimeReport {
        method: Method::Laplacian,
        source: s,
        target: t,
        value: x[s],
        per_state: x,
        stderr: None,
        walks: None,
        residual: Some(residual),
    })
}

/// Number of states whose expected first-visit time from the root is at
/// most `budget` steps.
///
/// Each state is taken as the target in turn. Reaching the exit ends the
/// episode, so for this count the exit restarts the walk at the root
/// (staying with `stay_prob`) instead of absorbing it.
pub fn expected_reachable(
    aug: &AugmentedGraph,
    params: &WalkParams,
    budget: f64,
) -> Result<usize, WalkError> {
    if budget.is_nan() || budget < 0.0 {
        return Err(WalkError::InvalidArgument(format!(
            "budget must be >= 0, got {budget}"
        )));
    }
    let mut p = transition_matrix(aug, params)?.matrix;
    let exit = aug.exit_index();
    let root = aug.root_index();
    p[(exit, exit)] = params.stay_prob();
    p[(exit, root)] += 1.0 - params.stay_prob();
    let mut count = 1; // the root itself, at time 0
    for target in (0..aug.n()).filter(|&t| t != root) {
        let h = hitting_times_to(&p, target, StepCounting::EveryStep)?;
        if h[root] <= budget {
            count += 1;
        }
    }
    Ok(count)
}
