//! Derivative-free local search: adaptive coordinate descent with rotating
//! directions (Rosenbrock's method).
//!
//! Each direction keeps its own step. A successful probe moves the point
//! and doubles the step; a failed one halves it and flips its sign. Once
//! every direction has both succeeded and failed, the basis is rotated so
//! that the first direction points along the net progress, which lets the
//! search follow curved valleys such as the neighbourhood of an equality
//! constraint enforced by a penalty.

/// Box bounds shared by every coordinate.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|&v| v >= self.lower && v <= self.upper)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SearchSettings {
    pub initial_step: f64,
    pub min_step: f64,
    pub bounds: Bounds,
}

/// Objective evaluations left; shared across the continuation stages of a
/// single start.
#[derive(Debug)]
pub(crate) struct Budget {
    pub remaining: u64,
    pub used: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Self {
            remaining: limit,
            used: 0,
        }
    }

    fn take(&mut self) -> bool {
        if self.remaining == 0 {
            return false;
        }
        self.remaining -= 1;
        self.used += 1;
        true
    }

    pub fn exhausted(&self) -> bool {
        self.remaining == 0
    }
}

const EXPAND: f64 = 2.0;
const SHRINK: f64 = 0.5;

/// Minimizes `f` from `x0` (which must lie inside the bounds). Points
/// outside the bounds count as failures without being evaluated.
pub(crate) fn minimize<F>(
    f: &mut F,
    x0: Vec<f64>,
    settings: &SearchSettings,
    budget: &mut Budget,
) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    if !budget.take() {
        return (x.clone(), f(&x));
    }
    let mut fx = f(&x);

    let mut dirs: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut steps = vec![settings.initial_step; n];
    let mut progress = vec![0.0; n];
    let mut succeeded = vec![false; n];
    let mut failed = vec![false; n];
    let mut trial = vec![0.0; n];

    loop {
        let mut any_success = false;
        for i in 0..n {
            if steps[i].abs() < settings.min_step {
                continue;
            }
            for (t, (xj, dj)) in trial.iter_mut().zip(x.iter().zip(&dirs[i])) {
                *t = xj + steps[i] * dj;
            }
            let improved = settings.bounds.contains(&trial) && {
                if !budget.take() {
                    return (x, fx);
                }
                let ft = f(&trial);
                if ft < fx {
                    x.copy_from_slice(&trial);
                    fx = ft;
                    true
                } else {
                    false
                }
            };
            if improved {
                progress[i] += steps[i];
                steps[i] *= EXPAND;
                succeeded[i] = true;
                any_success = true;
            } else {
                steps[i] *= -SHRINK;
                failed[i] = true;
            }
        }

        if steps.iter().all(|s| s.abs() < settings.min_step) {
            return (x, fx);
        }

        let stage_done = succeeded.iter().zip(&failed).all(|(s, f)| *s && *f);
        if stage_done || (!any_success && progress.iter().any(|p| *p != 0.0)) {
            if let Some(rotated) = rotate(&dirs, &progress) {
                dirs = rotated;
                for s in steps.iter_mut() {
                    *s = s.abs().max(settings.min_step);
                }
            }
            progress.iter_mut().for_each(|p| *p = 0.0);
            succeeded.iter_mut().for_each(|s| *s = false);
            failed.iter_mut().for_each(|s| *s = false);
        }
    }
}

/// Gram–Schmidt on `a_i = Σ_{j≥i} λ_j d_j`. Returns `None` when the new
/// basis would be degenerate.
fn rotate(dirs: &[Vec<f64>], progress: &[f64]) -> Option<Vec<Vec<f64>>> {
    let n = dirs.len();
    let mut a: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
    let mut acc = vec![0.0; n];
    for i in (0..n).rev() {
        for (c, d) in acc.iter_mut().zip(&dirs[i]) {
            *c += progress[i] * d;
        }
        a[i].copy_from_slice(&acc);
    }

    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        // Directions without progress keep their old orientation.
        let mut v = if progress[i..].iter().all(|p| *p == 0.0) {
            dirs[i].clone()
        } else {
            a[i].clone()
        };
        for u in &out {
            let dot: f64 = v.iter().zip(u).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-10 {
            v = dirs[i].clone();
            for u in &out {
                let dot: f64 = v.iter().zip(u).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-10 {
                return None;
            }
            v.iter_mut().for_each(|x| *x /= norm);
        } else {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        out.push(v);
    }
    Some(out)
}
