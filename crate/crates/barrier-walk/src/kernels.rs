//! Numerically stable building blocks for the solver coefficients.
//!
//! Every ratio of the form `(1 - rho^a) / (1 - rho^b)` that appears in the
//! arrival and time systems is rewritten in terms of the partial geometric
//! sum `g_m(rho) = 1 + rho + ... + rho^(m-1)` before evaluation:
//!
//! ```text
//! (1 - rho^a)   / (1 - rho^(n+1)) = g_a / g_(n+1)
//! (1 - rho)rho^n/ (1 - rho^(n+1)) = rho^n / g_(n+1)
//! rho(1 - rho^n)/ (1 - rho^(n+1)) = rho * g_n / g_(n+1)
//! (rho^k - 1)   / (p - q)         = g_k / q
//! ```
//!
//! `g_m(1) = m` exactly, so the driftless case needs no separate branch:
//! the removable singularity at `rho = 1` disappears from every formula.
//! The drift-dependent exit-time weights factor the same way through
//! [`weighted_geom`], [`cum_geom_sum`] and [`exit_weight`], all of which
//! are sums of nonnegative terms and therefore free of cancellation.
//!
//! The module also carries the small dense linear solver used for the
//! barrier systems.

use thiserror::Error;

/// Below this distance from `rho = 1` the closed form `(1-rho^m)/(1-rho)`
/// is abandoned for direct summation or a series around 1.
const NEAR_ONE: f64 = 1e-8;

/// Direct summation bound inside the near-one window; larger `m` switches
/// to the binomial series in `rho - 1`.
const DIRECT_SUM_LIMIT: usize = 10_000;

/// A pivot smaller than this times the row scale is treated as singular.
const PIVOT_TOLERANCE: f64 = 1e-13;

fn pw(rho: f64, k: usize) -> f64 {
    if k <= i32::MAX as usize {
        rho.powi(k as i32)
    } else {
        rho.powf(k as f64)
    }
}

fn pwi(rho: f64, k: i64) -> f64 {
    if k >= 0 {
        pw(rho, k as usize)
    } else {
        pw(rho, k.unsigned_abs() as usize).recip()
    }
}

/// Whether `rho^n` would overflow; beyond this every ratio switches to a
/// form rescaled by negative powers.
fn powers_overflow(n: usize, rho: f64) -> bool {
    rho > 1.0 && n as f64 * rho.ln() > 650.0
}

/// Partial geometric sum `g_m(rho) = sum_{k=0}^{m-1} rho^k`.
///
/// Exact value `m` at `rho = 1`; never divides by `1 - rho` when
/// `|1 - rho| < 1e-8`.
pub fn geom_sum(m: usize, rho: f64) -> f64 {
    debug_assert!(rho > 0.0, "drift ratio must be positive, got {rho}");
    if m == 0 {
        return 0.0;
    }
    let d = 1.0 - rho;
    if d == 0.0 {
        return m as f64;
    }
    if d.abs() < NEAR_ONE && (m as f64) * d.abs() < 0.5 {
        if m < DIRECT_SUM_LIMIT {
            // Kahan-compensated sum of m nonnegative terms.
            let (mut sum, mut comp, mut term) = (0.0f64, 0.0f64, 1.0f64);
            for _ in 0..m {
                let y = term - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
                term *= rho;
            }
            sum
        } else {
            // g_m(1 + delta) = sum_j C(m, j+1) delta^j with delta = rho - 1.
            let delta = -d;
            let mut term = m as f64;
            let mut sum = term;
            let mut j = 0usize;
            while term.abs() > f64::EPSILON * sum.abs() && j < 64 {
                term *= delta * (m as f64 - (j as f64 + 1.0)) / (j as f64 + 2.0);
                sum += term;
                j += 1;
            }
            sum
        }
    } else {
        (1.0 - pw(rho, m)) / d
    }
}

/// Drift-weighted sum `h_n(rho) = sum_{k=0}^{n} rho^k g_{n-k}(rho)`.
///
/// This is the stable factorization of the exit-time numerator
/// `[1 + n rho^(n+1) - (n+1) rho^n] / (1-rho)^2`; at `rho = 1` it equals
/// `n(n+1)/2`, which collapses the corresponding time coefficient to
/// `-n/(2p)`.
pub fn weighted_geom(n: usize, rho: f64) -> f64 {
    debug_assert!(rho > 0.0);
    // g_t = 1 + rho g_{t-1},  h_t = rho h_{t-1} + g_t : nonnegative terms only.
    let (mut g, mut h) = (0.0f64, 0.0f64);
    for _ in 1..=n {
        g = 1.0 + rho * g;
        h = rho * h + g;
    }
    h
}

/// Cumulative geometric sum `w_n(rho) = sum_{k=1}^{n} g_k(rho)`.
///
/// Mirror weight of [`weighted_geom`]: it factors the numerator
/// `[n - (n+1) rho + rho^(n+1)] / (1-rho)^2` and shares the `rho = 1`
/// value `n(n+1)/2`.
pub fn cum_geom_sum(n: usize, rho: f64) -> f64 {
    debug_assert!(rho > 0.0);
    let (mut g, mut w) = (0.0f64, 0.0f64);
    for _ in 1..=n {
        g = 1.0 + rho * g;
        w += g;
    }
    w
}

/// Interval exit-time weight
/// `sum_{j=0}^{b-1} sum_{i=0}^{a-1} rho^i g_{a+j-i}(rho)`.
///
/// Evaluated in O(a + b) as `b * h_a + a * rho^a * w_{b-1}`. The expected
/// time to leave an interval of `n` interior states from position `k`
/// (absorbing endpoints) is `exit_weight(n+1-k, k, rho) / (q * g_{n+1})`;
/// at `rho = 1` this reduces to the classic `k(n+1-k) / (2p)`.
pub fn exit_weight(a: usize, b: usize, rho: f64) -> f64 {
    if a == 0 || b == 0 {
        return 0.0;
    }
    b as f64 * weighted_geom(a, rho) + a as f64 * pw(rho, a) * cum_geom_sum(b - 1, rho)
}

/// Ratio `g_a(rho) / g_b(rho)` for `a <= b`, bounded for any `b` (the
/// outward-drift form is rescaled by `rho^-b`).
pub fn geom_ratio(a: usize, b: usize, rho: f64) -> f64 {
    debug_assert!(a <= b);
    if a == b {
        return 1.0;
    }
    if a == 0 {
        return 0.0;
    }
    if powers_overflow(b, rho) {
        let tiny = pwi(rho, -(b as i64));
        (pwi(rho, a as i64 - b as i64) - tiny) / (1.0 - tiny)
    } else {
        geom_sum(a, rho) / geom_sum(b, rho)
    }
}

/// Tail weight `rho^k g_{b-k}(rho) / g_b(rho)` for `k <= b`: the share
/// of an interval crossing that survives past position `k`. Bounded for
/// any `b`.
pub fn geom_tail(k: usize, b: usize, rho: f64) -> f64 {
    debug_assert!(k <= b);
    if k == b {
        return 0.0;
    }
    if powers_overflow(b, rho) {
        let tiny = pwi(rho, -(b as i64));
        (1.0 - pwi(rho, k as i64 - b as i64)) / (1.0 - tiny)
    } else {
        pw(rho, k) * geom_sum(b - k, rho) / geom_sum(b, rho)
    }
}

/// `rho^shift * g_a(rho)`, finite whenever the true product is. The
/// product form is cancellation-free and used unless `rho^a` alone would
/// overflow.
pub fn scaled_geom_sum(a: usize, shift: i64, rho: f64) -> f64 {
    if a == 0 {
        return 0.0;
    }
    if powers_overflow(a, rho) {
        (pwi(rho, shift + a as i64) - pwi(rho, shift)) / (rho - 1.0)
    } else {
        pwi(rho, shift) * geom_sum(a, rho)
    }
}

/// Drift weight `h_n / g_{n+1}` of an uphill interval entry in the time
/// system.
pub fn weighted_geom_over_full(n: usize, rho: f64) -> f64 {
    if powers_overflow(n + 1, rho) {
        (1.0 - (n as f64 + 1.0) * geom_tail(n, n + 1, rho)) / (1.0 - rho)
    } else {
        weighted_geom(n, rho) / geom_sum(n + 1, rho)
    }
}

/// Drift weight `w_n / g_{n+1}` of a downhill interval entry in the time
/// system.
pub fn cum_geom_over_full(n: usize, rho: f64) -> f64 {
    if powers_overflow(n + 1, rho) {
        (n as f64 * geom_ratio(1, n + 1, rho) - rho * geom_ratio(n, n + 1, rho)) / (1.0 - rho)
    } else {
        cum_geom_sum(n, rho) / geom_sum(n + 1, rho)
    }
}

/// Exit-time drift share `exit_weight(a, b) / g_{a+b}`.
pub fn exit_weight_over_full(a: usize, b: usize, rho: f64) -> f64 {
    if a == 0 || b == 0 {
        return 0.0;
    }
    if powers_overflow(a + b, rho) {
        (b as f64 - (a + b) as f64 * geom_tail(a, a + b, rho)) / (1.0 - rho)
    } else {
        exit_weight(a, b, rho) / geom_sum(a + b, rho)
    }
}

/// A square dense system `matrix * x = rhs`.
#[derive(Debug, Clone)]
pub struct DenseSystem {
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl DenseSystem {
    pub fn new(matrix: Vec<Vec<f64>>, rhs: Vec<f64>) -> Self {
        assert_eq!(matrix.len(), rhs.len(), "matrix and rhs dimensions differ");
        for row in &matrix {
            assert_eq!(row.len(), rhs.len(), "matrix is not square");
        }
        Self { matrix, rhs }
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    /// A pivot fell below `1e-13` times its row scale. For the barrier
    /// systems this signals a graph without any absorption mechanism.
    #[error("singular system: pivot in column {column} below tolerance (no absorption path?)")]
    Singular { column: usize },
}

/// Gaussian elimination with scaled partial pivoting.
pub fn linear_solve(system: &DenseSystem) -> Result<Vec<f64>, SolveError> {
    let n = system.dim();
    let mut a = system.matrix.clone();
    let mut b = system.rhs.clone();
    let mut scale: Vec<f64> = a
        .iter()
        .map(|row| row.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();

    for col in 0..n {
        let mut best = col;
        let mut best_ratio = -1.0;
        for row in col..n {
            if scale[row] == 0.0 {
                continue;
            }
            let ratio = a[row][col].abs() / scale[row];
            if ratio > best_ratio {
                best_ratio = ratio;
                best = row;
            }
        }
        if best != col {
            a.swap(col, best);
            b.swap(col, best);
            scale.swap(col, best);
        }
        let pivot = a[col][col];
        if scale[col] == 0.0 || pivot.abs() < PIVOT_TOLERANCE * scale[col] {
            return Err(SolveError::Singular { column: col });
        }
        let (pivot_rows, below) = a.split_at_mut(col + 1);
        let pivot_row = &pivot_rows[col];
        let b_pivot = b[col];
        for (offset, row) in below.iter_mut().enumerate() {
            let factor = row[col] / pivot;
            if factor == 0.0 {
                continue;
            }
            row[col] = 0.0;
            for (k, entry) in row.iter_mut().enumerate().skip(col + 1) {
                *entry -= factor * pivot_row[k];
            }
            b[col + 1 + offset] -= factor * b_pivot;
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for (k, xv) in x.iter().enumerate().skip(row + 1) {
            acc -= a[row][k] * xv;
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Definitional oracle: plain term-by-term summation.
    fn g_direct(m: usize, rho: f64) -> f64 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for _ in 0..m {
            sum += term;
            term *= rho;
        }
        sum
    }

    fn h_direct(n: usize, rho: f64) -> f64 {
        (0..=n).map(|k| pw(rho, k) * g_direct(n - k, rho)).sum()
    }

    fn exit_weight_direct(a: usize, b: usize, rho: f64) -> f64 {
        let mut sum = 0.0;
        for j in 0..b {
            for i in 0..a {
                sum += pw(rho, i) * g_direct(a + j - i, rho);
            }
        }
        sum
    }

    fn rel_close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()))
    }

    #[test]
    fn geom_sum_known_values() {
        assert_eq!(geom_sum(3, 1.0), 3.0);
        assert_eq!(geom_sum(2, 2.0), 3.0);
        // 1 + 0.5 + 0.25 + 0.125
        assert!((geom_sum(4, 0.5) - 1.875).abs() < 1e-15);
        assert_eq!(geom_sum(0, 0.7), 0.0);
    }

    #[test]
    fn geom_sum_near_one_paths() {
        // direct-summation window
        let rho = 1.0 + 3e-9;
        assert!(rel_close(geom_sum(50, rho), g_direct(50, rho), 1e-14));
        // series window
        let big = 20_000;
        let series = geom_sum(big, rho);
        let expected = big as f64 * (1.0 + (big as f64 - 1.0) / 2.0 * 3e-9);
        assert!(rel_close(series, expected, 1e-9));
    }

    #[test]
    fn weighted_geom_known_values() {
        assert_eq!(weighted_geom(2, 1.0), 3.0); // 0 + 1 + 2
        assert_eq!(weighted_geom(0, 0.3), 0.0);
        assert_eq!(weighted_geom(0, 2.5), 0.0);
        // frozen from the definitional sum: g_2(2) + 2*g_1(2) + 4*g_0(2) = 3 + 2 + 0
        assert_eq!(weighted_geom(2, 2.0), 5.0);
        assert_eq!(h_direct(2, 2.0), 5.0);
    }

    #[test]
    fn weighted_geom_matches_closed_form_away_from_one() {
        for &rho in &[0.25, 0.5, 0.9, 1.1, 2.0, 3.5] {
            for n in 0..12usize {
                let closed = (1.0 + n as f64 * pw(rho, n + 1) - (n as f64 + 1.0) * pw(rho, n))
                    / ((1.0 - rho) * (1.0 - rho));
                assert!(
                    rel_close(weighted_geom(n, rho), closed, 1e-12),
                    "h_{n}({rho})"
                );
            }
        }
    }

    #[test]
    fn cum_geom_sum_matches_closed_form_away_from_one() {
        for &rho in &[0.25, 0.5, 0.9, 1.1, 2.0, 3.5] {
            for n in 0..12usize {
                let closed = (n as f64 - (n as f64 + 1.0) * rho + pw(rho, n + 1))
                    / ((1.0 - rho) * (1.0 - rho));
                assert!(
                    rel_close(cum_geom_sum(n, rho), closed, 1e-12),
                    "w_{n}({rho})"
                );
            }
        }
        assert_eq!(cum_geom_sum(2, 1.0), 3.0);
    }

    #[test]
    fn exit_weight_matches_double_sum() {
        for &rho in &[0.4, 1.0, 1.0 + 1e-9, 1.7] {
            for a in 0..8usize {
                for b in 0..8usize {
                    assert!(
                        rel_close(exit_weight(a, b, rho), exit_weight_direct(a, b, rho), 1e-12),
                        "exit_weight({a},{b},{rho})"
                    );
                }
            }
        }
        // rho = 1 closed value a*b*(a+b)/2
        assert_eq!(exit_weight(3, 4, 1.0), 42.0);
    }

    #[test]
    fn rescaled_ratios_match_direct_forms() {
        for &rho in &[0.3, 0.8, 1.0, 1.0 + 1e-9, 1.3, 2.5] {
            for b in 1..=10usize {
                for a in 0..=b {
                    let direct = g_direct(a, rho) / g_direct(b, rho);
                    assert!(
                        rel_close(geom_ratio(a, b, rho), direct, 1e-12),
                        "geom_ratio({a},{b},{rho})"
                    );
                    let tail = pw(rho, a) * g_direct(b - a, rho) / g_direct(b, rho);
                    assert!(
                        rel_close(geom_tail(a, b, rho), tail, 1e-12),
                        "geom_tail({a},{b},{rho})"
                    );
                }
                for shift in -4i64..=4 {
                    let direct = pwi(rho, shift) * g_direct(b, rho);
                    assert!(
                        rel_close(scaled_geom_sum(b, shift, rho), direct, 1e-12),
                        "scaled_geom_sum({b},{shift},{rho})"
                    );
                }
                assert!(rel_close(
                    weighted_geom_over_full(b, rho),
                    h_direct(b, rho) / g_direct(b + 1, rho),
                    1e-12
                ));
                assert!(rel_close(
                    cum_geom_over_full(b, rho),
                    (1..=b).map(|k| g_direct(k, rho)).sum::<f64>() / g_direct(b + 1, rho),
                    1e-12
                ));
                for a in 1..=b {
                    assert!(rel_close(
                        exit_weight_over_full(a, b, rho),
                        exit_weight_direct(a, b, rho) / g_direct(a + b, rho),
                        1e-12
                    ));
                }
            }
        }
    }

    #[test]
    fn rescaled_ratios_survive_overflowing_powers() {
        // rho^b overflows, but every ratio stays finite with the right
        // asymptotics
        let rho = 3.0f64;
        let b = 5000;
        assert!(pw(rho, b).is_infinite());
        assert!(rel_close(geom_ratio(1, b, rho), 0.0, 1e-12));
        // g_{b-1}/g_b -> 1/rho
        assert!(rel_close(geom_ratio(b - 1, b, rho), 1.0 / rho, 1e-12));
        // rho^{b-1} g_1 / g_b -> (rho - 1)/rho
        assert!(rel_close(geom_tail(b - 1, b, rho), (rho - 1.0) / rho, 1e-12));
        assert!(geom_tail(3, b, rho).is_finite());
        // rho^{-b} g_b -> 1/(rho - 1)
        assert!(rel_close(
            scaled_geom_sum(b, -(b as i64), rho),
            1.0 / (rho - 1.0),
            1e-12
        ));
        // h_b / g_{b+1} -> (b - 1/(rho-1)) / (rho - 1), per the leading
        // terms of h and g
        let w = weighted_geom_over_full(b, rho);
        assert!(w.is_finite() && w > 0.0);
        let c = cum_geom_over_full(b, rho);
        assert!(rel_close(c, 1.0 / (rho - 1.0), 1e-6));
        let e = exit_weight_over_full(b / 2, b / 2, rho);
        assert!(e.is_finite() && e > 0.0);
    }

    #[test]
    fn linear_solve_known_values() {
        let sys = DenseSystem::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![2.0, 5.0]);
        assert_eq!(linear_solve(&sys).unwrap(), vec![2.0, 5.0]);

        let sys = DenseSystem::new(vec![vec![2.0, 0.0], vec![0.0, 4.0]], vec![2.0, 4.0]);
        assert_eq!(linear_solve(&sys).unwrap(), vec![1.0, 1.0]);

        // hand elimination: x = 2, y = 1
        let sys = DenseSystem::new(vec![vec![1.0, 1.0], vec![1.0, -1.0]], vec![3.0, 1.0]);
        let x = linear_solve(&sys).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn linear_solve_detects_singularity() {
        let sys = DenseSystem::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![1.0, 2.0]);
        assert!(matches!(
            linear_solve(&sys),
            Err(SolveError::Singular { .. })
        ));
        let sys = DenseSystem::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![0.0, 0.0]);
        assert!(linear_solve(&sys).is_err());
    }

    proptest! {
        #[test]
        fn geom_sum_product_identity(m in 0usize..200, rho in 1e-3f64..4.0) {
            prop_assume!((1.0 - rho).abs() >= 1e-6);
            let g = geom_sum(m, rho);
            let lhs = g * (1.0 - rho);
            let rhs = 1.0 - pw(rho, m);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn kernels_continuous_at_one(m in 1usize..100) {
            for &rho in &[1.0 - 1e-6, 1.0 + 1e-6] {
                let g = geom_sum(m, rho);
                prop_assert!(rel_close(g, m as f64, 1e-4));
                let h = weighted_geom(m, rho);
                prop_assert!(rel_close(h, m as f64 * (m as f64 + 1.0) / 2.0, 1e-4));
                let w = cum_geom_sum(m, rho);
                prop_assert!(rel_close(w, m as f64 * (m as f64 + 1.0) / 2.0, 1e-4));
            }
        }

        #[test]
        fn solver_residual_on_diagonally_dominant(
            n in 1usize..64,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut matrix = vec![vec![0.0f64; n]; n];
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                let mut off = 0.0;
                let row = &mut matrix[i];
                for (j, entry) in row.iter_mut().enumerate() {
                    if i != j {
                        *entry = rng.random_range(-1.0..1.0);
                        off += entry.abs();
                    }
                }
                row[i] = off + 1.0 + rng.random_range(0.0..1.0);
                rhs[i] = rng.random_range(-10.0..10.0);
            }
            let sys = DenseSystem::new(matrix.clone(), rhs.clone());
            let x = linear_solve(&sys).unwrap();
            for i in 0..n {
                let mut resid = -rhs[i];
                for j in 0..n {
                    resid += matrix[i][j] * x[j];
                }
                prop_assert!(resid.abs() <= 1e-10 * (1.0 + rhs[i].abs()));
            }
        }
    }
}
