//! Gate fidelities: Choi-state overlap, the superposition-input estimate,
//! closed-form expressions and the analytic fidelity optimum.

use num_complex::Complex64 as C64;

use crate::error::{precondition, Error, Result};
use crate::gate::{CMatrix, Channel, GMatrix};
use crate::numeric::{golden_section_max, Extremum};
use crate::physics::{reflection_shift_at, ResidualCoupling};

fn check_unitary_dim(channel: &dyn Channel, u: &CMatrix) -> Result<usize> {
    let d = channel.dim();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: u.nrows() });
    }
    Ok(d)
}

fn is_diagonal(m: &CMatrix) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == C64::new(0.0, 0.0)))
}

fn basis_op(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Choi state χ(ε) = (I⊗ε)(|φ⁺⟩⟨φ⁺|) with the reference system as the most
/// significant factor. Dimension d² × d².
pub fn choi_state(channel: &dyn Channel) -> CMatrix {
    let d = channel.dim();
    let mut chi = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let block = channel.apply(&basis_op(d, i, j)) / C64::new(d as f64, 0.0);
            chi.view_mut((i * d, j * d), (d, d)).copy_from(&block);
        }
    }
    chi
}

/// F_e = Tr[χ(ε) χ(U)], with χ(ε) renormalized to unit trace for
/// post-selected channels.
///
/// Evaluated block by block as (1/d²) Σ_ij ⟨i|U† ε(|i⟩⟨j|) U|j⟩ without
/// forming the d²-dimensional Choi state.
pub fn entanglement_fidelity(channel: &dyn Channel, u: &CMatrix) -> Result<f64> {
    let d = check_unitary_dim(channel, u)?;
    let (overlap, trace) = match channel.schur_kernel() {
        Some(k) if is_diagonal(u) => {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    s += k[(i, j)] * u[(i, i)].conj() * u[(j, j)];
                }
            }
            let tr: f64 = (0..d).map(|i| k[(i, i)].re).sum();
            (s.re, tr)
        }
        _ => {
            let ud = u.adjoint();
            let mut s = C64::new(0.0, 0.0);
            let mut tr = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let out = channel.apply(&basis_op(d, i, j));
                    if i == j {
                        tr += out.trace().re;
                    }
                    let left = ud.row(i) * &out;
                    s += (left * u.column(j))[(0, 0)];
                }
            }
            (s.re, tr)
        }
    };
    let f = overlap / (d * d) as f64;
    if channel.is_post_selected() {
        let norm = trace / d as f64;
        if norm <= 0.0 {
            return precondition("channel annihilates every input");
        }
        Ok(f / norm)
    } else {
        Ok(f)
    }
}

/// F_avg = (d F_e + 1)/(d + 1).
pub fn average_fidelity(f_e: f64, d: usize) -> f64 {
    let d = d as f64;
    (d * f_e + 1.0) / (d + 1.0)
}

/// Fidelity of the channel output for the equal-superposition input with the
/// ideal output U|a⁺⟩.
pub fn superposition_fidelity(channel: &dyn Channel, u: &CMatrix) -> Result<f64> {
    let d = check_unitary_dim(channel, u)?;
    let rho = CMatrix::from_element(d, d, C64::new(1.0 / d as f64, 0.0));
    let mut out = channel.apply(&rho);
    if channel.is_post_selected() {
        let tr = out.trace().re;
        if tr <= 0.0 {
            return precondition("channel annihilates the superposition input");
        }
        out /= C64::new(tr, 0.0);
    }
    let plus = nalgebra::DVector::from_element(d, C64::new((1.0 / d as f64).sqrt(), 0.0));
    let ideal = u * plus;
    Ok((ideal.adjoint() * out * ideal)[(0, 0)].re)
}

/// Closed-form fidelity of the Schur channel ρ ↦ ρ∘G for a CZ acting on
/// qubits `n` and `m` (phase flip where both are |0⟩):
/// F = Σ_ij G_ij s_i s_j / (2^N Tr G), s_k = −1 for k ∈ A and +1 otherwise.
pub fn analytic_local_fidelity_full(g: &GMatrix, n: usize, m: usize) -> Result<f64> {
    if n == m {
        return precondition("target qubits must differ");
    }
    let d = g.dim();
    let bits = d.trailing_zeros() as usize;
    if n >= bits || m >= bits {
        return Err(Error::DimensionMismatch { expected: n.max(m) + 1, got: bits });
    }
    let sign = |k: usize| if (k >> n & 1) == 0 && (k >> m & 1) == 0 { -1.0 } else { 1.0 };
    let mut s = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            s += g.matrix[(i, j)] * sign(i) * sign(j);
        }
    }
    let tr = g.matrix.trace().re;
    Ok(s.re / (d as f64 * tr))
}

/// ¼|r0 − 2r1 − r2|² / (|r0|² + 2|r1|² + |r2|²).
pub fn analytic_local_fidelity_simple(r0: C64, r1: C64, r2: C64) -> Result<f64> {
    let den = r0.norm_sqr() + 2.0 * r1.norm_sqr() + r2.norm_sqr();
    if den == 0.0 {
        return precondition("all reflection coefficients vanish");
    }
    Ok(0.25 * (r0 - 2.0 * r1 - r2).norm_sqr() / den)
}

/// Remote-gate fidelities (F_H, F_V) conditioned on the detected polarization
/// for identical cavities with reflections `r0` (empty) and `r1` (one atom).
pub fn analytic_remote_branches(r0: C64, r1: C64) -> Result<(f64, f64)> {
    let one = C64::new(1.0, 0.0);
    let two = C64::new(2.0, 0.0);
    let num_h = (r0 * r0 + 4.0 * r0 + 2.0 * r1 * r0 - r1 * r1 - two).norm_sqr();
    let den_h = (r0 * r0 + 2.0 * r0 - one).norm_sqr()
        + 2.0 * (r1 * r0 + r1 + r0 - one).norm_sqr()
        + (r1 * r1 + 2.0 * r1 - one).norm_sqr();
    let num_v = (r0 * r0 - 2.0 * r0 + r1 * r1 + 2.0 * r1 + two).norm_sqr();
    let den_v = (r0 * r0 + one).norm_sqr()
        + (r1 * r0 + r1 - r0 + one).norm_sqr()
        + (r1 * r0 + r0 - r1 + one).norm_sqr()
        + (r1 * r1 + one).norm_sqr();
    if den_h == 0.0 || den_v == 0.0 {
        return precondition("degenerate remote-gate branch");
    }
    Ok((0.25 * num_h / den_h, 0.25 * num_v / den_v))
}

/// ½(F_H + F_V).
pub fn analytic_remote_fidelity(r0: C64, r1: C64) -> Result<f64> {
    let (h, v) = analytic_remote_branches(r0, r1)?;
    Ok(0.5 * (h + v))
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !(ratio > 0.5 && ratio <= 1.0) {
        return precondition(format!(
            "loss ratio kappa_r/kappa = {ratio} outside (1/2, 1]: no fidelity optimum"
        ));
    }
    Ok(())
}

/// Cooperativity and coupling strength at the fidelity optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalCoupling {
    pub cooperativity: f64,
    pub g: f64,
}

/// C* = ρ/(1 − ρ) − 1 with ρ = κ_r/κ, and g* = √(C* γ κ).
pub fn optimum_cooperativity(kappa_r: f64, kappa: f64, gamma: f64) -> Result<OptimalCoupling> {
    let ratio = kappa_r / kappa;
    check_ratio(ratio)?;
    let c = ratio / (1.0 - ratio) - 1.0;
    Ok(OptimalCoupling { cooperativity: c, g: (c * gamma * kappa).sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalPerformance {
    pub fidelity: f64,
    pub success_probability: f64,
}

/// F_max and p_s* as functions of the loss ratio.
pub fn optimum_performance(ratio: f64) -> Result<OptimalPerformance> {
    check_ratio(ratio)?;
    let q = 7.0 * ratio * ratio - 4.0 * ratio + 1.0;
    let fidelity = 1.0 - 3.0 * (1.0 - ratio).powi(2) / (4.0 * q);
    let success_probability = q / (3.0 * ratio - 1.0).powi(2) * (1.0 - 2.0 * ratio).powi(2);
    Ok(OptimalPerformance { fidelity, success_probability })
}

/// Same as [`optimum_performance`] with the loss ratio (C+1)/(C+2).
pub fn optimum_performance_from_cooperativity(c: f64) -> Result<OptimalPerformance> {
    optimum_performance((c + 1.0) / (c + 2.0))
}

/// Loss ratio needed for a given optimal fidelity; inverse of the fidelity
/// branch of [`optimum_performance`].
pub fn required_loss_ratio(f: f64) -> Result<f64> {
    if !(f > 0.75 && f <= 1.0) {
        return precondition(format!("target fidelity {f} outside (3/4, 1]"));
    }
    let x = (f * (1.0 - f)).sqrt();
    Ok(1.0 - (20.0 * x + 48f64.sqrt() * (1.0 - f)) / (75f64.sqrt() + 28.0 * x))
}

/// 0.7528 × |µ₀/µ₁|² × 2γ/ω_q'.
pub fn qubit_splitting_floor(gamma: f64, splitting: f64, dipole_ratio_sq: f64) -> f64 {
    crate::constants::SPLITTING_FLOOR_CONSTANT * dipole_ratio_sq * 2.0 * gamma / splitting
}

/// Optimal local fidelity at loss ratio `ratio` when the empty-cavity
/// reflection carries the residual-coupling shift (lossless mirror model,
/// cooperativity at its optimum).
pub fn splitting_limited_fidelity(ratio: f64, gamma: f64, residual: &ResidualCoupling) -> Result<f64> {
    check_ratio(ratio)?;
    let c = ratio / (1.0 - ratio) - 1.0;
    let eps = residual.strength(gamma);
    let r0 = C64::new(1.0 - 2.0 * ratio, 0.0) + reflection_shift_at(ratio, eps);
    let r1 = C64::new(1.0 - 2.0 * ratio / (1.0 + c), 0.0);
    let r2 = C64::new(1.0 - 2.0 * ratio / (1.0 + 2.0 * c), 0.0);
    analytic_local_fidelity_simple(r0, r1, r2)
}

/// Best fidelity reachable over all loss ratios when the residual coupling
/// is present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingCeiling {
    pub loss_ratio: f64,
    pub infidelity: f64,
}

pub fn locate_splitting_ceiling(gamma: f64, residual: &ResidualCoupling) -> SplittingCeiling {
    // Search in x = −ln(1 − ρ) so the region near ρ → 1 is resolved.
    let f = |x: f64| splitting_limited_fidelity(1.0 - (-x).exp(), gamma, residual).unwrap_or(0.0);
    let Extremum { x, value } = golden_section_max(f, (2.0f64).ln() + 1e-3, 25.0, 1e-10);
    SplittingCeiling { loss_ratio: 1.0 - (-x).exp(), infidelity: 1.0 - value }
}

/// Operating point where the loss-limited optimum fidelity meets the
/// splitting-limited ceiling: lowering cavity losses further gains nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedOptimum {
    pub ceiling: SplittingCeiling,
    pub loss_ratio: f64,
    pub cooperativity: f64,
    pub fidelity: f64,
}

pub fn splitting_matched_optimum(gamma: f64, residual: &ResidualCoupling) -> Result<MatchedOptimum> {
    let ceiling = locate_splitting_ceiling(gamma, residual);
    let fidelity = 1.0 - ceiling.infidelity;
    let loss_ratio = required_loss_ratio(fidelity)?;
    Ok(MatchedOptimum {
        ceiling,
        loss_ratio,
        cooperativity: loss_ratio / (1.0 - loss_ratio) - 1.0,
        fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn average_fidelity_examples() {
        assert_eq!(average_fidelity(1.0, 4), 1.0);
        assert_abs_diff_eq!(average_fidelity(0.0, 4), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(average_fidelity(0.9, 4), 0.92, epsilon = 1e-15);
    }

    #[test]
    fn simple_local_examples() {
        let one = C64::new(1.0, 0.0);
        assert_abs_diff_eq!(analytic_local_fidelity_simple(-one, one, one).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(analytic_local_fidelity_simple(one, one, one).unwrap(), 0.25, epsilon = 1e-15);
        let r = |n: f64| C64::new(1.0 - 5.0 / (2.7 + n * 23.4), 0.0);
        let f = analytic_local_fidelity_simple(r(0.0), r(1.0), r(2.0)).unwrap();
        assert_abs_diff_eq!(f, 0.99803, epsilon = 5e-6);
        let z = C64::new(0.0, 0.0);
        assert!(analytic_local_fidelity_simple(z, z, z).is_err());
    }

    #[test]
    fn remote_analytic_limits() {
        let one = C64::new(1.0, 0.0);
        assert_abs_diff_eq!(analytic_remote_fidelity(-one, one).unwrap(), 1.0, epsilon = 1e-15);
        for r0 in [-0.9, -0.5, -0.2, 0.3] {
            let f = analytic_remote_fidelity(C64::new(r0, 0.0), C64::new(-r0, 0.0)).unwrap();
            let expect = 0.25 * (r0 - 1.0f64).powi(4) / (r0 * r0 + 1.0).powi(2);
            assert_abs_diff_eq!(f, expect, epsilon = 1e-14);
        }
    }

    #[test]
    fn optimum_examples() {
        let o = optimum_cooperativity(0.9696, 1.0, 2.6).unwrap();
        assert_abs_diff_eq!(o.cooperativity, 30.89, epsilon = 0.01);
        let o = optimum_cooperativity(4.0, 4.2, 2.6).unwrap();
        assert_abs_diff_eq!(o.cooperativity, 19.0, epsilon = 1e-10);
        assert_abs_diff_eq!(o.g, (19.0f64 * 2.6 * 4.2).sqrt(), epsilon = 1e-12);
        assert!(optimum_cooperativity(1.0, 2.0, 2.6).is_err());
        let p = optimum_performance(1.0).unwrap();
        assert_eq!((p.fidelity, p.success_probability), (1.0, 1.0));
        assert_abs_diff_eq!(optimum_performance(0.9696).unwrap().fidelity, 0.99981, epsilon = 5e-6);
        assert_abs_diff_eq!(optimum_performance(4.0 / 4.2).unwrap().fidelity, 0.99952, epsilon = 5e-6);
        let c = optimum_performance_from_cooperativity(19.0).unwrap();
        assert_eq!(c, optimum_performance(20.0 / 21.0).unwrap());
    }

    #[test]
    fn loss_ratio_inverse() {
        assert_abs_diff_eq!(required_loss_ratio(1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(required_loss_ratio(0.9998).unwrap(), 0.9696, epsilon = 2e-3);
        assert!(required_loss_ratio(0.7).is_err());
        assert!(required_loss_ratio(1.2).is_err());
    }

    #[test]
    fn splitting_floor_examples() {
        assert_eq!(qubit_splitting_floor(2.6, f64::INFINITY, 1.0), 0.0);
        let cs = ResidualCoupling::cesium();
        let floor = qubit_splitting_floor(2.6, cs.splitting, 3.0 / 7.0);
        assert_abs_diff_eq!(floor, 1.88e-4, epsilon = 0.01e-4);
    }

    #[test]
    fn cesium_ceiling_and_matched_point() {
        let cs = ResidualCoupling::cesium();
        let m = splitting_matched_optimum(2.6, &cs).unwrap();
        assert!((m.ceiling.infidelity - 1.8758e-4).abs() < 1e-7, "{m:?}");
        assert!((m.loss_ratio - 0.96957).abs() < 1e-5);
        assert!((m.cooperativity - 30.86).abs() < 0.01);
        let p = optimum_performance(m.loss_ratio).unwrap();
        assert!((p.fidelity - m.fidelity).abs() < 1e-10);
    }
}
