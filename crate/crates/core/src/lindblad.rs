//! Lindblad generator for an oscillator with diagonal Hamiltonian coupled to a
//! thermal bath, and the integrators that propagate it.
//!
//! With jump operator `a` and a diagonal `H` the generator only couples
//! `ρ_{mn}` to `ρ_{m±1,n±1}`, so the right-hand side is evaluated in O(D²)
//! directly on the matrix; the D²×D² superoperator is assembled only on
//! request (and for the dense exponential propagator on small spaces).

use ndarray::Array2;
use num_complex::Complex;
use num_traits::Zero;

use crate::error::{domain, Error, Result};
use crate::fock::{annihilation_op, DensityMatrix, FockSpace, Operator};
use crate::hamiltonian::DiagonalHamiltonian;
use crate::linalg::{self, CMatrix};
use crate::observables::{observe_matrix, ObservableRecord};
use crate::scalar::Real;

/// Largest Fock dimension accepted by [`expm_propagate`].
pub const EXPM_MAX_DIM: usize = 12;

/// Trace drift that aborts an integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// Top-level population that aborts an integration.
pub const TOP_POPULATION_LIMIT: f64 = 1e-6;

/// Upper bound on `dt · Ω_max` accepted by [`rk4_evolve`].
pub const MAX_STEP_RATIO: f64 = 0.5;

/// Coupling to the bath. `full_equation` adds the thermal absorption term
/// `γN(a†ρa − ½{aa†, ρ})`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DampingSpec<R: Real> {
    pub gamma: R,
    pub n_thermal: R,
    pub full_equation: bool,
}

impl<R: Real> DampingSpec<R> {
    pub fn new(gamma: R, n_thermal: R, full_equation: bool) -> Result<Self> {
        if !(gamma >= R::zero()) || !gamma.is_finite() {
            return domain(format!("damping rate must be non-negative, got {gamma}"));
        }
        if !(n_thermal >= R::zero()) || !n_thermal.is_finite() {
            return domain(format!("thermal occupation must be non-negative, got {n_thermal}"));
        }
        Ok(Self { gamma, n_thermal, full_equation })
    }

    pub fn none() -> Self {
        Self { gamma: R::zero(), n_thermal: R::zero(), full_equation: false }
    }

    /// Zero-temperature emission only.
    pub fn decay(gamma: R) -> Result<Self> {
        Self::new(gamma, R::zero(), false)
    }

    pub fn emission_rate(&self) -> R {
        self.gamma * (self.n_thermal + R::one())
    }

    pub fn absorption_rate(&self) -> R {
        if self.full_equation {
            self.gamma * self.n_thermal
        } else {
            R::zero()
        }
    }

    pub fn is_dissipative(&self) -> bool {
        self.emission_rate() > R::zero() || self.absorption_rate() > R::zero()
    }
}

/// The generator `L` with `dρ/dt = L ρ`.
#[derive(Clone, Debug)]
pub struct Liouvillian<R: Real> {
    hamiltonian: DiagonalHamiltonian<R>,
    damping: DampingSpec<R>,
    dim: usize,
    // dρ_mn = diag_mn ρ_mn + down_mn ρ_{m+1,n+1} + up_mn ρ_{m−1,n−1}, row-major.
    diag: Vec<Complex<R>>,
    down: Vec<R>,
    up: Vec<R>,
}

pub fn build_liouvillian<R: Real>(h: &DiagonalHamiltonian<R>, damping: DampingSpec<R>) -> Liouvillian<R> {
    let d = h.space().dim();
    let e = h.energies();
    let g_down = damping.emission_rate();
    let g_up = damping.absorption_rate();
    let half = R::lit(0.5);
    let idx = |m: usize| R::from_usize_lossy(m);
    // diagonal of the truncated a a†: (1, 2, …, D−1, 0)
    let aad = |m: usize| if m + 1 < d { idx(m + 1) } else { R::zero() };

    let mut diag = vec![Complex::zero(); d * d];
    let mut down = vec![R::zero(); d * d];
    let mut up = vec![R::zero(); d * d];
    for m in 0..d {
        for n in 0..d {
            let k = m * d + n;
            let decay = g_down * (idx(m) + idx(n)) * half + g_up * (aad(m) + aad(n)) * half;
            diag[k] = Complex::new(-decay, -(e[m] - e[n]));
            if m + 1 < d && n + 1 < d {
                down[k] = g_down * (idx(m + 1) * idx(n + 1)).sqrt();
            }
            if m > 0 && n > 0 {
                up[k] = g_up * (idx(m) * idx(n)).sqrt();
            }
        }
    }
    Liouvillian { hamiltonian: h.clone(), damping, dim: d, diag, down, up }
}

impl<R: Real> Liouvillian<R> {
    pub fn space(&self) -> FockSpace {
        self.hamiltonian.space()
    }

    pub fn hamiltonian(&self) -> &DiagonalHamiltonian<R> {
        &self.hamiltonian
    }

    pub fn damping(&self) -> DampingSpec<R> {
        self.damping
    }

    /// `L ρ` for any D×D matrix.
    pub fn apply(&self, rho: &CMatrix<R>) -> Result<CMatrix<R>> {
        let d = self.dim;
        if rho.dim() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, found: rho.nrows() });
        }
        let mut out = Array2::zeros((d, d));
        for m in 0..d {
            for n in 0..d {
                let k = m * d + n;
                let mut v = self.diag[k] * rho[[m, n]];
                if m + 1 < d && n + 1 < d {
                    v += rho[[m + 1, n + 1]] * self.down[k];
                }
                if m > 0 && n > 0 {
                    v += rho[[m - 1, n - 1]] * self.up[k];
                }
                out[[m, n]] = v;
            }
        }
        Ok(out)
    }

    /// The D²×D² matrix acting on column-stacked `vec(ρ)`.
    pub fn superoperator(&self) -> CMatrix<R> {
        let a = annihilation_op::<R>(self.space());
        superoperator_from_operators(&self.hamiltonian.operator(), &a, self.damping)
            .expect("operators share the Liouvillian's space")
    }

    /// Fastest rate in the generator: spectral spread plus the largest decay rate.
    pub fn omega_max(&self) -> R {
        let d = R::from_usize_lossy(self.dim);
        self.hamiltonian.spectral_spread() + (self.damping.emission_rate() + self.damping.absorption_rate()) * d
    }

    /// `min(2π / (20 Ω_max), T_cl / 200)`.
    pub fn default_dt(&self, t_cl: R) -> R {
        let by_rate = R::TAU() / (R::lit(20.0) * self.omega_max());
        by_rate.min(t_cl / R::lit(200.0))
    }

    // Dissipative part of L ρ (decay plus the ρ_{m±1,n±1} couplings), upper
    // triangle only; the generator maps the upper triangle onto itself.
    #[inline]
    fn couple_upper(&self, rho: &[Complex<R>], out: &mut [Complex<R>]) {
        let d = self.dim;
        for m in 0..d {
            let row = m * d;
            for n in m..d {
                let k = row + n;
                let mut v = rho[k] * self.diag[k].re;
                if n + 1 < d {
                    v += rho[k + d + 1] * self.down[k];
                }
                if m > 0 {
                    v += rho[k - d - 1] * self.up[k];
                }
                out[k] = v;
            }
        }
    }
}

/// Builds the Lindblad superoperator from explicit `H` and jump operator `a`
/// via `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)` with column stacking.
pub fn superoperator_from_operators<R: Real>(
    h: &Operator<R>,
    a: &Operator<R>,
    damping: DampingSpec<R>,
) -> Result<CMatrix<R>> {
    let d = h.space().dim();
    if a.space().dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: a.space().dim() });
    }
    let id = linalg::identity::<R>(d);
    let hm = h.matrix();
    let am = a.matrix();
    let adag = linalg::adjoint(am);
    let tr = |m: &CMatrix<R>| m.t().to_owned();
    let conj = |m: &CMatrix<R>| m.mapv(|z| z.conj());
    let mi = Complex::new(R::zero(), -R::one());
    let half = Complex::from(R::lit(0.5));

    let mut l = (linalg::kron(&id, hm) - linalg::kron(&tr(hm), &id)).mapv(|z| z * mi);

    let ge = Complex::from(damping.emission_rate());
    if !ge.is_zero() {
        let n_op = adag.dot(am);
        let jump = linalg::kron(&conj(am), am);
        let anti = linalg::kron(&id, &n_op) + linalg::kron(&tr(&n_op), &id);
        l = l + (jump - anti.mapv(|z| z * half)).mapv(|z| z * ge);
    }
    let ga = Complex::from(damping.absorption_rate());
    if !ga.is_zero() {
        let m_op = am.dot(&adag);
        let jump = linalg::kron(&conj(&adag), &adag);
        let anti = linalg::kron(&id, &m_op) + linalg::kron(&tr(&m_op), &id);
        l = l + (jump - anti.mapv(|z| z * half)).mapv(|z| z * ga);
    }
    Ok(l)
}

/// Receives the state at every recorded time.
pub trait Observer<R: Real> {
    fn observe(&mut self, t: R, rho: &CMatrix<R>);
}

impl<R: Real, F: FnMut(R, &CMatrix<R>)> Observer<R> for F {
    fn observe(&mut self, t: R, rho: &CMatrix<R>) {
        self(t, rho)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions<R: Real> {
    /// Step size; `None` picks [`Liouvillian::default_dt`] at the state's mean excitation.
    pub dt: Option<R>,
    /// Record observables every this many steps (the final step is always recorded).
    pub record_every: usize,
    /// Keep a full density matrix every this many records.
    pub snapshot_every: Option<usize>,
}

impl<R: Real> Default for EvolveOptions<R> {
    fn default() -> Self {
        Self { dt: None, record_every: 1, snapshot_every: None }
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot<R: Real> {
    pub t: R,
    pub state: DensityMatrix<R>,
}

#[derive(Clone, Debug)]
pub struct Trajectory<R: Real> {
    pub dt: R,
    pub records: Vec<ObservableRecord<R>>,
    pub snapshots: Vec<Snapshot<R>>,
    pub final_state: DensityMatrix<R>,
}

impl<R: Real> Trajectory<R> {
    pub fn times(&self) -> Vec<R> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn abs_a(&self) -> Vec<R> {
        self.records.iter().map(|r| r.a.norm()).collect()
    }
}

struct Recorder<R: Real> {
    records: Vec<ObservableRecord<R>>,
    snapshots: Vec<Snapshot<R>>,
    snapshot_every: Option<usize>,
    space: FockSpace,
}

impl<R: Real> Recorder<R> {
    fn record(&mut self, t: R, rho: &CMatrix<R>, observers: &mut [&mut dyn Observer<R>]) {
        if let Some(every) = self.snapshot_every {
            if every > 0 && self.records.len() % every == 0 {
                self.snapshots
                    .push(Snapshot { t, state: DensityMatrix::from_parts_unchecked(self.space, rho.clone()) });
            }
        }
        self.records.push(observe_matrix(t, rho));
        for obs in observers.iter_mut() {
            obs.observe(t, rho);
        }
    }
}

fn mirror_upper<R: Real>(rho: &mut [Complex<R>], d: usize) {
    for m in 0..d {
        rho[m * d + m].im = R::zero();
        for n in m + 1..d {
            rho[n * d + m] = rho[m * d + n].conj();
        }
    }
}

fn initial_state<R: Real>(l: &Liouvillian<R>, rho0: &DensityMatrix<R>) -> Result<CMatrix<R>> {
    l.space().check(&rho0.space())?;
    let half = R::lit(0.5);
    let m = rho0.matrix();
    let h = (m + &linalg::adjoint(m)).mapv(|z| z * half);
    Ok(h.as_standard_layout().into_owned())
}

fn mean_level<R: Real>(rho: &CMatrix<R>) -> usize {
    let n: R = (0..rho.nrows()).fold(R::zero(), |acc, i| acc + rho[[i, i]].re * R::from_usize_lossy(i));
    n.round().to_usize().unwrap_or(0)
}

/// Fourth-order Runge–Kutta integration of `dρ/dt = Lρ` on `[0, t_final]`.
///
/// The coherent phases `e^{−i(E_m−E_n)t}` are integrated exactly and classical
/// RK4 is applied to the dissipator in that rotating frame (Lawson scheme). Plain RK4 damps a coherence ρ_mn by a
/// factor that is not a positive-definite function of `m − n` and drives
/// eigenvalues of a pure state below zero; the exponential form does not.
/// Populations carry no phase, so the trace is conserved as in plain RK4.
///
/// The step is shrunk so an integer number of steps lands on `t_final`. The
/// state is projected onto Hermitian matrices after every step. Fails with
/// [`Error::Stability`] when the trace drifts by more than
/// [`TRACE_DRIFT_LIMIT`] and with [`Error::Truncation`] when the population of
/// the last Fock level grows by more than [`TOP_POPULATION_LIMIT`].
pub fn rk4_evolve<R: Real>(
    l: &Liouvillian<R>,
    rho0: &DensityMatrix<R>,
    t_final: R,
    opts: EvolveOptions<R>,
    observers: &mut [&mut dyn Observer<R>],
) -> Result<Trajectory<R>> {
    if !(t_final >= R::zero()) || !t_final.is_finite() {
        return domain(format!("final time must be non-negative, got {t_final}"));
    }
    if opts.record_every == 0 {
        return domain("record_every must be at least 1");
    }
    let d = l.dim;
    let mut rho = initial_state(l, rho0)?;
    let dt_req = match opts.dt {
        Some(dt) => dt,
        None => l.default_dt(l.hamiltonian.classical_period(mean_level(&rho))),
    };
    if !(dt_req > R::zero()) || !dt_req.is_finite() {
        return domain(format!("time step must be positive, got {dt_req}"));
    }
    let ratio = dt_req * l.omega_max();
    if ratio > R::lit(MAX_STEP_RATIO) {
        return domain(format!(
            "time step {dt_req} gives dt·Ω_max = {ratio:.3} > {MAX_STEP_RATIO}; RK4 would be unstable"
        ));
    }
    let steps = (t_final / dt_req).ceil().to_usize().unwrap_or(0);
    let dt = if steps == 0 { dt_req } else { t_final / R::from_usize_lossy(steps) };

    let mut recorder = Recorder {
        records: Vec::with_capacity(steps / opts.record_every + 2),
        snapshots: Vec::new(),
        snapshot_every: opts.snapshot_every,
        space: l.space(),
    };
    recorder.record(R::zero(), &rho, observers);

    let nn = d * d;
    let mut k1 = vec![Complex::zero(); nn];
    let mut k2 = vec![Complex::zero(); nn];
    let mut k3 = vec![Complex::zero(); nn];
    let mut k4 = vec![Complex::zero(); nn];
    let mut tmp = vec![Complex::zero(); nn];
    let half_dt = dt * R::lit(0.5);
    let sixth_dt = dt / R::lit(6.0);
    let two = R::lit(2.0);
    let e_half: Vec<Complex<R>> = l.diag.iter().map(|z| Complex::from_polar(R::one(), z.im * half_dt)).collect();
    let e_full: Vec<Complex<R>> = l.diag.iter().map(|z| Complex::from_polar(R::one(), z.im * dt)).collect();
    let trace_limit = R::lit(TRACE_DRIFT_LIMIT);
    let top_limit = R::lit(TOP_POPULATION_LIMIT);
    let trace0: R = (0..d).fold(R::zero(), |acc, i| acc + rho[[i, i]].re);
    let top0 = rho[[d - 1, d - 1]].re;

    for step in 1..=steps {
        let y = rho.as_slice_mut().expect("standard layout");
        l.couple_upper(y, &mut k1);
        for m in 0..d {
            for k in m * d + m..(m + 1) * d {
                tmp[k] = (y[k] + k1[k] * half_dt) * e_half[k];
            }
        }
        l.couple_upper(&tmp, &mut k2);
        for m in 0..d {
            for k in m * d + m..(m + 1) * d {
                tmp[k] = y[k] * e_half[k] + k2[k] * half_dt;
            }
        }
        l.couple_upper(&tmp, &mut k3);
        for m in 0..d {
            for k in m * d + m..(m + 1) * d {
                tmp[k] = y[k] * e_full[k] + k3[k] * e_half[k] * dt;
            }
        }
        l.couple_upper(&tmp, &mut k4);
        for m in 0..d {
            for k in m * d + m..(m + 1) * d {
                let inner = k1[k] * e_full[k] + (k2[k] + k3[k]) * e_half[k] * two + k4[k];
                y[k] = y[k] * e_full[k] + inner * sixth_dt;
            }
        }
        mirror_upper(y, d);

        let tr: R = (0..d).fold(R::zero(), |acc, i| acc + y[i * d + i].re);
        let t = R::from_usize_lossy(step) * dt;
        if !tr.is_finite() || (tr - trace0).abs() > trace_limit {
            return Err(Error::Stability(format!("trace drifted to {tr} at t = {t}")));
        }
        let top = y[nn - 1].re;
        if top - top0 > top_limit {
            return Err(Error::Truncation(format!(
                "population {top:e} reached level {} at t = {t}; enlarge the Fock space",
                d - 1
            )));
        }
        if step % opts.record_every == 0 || step == steps {
            recorder.record(t, &rho, observers);
        }
    }

    Ok(Trajectory {
        dt,
        records: recorder.records,
        snapshots: recorder.snapshots,
        final_state: DensityMatrix::from_parts_unchecked(l.space(), rho),
    })
}

/// `ρ(t) = exp(L t) ρ₀` with the dense superoperator. Limited to
/// `D ≤` [`EXPM_MAX_DIM`].
pub fn expm_propagate<R: Real>(l: &Liouvillian<R>, rho0: &DensityMatrix<R>, t: R) -> Result<DensityMatrix<R>> {
    let d = l.dim;
    if d > EXPM_MAX_DIM {
        return Err(Error::Dimension { dim: d, reason: format!("dense propagator supports D ≤ {EXPM_MAX_DIM}") });
    }
    l.space().check(&rho0.space())?;
    let lt = l.superoperator().mapv(|z| z * t);
    let prop = linalg::expm(&lt)?;
    let mut v = Array2::zeros((d * d, 1));
    for n in 0..d {
        for m in 0..d {
            v[[m + n * d, 0]] = rho0.matrix()[[m, n]];
        }
    }
    let out = prop.dot(&v);
    let mut rho = Array2::zeros((d, d));
    for n in 0..d {
        for m in 0..d {
            rho[[m, n]] = out[[m + n * d, 0]];
        }
    }
    Ok(DensityMatrix::from_parts_unchecked(l.space(), rho))
}

/// Exact propagation for a non-dissipative generator, where every coherence
/// only acquires a phase: `ρ_mn(t) = e^{−i(E_m − E_n)t} ρ_mn(0)`. Samples at
/// `0, Δ, 2Δ, …` up to `t_final`.
pub fn phase_evolve<R: Real>(
    l: &Liouvillian<R>,
    rho0: &DensityMatrix<R>,
    t_final: R,
    sample_dt: R,
) -> Result<Trajectory<R>> {
    if l.damping.is_dissipative() {
        return domain("exact phase propagation needs a non-dissipative generator (γ = 0)");
    }
    if !(sample_dt > R::zero()) || !(t_final >= R::zero()) {
        return domain("sampling interval must be positive and final time non-negative");
    }
    let d = l.dim;
    let rho_init = initial_state(l, rho0)?;
    let e = l.hamiltonian.energies();
    let samples = (t_final / sample_dt).floor().to_usize().unwrap_or(0);
    let phase = |m: usize, n: usize, t: R| Complex::from_polar(R::one(), -(e[m] - e[n]) * t);
    let mut step_phase = Array2::zeros((d, d));
    for m in 0..d {
        for n in 0..d {
            step_phase[[m, n]] = phase(m, n, sample_dt);
        }
    }
    // Repeated multiplication is re-anchored to exact phases periodically.
    const RESYNC: usize = 1024;
    let mut rho = rho_init.clone();
    let mut records = Vec::with_capacity(samples + 1);
    records.push(observe_matrix(R::zero(), &rho));
    for s in 1..=samples {
        let t = R::from_usize_lossy(s) * sample_dt;
        if s % RESYNC == 0 {
            for m in 0..d {
                for n in 0..d {
                    rho[[m, n]] = rho_init[[m, n]] * phase(m, n, t);
                }
            }
        } else {
            rho.zip_mut_with(&step_phase, |r, &p| *r *= p);
        }
        records.push(observe_matrix(t, &rho));
    }
    Ok(Trajectory {
        dt: sample_dt,
        records,
        snapshots: Vec::new(),
        final_state: DensityMatrix::from_parts_unchecked(l.space(), rho),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, creation_op, density_from_pure, fock_state, number_op};
    use crate::hamiltonian::{build_hamiltonian, DEFAULT_OMEGA0};
    use crate::linalg::max_abs_diff;

    fn setup(d: usize, b: f64, k: u32, damp: DampingSpec<f64>) -> Liouvillian<f64> {
        let h = build_hamiltonian(FockSpace::new(d).unwrap(), DEFAULT_OMEGA0, b, k).unwrap();
        build_liouvillian(&h, damp)
    }

    fn dense_rhs(l: &Liouvillian<f64>, rho: &CMatrix<f64>) -> CMatrix<f64> {
        // Direct matrix form of the master equation.
        let s = l.space();
        let h = l.hamiltonian().operator().into_matrix();
        let a = annihilation_op::<f64>(s).into_matrix();
        let ad = creation_op::<f64>(s).into_matrix();
        let mi = Complex::new(0.0, -1.0);
        let mut out = (h.dot(rho) - rho.dot(&h)).mapv(|z| z * mi);
        let dm = l.damping();
        let n_op = ad.dot(&a);
        let diss = a.dot(rho).dot(&ad) - (n_op.dot(rho) + rho.dot(&n_op)).mapv(|z| z * 0.5);
        out = out + diss.mapv(|z| z * dm.emission_rate());
        let m_op = a.dot(&ad);
        let absn = ad.dot(rho).dot(&a) - (m_op.dot(rho) + rho.dot(&m_op)).mapv(|z| z * 0.5);
        out + absn.mapv(|z| z * dm.absorption_rate())
    }

    fn test_matrix(d: usize) -> CMatrix<f64> {
        Array2::from_shape_fn((d, d), |(i, j)| {
            Complex::new((i as f64 * 0.37 + j as f64).sin(), (i as f64 - 2.0 * j as f64).cos())
        })
    }

    #[test]
    fn damping_validation() {
        assert!(DampingSpec::new(-1e-3, 0.0, false).is_err());
        assert!(DampingSpec::new(1e-3, -0.1, false).is_err());
        let d = DampingSpec::<f64>::default();
        assert_eq!(d, DampingSpec::none());
        assert!(!d.is_dissipative());
        let full = DampingSpec::<f64>::new(0.01, 2.0, true).unwrap();
        assert!((full.emission_rate() - 0.03).abs() < 1e-15);
        assert!((full.absorption_rate() - 0.02).abs() < 1e-15);
        let half = DampingSpec::new(0.01, 2.0, false).unwrap();
        assert_eq!(half.absorption_rate(), 0.0);
    }

    #[test]
    fn structured_rhs_matches_matrix_products() {
        for damp in [
            DampingSpec::none(),
            DampingSpec::decay(0.02).unwrap(),
            DampingSpec::new(0.02, 1.5, false).unwrap(),
            DampingSpec::new(0.02, 1.5, true).unwrap(),
        ] {
            let l = setup(7, 0.05, 3, damp);
            let rho = test_matrix(7);
            let got = l.apply(&rho).unwrap();
            assert!(max_abs_diff(&got, &dense_rhs(&l, &rho)) < 1e-13, "{damp:?}");
        }
    }

    #[test]
    fn superoperator_matches_structured_rhs() {
        let d = 6;
        let l = setup(d, 0.05, 2, DampingSpec::new(0.03, 0.7, true).unwrap());
        let rho = test_matrix(d);
        let sup = l.superoperator();
        let mut v = Array2::zeros((d * d, 1));
        for n in 0..d {
            for m in 0..d {
                v[[m + n * d, 0]] = rho[[m, n]];
            }
        }
        let out = sup.dot(&v);
        let direct = l.apply(&rho).unwrap();
        for n in 0..d {
            for m in 0..d {
                assert!((out[[m + n * d, 0]] - direct[[m, n]]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn superoperator_from_mismatched_operators_fails() {
        let h = build_hamiltonian(FockSpace::new(4).unwrap(), 1.0, 0.1, 2).unwrap();
        let a = annihilation_op::<f64>(FockSpace::new(5).unwrap());
        assert!(matches!(
            superoperator_from_operators(&h.operator(), &a, DampingSpec::none()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn generator_is_trace_preserving() {
        let l = setup(8, 0.01, 2, DampingSpec::new(0.1, 0.5, true).unwrap());
        let out = l.apply(&test_matrix(8)).unwrap();
        assert!(linalg::trace(&out).norm() < 1e-13);
    }

    #[test]
    fn fock_level_decays_exponentially() {
        // ⟨n⟩(t) = n e^{−γt} at zero temperature
        let s = FockSpace::new(6).unwrap();
        let l = setup(6, 0.01, 2, DampingSpec::decay(0.05).unwrap());
        let rho0 = density_from_pure(&fock_state::<f64>(s, 3).unwrap());
        let traj =
            rk4_evolve(&l, &rho0, 10.0, EvolveOptions { dt: Some(0.01), ..Default::default() }, &mut []).unwrap();
        let last = traj.records.last().unwrap();
        assert!((last.t - 10.0).abs() < 1e-12);
        assert!((last.n_expect - 3.0 * (-0.5f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn thermalizes_to_bath_occupation() {
        let s = FockSpace::new(12).unwrap();
        let l = setup(12, 0.0, 2, DampingSpec::new(0.5, 0.3, true).unwrap());
        let rho0 = density_from_pure(&fock_state::<f64>(s, 0).unwrap());
        let traj = rk4_evolve(
            &l,
            &rho0,
            30.0,
            EvolveOptions { dt: Some(0.01), record_every: 3000, ..Default::default() },
            &mut [],
        )
        .unwrap();
        assert!((traj.records.last().unwrap().n_expect - 0.3).abs() < 1e-5);
    }

    #[test]
    fn rejects_unstable_step() {
        let s = FockSpace::new(30).unwrap();
        let l = setup(30, 0.005, 3, DampingSpec::none());
        let rho0 = density_from_pure(&fock_state::<f64>(s, 0).unwrap());
        let err =
            rk4_evolve(&l, &rho0, 1.0, EvolveOptions { dt: Some(0.05), ..Default::default() }, &mut []).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn detects_leak_into_top_level() {
        let s = FockSpace::new(6).unwrap();
        let l = setup(6, 0.0, 2, DampingSpec::new(0.5, 3.0, true).unwrap());
        let rho0 = density_from_pure(&fock_state::<f64>(s, 0).unwrap());
        let err =
            rk4_evolve(&l, &rho0, 5.0, EvolveOptions { dt: Some(0.01), ..Default::default() }, &mut []).unwrap_err();
        assert!(matches!(err, Error::Truncation(_)));
    }

    #[test]
    fn observers_and_snapshots_follow_records() {
        let s = FockSpace::new(10).unwrap();
        let l = setup(10, 0.01, 2, DampingSpec::decay(0.01).unwrap());
        let rho0 = density_from_pure(&coherent_state::<f64>(s, Complex::new(0.5, 0.0)).unwrap());
        let mut seen = Vec::new();
        let mut obs = |t: f64, _: &CMatrix<f64>| seen.push(t);
        let mut list: [&mut dyn Observer<f64>; 1] = [&mut obs];
        let opts = EvolveOptions { dt: Some(0.1), record_every: 5, snapshot_every: Some(2) };
        let traj = rk4_evolve(&l, &rho0, 3.0, opts, &mut list).unwrap();
        assert_eq!(traj.records.len(), 7);
        assert_eq!(traj.snapshots.len(), 4);
        assert_eq!(seen.len(), 7);
        assert!((seen[6] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn expm_rejects_large_spaces() {
        let s = FockSpace::new(13).unwrap();
        let l = setup(13, 0.01, 2, DampingSpec::none());
        let rho0 = density_from_pure(&fock_state::<f64>(s, 0).unwrap());
        assert!(matches!(expm_propagate(&l, &rho0, 1.0), Err(Error::Dimension { .. })));
    }

    #[test]
    fn phase_evolution_matches_rk4_without_damping() {
        let s = FockSpace::new(20).unwrap();
        let l = setup(20, 0.01, 2, DampingSpec::none());
        let rho0 = density_from_pure(&coherent_state::<f64>(s, Complex::new(1.0, 0.0)).unwrap());
        let exact = phase_evolve(&l, &rho0, 20.0, 0.5).unwrap();
        let rk = rk4_evolve(
            &l,
            &rho0,
            20.0,
            EvolveOptions { dt: Some(0.005), record_every: 100, ..Default::default() },
            &mut [],
        )
        .unwrap();
        assert_eq!(exact.records.len(), rk.records.len());
        for (x, y) in exact.records.iter().zip(&rk.records) {
            assert!((x.a - y.a).norm() < 1e-9);
        }
        let damped = setup(20, 0.01, 2, DampingSpec::decay(0.1).unwrap());
        assert!(phase_evolve(&damped, &rho0, 1.0, 0.1).is_err());
    }

    #[test]
    fn number_operator_commutes_with_diagonal_hamiltonian() {
        let l = setup(8, 0.3, 3, DampingSpec::none());
        let n = number_op::<f64>(l.space()).into_matrix();
        assert!(linalg::max_abs(&l.apply(&n).unwrap()) < 1e-14);
    }
}
