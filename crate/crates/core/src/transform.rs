//! Spherical Fourier transform, inversion, Sobolev norms and the Schrödinger
//! propagator, all evaluated by quadrature on explicit grids.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{panel_breaks, QuadratureGrid};
use crate::space::SpaceParams;
use crate::spherical::PhiTable;

/// How a spectral profile decays, which decides which tail checks apply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum DecayClass {
    Schwartz,
    BandLimited { lo: f64, hi: f64 },
    Raw,
}

/// A radial function given through its spherical transform on a quadrature
/// grid in `lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralProfile {
    grid: QuadratureGrid,
    values: Vec<Complex64>,
    decay: DecayClass,
}

impl SpectralProfile {
    pub fn new(grid: QuadratureGrid, values: Vec<Complex64>, decay: DecayClass) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::domain("SpectralProfile", "grid and values differ in length"));
        }
        if grid.is_empty() || !(grid.nodes()[0] > 0.0) {
            return Err(Error::domain("SpectralProfile", "lambda grid must start above 0"));
        }
        if let DecayClass::BandLimited { lo, hi } = decay {
            let leak = grid
                .nodes()
                .iter()
                .zip(&values)
                .any(|(l, v)| (*l < lo || *l > hi) && v.norm() != 0.0);
            if leak {
                return Err(Error::domain(
                    "SpectralProfile",
                    "band-limited values leak outside the band",
                ));
            }
        }
        Ok(SpectralProfile { grid, values, decay })
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn lambdas(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn decay(&self) -> DecayClass {
        self.decay
    }

    pub fn lambda_max(&self) -> f64 {
        *self.grid.nodes().last().expect("grid is non-empty")
    }

    /// Same grid, values multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        SpectralProfile {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            decay: self.decay,
        }
    }

    /// Same grid and decay class, values replaced by `f(lambda, value)`.
    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        SpectralProfile {
            grid: self.grid.clone(),
            values: self
                .lambdas()
                .iter()
                .zip(&self.values)
                .map(|(l, v)| f(*l, *v))
                .collect(),
            decay: self.decay,
        }
    }
}

/// A radial function sampled on increasing radii, with quadrature weights for
/// integrals against `A(s) ds`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    grid: QuadratureGrid,
    values: Vec<Complex64>,
}

impl RadialProfile {
    pub fn new(grid: QuadratureGrid, values: Vec<Complex64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::domain("RadialProfile", "grid and values differ in length"));
        }
        if grid.nodes().first().is_some_and(|s| *s < 0.0) {
            return Err(Error::domain("RadialProfile", "radii must be >= 0"));
        }
        Ok(RadialProfile { grid, values })
    }

    /// Sample a real function on a grid.
    pub fn from_fn(grid: QuadratureGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&s| Complex64::new(f(s), 0.0)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn radii(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `<f, g>_{A ds}` on the shared grid.
    pub fn inner(&self, other: &RadialProfile, params: &SpaceParams) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::domain(
                "RadialProfile::inner",
                "profiles live on different grids",
            ));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for ((s, w), (f, g)) in self
            .grid
            .nodes()
            .iter()
            .zip(self.grid.weights())
            .zip(self.values.iter().zip(&other.values))
        {
            acc += f * g.conj() * (w * params.density(*s)?);
        }
        Ok(acc)
    }

    /// `(int |f|^2 A ds)^{1/2}`.
    pub fn l2_norm(&self, params: &SpaceParams) -> Result<f64> {
        Ok(self.inner(self, params)?.re.max(0.0).sqrt())
    }
}

/// Dispersion `(lambda^2 + Q^2/4)^{a/2}` (unshifted) or `lambda^a` (shifted).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorSpec {
    pub a: f64,
    pub shifted: bool,
}

impl Default for PropagatorSpec {
    fn default() -> Self {
        PropagatorSpec { a: 2.0, shifted: false }
    }
}

impl PropagatorSpec {
    pub fn new(a: f64, shifted: bool) -> Result<Self> {
        if !(a > 1.0) || !a.is_finite() {
            return Err(Error::domain(
                "PropagatorSpec",
                format!("dispersion exponent {a} must exceed 1"),
            ));
        }
        Ok(PropagatorSpec { a, shifted })
    }

    pub fn dispersion(&self, params: &SpaceParams, lambda: f64) -> f64 {
        if self.shifted {
            lambda.abs().powf(self.a)
        } else {
            let x = lambda * lambda + params.spectral_gap();
            if self.a == 2.0 {
                x
            } else {
                x.powf(0.5 * self.a)
            }
        }
    }

    /// `|d/dlambda dispersion|`.
    pub fn dispersion_slope(&self, params: &SpaceParams, lambda: f64) -> f64 {
        let l = lambda.abs();
        if self.shifted {
            self.a * l.powf(self.a - 1.0)
        } else {
            let x = l * l + params.spectral_gap();
            self.a * l * x.powf(0.5 * self.a - 1.0)
        }
    }

    /// `e^{i t dispersion(lambda)}`.
    pub fn multiplier(&self, params: &SpaceParams, lambda: f64, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, t * self.dispersion(params, lambda))
    }
}

/// Regularity index of a Sobolev norm, `H^alpha` or its shifted variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex {
    pub alpha: f64,
    pub shifted: bool,
}

impl SobolevIndex {
    pub fn new(alpha: f64, shifted: bool) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::domain("SobolevIndex", format!("alpha = {alpha} must be >= 0")));
        }
        Ok(SobolevIndex { alpha, shifted })
    }

    pub fn weight(&self, params: &SpaceParams, lambda: f64) -> f64 {
        let base = if self.shifted {
            1.0 + lambda * lambda
        } else {
            lambda * lambda + params.spectral_gap()
        };
        base.powf(self.alpha)
    }
}

/// `(int w(lambda)^alpha |f^(lambda)|^2 |c(lambda)|^{-2} dlambda)^{1/2}`.
///
/// The normalization constant of the inversion formula is not included.
pub fn sobolev_norm(params: &SpaceParams, fhat: &SpectralProfile, idx: SobolevIndex) -> Result<f64> {
    let integrand: Vec<f64> = fhat
        .lambdas()
        .iter()
        .zip(fhat.values())
        .map(|(&l, v)| idx.weight(params, l) * v.norm_sqr() * params.plancherel_density(l))
        .collect();
    let total = fhat.grid().integrate(&integrand);
    if !matches!(fhat.decay(), DecayClass::BandLimited { .. }) {
        check_tail("sobolev_norm", fhat.grid(), &integrand, total, 1e-10)?;
    }
    Ok(total.max(0.0).sqrt())
}

/// Fails when the integrand at the last node, spread over the last panel,
/// exceeds `rel` of the total: a proxy for the part beyond the grid.
fn check_tail(op: &'static str, grid: &QuadratureGrid, integrand: &[f64], total: f64, rel: f64) -> Result<()> {
    let n = integrand.len();
    let nodes = grid.nodes();
    let span = nodes[n - 1] - nodes[n.saturating_sub(crate::quadrature::PANEL_ORDER)];
    let tail = integrand[n - 1].abs() * span;
    if tail > rel * total.abs() && tail > 0.0 {
        return Err(Error::accuracy(
            op,
            format!("grid tail carries {:.3e} of the total {total:.6e}", tail / total.abs()),
        ));
    }
    Ok(())
}

/// Built-in spectral profiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SpectralShape {
    /// `e^{-(lambda/width)^2}`.
    Gaussian { width: f64 },
    /// `(lambda/width)^{2 power} e^{-(lambda/width)^2}`.
    GaussianMoment { width: f64, power: u32 },
    /// Indicator of `[lo, hi]`, optionally with smooth edges over 1% of the width.
    Band { lo: f64, hi: f64, mollified: bool },
}

/// Phase-resolution requirements for a spectral grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolution {
    /// Largest radius the grid will be evaluated at.
    pub s_max: f64,
    /// Largest `|t|` the grid will be propagated to.
    pub t_max: f64,
    pub propagator: PropagatorSpec,
    pub max_panels: usize,
}

impl Resolution {
    pub fn new(s_max: f64, t_max: f64) -> Self {
        Resolution {
            s_max,
            t_max,
            propagator: PropagatorSpec::default(),
            max_panels: 20_000,
        }
    }

    pub fn with_propagator(mut self, propagator: PropagatorSpec) -> Self {
        self.propagator = propagator;
        self
    }

    /// Largest panel width keeping the mean phase advance per node below pi/4 on
    /// `[.., lambda_max]`.
    pub fn panel_width(&self, params: &SpaceParams, lambda_max: f64) -> f64 {
        let omega = self.s_max + self.t_max.abs() * self.propagator.dispersion_slope(params, lambda_max);
        let order = crate::quadrature::PANEL_ORDER as f64;
        (std::f64::consts::PI * order / 4.0 / omega.max(1e-300)).min(0.5)
    }
}

const EDGE_FRACTION: f64 = 0.01;

/// Number of leading samples outside of which the summed tail is below `rel`
/// of the total.
fn tail_cut(w: &[f64], rel: f64) -> usize {
    let total: f64 = w.iter().sum();
    let mut tail = 0.0;
    for k in (0..w.len()).rev() {
        tail += w[k];
        if tail > rel * total {
            return k + 1;
        }
    }
    w.len()
}

/// C-infinity step from 0 at `x <= 0` to 1 at `x >= 1`.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

impl SpectralShape {
    pub fn gaussian() -> Self {
        SpectralShape::Gaussian { width: 1.0 }
    }

    /// Band `[n, n + sqrt(n)]` with mollified edges.
    pub fn dyadic_band(n: f64) -> Self {
        SpectralShape::Band {
            lo: n,
            hi: n + n.sqrt(),
            mollified: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SpectralShape::Gaussian { width } | SpectralShape::GaussianMoment { width, .. } => width > 0.0,
            SpectralShape::Band { lo, hi, .. } => lo >= 0.0 && hi > lo && hi.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain("SpectralShape", format!("invalid shape {self:?}")))
        }
    }

    pub fn value(&self, lambda: f64) -> f64 {
        match *self {
            SpectralShape::Gaussian { width } => (-(lambda / width).powi(2)).exp(),
            SpectralShape::GaussianMoment { width, power } => {
                let x = (lambda / width).powi(2);
                x.powi(power as i32) * (-x).exp()
            }
            SpectralShape::Band { lo, hi, mollified } => {
                if lambda < lo || lambda > hi {
                    0.0
                } else if !mollified {
                    1.0
                } else {
                    let d = EDGE_FRACTION * (hi - lo);
                    smooth_step((lambda - lo) / d) * smooth_step((hi - lambda) / d)
                }
            }
        }
    }

    pub fn decay_class(&self) -> DecayClass {
        match *self {
            SpectralShape::Band { lo, hi, .. } => DecayClass::BandLimited { lo, hi },
            _ => DecayClass::Schwartz,
        }
    }

    /// Support `[lo, lambda_max]`: the band, or the cut beyond which the
    /// tail of `|f^|^2 |c|^{-2} (lambda^2 + Q^2/4)^{1/2}` is below `1e-12` of
    /// the total and the tail of `|f^| |c|^{-2}` is below `1e-11`.
    pub fn support(&self, params: &SpaceParams) -> (f64, f64) {
        match *self {
            SpectralShape::Band { lo, hi, .. } => (lo, hi),
            SpectralShape::Gaussian { width } | SpectralShape::GaussianMoment { width, .. } => {
                let h = 0.005 * width;
                let steps = 8000usize;
                let energy: Vec<f64> = (1..=steps)
                    .map(|k| {
                        let l = k as f64 * h;
                        self.value(l).powi(2) * params.plancherel_density(l) * (l * l + params.spectral_gap()).sqrt()
                    })
                    .collect();
                let mass: Vec<f64> = (1..=steps)
                    .map(|k| {
                        let l = k as f64 * h;
                        self.value(l) * params.plancherel_density(l)
                    })
                    .collect();
                let cut = tail_cut(&energy, 1e-12).max(tail_cut(&mass, 1e-11));
                (0.0, cut as f64 * h)
            }
        }
    }

    /// Breakpoints for a panel grid over the support.
    fn breakpoints(&self, params: &SpaceParams, width: f64) -> Vec<f64> {
        let (lo, hi) = self.support(params);
        match *self {
            SpectralShape::Band { mollified: true, .. } => {
                let d = EDGE_FRACTION * (hi - lo);
                let mut b = panel_breaks(lo, lo + d, (d / 4.0).min(width));
                b.pop();
                b.extend(panel_breaks(lo + d, hi - d, width));
                b.pop();
                b.extend(panel_breaks(hi - d, hi, (d / 4.0).min(width)));
                b
            }
            _ => panel_breaks(lo, hi, width),
        }
    }

    /// Sample the shape on a Gauss-Legendre panel grid fine enough for `res`.
    pub fn profile(&self, params: &SpaceParams, res: &Resolution) -> Result<SpectralProfile> {
        self.validate()?;
        let (_, hi) = self.support(params);
        let width = res.panel_width(params, hi);
        let breaks = self.breakpoints(params, width);
        if breaks.len() - 1 > res.max_panels {
            return Err(Error::accuracy(
                "SpectralShape::profile",
                format!("{} panels needed, budget {}", breaks.len() - 1, res.max_panels),
            ));
        }
        let grid = QuadratureGrid::gauss_panels(&breaks)?;
        let values = grid
            .nodes()
            .iter()
            .map(|&l| Complex64::new(self.value(l), 0.0))
            .collect();
        SpectralProfile::new(grid, values, self.decay_class())
    }
}

/// Forward transform `f^(lambda) = int f(s) phi_lambda(s) A(s) ds` on the
/// nodes of `lambdas`.
pub fn forward_sft(params: &SpaceParams, f: &RadialProfile, lambdas: &QuadratureGrid) -> Result<SpectralProfile> {
    let radii = f.radii();
    let weighted: Vec<Complex64> = radii
        .iter()
        .zip(f.grid().weights())
        .zip(f.values())
        .map(|((s, w), v)| Ok(v * (w * params.density(*s)?)))
        .collect::<Result<_>>()?;
    let scale = weighted.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if let Some(last) = weighted.last() {
        if last.norm() > 1e-8 * scale {
            return Err(Error::accuracy(
                "forward_sft",
                format!(
                    "profile is not negligible at the last radius {}",
                    radii[radii.len() - 1]
                ),
            ));
        }
    }
    let table = PhiTable::new(params, lambdas.nodes(), radii)?;
    let mut values = vec![Complex64::new(0.0, 0.0); lambdas.len()];
    for (i, w) in weighted.iter().enumerate() {
        let row = table.row(i);
        for (v, phi) in values.iter_mut().zip(row) {
            *v += w * phi;
        }
    }
    SpectralProfile::new(lambdas.clone(), values, DecayClass::Schwartz)
}

/// Inverse transform without the normalization constant.
fn inverse_unnormalized(params: &SpaceParams, fhat: &SpectralProfile, radii: &QuadratureGrid) -> Result<RadialProfile> {
    let evo = evolve_batch(params, fhat, &[0.0], PropagatorSpec::default(), radii.nodes(), 1.0)?;
    RadialProfile::new(radii.clone(), evo.column(0))
}

/// Reference profile used to fix the inversion constant.
pub fn calibration_profile(s: f64) -> f64 {
    (-s * s).exp()
}

/// Spherical transform pair with its inversion constant `C` in
/// `f(s) = C int f^(lambda) phi_lambda(s) |c(lambda)|^{-2} dlambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalTransform {
    params: SpaceParams,
    constant: Option<f64>,
}

impl SphericalTransform {
    pub fn uncalibrated(params: SpaceParams) -> Self {
        SphericalTransform { params, constant: None }
    }

    pub fn with_constant(params: SpaceParams, constant: f64) -> Self {
        SphericalTransform {
            params,
            constant: Some(constant),
        }
    }

    /// Fix `C` by least squares on the reference profile `e^{-s^2}`:
    /// `C = <f, g> / <g, g>` with `g` the unnormalized inverse of `f^`.
    pub fn calibrate(params: SpaceParams) -> Result<Self> {
        let (radii, lambdas) = calibration_grids(&params)?;
        let f = RadialProfile::from_fn(radii.clone(), calibration_profile)?;
        let fhat = forward_sft(&params, &f, &lambdas)?;
        let g = inverse_unnormalized(&params, &fhat, &radii)?;
        let num = f.inner(&g, &params)?.re;
        let den = g.inner(&g, &params)?.re;
        if !(den > 0.0) {
            return Err(Error::Numerical {
                op: "SphericalTransform::calibrate",
                lambda: f64::NAN,
                s: f64::NAN,
                detail: "degenerate reference inverse".into(),
            });
        }
        Ok(Self::with_constant(params, num / den))
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn constant(&self) -> Result<f64> {
        self.constant.ok_or_else(|| Error::State {
            op: "SphericalTransform",
            detail: "inversion constant has not been calibrated".into(),
        })
    }

    pub fn forward(&self, f: &RadialProfile, lambdas: &QuadratureGrid) -> Result<SpectralProfile> {
        forward_sft(&self.params, f, lambdas)
    }

    /// `C int f^ phi_lambda |c|^{-2} dlambda` at the nodes of `radii`.
    pub fn inverse(&self, fhat: &SpectralProfile, radii: &QuadratureGrid) -> Result<RadialProfile> {
        let c = self.constant()?;
        check_spectral_tail("inverse_sft", &self.params, fhat)?;
        let evo = evolve_batch(&self.params, fhat, &[0.0], PropagatorSpec::default(), radii.nodes(), c)?;
        RadialProfile::new(radii.clone(), evo.column(0))
    }

    /// `S_t f` at the nodes of `radii`. Includes `C`, so `t = 0` reproduces
    /// [`SphericalTransform::inverse`].
    pub fn propagate(
        &self,
        fhat: &SpectralProfile,
        t: f64,
        spec: PropagatorSpec,
        radii: &QuadratureGrid,
    ) -> Result<RadialProfile> {
        let evo = self.evolve(fhat, &[t], spec, radii.nodes())?;
        RadialProfile::new(radii.clone(), evo.column(0))
    }

    /// `S_t f(s)` for every `(s, t)` pair.
    pub fn evolve(
        &self,
        fhat: &SpectralProfile,
        times: &[f64],
        spec: PropagatorSpec,
        radii: &[f64],
    ) -> Result<Evolution> {
        let c = self.constant()?;
        check_spectral_tail("propagate", &self.params, fhat)?;
        evolve_batch(&self.params, fhat, times, spec, radii, c)
    }
}

fn check_spectral_tail(op: &'static str, params: &SpaceParams, fhat: &SpectralProfile) -> Result<()> {
    if matches!(fhat.decay(), DecayClass::BandLimited { .. }) {
        return Ok(());
    }
    let integrand: Vec<f64> = fhat
        .lambdas()
        .iter()
        .zip(fhat.values())
        .map(|(&l, v)| v.norm() * params.plancherel_density(l))
        .collect();
    let total: f64 = fhat.grid().integrate(&integrand);
    check_tail(op, fhat.grid(), &integrand, total, 1e-8)
}

/// Radial and spectral grids used for calibration and round trips.
pub fn calibration_grids(params: &SpaceParams) -> Result<(QuadratureGrid, QuadratureGrid)> {
    let r = 0.5 * params.q() + 6.5;
    let radii = QuadratureGrid::gauss_uniform(0.0, r, 0.25)?;
    let lambdas = QuadratureGrid::gauss_uniform(0.0, 24.0, 0.25)?;
    Ok((radii, lambdas))
}

/// `u(s, t)` on a product grid, stored row-major with one row per radius.
#[derive(Clone, Debug, PartialEq)]
pub struct Evolution {
    radii: Vec<f64>,
    times: Vec<f64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Evolution {
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn get(&self, radius_index: usize, time_index: usize) -> Complex64 {
        let k = radius_index * self.times.len() + time_index;
        Complex64::new(self.re[k], self.im[k])
    }

    /// All radii at one time.
    pub fn column(&self, time_index: usize) -> Vec<Complex64> {
        (0..self.radii.len()).map(|i| self.get(i, time_index)).collect()
    }
}

/// Times are processed in blocks of this size to bound memory.
const TIME_BLOCK: usize = 256;

/// Kernel matrix `P[s][lambda] = scale w phi_lambda(s) |c(lambda)|^{-2}`.
pub(crate) struct SynthesisKernel {
    rows: usize,
    cols: usize,
    matrix: Vec<f64>,
}

impl SynthesisKernel {
    pub(crate) fn new(params: &SpaceParams, grid: &QuadratureGrid, radii: &[f64], scale: f64) -> Result<Self> {
        let table = PhiTable::new(params, grid.nodes(), radii)?;
        let mu: Vec<f64> = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(&l, w)| scale * w * params.plancherel_density(l))
            .collect();
        let cols = grid.len();
        let mut matrix = table.as_matrix().to_vec();
        for row in matrix.chunks_mut(cols) {
            for (p, m) in row.iter_mut().zip(&mu) {
                *p *= m;
            }
        }
        Ok(SynthesisKernel {
            rows: radii.len(),
            cols,
            matrix,
        })
    }

    /// `out[s][t] = sum_lambda P[s][lambda] v[lambda][t]` for `nt` columns.
    pub(crate) fn apply(&self, v: &[f64], nt: usize, out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.cols * nt);
        debug_assert_eq!(out.len(), self.rows * nt);
        if self.rows == 0 || nt == 0 {
            return;
        }
        // SAFETY: the slices have exactly the dimensions passed, with
        // row-major strides.
        unsafe {
            matrixmultiply::dgemm(
                self.rows,
                self.cols,
                nt,
                1.0,
                self.matrix.as_ptr(),
                self.cols as isize,
                1,
                v.as_ptr(),
                nt as isize,
                1,
                0.0,
                out.as_mut_ptr(),
                nt as isize,
                1,
            );
        }
    }
}

/// Visit `|u(s, t)|` block by block without materializing the whole table.
pub(crate) fn for_each_time_block(
    params: &SpaceParams,
    fhat: &SpectralProfile,
    times: &[f64],
    spec: PropagatorSpec,
    kernel: &SynthesisKernel,
    mut visit: impl FnMut(usize, &[f64], &[f64], &[f64]),
) {
    let nl = fhat.lambdas().len();
    for (block, ts) in times.chunks(TIME_BLOCK).enumerate() {
        let nt = ts.len();
        let mut vre = vec![0.0; nl * nt];
        let mut vim = vec![0.0; nl * nt];
        for (i, (&l, f)) in fhat.lambdas().iter().zip(fhat.values()).enumerate() {
            let d = spec.dispersion(params, l);
            for (j, &t) in ts.iter().enumerate() {
                let m = Complex64::from_polar(1.0, t * d) * f;
                vre[i * nt + j] = m.re;
                vim[i * nt + j] = m.im;
            }
        }
        let mut ure = vec![0.0; kernel.rows * nt];
        let mut uim = vec![0.0; kernel.rows * nt];
        kernel.apply(&vre, nt, &mut ure);
        kernel.apply(&vim, nt, &mut uim);
        visit(block * TIME_BLOCK, ts, &ure, &uim);
    }
}

pub(crate) fn evolve_batch(
    params: &SpaceParams,
    fhat: &SpectralProfile,
    times: &[f64],
    spec: PropagatorSpec,
    radii: &[f64],
    scale: f64,
) -> Result<Evolution> {
    let kernel = SynthesisKernel::new(params, fhat.grid(), radii, scale)?;
    let nt = times.len();
    let mut re = vec![0.0; radii.len() * nt];
    let mut im = vec![0.0; radii.len() * nt];
    for_each_time_block(params, fhat, times, spec, &kernel, |offset, ts, ure, uim| {
        let bt = ts.len();
        for i in 0..radii.len() {
            for j in 0..bt {
                re[i * nt + offset + j] = ure[i * bt + j];
                im[i * nt + offset + j] = uim[i * bt + j];
            }
        }
    });
    Ok(Evolution {
        radii: radii.to_vec(),
        times: times.to_vec(),
        re,
        im,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn dr(m_v: u32, m_z: u32) -> SpaceParams {
        SpaceParams::damek_ricci(m_v, m_z).unwrap()
    }

    fn gaussian(params: &SpaceParams, res: &Resolution) -> SpectralProfile {
        SpectralShape::gaussian().profile(params, res).unwrap()
    }

    #[test]
    fn zero_maps_to_zero() {
        let h = SpaceParams::h3();
        let (radii, lambdas) = calibration_grids(&h).unwrap();
        let f = RadialProfile::from_fn(radii.clone(), |_| 0.0).unwrap();
        let fhat = forward_sft(&h, &f, &lambdas).unwrap();
        assert!(fhat.values().iter().all(|v| v.norm() == 0.0));
        let t = SphericalTransform::with_constant(h, 1.0);
        let zero = fhat.map(|_, _| Complex64::new(0.0, 0.0));
        assert!(t
            .inverse(&zero, &radii)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.norm() == 0.0));
    }

    #[test]
    fn h3_forward_matches_sine_transform() {
        let h = SpaceParams::h3();
        let (radii, lambdas) = calibration_grids(&h).unwrap();
        let f = RadialProfile::from_fn(radii.clone(), |s| (-s * s).exp()).unwrap();
        let fhat = forward_sft(&h, &f, &lambdas).unwrap();
        // int e^{-s^2} sin(l s) sinh(s) ds / l by an independent fine rule.
        let fine = QuadratureGrid::gauss_uniform(0.0, 12.0, 0.05).unwrap();
        for (&l, v) in fhat.lambdas().iter().zip(fhat.values()).step_by(97) {
            let vals: Vec<f64> = fine
                .nodes()
                .iter()
                .map(|&s| (-s * s).exp() * (l * s).sin() * s.sinh() / l)
                .collect();
            assert_relative_eq!(v.re, fine.integrate(&vals), epsilon = 1e-13);
        }
    }

    #[test]
    fn calibration_is_required() {
        let t = SphericalTransform::uncalibrated(SpaceParams::h3());
        let fhat = gaussian(&SpaceParams::h3(), &Resolution::new(2.0, 0.0));
        let radii = QuadratureGrid::trapezoid(vec![0.0, 1.0]).unwrap();
        assert!(matches!(t.inverse(&fhat, &radii), Err(Error::State { .. })));
    }

    #[test]
    fn calibrated_constants() {
        let h = SphericalTransform::calibrate(SpaceParams::h3()).unwrap();
        assert_relative_eq!(h.constant().unwrap(), 2.0 / PI, max_relative = 1e-10);
        for (mv, mz) in [(2, 1), (4, 3)] {
            let t = SphericalTransform::calibrate(dr(mv, mz)).unwrap();
            let want = 2f64.powi(mz as i32 - 1) / PI;
            assert_relative_eq!(t.constant().unwrap(), want, max_relative = 1e-8);
        }
    }

    #[test]
    fn propagation_at_zero_is_inverse() {
        let h = SpaceParams::h3();
        let t = SphericalTransform::with_constant(h, 2.0 / PI);
        let fhat = gaussian(&h, &Resolution::new(3.0, 1.0));
        let radii = QuadratureGrid::gauss_uniform(0.0, 3.0, 1.0).unwrap();
        let a = t.inverse(&fhat, &radii).unwrap();
        let b = t.propagate(&fhat, 0.0, PropagatorSpec::default(), &radii).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sobolev_norm_band_closed_form() {
        let h = SpaceParams::h3();
        let shape = SpectralShape::Band {
            lo: 16.0,
            hi: 20.0,
            mollified: false,
        };
        let fhat = shape.profile(&h, &Resolution::new(1.0, 0.0)).unwrap();
        let idx = SobolevIndex::new(0.25, false).unwrap();
        let got = sobolev_norm(&h, &fhat, idx).unwrap();
        let fine = QuadratureGrid::gauss_uniform(16.0, 20.0, 0.01).unwrap();
        let vals: Vec<f64> = fine
            .nodes()
            .iter()
            .map(|l| (l * l + 1.0f64).powf(0.25) * l * l)
            .collect();
        assert_relative_eq!(got * got, fine.integrate(&vals), max_relative = 1e-13);
    }

    #[test]
    fn sobolev_tail_violation() {
        let h = SpaceParams::h3();
        let grid = QuadratureGrid::gauss_uniform(0.0, 2.0, 0.5).unwrap();
        let vals = vec![Complex64::new(1.0, 0.0); grid.len()];
        let fhat = SpectralProfile::new(grid, vals, DecayClass::Raw).unwrap();
        assert!(matches!(
            sobolev_norm(&h, &fhat, SobolevIndex::new(0.0, false).unwrap()),
            Err(Error::Accuracy { .. })
        ));
    }

    #[test]
    fn band_profile_vanishes_outside() {
        let shape = SpectralShape::dyadic_band(16.0);
        assert_eq!(shape.value(15.99), 0.0);
        assert_eq!(shape.value(20.01), 0.0);
        assert_eq!(shape.value(18.0), 1.0);
        let fhat = shape.profile(&SpaceParams::h3(), &Resolution::new(2.0, 1.0)).unwrap();
        assert!(fhat.lambdas()[0] > 16.0 && fhat.lambda_max() < 20.0);
        let leak = SpectralProfile::new(
            QuadratureGrid::gauss_uniform(1.0, 3.0, 1.0).unwrap(),
            vec![Complex64::new(1.0, 0.0); 32],
            DecayClass::BandLimited { lo: 1.5, hi: 2.0 },
        );
        assert!(leak.is_err());
    }

    #[test]
    fn gaussian_support_and_panels() {
        let p = dr(2, 1);
        let (lo, hi) = SpectralShape::gaussian().support(&p);
        assert_eq!(lo, 0.0);
        assert!(hi > 3.5 && hi < 8.0, "{hi}");
        let res = Resolution::new(10.0, 1.0);
        let w = res.panel_width(&p, hi);
        assert!(w * (10.0 + 2.0 * hi) <= 4.0 * PI + 1e-12);
        let mut tight = res;
        tight.max_panels = 3;
        assert!(matches!(
            SpectralShape::gaussian().profile(&p, &tight),
            Err(Error::Accuracy { .. })
        ));
    }

    #[test]
    fn propagator_spec() {
        assert!(PropagatorSpec::new(1.0, false).is_err());
        let h = SpaceParams::h3();
        let s = PropagatorSpec::default();
        assert_eq!(s.dispersion(&h, 2.0), 5.0);
        let f = PropagatorSpec::new(3.0, true).unwrap();
        assert_eq!(f.dispersion(&h, 2.0), 8.0);
        assert_relative_eq!(s.multiplier(&h, 1.0, 0.3).norm(), 1.0, max_relative = 1e-15);
    }
}
