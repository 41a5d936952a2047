//! Snowflake embedding assembly.
//!
//! Horizontal jets of maps `G → R^D`, the bilinear form `B(φ,ψ)` and its
//! explicit pointwise solution, a dilated-mollifier low-pass filter, the
//! isometry field orthogonal to a map's low-order derivatives, Weierstrass
//! sums over lacunary scales, scale concatenation and Assouad's net-based
//! embedding.

use crate::algebra::{neg, StratifiedAlgebra};
use crate::error::{Error, Result};
use crate::fields::{apply_field, fd_word_derivative, fd_word_derivative_richardson, OperatorWord};
use crate::frame::{extend_frame_repeated, ExtensionConfig, ExtensionDiagnostics, FrameField};
use crate::multilinear::{gram_matrix, gram_schmidt, psd_determinant, pseudoinverse};
use crate::nets::{color_net, greedy_maximal_net, CarnotCloud, MetricSpace};
use crate::poly::{CompiledPoly, PolynomialMap};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

/// A map `G → R^D` together with its derivatives along operator words.
pub trait Jet: Sync {
    fn dim(&self) -> usize;

    fn value(&self, p: &[f64]) -> Vec<f64>;

    /// `X_{a_1} ⋯ X_{a_m} f(p)` for `word = [a_1, …, a_m]`.
    fn word(&self, p: &[f64], word: &[usize]) -> Vec<f64>;
}

/// Exact derivatives of a polynomial map, compiled for evaluation.
#[derive(Clone, Debug)]
pub struct PolyJet {
    alg: Arc<StratifiedAlgebra>,
    map: PolynomialMap,
    base: Vec<CompiledPoly>,
    words: BTreeMap<Vec<usize>, Vec<CompiledPoly>>,
}

impl PolyJet {
    /// Precomputes every word (ordered or not) with up to `max_len` letters.
    pub fn new(alg: Arc<StratifiedAlgebra>, map: PolynomialMap, max_len: usize) -> Self {
        let n = alg.dim();
        let mut words = BTreeMap::new();
        let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for a in 0..n {
                    let mut v = w.clone();
                    v.push(a);
                    next.push(v);
                }
            }
            for w in &next {
                let d = apply_field(&alg, &OperatorWord::new(w.clone()), &map).compile();
                words.insert(w.clone(), d);
            }
            frontier = next;
        }
        let base = map.compile();
        PolyJet { alg, map, base, words }
    }

    pub fn map(&self) -> &PolynomialMap {
        &self.map
    }
}

impl Jet for PolyJet {
    fn dim(&self) -> usize {
        self.base.len()
    }

    fn value(&self, p: &[f64]) -> Vec<f64> {
        self.base.iter().map(|c| c.eval(p)).collect()
    }

    fn word(&self, p: &[f64], word: &[usize]) -> Vec<f64> {
        if word.is_empty() {
            return self.value(p);
        }
        match self.words.get(word) {
            Some(cs) => cs.iter().map(|c| c.eval(p)).collect(),
            None => apply_field(&self.alg, &OperatorWord::new(word.to_vec()), &self.map)
                .compile()
                .iter()
                .map(|c| c.eval(p))
                .collect(),
        }
    }
}

/// A shared map `G → R^d`.
pub type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Central-difference derivatives of an arbitrary map along flows `exp(t X_a)`.
#[derive(Clone)]
pub struct FdJet {
    alg: Arc<StratifiedAlgebra>,
    f: MapFn,
    dim: usize,
    pub h: f64,
    pub richardson: bool,
}

impl FdJet {
    pub fn new(alg: Arc<StratifiedAlgebra>, dim: usize, h: f64, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        FdJet { alg, f: Arc::new(f), dim, h, richardson: false }
    }

    pub fn with_richardson(mut self) -> Self {
        self.richardson = true;
        self
    }
}

impl Jet for FdJet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, p: &[f64]) -> Vec<f64> {
        (self.f)(p)
    }

    fn word(&self, p: &[f64], word: &[usize]) -> Vec<f64> {
        let f = |x: &[f64]| (self.f)(x);
        if self.richardson {
            fd_word_derivative_richardson(&self.alg, &f, p, word, self.h)
        } else {
            fd_word_derivative(&self.alg, &f, p, word, self.h)
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `B(φ,ψ)_{ij} = Sym(X_iφ · X_jψ)` for horizontal `i, j`.
pub fn bilinear_form_b(alg: &StratifiedAlgebra, phi: &dyn Jet, psi: &dyn Jet, p: &[f64]) -> Result<DMatrix<f64>> {
    if phi.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: psi.dim(), got: phi.dim() });
    }
    let k = alg.horizontal_dim();
    let dphi: Vec<Vec<f64>> = (0..k).map(|i| phi.word(p, &[i])).collect();
    let dpsi: Vec<Vec<f64>> = (0..k).map(|i| psi.word(p, &[i])).collect();
    let raw = DMatrix::from_fn(k, k, |i, j| dot(&dphi[i], &dpsi[j]));
    Ok((&raw + raw.transpose()) * 0.5)
}

/// Words of the rows of `T_ψ`: `X_i`, `X_iX_j` (`i ≤ j`) and `X_{2,i'}`.
pub fn t_words(alg: &StratifiedAlgebra) -> Vec<Vec<usize>> {
    let k = alg.horizontal_dim();
    let mut out: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
    for i in 0..k {
        for j in i..k {
            out.push(vec![i, j]);
        }
    }
    if alg.step() >= 2 {
        out.extend(alg.stratum_range(2).map(|c| vec![c]));
    }
    out
}

/// The matrix `T_ψ(p)` with one row per word of [`t_words`].
pub fn t_matrix(alg: &StratifiedAlgebra, psi: &dyn Jet, p: &[f64]) -> DMatrix<f64> {
    let rows: Vec<Vec<f64>> = t_words(alg).iter().map(|w| psi.word(p, w)).collect();
    DMatrix::from_fn(rows.len(), psi.dim(), |i, j| rows[i][j])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitSolution {
    pub phi: Vec<f64>,
    /// `|∧ rows of T_ψ(p)|`.
    pub wedge: f64,
    /// `max |T_ψ φ − (0, −F, 0)|`.
    pub residual: f64,
}

/// Packs the upper triangle of a symmetric `k×k` matrix row by row.
fn sym_upper(f: &DMatrix<f64>) -> Vec<f64> {
    let k = f.nrows();
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    for i in 0..k {
        for j in i..k {
            out.push(f[(i, j)]);
        }
    }
    out
}

/// `φ(p) = T_ψ(p)⁻¹ (0, −F(p), 0)` with the minimum-norm right inverse.
pub fn explicit_solve(alg: &StratifiedAlgebra, psi: &dyn Jet, f: &DMatrix<f64>, p: &[f64]) -> Result<ExplicitSolution> {
    let k = alg.horizontal_dim();
    if f.nrows() != k || f.ncols() != k {
        return Err(Error::DimensionMismatch { expected: k, got: f.nrows() });
    }
    let t = t_matrix(alg, psi, p);
    let gram = &t * t.transpose();
    let wedge = psd_determinant(&gram).max(0.0).sqrt();
    if t.nrows() > t.ncols() {
        return Err(Error::Singular { det: 0.0 });
    }
    let pinv = pseudoinverse(&t).map_err(|_| Error::Singular { det: wedge * wedge })?;
    let mut rhs = vec![0.0; t.nrows()];
    for (slot, v) in rhs[k..].iter_mut().zip(sym_upper(f)) {
        *slot = -v;
    }
    let rhs = DVector::from_vec(rhs);
    let phi = &pinv * &rhs;
    let residual = (&t * &phi - &rhs).amax();
    Ok(ExplicitSolution { phi: phi.iter().copied().collect(), wedge, residual })
}

/// `C^∞` bump `exp(−1/(1−t²))` on `(−1, 1)`.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// A rectangular grid in exponential coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: Vec<f64>,
    pub step: Vec<f64>,
    pub shape: Vec<usize>,
}

impl Grid {
    /// Grid on the box `[-half, half]` with `counts[c]` nodes along coordinate `c`.
    pub fn centered(half: &[f64], counts: &[usize]) -> Self {
        let step = half.iter().zip(counts).map(|(h, &c)| if c > 1 { 2.0 * h / (c - 1) as f64 } else { 1.0 }).collect();
        Grid { lo: half.iter().map(|h| -h).collect(), step, shape: counts.to_vec() }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.shape.len()];
        for c in (0..self.shape.len()).rev() {
            out[c] = self.lo[c] + (idx % self.shape[c]) as f64 * self.step[c];
            idx /= self.shape[c];
        }
        out
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// The image grid under `δ_λ`.
    pub fn dilated(&self, alg: &StratifiedAlgebra, lambda: f64) -> Grid {
        let w = alg.weights();
        Grid {
            lo: self.lo.iter().zip(w).map(|(x, &r)| x * lambda.powi(r as i32)).collect(),
            step: self.step.iter().zip(w).map(|(x, &r)| x * lambda.powi(r as i32)).collect(),
            shape: self.shape.clone(),
        }
    }

    /// Multilinear interpolation, clamped to the box.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let n = self.shape.len();
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for c in 0..n {
            let top = self.shape[c] - 1;
            let t = ((x[c] - self.lo[c]) / self.step[c]).clamp(0.0, top as f64);
            let i = (t.floor() as usize).min(top.saturating_sub(1));
            base[c] = i;
            frac[c] = if top == 0 { 0.0 } else { t - i as f64 };
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut flat = 0usize;
            for c in 0..n {
                let up = corner >> c & 1 == 1;
                let i = if up { (base[c] + 1).min(self.shape[c] - 1) } else { base[c] };
                w *= if up { frac[c] } else { 1.0 - frac[c] };
                flat = flat * self.shape[c] + i;
            }
            if w != 0.0 {
                acc += w * values[flat];
            }
        }
        acc
    }
}

/// How the low-pass kernel relates to the grid resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LowpassMode {
    /// Kernel narrower than one grid step in every coordinate: identity on the grid.
    Collapsed,
    /// At least two grid steps across the kernel radius in every coordinate.
    Resolved,
}

/// Minimum number of grid steps per kernel radius for a resolved convolution.
pub const MIN_STEPS_PER_RADIUS: f64 = 2.0;

/// `P_{≤N} f(p) = Σ_y w(y) f(p·y)` with `w ∝ Π bump(N^{r_c} y_c)` on grid offsets.
///
/// The kernel is the product bump dilated by `δ_{1/N}`; weights are
/// normalized to unit discrete mass, so constants are reproduced.
pub fn mollifier_lowpass(alg: &StratifiedAlgebra, grid: &Grid, values: &[f64], n: f64) -> Result<(Vec<f64>, LowpassMode)> {
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
    }
    if !(n > 0.0) {
        return Err(Error::InvalidConfig(format!("frequency must be positive, got {n}")));
    }
    let radii: Vec<f64> = alg.weights().iter().map(|&r| n.powi(-(r as i32))).collect();
    if radii.iter().zip(&grid.step).all(|(r, s)| r < s) {
        return Ok((values.to_vec(), LowpassMode::Collapsed));
    }
    for (c, (r, s)) in radii.iter().zip(&grid.step).enumerate() {
        if *r < MIN_STEPS_PER_RADIUS * s {
            return Err(Error::ResolutionTooCoarse { coord: c, step: *s, radius: *r });
        }
    }
    let axes: Vec<Vec<(f64, f64)>> = radii
        .iter()
        .zip(&grid.step)
        .map(|(r, s)| {
            let m = (r / s).ceil() as i64;
            (-m..=m).map(|j| j as f64 * s).filter(|y| y.abs() < *r).map(|y| (y, bump(y / r))).collect()
        })
        .collect();
    let mut nodes: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
    for axis in &axes {
        nodes = nodes
            .into_iter()
            .flat_map(|(y, w)| {
                axis.iter().map(move |&(t, b)| {
                    let mut z = y.clone();
                    z.push(t);
                    (z, w * b)
                })
            })
            .collect();
    }
    let mass: f64 = nodes.iter().map(|(_, w)| w).sum();
    let out = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            nodes.iter().map(|(y, w)| w * grid.interpolate(values, &alg.mul_f64(&p, y))).sum::<f64>() / mass
        })
        .collect();
    Ok((out, LowpassMode::Resolved))
}

/// The same kernel applied to a callable map with a fixed stencil in
/// kernel-relative coordinates, so `P_{≤N}(f∘δ_λ) = (P_{≤N/λ} f)∘δ_λ` holds
/// node for node.
#[derive(Clone, Debug)]
pub struct LowPass {
    pub n: f64,
    nodes: Vec<(Vec<f64>, f64)>,
}

impl LowPass {
    pub fn new(alg: &StratifiedAlgebra, n: f64, per_axis: usize) -> Self {
        let ticks: Vec<(f64, f64)> = (0..per_axis)
            .map(|j| {
                let u = -1.0 + (2 * j + 1) as f64 / per_axis as f64;
                (u, bump(u))
            })
            .collect();
        let mut nodes: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
        for _ in 0..alg.dim() {
            nodes = nodes
                .into_iter()
                .flat_map(|(y, w)| {
                    ticks.iter().map(move |&(t, b)| {
                        let mut z = y.clone();
                        z.push(t);
                        (z, w * b)
                    })
                })
                .collect();
        }
        let mass: f64 = nodes.iter().map(|(_, w)| w).sum();
        let nodes = nodes
            .into_iter()
            .map(|(u, w)| (alg.dilate_f64(1.0 / n, &u), w / mass))
            .collect();
        LowPass { n, nodes }
    }

    pub fn apply(&self, alg: &StratifiedAlgebra, f: &dyn Fn(&[f64]) -> Vec<f64>, p: &[f64]) -> Vec<f64> {
        let mut acc: Vec<f64> = Vec::new();
        for (y, w) in &self.nodes {
            let v = f(&alg.mul_f64(p, y));
            if acc.is_empty() {
                acc = vec![0.0; v.len()];
            }
            acc.iter_mut().zip(v).for_each(|(a, x)| *a += w * x);
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsometryConfig {
    /// Number of isometry columns `d₀`.
    pub d0: usize,
    /// Target dimension `D`; the derivative rows are zero-padded to it.
    pub dim: usize,
    /// Scale `M` dividing the first-order rows.
    pub m_scale: f64,
    /// Scale `A` multiplying the second-order rows.
    pub a_scale: f64,
    /// Declared doubling constant for the frame extension.
    pub k: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct IsometryField {
    pub d0: usize,
    pub dim: usize,
    /// The Gram–Schmidt frame of the rescaled rows followed by the `d₀` columns.
    pub frame: FrameField,
    pub prefix: usize,
    pub constant: bool,
    pub extension: Vec<ExtensionDiagnostics>,
}

impl IsometryField {
    pub fn column(&self, p: usize, c: usize) -> &[f64] {
        self.frame.get(p, self.prefix + c)
    }

    /// `U(p)s = Σ s_c u_c(p)`.
    pub fn apply(&self, p: usize, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (c, &sc) in s.iter().enumerate().take(self.d0) {
            out.iter_mut().zip(self.column(p, c)).for_each(|(o, u)| *o += sc * u);
        }
        out
    }
}

fn pad(v: Vec<f64>, dim: usize) -> Vec<f64> {
    let mut v = v;
    v.resize(dim, 0.0);
    v
}

/// Orthonormal columns perpendicular to `X_iψ`, `X_iX_jψ` and `X_{2,i'}ψ` at
/// every cloud point.
///
/// The rescaled rows `M⁻¹X_iψ, A·X_iX_jψ, A·X_{2,i'}ψ` are orthonormalized; if
/// the result is the same at every point the columns are a fixed complement
/// basis, otherwise they come from repeated frame extension over the cloud.
pub fn build_isometry_field(
    alg: &StratifiedAlgebra,
    psi: &dyn Jet,
    cloud: &CarnotCloud,
    config: &IsometryConfig,
) -> Result<IsometryField> {
    let n = cloud.len();
    if n == 0 {
        return Err(Error::EmptyCloud);
    }
    if config.dim < psi.dim() {
        return Err(Error::DimensionMismatch { expected: psi.dim(), got: config.dim });
    }
    let k = alg.horizontal_dim();
    let words = t_words(alg);
    let frames: Vec<Vec<Vec<f64>>> = cloud
        .points
        .par_iter()
        .map(|p| {
            let rows: Vec<Vec<f64>> = words
                .iter()
                .enumerate()
                .map(|(r, w)| {
                    let s = if r < k { 1.0 / config.m_scale } else { config.a_scale };
                    pad(psi.word(p, w).into_iter().map(|x| s * x).collect(), config.dim)
                })
                .collect();
            gram_schmidt(&rows)
        })
        .collect::<Result<_>>()?;
    let prefix = words.len();
    if prefix + config.d0 > config.dim {
        return Err(Error::NoComplement(config.dim));
    }
    let constant = frames.iter().all(|f| {
        f.iter().zip(&frames[0]).all(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12))
    });
    let lip = vec![0.0; prefix];
    if constant {
        let mut cand = frames[0].clone();
        for e in 0..config.dim {
            if cand.len() == prefix + config.d0 {
                break;
            }
            let mut v = vec![0.0; config.dim];
            v[e] = 1.0;
            let mut trial = cand.clone();
            trial.push(v);
            if let Ok(gs) = gram_schmidt(&trial) {
                cand = gs;
            }
        }
        let frame = FrameField::constant(n, &cand);
        return Ok(IsometryField { d0: config.d0, dim: config.dim, frame, prefix, constant, extension: Vec::new() });
    }
    let base = FrameField::from_vectors(config.dim, frames, lip)?;
    let mut cfg = ExtensionConfig::new(config.k, prefix, config.dim, config.seed);
    cfg.strict = false;
    let (frame, extension) = extend_frame_repeated(cloud, &base, config.d0, &cfg)?;
    Ok(IsometryField { d0: config.d0, dim: config.dim, frame, prefix, constant, extension })
}

/// Largest `|u_c(p) · X_iψ(p)|` and `|u_c(p) · X_iX_jψ(p)|` over all columns,
/// points and horizontal `i, j`.
pub fn perpendicularity_residual(alg: &StratifiedAlgebra, psi: &dyn Jet, cloud: &CarnotCloud, u: &IsometryField) -> (f64, f64) {
    let k = alg.horizontal_dim();
    cloud
        .points
        .par_iter()
        .enumerate()
        .map(|(idx, p)| {
            let first: Vec<Vec<f64>> = (0..k).map(|i| pad(psi.word(p, &[i]), u.dim)).collect();
            let second: Vec<Vec<f64>> =
                (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| pad(psi.word(p, &[i, j]), u.dim)).collect();
            let mut r1: f64 = 0.0;
            let mut r2: f64 = 0.0;
            for c in 0..u.d0 {
                let col = u.column(idx, c);
                r1 = first.iter().map(|w| dot(col, w).abs()).fold(r1, f64::max);
                r2 = second.iter().map(|w| dot(col, w).abs()).fold(r2, f64::max);
            }
            (r1, r2)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    /// `A = 2^a`.
    pub a: u32,
    pub epsilon: f64,
    pub m1: i32,
    pub m2: i32,
    pub alpha: f64,
    pub m_star: usize,
    pub c0: f64,
    pub n0: f64,
}

impl EmbeddingConfig {
    pub fn new(alg: &StratifiedAlgebra, a: u32, epsilon: f64, m1: i32, m2: i32) -> Self {
        let s = alg.step();
        EmbeddingConfig { a, epsilon, m1, m2, alpha: 2.0 / 3.0, m_star: s * s + s + 1, c0: 10.0, n0: 8.0 }
    }

    pub fn base(&self) -> f64 {
        2f64.powi(self.a as i32)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidConfig(format!("epsilon must lie in (0, 1/2), got {}", self.epsilon)));
        }
        if self.m1 > self.m2 {
            return Err(Error::InvalidConfig(format!("empty scale range {}..{}", self.m1, self.m2)));
        }
        if self.a == 0 {
            return Err(Error::InvalidConfig("A = 2^a needs a ≥ 1".into()));
        }
        Ok(())
    }

    /// `M = (1 − A^{−2ε})^{−1/2}`.
    pub fn predicted_holder(&self) -> f64 {
        (1.0 - self.base().powf(-2.0 * self.epsilon)).powf(-0.5)
    }
}

/// One member `φ_m` of a lacunary family, written into `[offset, offset+dim)`.
#[derive(Clone)]
pub struct ScaleMap {
    pub scale: i32,
    pub dim: usize,
    pub offset: usize,
    f: MapFn,
}

impl ScaleMap {
    pub fn new(scale: i32, dim: usize, offset: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        ScaleMap { scale, dim, offset, f: Arc::new(f) }
    }

    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        (self.f)(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layout {
    /// Each scale writes to its own coordinate block.
    Orthogonal,
    /// All scales write to the same coordinates.
    Shared,
}

/// Maps `φ_m`, `M1 ≤ m ≤ M2`, with a common target `R^D`.
#[derive(Clone)]
pub struct LacunaryFamily {
    pub maps: Vec<ScaleMap>,
    pub dim: usize,
    pub description: String,
}

impl LacunaryFamily {
    /// `φ_m(p) = A^m ψ(δ_{A^{-m}} p)` for `m1 ≤ m ≤ m2`.
    pub fn rescaled(
        alg: Arc<StratifiedAlgebra>,
        psi: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        psi_dim: usize,
        base: f64,
        scales: std::ops::RangeInclusive<i32>,
        layout: Layout,
        description: &str,
    ) -> Self {
        let psi: MapFn = Arc::new(psi);
        let mut maps = Vec::new();
        for (slot, m) in scales.clone().enumerate() {
            let offset = match layout {
                Layout::Orthogonal => slot * psi_dim,
                Layout::Shared => 0,
            };
            let (alg, psi) = (alg.clone(), psi.clone());
            let amp = base.powi(m);
            maps.push(ScaleMap::new(m, psi_dim, offset, move |p| {
                psi(&alg.dilate_f64(1.0 / amp, p)).into_iter().map(|x| amp * x).collect()
            }));
        }
        let dim = match layout {
            Layout::Orthogonal => maps.len() * psi_dim,
            Layout::Shared => psi_dim,
        };
        LacunaryFamily {
            maps,
            dim,
            description: format!("{description}; base {base}; scales {scales:?}; layout {layout:?}"),
        }
    }

    pub fn is_block_orthogonal(&self) -> bool {
        let mut spans: Vec<(usize, usize)> = self.maps.iter().map(|m| (m.offset, m.offset + m.dim)).collect();
        spans.sort();
        spans.windows(2).all(|w| w[0].1 <= w[1].0)
    }
}

/// `ψ(x) = (sin x_c, cos x_c)` over the listed coordinates.
pub fn trig_features(coords: Vec<usize>) -> impl Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone {
    move |x: &[f64]| coords.iter().flat_map(|&c| [x[c].sin(), x[c].cos()]).collect()
}

/// An evaluable map `G → R^D` with a provenance hash.
#[derive(Clone)]
pub struct EmbeddingMap {
    pub dim: usize,
    pub provenance: String,
    pub hash: String,
    f: MapFn,
}

impl std::fmt::Debug for EmbeddingMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EmbeddingMap").field("dim", &self.dim).field("hash", &self.hash).finish()
    }
}

impl EmbeddingMap {
    pub fn new(dim: usize, provenance: String, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        let hash = hex::encode(Sha256::digest(provenance.as_bytes()));
        EmbeddingMap { dim, provenance, hash, f: Arc::new(f) }
    }

    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        (self.f)(p)
    }

    pub fn eval_all(&self, points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        points.par_iter().map(|p| self.eval(p)).collect()
    }

    pub fn write_csv(&self, path: &Path, points: &[Vec<f64>]) -> Result<()> {
        let rows = self.eval_all(points);
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["point".to_string()];
        header.extend((0..self.dim).map(|c| format!("c{c}")));
        w.write_record(&header)?;
        for (i, r) in rows.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(r.iter().map(|x| format!("{x:e}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderDiagnostics {
    pub exponent: f64,
    pub measured: f64,
    pub witness: Option<(usize, usize)>,
    pub predicted_m: f64,
    pub pairs: usize,
}

/// `max |Φ(p) − Φ(q)| / d(p,q)^α` over all pairs of `points`.
pub fn holder_constant(alg: &StratifiedAlgebra, map: &EmbeddingMap, points: &[Vec<f64>], exponent: f64) -> (f64, Option<(usize, usize)>) {
    let vals = map.eval_all(points);
    let n = points.len();
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut b = (0.0, 0, 0);
            for j in i + 1..n {
                let d = alg.quasimetric(&points[i], &points[j]);
                if d == 0.0 {
                    continue;
                }
                let num: f64 = vals[i].iter().zip(&vals[j]).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                let r = num / d.powf(exponent);
                if r > b.0 {
                    b = (r, i, j);
                }
            }
            b
        })
        .reduce(|| (0.0, 0, 0), |a, b| if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a });
    (best.0, (best.0 > 0.0).then_some((best.1, best.2)))
}

/// `Φ₁(p) = Σ_m A^{−mε}(φ_m(p) − φ_m(id))`.
pub fn assemble_weierstrass(alg: &StratifiedAlgebra, family: &LacunaryFamily, config: &EmbeddingConfig) -> Result<EmbeddingMap> {
    config.validate()?;
    let base = config.base();
    let origin = vec![0.0; alg.dim()];
    let terms: Vec<(ScaleMap, f64, Vec<f64>)> = family
        .maps
        .iter()
        .filter(|m| m.scale >= config.m1 && m.scale <= config.m2)
        .map(|m| (m.clone(), base.powf(-(m.scale as f64) * config.epsilon), m.eval(&origin)))
        .collect();
    let dim = family.dim;
    let provenance = format!("weierstrass; {}; config {}", family.description, serde_json::to_string(config)?);
    Ok(EmbeddingMap::new(dim, provenance, move |p| {
        let mut out = vec![0.0; dim];
        for (m, w, at0) in &terms {
            let v = m.eval(p);
            for ((o, x), c) in out[m.offset..m.offset + m.dim].iter_mut().zip(&v).zip(at0) {
                *o += w * (x - c);
            }
        }
        out
    }))
}

/// Hölder diagnostics of `Φ₁` on sample points.
pub fn holder_diagnostics(alg: &StratifiedAlgebra, map: &EmbeddingMap, points: &[Vec<f64>], config: &EmbeddingConfig) -> HolderDiagnostics {
    let exponent = 1.0 - config.epsilon;
    let (measured, witness) = holder_constant(alg, map, points, exponent);
    HolderDiagnostics {
        exponent,
        measured,
        witness,
        predicted_m: config.predicted_holder(),
        pairs: points.len() * points.len().saturating_sub(1) / 2,
    }
}

/// `Φ = ⊕_{m=1}^{a} 2^{(m−1)(1−ε)} Φ₁ ∘ δ_{2^{−m+1}}`.
pub fn concatenate_scales(alg: Arc<StratifiedAlgebra>, phi1: &EmbeddingMap, config: &EmbeddingConfig) -> EmbeddingMap {
    let a = config.a.max(1) as usize;
    let eps = config.epsilon;
    let inner = phi1.clone();
    let d = phi1.dim;
    let provenance = format!("concatenate {a} blocks; epsilon {eps}; inner {}", phi1.hash);
    EmbeddingMap::new(a * d, provenance, move |p| {
        let mut out = Vec::with_capacity(a * d);
        for m in 1..=a {
            let lam = 2f64.powi(-(m as i32 - 1));
            let factor = 2f64.powf((m - 1) as f64 * (1.0 - eps));
            out.extend(inner.eval(&alg.dilate_f64(lam, p)).into_iter().map(|x| factor * x));
        }
        out
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssouadConfig {
    pub epsilon: f64,
    pub base: f64,
    /// Coarse scales added above the diameter so the scale sum reaches its
    /// `d^{1−ε}` regime; `None` picks `⌈2/(ε log A)⌉`.
    pub tail: Option<usize>,
    pub layout: Layout,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssouadScale {
    pub scale: i32,
    pub net_size: usize,
    pub colors: usize,
}

/// Assouad's embedding: for each scale `r = A^m` a maximal `r`-net colored at
/// separation `4r`, one coordinate per color holding `Σ_g max(0, 2r − d(x,g))`,
/// weighted by `A^{−mε}`.
pub fn assouad_baseline(cloud: &CarnotCloud, config: &AssouadConfig) -> Result<(EmbeddingMap, Vec<AssouadScale>)> {
    if cloud.len() < 2 {
        return Err(Error::DegenerateCloud("Assouad's construction needs at least two points".into()));
    }
    if !(config.epsilon > 0.0 && config.epsilon < 1.0) || !(config.base > 1.0) {
        return Err(Error::InvalidConfig(format!("need 0 < ε < 1 and A > 1, got {} and {}", config.epsilon, config.base)));
    }
    let n = cloud.len();
    let (min_sep, diam) = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| cloud.dist(i, j))
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (if d > 0.0 { lo.min(d) } else { lo }, hi.max(d)))
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    if diam == 0.0 {
        return Err(Error::DegenerateCloud("all points coincide".into()));
    }
    let ln_a = config.base.ln();
    let lo = (min_sep.ln() / ln_a).floor() as i32 - 1;
    let hi = (diam.ln() / ln_a).ceil() as i32;
    let tail = config.tail.unwrap_or((2.0 / (config.epsilon * ln_a)).ceil() as usize) as i32;
    let mut blocks: Vec<(f64, f64, Vec<Vec<Vec<f64>>>)> = Vec::new();
    let mut summary = Vec::new();
    for m in lo..=hi + tail {
        let r = config.base.powi(m);
        let (classes, net_size, colors) = if m > hi {
            (vec![vec![cloud.points[0].clone()]], 1, 1)
        } else {
            let net = greedy_maximal_net(cloud, r)?;
            let col = color_net(cloud, &net, 4.0 * r);
            let classes: Vec<Vec<Vec<f64>>> =
                col.classes().into_iter().map(|c| c.into_iter().map(|i| cloud.points[i].clone()).collect()).collect();
            (classes, net.len(), col.num_colors)
        };
        summary.push(AssouadScale { scale: m, net_size, colors });
        blocks.push((r, config.base.powf(-(m as f64) * config.epsilon), classes));
    }
    let width = blocks.iter().map(|b| b.2.len()).max().unwrap_or(0);
    let dim = match config.layout {
        Layout::Orthogonal => blocks.iter().map(|b| b.2.len()).sum(),
        Layout::Shared => width,
    };
    let alg = cloud.alg.clone();
    let layout = config.layout;
    let provenance = format!("assouad; config {}; scales {:?}", serde_json::to_string(config)?, summary);
    let map = EmbeddingMap::new(dim, provenance, move |p| {
        let mut out = vec![0.0; dim];
        let mut offset = 0;
        for (r, w, classes) in &blocks {
            for (c, class) in classes.iter().enumerate() {
                let v: f64 = class.iter().map(|g| (2.0 * r - alg.quasimetric(g, p)).max(0.0)).sum();
                out[offset + c] += w * v;
            }
            if layout == Layout::Orthogonal {
                offset += classes.len();
            }
        }
        out
    });
    Ok((map, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerLevel {
    pub level: usize,
    pub frequency: f64,
    /// `max_p ‖B(φ_l, ψ) − F‖` with `φ_l` solved against `P_{≤N_l}ψ`.
    pub residual: f64,
    pub phi_norm: f64,
    /// Largest `|T⁻¹|` operator norm over the sample.
    pub pinv_norm: f64,
}

/// Bounded-depth diagnostic of the low-frequency correction: at level `l`
/// solve `B(φ, P_{≤N₀2^l}ψ) = F` explicitly and log the residual against the
/// unfiltered `ψ`. At most 4 levels.
pub fn nash_moser_ledger(
    alg: Arc<StratifiedAlgebra>,
    psi: MapFn,
    psi_dim: usize,
    f: &(dyn Fn(&[f64]) -> DMatrix<f64> + Sync),
    points: &[Vec<f64>],
    n0: f64,
    levels: usize,
    h: f64,
) -> Result<Vec<LedgerLevel>> {
    let levels = levels.min(4);
    let full = FdJet { alg: alg.clone(), f: psi.clone(), dim: psi_dim, h, richardson: false };
    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        let freq = n0 * 2f64.powi(level as i32);
        let lp = Arc::new(LowPass::new(&alg, freq, 3));
        let (a2, p2, lp2) = (alg.clone(), psi.clone(), lp.clone());
        let filtered = FdJet::new(alg.clone(), psi_dim, h, move |x| lp2.apply(&a2, &|y| p2(y), x));
        let stats: Vec<(f64, f64, f64)> = points
            .par_iter()
            .map(|p| -> Result<(f64, f64, f64)> {
                let sol = explicit_solve(&alg, &filtered, &f(p), p)?;
                let t = t_matrix(&alg, &filtered, p);
                let pinv_norm = pseudoinverse(&t)?.norm();
                let (a3, flt) = (alg.clone(), filtered.clone());
                let fp = f(p);
                let phi_jet = FdJet::new(alg.clone(), psi_dim, h, move |x| {
                    explicit_solve(&a3, &flt, &fp, x).map(|s| s.phi).unwrap_or_else(|_| vec![f64::NAN; flt.dim()])
                });
                let b = bilinear_form_b(&alg, &phi_jet, &full, p)?;
                let phi_norm = sol.phi.iter().map(|x| x * x).sum::<f64>().sqrt();
                Ok(((b - f(p)).amax(), phi_norm, pinv_norm))
            })
            .collect::<Result<_>>()?;
        out.push(LedgerLevel {
            level,
            frequency: freq,
            residual: stats.iter().map(|s| s.0).fold(0.0, f64::max),
            phi_norm: stats.iter().map(|s| s.1).fold(0.0, f64::max),
            pinv_norm: stats.iter().map(|s| s.2).fold(0.0, f64::max),
        });
    }
    Ok(out)
}

/// Gram matrix of the `T_ψ` rows, exposed for wedge diagnostics.
pub fn t_gram(alg: &StratifiedAlgebra, psi: &dyn Jet, p: &[f64]) -> DMatrix<f64> {
    let rows: Vec<Vec<f64>> = t_words(alg).iter().map(|w| psi.word(p, w)).collect();
    gram_matrix(&rows, &rows)
}

/// Translates `p` so that the neighborhood of `g` becomes a neighborhood of the identity.
pub fn recenter(alg: &StratifiedAlgebra, g: &[f64], p: &[f64]) -> Vec<f64> {
    alg.mul_f64(&neg(g), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::veronese_map;
    use crate::poly::Polynomial;

    fn h3() -> Arc<StratifiedAlgebra> {
        Arc::new(StratifiedAlgebra::h3())
    }

    #[test]
    fn b_of_linear_coordinate() {
        let alg = h3();
        let x1 = PolyJet::new(alg.clone(), PolynomialMap::new(vec![1, 1, 2], vec![Polynomial::var(3, 0)]), 2);
        let b = bilinear_form_b(&alg, &x1, &x1, &[0.3, -0.2, 0.1]).unwrap();
        assert_eq!(b, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let c = FdJet::new(alg.clone(), 1, 1e-3, |_| vec![2.0]);
        assert_eq!(bilinear_form_b(&alg, &c, &x1, &[0.0; 3]).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn explicit_solution_rows_at_identity() {
        let alg = h3();
        let psi = PolyJet::new(alg.clone(), veronese_map(&alg), 2);
        let f = DMatrix::identity(2, 2);
        let sol = explicit_solve(&alg, &psi, &f, &[0.0; 3]).unwrap();
        let d = |w: &[usize]| dot(&sol.phi, &psi.word(&[0.0; 3], w));
        assert!(d(&[0]).abs() < 1e-12 && d(&[1]).abs() < 1e-12 && d(&[2]).abs() < 1e-12);
        assert!((d(&[0, 0]) + 1.0).abs() < 1e-12);
        assert!((d(&[1, 1]) + 1.0).abs() < 1e-12);
        assert!(d(&[0, 1]).abs() < 1e-12);
        assert!(sol.residual < 1e-12);
        let zero = explicit_solve(&alg, &psi, &DMatrix::zeros(2, 2), &[0.5, 0.1, 0.0]).unwrap();
        assert!(zero.phi.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rank_deficient_psi_is_refused() {
        let alg = h3();
        let lin = PolyJet::new(alg.clone(), PolynomialMap::new(vec![1, 1, 2], (0..3).map(|i| Polynomial::var(3, i)).collect()), 2);
        assert!(matches!(explicit_solve(&alg, &lin, &DMatrix::identity(2, 2), &[0.0; 3]), Err(Error::Singular { .. })));
    }

    #[test]
    fn lowpass_constant_and_collapse() {
        let alg = h3();
        let grid = Grid::centered(&[1.0, 1.0, 1.0], &[21, 21, 21]);
        let ones = vec![1.0; grid.len()];
        let (out, mode) = mollifier_lowpass(&alg, &grid, &ones, 2.0).unwrap();
        assert_eq!(mode, LowpassMode::Resolved);
        assert!(out.iter().all(|v| (v - 1.0).abs() < 1e-8));
        let vals: Vec<f64> = grid.points().iter().map(|p| p[0].sin()).collect();
        let (same, mode) = mollifier_lowpass(&alg, &grid, &vals, 100.0).unwrap();
        assert_eq!((same, mode), (vals, LowpassMode::Collapsed));
        assert!(matches!(mollifier_lowpass(&alg, &grid, &ones, 6.0), Err(Error::ResolutionTooCoarse { .. })));
    }

    #[test]
    fn weierstrass_single_scale_and_m() {
        let alg = h3();
        let fam = LacunaryFamily::rescaled(alg.clone(), trig_features(vec![0]), 2, 2.0, 0..=0, Layout::Orthogonal, "x1");
        let cfg = EmbeddingConfig::new(&alg, 1, 0.25, 0, 0);
        let phi = assemble_weierstrass(&alg, &fam, &cfg).unwrap();
        let p = [0.7, 0.2, -0.1];
        assert_eq!(phi.eval(&p), vec![0.7f64.sin(), 0.7f64.cos() - 1.0]);
        let half = EmbeddingConfig::new(&alg, 1, 0.5, 0, 0);
        assert!((half.predicted_holder() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn concatenation_identity() {
        let alg = h3();
        let fam = LacunaryFamily::rescaled(alg.clone(), trig_features(vec![0, 1, 2]), 6, 8.0, -2..=2, Layout::Orthogonal, "trig");
        let cfg = EmbeddingConfig::new(&alg, 3, 0.25, -2, 2);
        let phi1 = assemble_weierstrass(&alg, &fam, &cfg).unwrap();
        let phi = concatenate_scales(alg.clone(), &phi1, &cfg);
        let p = [0.4, -1.1, 0.6];
        let v1 = phi1.eval(&p);
        for m in 1..=3 {
            let q = alg.dilate_f64(2f64.powi(m - 1), &p);
            let block = &phi.eval(&q)[(m as usize - 1) * phi1.dim..m as usize * phi1.dim];
            let f = 2f64.powf((m - 1) as f64 * 0.75);
            assert!(block.iter().zip(&v1).all(|(b, v)| (b - f * v).abs() <= 1e-10 * (1.0 + v.abs())));
        }
    }
}
