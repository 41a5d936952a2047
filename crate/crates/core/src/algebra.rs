//! Stratified nilpotent Lie algebras and their groups in exponential coordinates.
//!
//! Basis vectors are addressed either by a flat index `0..n` (strata in order)
//! or by a 1-based pair `(r, i)` meaning the `i`-th vector of stratum `V_r`.

use crate::error::{Error, Result};
use crate::poly::{CompiledPoly, Polynomial};
use crate::scalar::{int, parse_rational, rat, rational_to_f64, Rational, RootSum, Scalar};
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarMode {
    #[default]
    ExactRational,
    Floating,
}

/// One nonzero structure constant: `[e_a, e_b]` has coefficient `c` on `e_l`.
#[derive(Clone, Debug)]
pub struct StructureConstant {
    pub a: usize,
    pub b: usize,
    pub l: usize,
    pub c: Rational,
    pub cf: f64,
}

/// A stratified Lie algebra `V_1 ⊕ … ⊕ V_s` given by structure constants.
pub struct StratifiedAlgebra {
    name: String,
    dims: Vec<usize>,
    offsets: Vec<usize>,
    strata: Vec<u32>,
    constants: Vec<StructureConstant>,
    mode: ScalarMode,
    fingerprint: u64,
    bch: OnceLock<Bch>,
    fields: OnceLock<Vec<crate::fields::VectorField>>,
}

impl std::fmt::Debug for StratifiedAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StratifiedAlgebra")
            .field("name", &self.name)
            .field("strata_dims", &self.dims)
            .field("constants", &self.constants.len())
            .finish()
    }
}

struct Bch {
    exact: Vec<Polynomial>,
    compiled: Vec<CompiledPoly>,
}

/// A point of the group in exponential coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPoint<S = f64> {
    pub coords: Vec<S>,
    algebra: u64,
}

impl<S: Scalar> GroupPoint<S> {
    pub fn as_slice(&self) -> &[S] {
        &self.coords
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "axiom")]
pub enum Violation {
    Antisymmetry { a: (usize, usize), b: (usize, usize) },
    Grading { a: (usize, usize), b: (usize, usize), out: (usize, usize) },
    Jacobi { a: (usize, usize), b: (usize, usize), c: (usize, usize) },
    Generation { stratum: usize, rank: usize, expected: usize },
    Dimension { k1: usize, k2: usize, n_h: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub algebra: String,
    pub strata_dims: Vec<usize>,
    pub n: usize,
    pub n_h: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// JSON description of an algebra.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub step: usize,
    pub strata_dims: Vec<usize>,
    pub brackets: Vec<BracketSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketSpec {
    pub a: [usize; 2],
    pub b: [usize; 2],
    pub out: Vec<(Coeff, [usize; 2])>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Coeff {
    fn to_rational(&self) -> Option<Rational> {
        match self {
            Coeff::Int(v) => Some(int(*v)),
            Coeff::Float(v) => Rational::from_float(*v),
            Coeff::Text(s) => parse_rational(s),
        }
    }
}

impl GroupSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl StratifiedAlgebra {
    /// Builds an algebra from raw entries `([e_a, e_b], [(coeff, e_l)])` over flat indices.
    /// Entries are taken verbatim; see [`StratifiedAlgebra::from_spec`] for partner inference.
    pub fn from_entries(
        name: &str,
        dims: Vec<usize>,
        entries: Vec<(usize, usize, Vec<(Rational, usize)>)>,
        mode: ScalarMode,
    ) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidSpec("strata dimensions must be positive".into()));
        }
        let n: usize = dims.iter().sum();
        let mut offsets = Vec::with_capacity(dims.len());
        let mut strata = Vec::with_capacity(n);
        let mut acc = 0;
        for (r, &k) in dims.iter().enumerate() {
            offsets.push(acc);
            acc += k;
            strata.extend(std::iter::repeat_n((r + 1) as u32, k));
        }
        let mut table: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
        for (a, b, out) in entries {
            if a >= n || b >= n {
                return Err(Error::InvalidSpec(format!("bracket index out of range: ({a},{b})")));
            }
            for (c, l) in out {
                if l >= n {
                    return Err(Error::InvalidSpec(format!("output index {l} out of range")));
                }
                *table.entry((a, b, l)).or_insert_with(Rational::zero) += c;
            }
        }
        let constants: Vec<StructureConstant> = table
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((a, b, l), c)| StructureConstant { a, b, l, cf: rational_to_f64(&c), c })
            .collect();
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        dims.hash(&mut hasher);
        for k in &constants {
            (k.a, k.b, k.l, k.c.to_string()).hash(&mut hasher);
        }
        Ok(StratifiedAlgebra {
            name: name.to_string(),
            dims,
            offsets,
            strata,
            constants,
            mode,
            fingerprint: hasher.finish(),
            bch: OnceLock::new(),
            fields: OnceLock::new(),
        })
    }

    /// Builds an algebra from a JSON spec. A bracket given in one order only
    /// gets its antisymmetric partner; if both orders are listed both are kept.
    pub fn from_spec(spec: &GroupSpec) -> Result<Self> {
        if spec.step != spec.strata_dims.len() {
            return Err(Error::InvalidSpec(format!(
                "step {} does not match {} strata",
                spec.step,
                spec.strata_dims.len()
            )));
        }
        let dims = spec.strata_dims.clone();
        let flat = |ri: [usize; 2]| -> Result<usize> {
            let (r, i) = (ri[0], ri[1]);
            if r == 0 || r > dims.len() || i == 0 || i > dims[r - 1] {
                return Err(Error::IndexOutOfRange { r, i });
            }
            Ok(dims[..r - 1].iter().sum::<usize>() + i - 1)
        };
        let mut given: HashMap<(usize, usize), Vec<(Rational, usize)>> = HashMap::new();
        let mut order = Vec::new();
        for br in &spec.brackets {
            let a = flat(br.a)?;
            let b = flat(br.b)?;
            let mut out = Vec::new();
            for (c, l) in &br.out {
                let q = c
                    .to_rational()
                    .ok_or_else(|| Error::InvalidSpec(format!("bad coefficient {c:?}")))?;
                out.push((q, flat(*l)?));
            }
            if !given.contains_key(&(a, b)) {
                order.push((a, b));
            }
            given.entry((a, b)).or_default().extend(out);
        }
        let mut entries = Vec::new();
        for &(a, b) in &order {
            let out = given[&(a, b)].clone();
            if a != b && !given.contains_key(&(b, a)) {
                entries.push((b, a, out.iter().map(|(c, l)| (-c.clone(), *l)).collect()));
            }
            entries.push((a, b, out));
        }
        let name = spec.name.clone().unwrap_or_else(|| "custom".into());
        Self::from_entries(&name, dims, entries, ScalarMode::ExactRational)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_spec(&GroupSpec::from_json(text)?)
    }

    /// Serializes the table back to a spec, listing each unordered pair once
    /// when the table is antisymmetric.
    pub fn to_spec(&self) -> GroupSpec {
        let mut grouped: BTreeMap<(usize, usize), Vec<(Coeff, [usize; 2])>> = BTreeMap::new();
        for k in &self.constants {
            let partner_ok = self
                .constants
                .iter()
                .any(|q| q.a == k.b && q.b == k.a && q.l == k.l && q.c == -k.c.clone());
            if partner_ok && k.a > k.b {
                continue;
            }
            let (r, i) = self.label(k.l);
            grouped.entry((k.a, k.b)).or_default().push((Coeff::Text(k.c.to_string()), [r, i]));
        }
        GroupSpec {
            name: Some(self.name.clone()),
            step: self.step(),
            strata_dims: self.dims.clone(),
            brackets: grouped
                .into_iter()
                .map(|((a, b), out)| {
                    let (ra, ia) = self.label(a);
                    let (rb, ib) = self.label(b);
                    BracketSpec { a: [ra, ia], b: [rb, ib], out }
                })
                .collect(),
        }
    }

    pub fn h3() -> Self {
        Self::from_json(include_str!("../data/h3.json")).expect("bundled spec")
    }

    pub fn h5() -> Self {
        Self::from_json(include_str!("../data/h5.json")).expect("bundled spec")
    }

    /// The step-3 Engel algebra with `k = (2,1,1)`.
    pub fn engel() -> Self {
        Self::from_json(include_str!("../data/engel.json")).expect("bundled spec")
    }

    pub fn bundled(name: &str) -> Option<Self> {
        match name {
            "h3" => Some(Self::h3()),
            "h5" => Some(Self::h5()),
            "engel" => Some(Self::engel()),
            _ => None,
        }
    }

    pub fn with_mode(mut self, mode: ScalarMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> ScalarMode {
        self.mode
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn step(&self) -> usize {
        self.dims.len()
    }

    pub fn strata_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.strata.len()
    }

    /// Horizontal dimension `k = k_1`.
    pub fn horizontal_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn homogeneous_dim(&self) -> usize {
        self.dims.iter().enumerate().map(|(r, k)| (r + 1) * k).sum()
    }

    /// Stratum (1-based) of each flat basis index.
    pub fn weights(&self) -> &[u32] {
        &self.strata
    }

    pub fn stratum_of(&self, flat: usize) -> usize {
        self.strata[flat] as usize
    }

    pub fn constants(&self) -> &[StructureConstant] {
        &self.constants
    }

    /// Flat index of the 1-based pair `(r, i)`.
    pub fn index(&self, r: usize, i: usize) -> Result<usize> {
        if r == 0 || r > self.dims.len() || i == 0 || i > self.dims[r - 1] {
            return Err(Error::IndexOutOfRange { r, i });
        }
        Ok(self.offsets[r - 1] + i - 1)
    }

    /// 1-based pair `(r, i)` of a flat index.
    pub fn label(&self, flat: usize) -> (usize, usize) {
        let r = self.strata[flat] as usize;
        (r, flat - self.offsets[r - 1] + 1)
    }

    /// Flat indices of stratum `r` (1-based).
    pub fn stratum_range(&self, r: usize) -> std::ops::Range<usize> {
        self.offsets[r - 1]..self.offsets[r - 1] + self.dims[r - 1]
    }

    pub fn point<S: Scalar>(&self, coords: Vec<S>) -> Result<GroupPoint<S>> {
        self.check_len(coords.len())?;
        Ok(GroupPoint { coords, algebra: self.fingerprint })
    }

    pub fn identity<S: Scalar>(&self) -> GroupPoint<S> {
        GroupPoint { coords: vec![S::nil(); self.dim()], algebra: self.fingerprint }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: len });
        }
        Ok(())
    }

    fn check_point<S>(&self, p: &GroupPoint<S>) -> Result<()> {
        if p.algebra != self.fingerprint {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    /// Checks every axiom of a stratified algebra; never fails.
    pub fn validate(&self) -> ValidationReport {
        let n = self.dim();
        let s = self.step();
        let mut violations = Vec::new();
        let get = |a: usize, b: usize| -> Vec<Rational> {
            let mut v = vec![Rational::zero(); n];
            for k in self.constants.iter().filter(|k| k.a == a && k.b == b) {
                v[k.l] += &k.c;
            }
            v
        };
        let mut table = vec![vec![Vec::new(); n]; n];
        for (a, row) in table.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                *cell = get(a, b);
            }
        }
        for a in 0..n {
            for b in a..n {
                let ok = (0..n).all(|l| table[a][b][l] == -table[b][a][l].clone());
                if !ok {
                    violations.push(Violation::Antisymmetry { a: self.label(a), b: self.label(b) });
                }
            }
        }
        for k in &self.constants {
            let target = self.strata[k.a] + self.strata[k.b];
            if self.strata[k.l] != target {
                violations.push(Violation::Grading {
                    a: self.label(k.a),
                    b: self.label(k.b),
                    out: self.label(k.l),
                });
            }
        }
        let br = |u: &[Rational], v: &[Rational]| -> Vec<Rational> {
            let mut out = vec![Rational::zero(); n];
            for k in &self.constants {
                if !u[k.a].is_zero() && !v[k.b].is_zero() {
                    out[k.l] += &k.c * &u[k.a] * &v[k.b];
                }
            }
            out
        };
        let unit = |i: usize| -> Vec<Rational> {
            let mut v = vec![Rational::zero(); n];
            v[i] = Rational::one();
            v
        };
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let (ea, eb, ec) = (unit(a), unit(b), unit(c));
                    let t1 = br(&ea, &br(&eb, &ec));
                    let t2 = br(&eb, &br(&ec, &ea));
                    let t3 = br(&ec, &br(&ea, &eb));
                    if (0..n).any(|l| !(&t1[l] + &t2[l] + &t3[l]).is_zero()) {
                        violations.push(Violation::Jacobi {
                            a: self.label(a),
                            b: self.label(b),
                            c: self.label(c),
                        });
                    }
                }
            }
        }
        for r in 1..s {
            let next = self.stratum_range(r + 1);
            let mut rows = Vec::new();
            for a in self.stratum_range(1) {
                for b in self.stratum_range(r) {
                    rows.push(next.clone().map(|l| table[a][b][l].clone()).collect::<Vec<_>>());
                }
            }
            let rank = rational_rank(rows);
            if rank != self.dims[r] {
                violations.push(Violation::Generation { stratum: r + 1, rank, expected: self.dims[r] });
            }
        }
        let n_h = self.homogeneous_dim();
        if s >= 2 && (self.dims[0] < 2 || self.dims[1] < 1 || n_h < 4) {
            violations.push(Violation::Dimension { k1: self.dims[0], k2: self.dims[1], n_h });
        }
        ValidationReport {
            algebra: self.name.clone(),
            strata_dims: self.dims.clone(),
            n,
            n_h,
            violations,
        }
    }

    /// Bilinear extension of the structure constants.
    pub fn bracket<S: Scalar>(&self, u: &[S], v: &[S]) -> Result<Vec<S>> {
        self.check_len(u.len())?;
        self.check_len(v.len())?;
        Ok(self.bracket_unchecked(u, v))
    }

    fn bracket_unchecked<S: Scalar>(&self, u: &[S], v: &[S]) -> Vec<S> {
        let mut out = vec![S::nil(); self.dim()];
        for k in &self.constants {
            if u[k.a].is_nil() || v[k.b].is_nil() {
                continue;
            }
            let t = S::from_rational(&k.c) * u[k.a].clone() * v[k.b].clone();
            out[k.l] = out[k.l].clone() + t;
        }
        out
    }

    fn bch(&self) -> &Bch {
        self.bch.get_or_init(|| {
            let exact = dynkin_series(self);
            let compiled = exact.iter().map(|p| p.compile()).collect();
            Bch { exact, compiled }
        })
    }

    /// The BCH product as polynomials in `(x, y)`, `2n` variables.
    pub fn bch_polynomials(&self) -> &[Polynomial] {
        &self.bch().exact
    }

    /// `log(exp(p) exp(q))` on raw coordinate slices.
    pub fn mul<S: Scalar>(&self, p: &[S], q: &[S]) -> Vec<S> {
        let mut xy = Vec::with_capacity(2 * self.dim());
        xy.extend_from_slice(p);
        xy.extend_from_slice(q);
        self.bch().exact.iter().map(|c| c.eval(&xy)).collect()
    }

    /// Floating point product using the compiled series.
    pub fn mul_f64(&self, p: &[f64], q: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut xy = [0.0f64; 64];
        let buf: &mut [f64] = if 2 * n <= 64 { &mut xy[..2 * n] } else { return self.mul_f64_heap(p, q) };
        buf[..n].copy_from_slice(p);
        buf[n..].copy_from_slice(q);
        self.bch().compiled.iter().map(|c| c.eval(buf)).collect()
    }

    fn mul_f64_heap(&self, p: &[f64], q: &[f64]) -> Vec<f64> {
        let mut xy = p.to_vec();
        xy.extend_from_slice(q);
        self.bch().compiled.iter().map(|c| c.eval(&xy)).collect()
    }

    pub fn bch_product<S: Scalar>(&self, p: &GroupPoint<S>, q: &GroupPoint<S>) -> Result<GroupPoint<S>> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(GroupPoint { coords: self.mul(&p.coords, &q.coords), algebra: self.fingerprint })
    }

    pub fn inverse<S: Scalar>(&self, p: &GroupPoint<S>) -> GroupPoint<S> {
        GroupPoint { coords: neg(&p.coords), algebra: p.algebra }
    }

    pub fn dilate<S: Scalar>(&self, lambda: &S, p: &GroupPoint<S>) -> Result<GroupPoint<S>> {
        self.check_point(p)?;
        Ok(GroupPoint { coords: self.dilate_coords(lambda, &p.coords)?, algebra: self.fingerprint })
    }

    /// Scales stratum-`r` coordinates by `lambda^r`.
    pub fn dilate_coords<S: Scalar>(&self, lambda: &S, p: &[S]) -> Result<Vec<S>> {
        if !lambda.positive() {
            return Err(Error::InvalidDilation(lambda.approx()));
        }
        self.check_len(p.len())?;
        let mut pows = vec![S::unit()];
        for _ in 0..self.step() {
            let last = pows.last().unwrap().clone();
            pows.push(last * lambda.clone());
        }
        Ok(p.iter().zip(&self.strata).map(|(x, &r)| x.clone() * pows[r as usize].clone()).collect())
    }

    pub fn dilate_f64(&self, lambda: f64, p: &[f64]) -> Vec<f64> {
        p.iter().zip(&self.strata).map(|(x, &r)| x * lambda.powi(r as i32)).collect()
    }

    /// `N(p) = Σ |x_{r,i}|^{1/r}`.
    pub fn quasinorm<S: Scalar>(&self, p: &[S]) -> f64 {
        p.iter()
            .zip(&self.strata)
            .map(|(x, &r)| {
                let a = x.approx().abs();
                if r == 1 {
                    a
                } else {
                    a.powf(1.0 / r as f64)
                }
            })
            .sum()
    }

    /// Exact quasinorm as a sum of radicals.
    pub fn quasinorm_exact(&self, p: &[Rational]) -> RootSum {
        let mut out = RootSum::zero();
        for (x, &r) in p.iter().zip(&self.strata) {
            out.push_root(Signed::abs(x), r);
        }
        out
    }

    /// `N(p^{-1} q)`.
    pub fn quasimetric(&self, p: &[f64], q: &[f64]) -> f64 {
        self.quasinorm(&self.mul_f64(&neg(p), q))
    }

    pub(crate) fn fields_cache(&self) -> &OnceLock<Vec<crate::fields::VectorField>> {
        &self.fields
    }
}

pub fn neg<S: Scalar>(p: &[S]) -> Vec<S> {
    p.iter().map(|x| -x.clone()).collect()
}

/// Rank of a list of rational row vectors by Gaussian elimination.
pub fn rational_rank(mut rows: Vec<Vec<Rational>>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(rank, piv);
        let pivot = rows[rank][c].clone();
        for i in 0..rows.len() {
            if i != rank && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &pivot;
                for j in c..cols {
                    let t = &f * &rows[rank][j];
                    rows[i][j] -= t;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Symbolic BCH via the Dynkin series, truncated at total word length `s`.
fn dynkin_series(alg: &StratifiedAlgebra) -> Vec<Polynomial> {
    let n = alg.dim();
    let s = alg.step();
    let nv = 2 * n;
    let x: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(nv, i)).collect();
    let y: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(nv, n + i)).collect();
    let bracket = |u: &[Polynomial], v: &[Polynomial]| -> Vec<Polynomial> {
        let mut out = vec![Polynomial::zero(nv); n];
        for k in &alg.constants {
            if u[k.a].is_zero() || v[k.b].is_zero() {
                continue;
            }
            let prod = u[k.a].mul(&v[k.b]);
            out[k.l].add_assign_scaled(&prod, &k.c);
        }
        out
    };
    // right-nested brackets keyed by word (false = X, true = Y)
    let mut nested: HashMap<Vec<bool>, Vec<Polynomial>> = HashMap::new();
    fn eval_word(
        w: &[bool],
        x: &[Polynomial],
        y: &[Polynomial],
        cache: &mut HashMap<Vec<bool>, Vec<Polynomial>>,
        bracket: &dyn Fn(&[Polynomial], &[Polynomial]) -> Vec<Polynomial>,
    ) -> Vec<Polynomial> {
        if let Some(v) = cache.get(w) {
            return v.clone();
        }
        let v = if w.len() == 1 {
            if w[0] { y.to_vec() } else { x.to_vec() }
        } else {
            let tail = eval_word(&w[1..], x, y, cache, bracket);
            let head = if w[0] { y } else { x };
            bracket(head, &tail)
        };
        cache.insert(w.to_vec(), v.clone());
        v
    }
    let mut out = vec![Polynomial::zero(nv); n];
    let fact = |k: usize| -> Rational { (1..=k).fold(Rational::one(), |a, i| a * int(i as i64)) };
    // enumerate sequences of (r_i, s_i) blocks with total length <= s
    fn blocks(remaining: usize, m: usize, cur: &mut Vec<(usize, usize)>, all: &mut Vec<Vec<(usize, usize)>>) {
        if m == 0 {
            all.push(cur.clone());
            return;
        }
        for r in 0..=remaining {
            for q in 0..=(remaining - r) {
                if r + q == 0 {
                    continue;
                }
                cur.push((r, q));
                blocks(remaining - r - q, m - 1, cur, all);
                cur.pop();
            }
        }
    }
    for m in 1..=s {
        let mut seqs = Vec::new();
        blocks(s, m, &mut Vec::new(), &mut seqs);
        for seq in seqs {
            let len: usize = seq.iter().map(|(r, q)| r + q).sum();
            let mut word = Vec::with_capacity(len);
            let mut denom = int(len as i64);
            for &(r, q) in &seq {
                word.extend(std::iter::repeat_n(false, r));
                word.extend(std::iter::repeat_n(true, q));
                denom = denom * fact(r) * fact(q);
            }
            let sign = if m % 2 == 1 { 1 } else { -1 };
            let coeff = rat(sign, m as i64) / denom;
            let val = eval_word(&word, &x, &y, &mut nested, &bracket);
            for (o, v) in out.iter_mut().zip(&val) {
                o.add_assign_scaled(v, &coeff);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&a| int(a)).collect()
    }

    #[test]
    fn bundled_algebras_validate() {
        for alg in [StratifiedAlgebra::h3(), StratifiedAlgebra::h5(), StratifiedAlgebra::engel()] {
            let rep = alg.validate();
            assert!(rep.is_valid(), "{}: {:?}", alg.name(), rep.violations);
        }
        assert_eq!(StratifiedAlgebra::h3().homogeneous_dim(), 4);
        assert_eq!(StratifiedAlgebra::h5().homogeneous_dim(), 6);
        assert_eq!(StratifiedAlgebra::engel().homogeneous_dim(), 7);
    }

    #[test]
    fn broken_antisymmetry_is_reported() {
        let alg = StratifiedAlgebra::from_entries(
            "bad",
            vec![2, 1],
            vec![(0, 1, vec![(int(1), 2)]), (1, 0, vec![(int(2), 2)])],
            ScalarMode::ExactRational,
        )
        .unwrap();
        let rep = alg.validate();
        assert!(rep.violations.iter().any(|v| matches!(v, Violation::Antisymmetry { .. })));
    }

    #[test]
    fn missing_generation_is_reported() {
        let alg = StratifiedAlgebra::from_entries("flat", vec![2, 1], vec![], ScalarMode::ExactRational).unwrap();
        let rep = alg.validate();
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Generation { stratum: 2, rank: 0, expected: 1 })));
    }

    #[test]
    fn heisenberg_bracket_examples() {
        let alg = StratifiedAlgebra::h3();
        assert_eq!(alg.bracket(&q(&[1, 0, 0]), &q(&[0, 1, 0])).unwrap(), q(&[0, 0, 1]));
        assert_eq!(alg.bracket(&q(&[1, 1, 0]), &q(&[1, -1, 0])).unwrap(), q(&[0, 0, -2]));
        assert!(alg.bracket(&q(&[1, 1]), &q(&[1, 1, 0])).is_err());
    }

    #[test]
    fn heisenberg_products() {
        let alg = StratifiedAlgebra::h3();
        let a = alg.mul(&q(&[1, 0, 0]), &q(&[0, 1, 0]));
        assert_eq!(a, vec![int(1), int(1), rat(1, 2)]);
        let c = alg.mul(&alg.mul(&a, &q(&[-1, 0, 0])), &q(&[0, -1, 0]));
        assert_eq!(c, q(&[0, 0, 1]));
    }

    #[test]
    fn dilation_examples() {
        let alg = StratifiedAlgebra::h3();
        assert_eq!(alg.dilate_coords(&int(2), &q(&[1, 1, 1])).unwrap(), q(&[2, 2, 4]));
        let lhs = alg.dilate_coords(&int(2), &alg.mul(&q(&[1, 0, 0]), &q(&[0, 1, 0]))).unwrap();
        assert_eq!(lhs, q(&[2, 2, 2]));
        assert_eq!(lhs, alg.mul(&q(&[2, 0, 0]), &q(&[0, 2, 0])));
        assert!(matches!(alg.dilate_coords(&int(0), &q(&[1, 1, 1])), Err(Error::InvalidDilation(_))));
    }

    #[test]
    fn quasinorm_examples() {
        let alg = StratifiedAlgebra::h3();
        assert_eq!(alg.quasinorm(&[1.0, 1.0, 1.0]), 3.0);
        assert_eq!(alg.quasinorm(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(alg.quasinorm(&alg.dilate_f64(2.0, &[1.0, 1.0, 1.0])), 6.0);
        assert_eq!(alg.quasimetric(&[0.0; 3], &[0.0, 0.0, 1.0]), 1.0);
        let e = alg.quasinorm_exact(&q(&[1, 1, 1]));
        assert_eq!(e.rational, int(3));
    }

    #[test]
    fn spec_roundtrip_preserves_table() {
        for alg in [StratifiedAlgebra::h3(), StratifiedAlgebra::engel()] {
            let text = serde_json::to_string(&alg.to_spec()).unwrap();
            let back = StratifiedAlgebra::from_json(&text).unwrap();
            assert_eq!(back.fingerprint, alg.fingerprint);
        }
    }

    #[test]
    fn foreign_points_are_rejected() {
        let h3 = StratifiedAlgebra::h3();
        let engel = StratifiedAlgebra::engel();
        let p = engel.identity::<f64>();
        assert!(matches!(h3.bch_product(&p, &p), Err(Error::AlgebraMismatch)));
        assert!(h3.point(vec![0.0; 4]).is_err());
    }
}
