//! Concrete [`FormSource`]s: constants, closures, sums, potentials,
//! pullbacks and restrictions to coordinate slices.

use std::sync::Arc;

use super::FormSource;
use crate::jet::{HoloJet, MatJet};
use crate::linalg::{cr, zeros, CMat, C64};

type EvalFn = Arc<dyn Fn(&[C64]) -> CMat + Send + Sync>;
type JetFn = Arc<dyn Fn(&[C64]) -> MatJet + Send + Sync>;
type HoloFn = Arc<dyn Fn(&[C64]) -> HoloJet + Send + Sync>;

pub struct ConstantSource {
    gram: CMat,
    m: usize,
}

impl ConstantSource {
    pub fn new(gram: CMat, chart_dim: usize) -> Self {
        Self { gram, m: chart_dim }
    }
}

impl FormSource for ConstantSource {
    fn chart_dim(&self) -> usize {
        self.m
    }
    fn frame_rank(&self) -> usize {
        self.gram.nrows()
    }
    fn eval(&self, _z: &[C64]) -> CMat {
        self.gram.clone()
    }
    fn jet(&self, _z: &[C64]) -> Option<MatJet> {
        Some(MatJet::constant(self.gram.clone(), self.m))
    }
}

/// Field given by closures; the jet closure is optional.
pub struct FnSource {
    m: usize,
    r: usize,
    eval: EvalFn,
    jet: Option<JetFn>,
}

impl FnSource {
    pub fn new(m: usize, r: usize, f: impl Fn(&[C64]) -> CMat + Send + Sync + 'static) -> Self {
        Self {
            m,
            r,
            eval: Arc::new(f),
            jet: None,
        }
    }

    /// Field whose value is read off its analytic jet.
    pub fn from_jet(m: usize, r: usize, j: impl Fn(&[C64]) -> MatJet + Send + Sync + 'static) -> Self {
        let j: JetFn = Arc::new(j);
        let jv = j.clone();
        Self {
            m,
            r,
            eval: Arc::new(move |z| jv(z).val),
            jet: Some(j),
        }
    }
}

impl FormSource for FnSource {
    fn chart_dim(&self) -> usize {
        self.m
    }
    fn frame_rank(&self) -> usize {
        self.r
    }
    fn eval(&self, z: &[C64]) -> CMat {
        (self.eval)(z)
    }
    fn jet(&self, z: &[C64]) -> Option<MatJet> {
        self.jet.as_ref().map(|j| j(z))
    }
}

/// `Σ c_i G_i` over sources of equal shape.
pub struct SumSource {
    parts: Vec<(f64, Arc<dyn FormSource>)>,
}

impl SumSource {
    pub fn new(parts: Vec<(f64, Arc<dyn FormSource>)>) -> Self {
        assert!(!parts.is_empty(), "empty sum");
        let (m, r) = (parts[0].1.chart_dim(), parts[0].1.frame_rank());
        assert!(
            parts.iter().all(|(_, p)| p.chart_dim() == m && p.frame_rank() == r),
            "summands differ in shape"
        );
        Self { parts }
    }
}

impl FormSource for SumSource {
    fn chart_dim(&self) -> usize {
        self.parts[0].1.chart_dim()
    }
    fn frame_rank(&self) -> usize {
        self.parts[0].1.frame_rank()
    }
    fn eval(&self, z: &[C64]) -> CMat {
        let r = self.frame_rank();
        self.parts
            .iter()
            .fold(zeros(r, r), |acc, (c, p)| acc + p.eval(z) * cr(*c))
    }
    fn jet(&self, z: &[C64]) -> Option<MatJet> {
        let mut acc: Option<MatJet> = None;
        for (c, p) in &self.parts {
            let j = p.jet(z)?.scale(cr(*c));
            acc = Some(match acc {
                None => j,
                Some(a) => a.add(&j),
            });
        }
        acc
    }
}

/// Tangent Gram field `∂∂̄ Σ_i w_i log ‖p_i(z)‖²` of a sum of potentials.
pub struct PotentialSource {
    m: usize,
    terms: Vec<(f64, HoloFn)>,
}

impl PotentialSource {
    pub fn new(m: usize, p: impl Fn(&[C64]) -> HoloJet + Send + Sync + 'static) -> Self {
        Self {
            m,
            terms: vec![(1.0, Arc::new(p))],
        }
    }

    pub fn plus(mut self, weight: f64, p: impl Fn(&[C64]) -> HoloJet + Send + Sync + 'static) -> Self {
        self.terms.push((weight, Arc::new(p)));
        self
    }

    fn gram_jet(&self, z: &[C64]) -> MatJet {
        let mut acc: Option<MatJet> = None;
        for (w, p) in &self.terms {
            let j = p(z).log_norm_gram().scale(cr(*w));
            acc = Some(match acc {
                None => j,
                Some(a) => a.add(&j),
            });
        }
        acc.expect("at least one potential term")
    }
}

impl FormSource for PotentialSource {
    fn chart_dim(&self) -> usize {
        self.m
    }
    fn frame_rank(&self) -> usize {
        self.m
    }
    fn eval(&self, z: &[C64]) -> CMat {
        self.gram_jet(z).val
    }
    fn jet(&self, z: &[C64]) -> Option<MatJet> {
        Some(self.gram_jet(z))
    }
}

/// Holomorphic map between charts with an analytic Jacobian.
#[derive(Clone)]
pub struct HoloMap {
    pub dim_in: usize,
    pub dim_out: usize,
    f: Arc<dyn Fn(&[C64]) -> Vec<C64> + Send + Sync>,
    jac: Arc<dyn Fn(&[C64]) -> CMat + Send + Sync>,
}

impl HoloMap {
    pub fn new(
        dim_in: usize,
        dim_out: usize,
        f: impl Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static,
        jac: impl Fn(&[C64]) -> CMat + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim_in,
            dim_out,
            f: Arc::new(f),
            jac: Arc::new(jac),
        }
    }

    /// Affine map `u -> a + L u`.
    pub fn affine(offset: Vec<C64>, linear: CMat) -> Self {
        let (dim_out, dim_in) = linear.shape();
        let l = linear.clone();
        Self::new(
            dim_in,
            dim_out,
            move |u| {
                let uv = crate::linalg::CVec::from_column_slice(u);
                let y = &l * uv;
                (0..offset.len()).map(|i| offset[i] + y[i]).collect()
            },
            move |_| linear.clone(),
        )
    }

    pub fn apply(&self, u: &[C64]) -> Vec<C64> {
        (self.f)(u)
    }

    /// `jacobian[(a, a')] = ∂ f_a / ∂ u_{a'}`.
    pub fn jacobian(&self, u: &[C64]) -> CMat {
        (self.jac)(u)
    }
}

/// The pulled-back bundle `f*E` in the pulled-back frame: `G'(u) = G(f(u))`.
pub struct PullbackSource {
    parent: Arc<dyn FormSource>,
    map: HoloMap,
}

impl PullbackSource {
    pub fn new(parent: Arc<dyn FormSource>, map: HoloMap) -> Self {
        assert_eq!(parent.chart_dim(), map.dim_out, "map lands in a chart of the wrong dimension");
        Self { parent, map }
    }
}

impl FormSource for PullbackSource {
    fn chart_dim(&self) -> usize {
        self.map.dim_in
    }
    fn frame_rank(&self) -> usize {
        self.parent.frame_rank()
    }
    fn eval(&self, u: &[C64]) -> CMat {
        self.parent.eval(&self.map.apply(u))
    }
    fn jet(&self, u: &[C64]) -> Option<MatJet> {
        let j = self.parent.jet(&self.map.apply(u))?;
        let jac = self.map.jacobian(u);
        let (mo, mi) = (self.map.dim_out, self.map.dim_in);
        let r = j.val.nrows();
        let comb = |mats: &[CMat], coeff: &dyn Fn(usize) -> C64| {
            (0..mo).fold(zeros(r, r), |acc, a| acc + &mats[a] * coeff(a))
        };
        let d = (0..mi).map(|p| comb(&j.d, &|a| jac[(a, p)])).collect();
        let db = (0..mi).map(|p| comb(&j.db, &|a| jac[(a, p)].conj())).collect();
        let dd = (0..mi)
            .map(|p| {
                (0..mi)
                    .map(|q| {
                        let mut acc = zeros(r, r);
                        for a in 0..mo {
                            for b in 0..mo {
                                acc += &j.dd[a][b] * (jac[(a, p)] * jac[(b, q)].conj());
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Some(MatJet { val: j.val, d, db, dd })
    }
}

/// Restriction of a tangent Gram field to the slice through `base` in which
/// only `coords` vary, with the matching principal block of the frame.
pub struct RestrictedSource {
    parent: Arc<dyn FormSource>,
    base: Vec<C64>,
    coords: Vec<usize>,
}

impl RestrictedSource {
    pub fn new(parent: Arc<dyn FormSource>, base: Vec<C64>, coords: Vec<usize>) -> Self {
        Self { parent, base, coords }
    }

    fn lift(&self, u: &[C64]) -> Vec<C64> {
        let mut z = self.base.clone();
        for (i, &a) in self.coords.iter().enumerate() {
            z[a] = u[i];
        }
        z
    }
}

impl FormSource for RestrictedSource {
    fn chart_dim(&self) -> usize {
        self.coords.len()
    }
    fn frame_rank(&self) -> usize {
        self.coords.len()
    }
    fn eval(&self, u: &[C64]) -> CMat {
        let g = self.parent.eval(&self.lift(u));
        CMat::from_fn(self.coords.len(), self.coords.len(), |i, j| g[(self.coords[i], self.coords[j])])
    }
    fn jet(&self, u: &[C64]) -> Option<MatJet> {
        let j = self.parent.jet(&self.lift(u))?;
        Some(j.restrict_coords(&self.coords).principal(&self.coords))
    }
}
