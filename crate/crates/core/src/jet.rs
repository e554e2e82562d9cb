//! Second-order Wirtinger jets of matrix-valued functions.
//!
//! A [`MatJet`] carries `X`, `∂_α X`, `∂̄_α X` and the mixed derivatives
//! `∂̄_β ∂_α X` at one point. That is exactly what the Chern curvature needs,
//! and it is closed under products, adjoints and inverses.

use crate::linalg::{cr, zeros, CMat, CVec, C64};

#[derive(Debug, Clone)]
pub struct MatJet {
    pub val: CMat,
    /// `d[α] = ∂_α X`
    pub d: Vec<CMat>,
    /// `db[α] = ∂̄_α X`
    pub db: Vec<CMat>,
    /// `dd[α][β] = ∂̄_β ∂_α X`
    pub dd: Vec<Vec<CMat>>,
}

impl MatJet {
    pub fn constant(val: CMat, m: usize) -> Self {
        let (r, c) = val.shape();
        Self {
            val,
            d: vec![zeros(r, c); m],
            db: vec![zeros(r, c); m],
            dd: vec![vec![zeros(r, c); m]; m],
        }
    }

    /// Jet of a holomorphic function: the `∂̄` parts vanish.
    pub fn holomorphic(val: CMat, d: Vec<CMat>) -> Self {
        let (r, c) = val.shape();
        let m = d.len();
        Self {
            val,
            d,
            db: vec![zeros(r, c); m],
            dd: vec![vec![zeros(r, c); m]; m],
        }
    }

    pub fn chart_dim(&self) -> usize {
        self.d.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.val.shape()
    }

    fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        Self {
            val: f(&self.val),
            d: self.d.iter().map(&f).collect(),
            db: self.db.iter().map(&f).collect(),
            dd: self.dd.iter().map(|row| row.iter().map(&f).collect()).collect(),
        }
    }

    fn zip(&self, o: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Self {
        Self {
            val: f(&self.val, &o.val),
            d: self.d.iter().zip(&o.d).map(|(a, b)| f(a, b)).collect(),
            db: self.db.iter().zip(&o.db).map(|(a, b)| f(a, b)).collect(),
            dd: self
                .dd
                .iter()
                .zip(&o.dd)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(a, b)| f(a, b)).collect())
                .collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|a| a * s)
    }

    pub fn transpose(&self) -> Self {
        self.map(|a| a.transpose())
    }

    pub fn adjoint(&self) -> Self {
        let m = self.chart_dim();
        Self {
            val: self.val.adjoint(),
            d: self.db.iter().map(|a| a.adjoint()).collect(),
            db: self.d.iter().map(|a| a.adjoint()).collect(),
            dd: (0..m)
                .map(|a| (0..m).map(|b| self.dd[b][a].adjoint()).collect())
                .collect(),
        }
    }

    /// Product rule for any bilinear operation.
    pub fn bilinear(&self, o: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Self {
        let m = self.chart_dim();
        let (x, y) = (&self.val, &o.val);
        Self {
            val: f(x, y),
            d: (0..m).map(|a| f(&self.d[a], y) + f(x, &o.d[a])).collect(),
            db: (0..m).map(|a| f(&self.db[a], y) + f(x, &o.db[a])).collect(),
            dd: (0..m)
                .map(|a| {
                    (0..m)
                        .map(|b| {
                            f(&self.dd[a][b], y)
                                + f(&self.d[a], &o.db[b])
                                + f(&self.db[b], &o.d[a])
                                + f(x, &o.dd[a][b])
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.bilinear(o, |a, b| a * b)
    }

    /// `s · X` for a 1×1 jet `s`.
    pub fn scalar_mul(s: &Self, x: &Self) -> Self {
        s.bilinear(x, |a, b| b * a[(0, 0)])
    }

    /// `X ⊗ Yᵀ`, i.e. entry `((a, b), (c, d)) = X[a, c] · Y[d, b]`.
    pub fn kron_t(&self, o: &Self) -> Self {
        self.bilinear(o, |a, b| a.kronecker(&b.transpose()))
    }

    pub fn inverse(&self) -> Self {
        let y = crate::linalg::inv(&self.val);
        let m = self.chart_dim();
        let d: Vec<CMat> = self.d.iter().map(|xa| -(&y * xa * &y)).collect();
        let db: Vec<CMat> = self.db.iter().map(|xb| -(&y * xb * &y)).collect();
        let dd = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| {
                        -(&db[b] * &self.d[a] * &y)
                            - &y * &self.dd[a][b] * &y
                            - &y * &self.d[a] * &db[b]
                    })
                    .collect()
            })
            .collect();
        Self { val: y, d, db, dd }
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        self.map(|a| a.view((r0, c0), (nr, nc)).into_owned())
    }

    /// Restricts the chart coordinates to `coords` (rows and columns untouched).
    pub fn restrict_coords(&self, coords: &[usize]) -> Self {
        Self {
            val: self.val.clone(),
            d: coords.iter().map(|&a| self.d[a].clone()).collect(),
            db: coords.iter().map(|&a| self.db[a].clone()).collect(),
            dd: coords
                .iter()
                .map(|&a| coords.iter().map(|&b| self.dd[a][b].clone()).collect())
                .collect(),
        }
    }

    /// Simultaneous row/column restriction, for Gram fields of sub-frames.
    pub fn principal(&self, idx: &[usize]) -> Self {
        self.map(|a| CMat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])]))
    }
}

/// Second-order jet of a holomorphic scalar: value, gradient and Hessian.
#[derive(Debug, Clone)]
pub struct HoloScalar {
    pub v: C64,
    pub g: Vec<C64>,
    pub h: Vec<Vec<C64>>,
}

impl HoloScalar {
    pub fn constant(v: C64, m: usize) -> Self {
        Self {
            v,
            g: vec![cr(0.0); m],
            h: vec![vec![cr(0.0); m]; m],
        }
    }

    /// The coordinate function `z_idx`.
    pub fn coord(z: &[C64], idx: usize) -> Self {
        let mut s = Self::constant(z[idx], z.len());
        s.g[idx] = cr(1.0);
        s
    }

    pub fn add(&self, o: &Self) -> Self {
        let m = self.g.len();
        Self {
            v: self.v + o.v,
            g: (0..m).map(|a| self.g[a] + o.g[a]).collect(),
            h: (0..m).map(|a| (0..m).map(|b| self.h[a][b] + o.h[a][b]).collect()).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            v: self.v * c,
            g: self.g.iter().map(|x| x * c).collect(),
            h: self.h.iter().map(|r| r.iter().map(|x| x * c).collect()).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let m = self.g.len();
        Self {
            v: self.v * o.v,
            g: (0..m).map(|a| self.v * o.g[a] + o.v * self.g[a]).collect(),
            h: (0..m)
                .map(|a| {
                    (0..m)
                        .map(|b| {
                            self.v * o.h[a][b]
                                + o.v * self.h[a][b]
                                + self.g[a] * o.g[b]
                                + self.g[b] * o.g[a]
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// Second-order jet of a holomorphic map `p: C^m -> C^N`.
#[derive(Debug, Clone)]
pub struct HoloJet {
    /// `p(z)`
    pub value: CVec,
    /// `jac[(i, α)] = ∂_α p_i`
    pub jac: CMat,
    /// `hess[α][(i, β)] = ∂_α ∂_β p_i`
    pub hess: Vec<CMat>,
}

impl HoloJet {
    pub fn from_components(comps: &[HoloScalar], m: usize) -> Self {
        let n = comps.len();
        Self {
            value: CVec::from_iterator(n, comps.iter().map(|s| s.v)),
            jac: CMat::from_fn(n, m, |i, a| comps[i].g[a]),
            hess: (0..m)
                .map(|a| CMat::from_fn(n, m, |i, b| comps[i].h[a][b]))
                .collect(),
        }
    }

    pub fn chart_dim(&self) -> usize {
        self.jac.ncols()
    }

    /// Jet of `p` as an `N×1` matrix.
    pub fn value_jet(&self) -> MatJet {
        let n = self.value.len();
        let val = CMat::from_column_slice(n, 1, self.value.as_slice());
        let d = (0..self.chart_dim())
            .map(|a| self.jac.columns(a, 1).into_owned())
            .collect();
        MatJet::holomorphic(val, d)
    }

    /// Jet of the Jacobian `Jp` as an `N×m` matrix.
    pub fn jacobian_jet(&self) -> MatJet {
        MatJet::holomorphic(self.jac.clone(), self.hess.clone())
    }

    /// Jet of the Gram field `∂∂̄ log ‖p‖²`.
    pub fn log_norm_gram(&self) -> MatJet {
        let p = self.value_jet();
        let jp = self.jacobian_jet();
        let n_inv = p.adjoint().mul(&p).inverse();
        let n_inv2 = n_inv.mul(&n_inv);
        let a = jp.adjoint().mul(&jp);
        let c = jp.adjoint().mul(&p);
        let cc = c.mul(&c.adjoint());
        MatJet::scalar_mul(&n_inv, &a).sub(&MatJet::scalar_mul(&n_inv2, &cc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, fro};

    fn fd_check(f: impl Fn(&[C64]) -> MatJet, z: &[C64]) -> f64 {
        let h = 1e-5;
        let j = f(z);
        let m = z.len();
        let mut worst: f64 = 0.0;
        for a in 0..m {
            let shift = |dz: C64| {
                let mut w = z.to_vec();
                w[a] += dz;
                f(&w)
            };
            let (xp, xm, yp, ym) = (shift(cr(h)), shift(cr(-h)), shift(c(0.0, h)), shift(c(0.0, -h)));
            let dx = (&xp.val - &xm.val) / cr(2.0 * h);
            let dy = (&yp.val - &ym.val) / cr(2.0 * h);
            let d = (&dx - &dy * c(0.0, 1.0)) * cr(0.5);
            let db = (&dx + &dy * c(0.0, 1.0)) * cr(0.5);
            worst = worst.max(fro(&(d - &j.d[a]))).max(fro(&(db - &j.db[a])));
            for b in 0..m {
                let dx = (&xp.db[b] - &xm.db[b]) / cr(2.0 * h);
                let dy = (&yp.db[b] - &ym.db[b]) / cr(2.0 * h);
                let dd = (&dx - &dy * c(0.0, 1.0)) * cr(0.5);
                worst = worst.max(fro(&(dd - &j.dd[a][b])));
            }
        }
        worst
    }

    fn fs_jet(z: &[C64]) -> MatJet {
        let m = z.len();
        let mut comps = vec![HoloScalar::constant(cr(1.0), m)];
        comps.extend((0..m).map(|a| HoloScalar::coord(z, a)));
        HoloJet::from_components(&comps, m).log_norm_gram()
    }

    #[test]
    fn fubini_study_gram_at_origin_and_point() {
        let j = fs_jet(&[cr(0.0)]);
        assert!((j.val[(0, 0)] - cr(1.0)).norm() < 1e-15);
        assert!((j.dd[0][0][(0, 0)] - cr(-2.0)).norm() < 1e-14);
        let z = c(0.3, -0.4);
        let j = fs_jet(&[z]);
        let expect = 1.0 / (1.0 + z.norm_sqr()).powi(2);
        assert!((j.val[(0, 0)].re - expect).abs() < 1e-14);
    }

    #[test]
    fn jets_match_finite_differences() {
        let z = [c(0.2, 0.1), c(-0.3, 0.25)];
        assert!(fd_check(fs_jet, &z) < 1e-8);
        let inv = |z: &[C64]| fs_jet(z).inverse();
        assert!(fd_check(inv, &z) < 1e-7);
        let herm = |z: &[C64]| {
            let g = fs_jet(z);
            g.mul(&g.adjoint()).kron_t(&g)
        };
        assert!(fd_check(herm, &z) < 1e-7);
    }
}
