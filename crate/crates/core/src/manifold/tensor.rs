//! Tensors whose components are jets, with the coordinate formulas shared by
//! source and target geometry.
//!
//! Layout: contravariant slots first, then covariant slots, row-major. A
//! connection is stored as the (1,2) array `Γ[p][i][j] = Γ^p_ij`, so that
//! `∇_{∂i} ∂j = Γ^p_ij ∂p`.

use crate::jets::{Jet, Substitution};

#[derive(Clone, Debug)]
pub(crate) struct JetTensor {
    dim: usize,
    up: usize,
    down: usize,
    data: Vec<Jet>,
}

/// Calls `f` for every multi-index of `rank` slots over `0..dim`, row-major.
pub(crate) fn for_each_index(dim: usize, rank: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; rank];
    let total = dim.pow(rank as u32);
    for _ in 0..total {
        f(&idx);
        for s in (0..rank).rev() {
            idx[s] += 1;
            if idx[s] < dim {
                break;
            }
            idx[s] = 0;
        }
    }
}

impl JetTensor {
    pub fn from_fn(dim: usize, up: usize, down: usize, mut f: impl FnMut(&[usize]) -> Jet) -> Self {
        let mut data = Vec::with_capacity(dim.pow((up + down) as u32));
        for_each_index(dim, up + down, |ix| data.push(f(ix)));
        JetTensor { dim, up, down, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn valence(&self) -> (usize, usize) {
        (self.up, self.down)
    }

    pub fn rank(&self) -> usize {
        self.up + self.down
    }

    fn offset(&self, ix: &[usize]) -> usize {
        debug_assert_eq!(ix.len(), self.rank());
        ix.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn at(&self, ix: &[usize]) -> &Jet {
        &self.data[self.offset(ix)]
    }

    pub fn values(&self) -> Vec<f64> {
        self.data.iter().map(Jet::value).collect()
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> Self {
        JetTensor {
            dim: self.dim,
            up: self.up,
            down: self.down,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(&Jet, &Jet) -> Jet) -> Self {
        assert_eq!((self.dim, self.up, self.down), (other.dim, other.up, other.down));
        JetTensor {
            dim: self.dim,
            up: self.up,
            down: self.down,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn substitute(&self, sub: &Substitution) -> Self {
        self.map(|j| sub.apply(j))
    }

    /// Covariant derivative; the differentiation slot is appended as the last
    /// covariant index. The result has one order less.
    pub fn covariant(&self, gamma: &JetTensor) -> Self {
        let (up, down) = (self.up, self.down);
        let rank = up + down;
        JetTensor::from_fn(self.dim, up, down + 1, |ix| {
            let a = ix[rank];
            let base = &ix[..rank];
            let mut v = self.at(base).derivative(a);
            let mut probe = base.to_vec();
            for s in 0..rank {
                let orig = probe[s];
                for q in 0..self.dim {
                    probe[s] = q;
                    if s < up {
                        v.add_product(gamma.at(&[orig, a, q]), self.at(&probe));
                    } else {
                        v -= &(gamma.at(&[q, a, orig]) * self.at(&probe));
                    }
                }
                probe[s] = orig;
            }
            v
        })
    }
}

/// Inverse of a symmetric positive definite matrix of jets (Gauss-Jordan,
/// no pivoting: SPD pivots are positive).
pub(crate) fn inverse(g: &JetTensor) -> JetTensor {
    let n = g.dim();
    let mut a: Vec<Vec<Jet>> = (0..n)
        .map(|i| (0..n).map(|j| g.at(&[i, j]).clone()).collect())
        .collect();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a[0][0].lift(if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = a[col][col].recip();
        for j in 0..n {
            a[col][j] = &a[col][j] * &pivot;
            inv[col][j] = &inv[col][j] * &pivot;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col].clone();
            for j in 0..n {
                let da = &factor * &a[col][j];
                let di = &factor * &inv[col][j];
                a[row][j] -= &da;
                inv[row][j] -= &di;
            }
        }
    }
    JetTensor::from_fn(n, 2, 0, |ix| inv[ix[0]][ix[1]].clone())
}

/// Levi-Civita Christoffel symbols from jets of `g` and `g⁻¹`.
pub(crate) fn levi_civita(g: &JetTensor, ginv: &JetTensor) -> JetTensor {
    let n = g.dim();
    let dg: Vec<JetTensor> = (0..n).map(|a| g.map(|j| j.derivative(a))).collect();
    JetTensor::from_fn(n, 1, 2, |ix| {
        let (p, i, j) = (ix[0], ix[1], ix[2]);
        let mut v = dg[0].at(&[0, 0]).lift(0.0);
        for l in 0..n {
            let s = dg[i].at(&[l, j]) + dg[j].at(&[l, i]) - dg[l].at(&[i, j]);
            v.add_product(ginv.at(&[p, l]), &s);
        }
        v.scale(0.5)
    })
}

/// Curvature `R[p][i][j][k] = (R(∂i,∂j)∂k)^p` of a connection.
pub(crate) fn riemann(gamma: &JetTensor) -> JetTensor {
    let n = gamma.dim();
    JetTensor::from_fn(n, 1, 3, |ix| {
        let (p, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        let mut v = gamma.at(&[p, j, k]).derivative(i) - gamma.at(&[p, i, k]).derivative(j);
        for l in 0..n {
            v.add_product(gamma.at(&[l, j, k]), gamma.at(&[p, i, l]));
            v -= &(gamma.at(&[l, i, k]) * gamma.at(&[p, j, l]));
        }
        v
    })
}

/// Curvature interchange `L` defined by `g(L(Z,W)X, Y) = g(R(X,Y)Z, W)`:
/// `L[q][z][w][x] = g^{qy} g_{pw} R[p][x][y][z]`.
pub(crate) fn interchange(r: &JetTensor, g: &JetTensor, ginv: &JetTensor) -> JetTensor {
    let n = r.dim();
    // lowered[w][x][y][z] = g_{pw} R^p_{xyz}
    let lowered = JetTensor::from_fn(n, 0, 4, |ix| {
        let mut v = r.at(&[0, 0, 0, 0]).lift(0.0);
        for p in 0..n {
            v.add_product(g.at(&[p, ix[0]]), r.at(&[p, ix[1], ix[2], ix[3]]));
        }
        v
    });
    JetTensor::from_fn(n, 1, 3, |ix| {
        let (q, z, w, x) = (ix[0], ix[1], ix[2], ix[3]);
        let mut v = r.at(&[0, 0, 0, 0]).lift(0.0);
        for y in 0..n {
            v.add_product(ginv.at(&[q, y]), lowered.at(&[w, x, y, z]));
        }
        v
    })
}
