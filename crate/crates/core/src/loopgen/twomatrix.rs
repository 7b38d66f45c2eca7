//! Loop equations of the two-matrix model `e^{-Tr(V(M) + W(M~) - M M~)}`.
//!
//! Mixed moments `E(p^{(l)}_k p_rest)` are treated as formal symbols
//! `S(l, k, rest)`. Integration by parts in `x` gives the recursion
//!
//! `S(l+1, k, rest) = sum_j t_{j+1} S(l, k+j, rest)
//!                    - sum_{a<k} S(l, a, rest + {k-1-a})
//!                    - sum_i mu_i S(l, k+mu_i-1, rest - {mu_i})`
//!
//! with `S(0, k, rest) = p_k p_rest`, and integration by parts in `y` gives
//! `p_{k+1} p_rest = sum_l tt_{l+1} S(l, k, rest)`. Eliminating the `S`
//! symbols yields a pure-`X` polynomial `Q`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::symcore::{Coeff, Partition, PowerSumPoly};

/// Pair of polynomial potentials `(V, W)` given by `V' = sum t[j] x^j` and
/// `W' = sum tt[j] y^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPotential<C: Coeff> {
    pub t: Vec<C>,
    pub tt: Vec<C>,
}

impl<C: Coeff> TwoPotential<C> {
    pub fn new(t: Vec<C>, tt: Vec<C>) -> Result<Self> {
        for (name, v) in [("t", &t), ("tt", &tt)] {
            if v.len() < 2 || v.last().unwrap().is_zero() {
                return Err(Error::InvalidPotential(format!(
                    "field '{name}': need degree >= 2 with nonzero leading coefficient"
                )));
            }
        }
        Ok(TwoPotential { t, tt })
    }

    pub fn d(&self) -> usize {
        self.t.len() - 1
    }

    pub fn dt(&self) -> usize {
        self.tt.len() - 1
    }
}

struct Eliminator<'a, C: Coeff> {
    t: &'a [C],
    nvars: C,
    memo: HashMap<(usize, u32, Partition), PowerSumPoly<C>>,
}

impl<C: Coeff> Eliminator<'_, C> {
    fn symbol(&mut self, l: usize, k: u32, rest: &Partition) -> PowerSumPoly<C> {
        let key = (l, k, rest.clone());
        if let Some(p) = self.memo.get(&key) {
            return p.clone();
        }
        let nv = self.nvars.clone();
        let out = if l == 0 {
            let mut parts = vec![k];
            parts.extend_from_slice(rest.parts());
            PowerSumPoly::monomial(&parts, C::one(), nv)
        } else {
            let mut acc = PowerSumPoly::zero(nv.clone());
            for (j, tj) in self.t.iter().enumerate() {
                if tj.is_zero() {
                    continue;
                }
                let s = self.symbol(l - 1, k + j as u32, rest);
                acc.add_scaled(&s, tj);
            }
            for a in 0..k {
                let spect = k - 1 - a;
                if spect == 0 {
                    let s = self.symbol(l - 1, a, rest);
                    acc.add_scaled(&s, &nv.neg());
                } else {
                    let s = self.symbol(l - 1, a, &rest.with_part(spect));
                    acc.add_scaled(&s, &C::from_i64(-1));
                }
            }
            for (i, &mi) in rest.parts().iter().enumerate() {
                let s = self.symbol(l - 1, k + mi - 1, &rest.without_index(i));
                acc.add_scaled(&s, &C::from_i64(-(mi as i64)));
            }
            acc
        };
        self.memo.insert(key, out.clone());
        out
    }
}

/// Pure-`X` loop-equation polynomial of the two-matrix model for the tuple
/// `mu = (k, rest..)`. Its top-weight term is `tt_{dt+1} t_{d+1}^{dt}
/// p_{(k + d*dt, rest)}`; when `d*dt = 1` the `-p_{k+1}` term has the same
/// weight and the combined coefficient is `t_2 tt_2 - 1`.
pub fn q_twomatrix<C: Coeff>(mu: &[u32], w: &TwoPotential<C>, nvars: &C) -> PowerSumPoly<C> {
    let Some((&k, rest)) = mu.split_first() else {
        return PowerSumPoly::zero(nvars.clone());
    };
    let rest = Partition::new(rest.to_vec());
    // a zero spectator is the scalar N
    let zeros = mu[1..].iter().filter(|&&p| p == 0).count();
    let mut elim = Eliminator {
        t: &w.t,
        nvars: nvars.clone(),
        memo: HashMap::new(),
    };
    let mut q = PowerSumPoly::zero(nvars.clone());
    for (l, ttl) in w.tt.iter().enumerate() {
        if ttl.is_zero() {
            continue;
        }
        let s = elim.symbol(l, k, &rest);
        q.add_scaled(&s, ttl);
    }
    let mut parts = vec![k + 1];
    parts.extend_from_slice(rest.parts());
    q.add_tuple(&parts, C::from_i64(-1));
    let mut scale = C::one();
    for _ in 0..zeros {
        scale = scale.mul(nvars);
    }
    if zeros > 0 {
        q = q.scale(&scale);
    }
    q
}
