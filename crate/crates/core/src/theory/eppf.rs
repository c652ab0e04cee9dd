use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::stats::{hyp2f1_terminating, ln_gamma};

use super::FsbpParams;

/// Largest number of blocks accepted by [`fsbp_eppf`].
pub const MAX_EPPF_BLOCKS: usize = 10;

/// Which expression to evaluate for the FSBP partition probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EppfForm {
    /// Occupied-atom factor over one minus the empty-atom factor, per ordered block.
    BlockDecomposition,
    /// The occupied factor `F` over `1 - F` for every ordered block.
    Printed,
}

/// Probability of partition `c` under `n` draws from an FSBP measure.
pub fn fsbp_eppf(c: &Partition, params: &FsbpParams) -> Result<f64> {
    fsbp_eppf_with(c, params, EppfForm::BlockDecomposition)
}

pub fn fsbp_eppf_with(c: &Partition, params: &FsbpParams, form: EppfForm) -> Result<f64> {
    params.validate()?;
    let sizes = c.block_sizes();
    let k = sizes.len();
    if k == 0 {
        return Ok(1.0);
    }
    if k > MAX_EPPF_BLOCKS {
        return Err(Error::Capacity(format!(
            "partition has {k} blocks; at most {MAX_EPPF_BLOCKS} supported"
        )));
    }
    let (p, g) = (params.p, params.gamma);

    // Size-only prefactor: prod_c p^|c| Gamma(|c|+1) Gamma(g+1) / Gamma(g+|c|+1).
    let ln_pre: f64 = sizes
        .iter()
        .map(|&s| {
            let s = s as f64;
            s * p.ln() + ln_gamma(s + 1.0) + ln_gamma(g + 1.0) - ln_gamma(g + s + 1.0)
        })
        .sum();

    // Occupied factor for a block of size e followed by f later draws.
    let occ = |e: usize, f: usize| -> f64 {
        hyp2f1_terminating(-(f as f64), e as f64 + 1.0, g + e as f64 + 1.0, p)
            .expect("terminating")
    };
    // 1 - E[(1 - p pi')^f], summed without the leading 1.
    let one_minus_skip = |f: usize| -> f64 {
        let mut term = 1.0;
        let mut tail = 0.0;
        for l in 0..f {
            let l = l as f64;
            term *= (l - f as f64) * (1.0 + l) / ((g + 1.0 + l) * (l + 1.0)) * p;
            tail += term;
        }
        -tail
    };

    // Sum over block orders: V(S) = sum_{b in S} factor(b, S) V(S \ b).
    let full = (1usize << k) - 1;
    let mut size_of = vec![0usize; 1 << k];
    for s in 1..=full {
        let b = s.trailing_zeros() as usize;
        size_of[s] = size_of[s & (s - 1)] + sizes[b];
    }
    let mut v = vec![0.0f64; 1 << k];
    v[0] = 1.0;
    for s in 1..=full {
        let alpha = size_of[s];
        let mut acc = 0.0;
        let mut rest = s;
        while rest != 0 {
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let e = sizes[b];
            let f = alpha - e;
            let fo = occ(e, f);
            let factor = match form {
                EppfForm::BlockDecomposition => fo / one_minus_skip(alpha),
                EppfForm::Printed => fo / (1.0 - fo),
            };
            acc += factor * v[s & !(1 << b)];
        }
        v[s] = acc;
    }
    Ok(ln_pre.exp() * v[full])
}

/// Dirichlet process partition probability.
pub fn dp_eppf(c: &Partition, gamma: f64) -> f64 {
    let n = c.n() as f64;
    let sizes = c.block_sizes();
    let ln = sizes.len() as f64 * gamma.ln() + ln_gamma(gamma) - ln_gamma(n + gamma)
        + sizes.iter().map(|&s| ln_gamma(s as f64)).sum::<f64>();
    ln.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::enumerate_partitions;

    #[test]
    fn n1_and_n2() {
        let prm = FsbpParams::new(0.5, 1.0).unwrap();
        let one = Partition::from_labels(&[0]);
        assert!((fsbp_eppf(&one, &prm).unwrap() - 1.0).abs() < 1e-13);
        let together = Partition::from_labels(&[0, 0]);
        let apart = Partition::from_labels(&[0, 1]);
        assert!((fsbp_eppf(&together, &prm).unwrap() - 0.2).abs() < 1e-14);
        assert!((fsbp_eppf(&apart, &prm).unwrap() - 0.8).abs() < 1e-14);
    }

    #[test]
    fn normalizes() {
        for n in 2..=6 {
            for &(p, g) in &[(0.3, 0.5), (0.7, 2.0), (1.0, 1.0)] {
                let prm = FsbpParams::new(p, g).unwrap();
                let s: f64 =
                    enumerate_partitions(n).iter().map(|c| fsbp_eppf(c, &prm).unwrap()).sum();
                assert!((s - 1.0).abs() < 1e-10, "n={n} p={p} g={g} sum={s}");
            }
        }
    }

    #[test]
    fn dp_normalizes() {
        let s: f64 = enumerate_partitions(4).iter().map(|c| dp_eppf(c, 1.3)).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!((dp_eppf(&Partition::from_labels(&[0, 0]), 1.0) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn printed_form_is_singular() {
        // The last ordered block has no later draws, so F = 1 and F/(1-F) diverges.
        let prm = FsbpParams::new(0.5, 1.0).unwrap();
        let v = fsbp_eppf_with(&Partition::from_labels(&[0]), &prm, EppfForm::Printed).unwrap();
        assert!(!v.is_finite());
    }

    #[test]
    fn capacity() {
        let labels: Vec<usize> = (0..11).collect();
        let prm = FsbpParams::new(0.5, 1.0).unwrap();
        assert!(matches!(
            fsbp_eppf(&Partition::from_labels(&labels), &prm),
            Err(Error::Capacity(_))
        ));
    }
}
