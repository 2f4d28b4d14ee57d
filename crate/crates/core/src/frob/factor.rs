use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frob::Poly;

/// Complete factorization into monic irreducibles with multiplicities,
/// sorted canonically. The seed drives equal-degree splitting only, so the
/// result does not depend on it.
pub fn factor(h: &Poly, seed: u64) -> Vec<(Poly, usize)> {
    assert!(!h.is_zero(), "cannot factor the zero polynomial");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (part, mult) in squarefree_decomposition(&h.monic()) {
        for (block, d) in distinct_degree(&part) {
            for g in equal_degree(&block, d, &mut rng) {
                out.push((g, mult));
            }
        }
    }
    out.sort();
    out
}

/// `f = ∏ g_i^{m_i}` with `g_i` squarefree and pairwise coprime.
pub fn squarefree_decomposition(f: &Poly) -> Vec<(Poly, usize)> {
    let field = f.field();
    let p = field.p() as usize;
    let mut out = Vec::new();
    let f = f.monic();
    if f.deg() == 0 {
        return out;
    }
    let mut c = f.gcd(&f.derivative());
    let mut w = f.div_exact(&c);
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c);
        let z = w.div_exact(&y);
        if z.deg() > 0 {
            out.push((z, i));
        }
        i += 1;
        w = y;
        c = c.div_exact(&w);
    }
    if !c.is_one() {
        for (g, m) in squarefree_decomposition(&c.pth_root()) {
            out.push((g, m * p));
        }
    }
    out
}

/// Splits a squarefree monic `f` into `(product of all degree-d factors, d)`.
pub fn distinct_degree(f: &Poly) -> Vec<(Poly, usize)> {
    let field = f.field();
    let p = field.p();
    let x = Poly::x(field);
    let mut out = Vec::new();
    let mut rest = f.monic();
    let mut h = x.clone();
    let mut d = 0;
    while 2 * (d + 1) <= rest.deg() {
        d += 1;
        h = h.powmod(p, &rest);
        let g = h.sub(&x).gcd(&rest);
        if !g.is_one() {
            rest = rest.div_exact(&g);
            h = h.rem(&rest);
            out.push((g, d));
        }
    }
    if rest.deg() > 0 {
        let d = rest.deg();
        out.push((rest, d));
    }
    out
}

/// Cantor–Zassenhaus splitting of a product of distinct degree-`d`
/// irreducibles (odd `p`).
pub fn equal_degree<R: Rng + ?Sized>(f: &Poly, d: usize, rng: &mut R) -> Vec<Poly> {
    let field = f.field();
    let n = f.deg();
    if n == d {
        return vec![f.monic()];
    }
    let p = field.p();
    loop {
        let a = Poly::from_coeffs(field, (0..n).map(|_| rng.random_range(0..p)).collect());
        if a.deg() == 0 {
            continue;
        }
        // a^((p^d - 1)/2) = N(a)^((p - 1)/2) with N(a) = a·a^p⋯a^(p^(d-1))
        let mut conj = a.rem(f);
        let mut norm = conj.clone();
        for _ in 1..d {
            conj = conj.powmod(p, f);
            norm = norm.mulmod(&conj, f);
        }
        let b = norm.powmod((p - 1) / 2, f);
        let g = b.sub(&Poly::one(field)).gcd(f);
        if g.deg() > 0 && g.deg() < n {
            let mut out = equal_degree(&g, d, rng);
            out.extend(equal_degree(&f.div_exact(&g), d, rng));
            return out;
        }
    }
}
