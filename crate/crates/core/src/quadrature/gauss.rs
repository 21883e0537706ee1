//! Gauss-Legendre panels with a two-half error estimate and global adaptive refinement.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::arith::Arith;
use crate::error::{Error, Result};

pub(crate) struct Rule<N> {
    nodes: Vec<N>,
    weights: Vec<N>,
    weights_f64: Vec<f64>,
}

fn legendre<A: Arith>(ar: &A, m: usize, x: &A::Num) -> (A::Num, A::Num) {
    let mut p0 = ar.num(1.0);
    let mut p1 = x.clone();
    for k in 2..=m {
        let kf = k as f64;
        let t = ar.mul(&ar.mul_f64(x, 2.0 * kf - 1.0), &p1);
        let p2 = ar.div(&ar.sub(&t, &ar.mul_f64(&p0, kf - 1.0)), &ar.num(kf));
        p0 = p1;
        p1 = p2;
    }
    let x2m1 = ar.sub(&ar.mul(x, x), &ar.num(1.0));
    let dp = ar.div(&ar.mul_f64(&ar.sub(&ar.mul(x, &p1), &p0), m as f64), &x2m1);
    (p1, dp)
}

/// `m`-point rule on `[-1, 1]`; nodes are polished by Newton steps at the backend precision.
pub(crate) fn gauss_legendre<A: Arith>(ar: &mut A, m: usize) -> Rule<A::Num> {
    let f = crate::arith::F64;
    let polish = if ar.bits() <= 53 {
        0
    } else {
        (libm::log2(ar.bits() as f64 / 40.0).max(0.0) as usize) + 2
    };
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    let mut weights_f64 = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5));
        for _ in 0..100 {
            let (p, dp) = legendre(&f, m, &x);
            let dx = p / dp;
            x -= dx;
            if libm::fabs(dx) < 1e-16 {
                break;
            }
        }
        let mut bx = ar.num(x);
        for _ in 0..polish {
            let (p, dp) = legendre(ar, m, &bx);
            bx = ar.sub(&bx, &ar.div(&p, &dp));
        }
        let (_, dp) = legendre(ar, m, &bx);
        let one_m_x2 = ar.sub(&ar.num(1.0), &ar.mul(&bx, &bx));
        let w = ar.div(&ar.num(2.0), &ar.mul(&one_m_x2, &ar.mul(&dp, &dp)));
        weights_f64.push(ar.to_f64(&w));
        nodes.push(bx);
        weights.push(w);
    }
    Rule { nodes, weights, weights_f64 }
}

pub(crate) struct Integral<N> {
    pub value: N,
    pub error: f64,
    pub mass: f64,
    pub panels: usize,
}

struct Panel<N> {
    a: N,
    b: N,
    left: N,
    right: N,
    left_mass: f64,
    right_mass: f64,
    err: f64,
}

impl<N> Panel<N> {
    fn mass(&self) -> f64 {
        self.left_mass + self.right_mass
    }
}

struct Key(f64, usize);

impl PartialEq for Key {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(o.1.cmp(&self.1))
    }
}

fn apply<A, F>(ar: &mut A, rule: &Rule<A::Num>, f: &mut F, a: &A::Num, b: &A::Num) -> (A::Num, f64)
where
    A: Arith,
    F: FnMut(&mut A, &A::Num) -> A::Num,
{
    let c = ar.mul_f64(&ar.add(a, b), 0.5);
    let h = ar.mul_f64(&ar.sub(b, a), 0.5);
    let mut s = ar.num(0.0);
    let mut mass = 0.0;
    for ((x, w), wf) in rule.nodes.iter().zip(&rule.weights).zip(&rule.weights_f64) {
        let t = ar.add(&c, &ar.mul(&h, x));
        let fx = f(ar, &t);
        mass += wf * libm::fabs(ar.to_f64(&fx));
        s = ar.add(&s, &ar.mul(w, &fx));
    }
    (ar.mul(&s, &h), mass * libm::fabs(ar.to_f64(&h)))
}

fn make_panel<A, F>(
    ar: &mut A,
    rule: &Rule<A::Num>,
    f: &mut F,
    a: A::Num,
    b: A::Num,
    coarse: Option<A::Num>,
) -> Panel<A::Num>
where
    A: Arith,
    F: FnMut(&mut A, &A::Num) -> A::Num,
{
    let coarse = coarse.unwrap_or_else(|| apply(ar, rule, f, &a, &b).0);
    let mid = ar.mul_f64(&ar.add(&a, &b), 0.5);
    let (left, left_mass) = apply(ar, rule, f, &a, &mid);
    let (right, right_mass) = apply(ar, rule, f, &mid, &b);
    let fine = ar.add(&left, &right);
    let err = libm::fabs(ar.to_f64(&ar.sub(&coarse, &fine)));
    Panel { a, b, left, right, left_mass, right_mass, err }
}

/// Integrates `f` over consecutive `breaks` until the summed error estimate is
/// below `tol` or below the rounding floor `noise_rel * mass`.
pub(crate) fn integrate<A, F>(
    ar: &mut A,
    rule: &Rule<A::Num>,
    f: &mut F,
    breaks: &[A::Num],
    tol: f64,
    noise_rel: f64,
    max_panels: usize,
) -> Result<Integral<A::Num>>
where
    A: Arith,
    F: FnMut(&mut A, &A::Num) -> A::Num,
{
    let mut panels: Vec<Panel<A::Num>> = Vec::with_capacity(breaks.len() * 2);
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        let p = make_panel(ar, rule, f, w[0].clone(), w[1].clone(), None);
        heap.push(Key(p.err, panels.len()));
        panels.push(p);
    }
    let mut total_err: f64 = panels.iter().map(|p| p.err).sum();
    let mut mass: f64 = panels.iter().map(Panel::mass).sum();
    let mut parked = 0.0;

    loop {
        let floor = noise_rel * mass;
        if total_err + parked <= tol.max(floor) || heap.is_empty() {
            break;
        }
        if panels.len() >= max_panels {
            return Err(Error::Convergence { error_estimate: total_err + parked, panels: panels.len() });
        }
        let Key(_, idx) = heap.pop().expect("heap is nonempty");
        let worst = &panels[idx];
        total_err -= worst.err;
        if worst.err <= 4.0 * noise_rel * worst.mass() {
            // splitting cannot beat rounding here
            parked += worst.err;
            continue;
        }
        mass -= worst.mass();
        let mid = ar.mul_f64(&ar.add(&worst.a, &worst.b), 0.5);
        let (a, b, left, right) = (worst.a.clone(), worst.b.clone(), worst.left.clone(), worst.right.clone());
        let lp = make_panel(ar, rule, f, a, mid.clone(), Some(left));
        let rp = make_panel(ar, rule, f, mid, b, Some(right));
        total_err += lp.err + rp.err;
        mass += lp.mass() + rp.mass();
        heap.push(Key(lp.err, idx));
        heap.push(Key(rp.err, panels.len()));
        panels[idx] = lp;
        panels.push(rp);
    }

    let mut value = ar.num(0.0);
    for p in &panels {
        value = ar.add(&value, &ar.add(&p.left, &p.right));
    }
    Ok(Integral { value, error: total_err + parked, mass, panels: panels.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{Big, F64};

    #[test]
    fn rule_integrates_polynomials() {
        let mut ar = F64;
        let r = gauss_legendre(&mut ar, 10);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-15);
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn big_rule_is_accurate() {
        let mut ar = Big::new(256);
        let r = gauss_legendre(&mut ar, 24);
        let mut s = ar.num(0.0);
        for (x, w) in r.nodes.iter().zip(&r.weights) {
            let x2 = ar.mul(x, x);
            let x4 = ar.mul(&x2, &x2);
            s = ar.add(&s, &ar.mul(w, &ar.mul(&x4, &x4)));
        }
        let err = ar.sub(&s, &ar.div(&ar.num(2.0), &ar.num(9.0)));
        assert!(crate::arith::big_log2_abs(&err) < -240.0);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let mut ar = F64;
        let r = gauss_legendre(&mut ar, 16);
        let breaks: Vec<f64> = (0..=8).map(|k| k as f64 * core::f64::consts::PI / 8.0).collect();
        let mut f = |_: &mut F64, x: &f64| libm::cos(200.0 * x) * libm::exp(*x);
        let out = integrate(&mut ar, &r, &mut f, &breaks, 1e-13, 1e-15, 100_000).unwrap();
        let pi = core::f64::consts::PI;
        let exact = (libm::exp(pi) - 1.0) / (1.0 + 40000.0);
        assert!((out.value - exact).abs() < 1e-12, "{} vs {}", out.value, exact);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let mut ar = F64;
        let r = gauss_legendre(&mut ar, 16);
        let mut f = |_: &mut F64, x: &f64| libm::pow(*x, -0.5);
        let out = integrate(&mut ar, &r, &mut f, &[0.0, 1.0], 1e-10, 1e-16, 100_000).unwrap();
        assert!((out.value - 2.0).abs() < 1e-9);
    }
}
