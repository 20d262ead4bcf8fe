//! Polynomial group laws and canonical-coordinate charts of the nilpotent
//! models, generic over the scalar backend so the same formulas run exactly
//! and in floating point.

use num_rational::BigRational;

use super::ModelKind;
use crate::scalar::Scalar;

fn ratio<T: Scalar>(n: i64, d: i64) -> T {
    T::from_rational(&BigRational::new(n.into(), d.into()))
}

fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.plus(y)).collect()
}

/// Product of coordinate tuples. Torus coordinates are treated as lifts to
/// `R^n` (no reduction).
pub fn multiply<T: Scalar>(kind: ModelKind, a: &[T], b: &[T]) -> Vec<T> {
    match kind {
        ModelKind::Heisenberg => vec![
            a[0].plus(&b[0]),
            a[1].plus(&b[1]),
            a[2].plus(&b[2]).plus(&a[0].times(&b[1])),
        ],
        ModelKind::Filiform4 => {
            let half_a_sq = a[0].times(&a[0]).times(&ratio(1, 2));
            vec![
                a[0].plus(&b[0]),
                a[1].plus(&b[1]),
                a[2].plus(&b[2]).plus(&a[0].times(&b[1])),
                a[3].plus(&b[3]).plus(&a[0].times(&b[2])).plus(&half_a_sq.times(&b[1])),
            ]
        }
        _ => add(a, b),
    }
}

pub fn invert<T: Scalar>(kind: ModelKind, a: &[T]) -> Vec<T> {
    match kind {
        ModelKind::Heisenberg => vec![a[0].negated(), a[1].negated(), a[0].times(&a[1]).minus(&a[2])],
        ModelKind::Filiform4 => {
            let (x, y, z, w) = (&a[0], &a[1], &a[2], &a[3]);
            vec![
                x.negated(),
                y.negated(),
                x.times(y).minus(z),
                w.negated()
                    .plus(&x.times(z))
                    .minus(&x.times(x).times(y).times(&ratio(1, 2))),
            ]
        }
        _ => a.iter().map(Scalar::negated).collect(),
    }
}

/// Canonical coordinates of the first kind: algebra vector to group coordinates.
pub fn exp<T: Scalar>(kind: ModelKind, v: &[T]) -> Vec<T> {
    match kind {
        ModelKind::Heisenberg => vec![
            v[0].clone(),
            v[1].clone(),
            v[2].plus(&v[0].times(&v[1]).times(&ratio(1, 2))),
        ],
        ModelKind::Filiform4 => {
            let (al, be, ga, de) = (&v[0], &v[1], &v[2], &v[3]);
            vec![
                al.clone(),
                be.clone(),
                ga.plus(&al.times(be).times(&ratio(1, 2))),
                de.plus(&al.times(ga).times(&ratio(1, 2)))
                    .plus(&al.times(al).times(be).times(&ratio(1, 6))),
            ]
        }
        _ => v.to_vec(),
    }
}

pub fn log<T: Scalar>(kind: ModelKind, g: &[T]) -> Vec<T> {
    match kind {
        ModelKind::Heisenberg => vec![
            g[0].clone(),
            g[1].clone(),
            g[2].minus(&g[0].times(&g[1]).times(&ratio(1, 2))),
        ],
        ModelKind::Filiform4 => {
            let (a, b, c, d) = (&g[0], &g[1], &g[2], &g[3]);
            let gamma = c.minus(&a.times(b).times(&ratio(1, 2)));
            let delta = d
                .minus(&a.times(&gamma).times(&ratio(1, 2)))
                .minus(&a.times(a).times(b).times(&ratio(1, 6)));
            vec![a.clone(), b.clone(), gamma, delta]
        }
        _ => g.to_vec(),
    }
}

/// `ζ_g(h) = g h g⁻¹ h⁻¹` on coordinate tuples.
pub fn commutator<T: Scalar>(kind: ModelKind, g: &[T], h: &[T]) -> Vec<T> {
    let gh = multiply(kind, g, h);
    let ghg = multiply(kind, &gh, &invert(kind, g));
    multiply(kind, &ghg, &invert(kind, h))
}
