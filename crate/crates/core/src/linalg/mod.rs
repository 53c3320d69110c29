//! Exact field arithmetic and the linear-system kernel every homotopy
//! decision in the crate rests on.

pub mod elim;
mod matrix;
mod scalar;

pub use matrix::{Matrix, Vector};
pub use scalar::{Field, Scalar};

/// Some `x` with `a * x = b`, if one exists.
pub fn solve(a: &Matrix, b: &[Scalar]) -> crate::Result<Option<Vector>> {
    a.solve(b)
}

pub fn kernel_basis(a: &Matrix) -> Vec<Vector> {
    a.kernel_basis()
}

pub fn rank(a: &Matrix) -> usize {
    a.rank()
}

pub fn is_zero_vector(v: &[Scalar]) -> bool {
    v.iter().all(Scalar::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q() -> Field {
        Field::Rationals
    }

    fn ints(field: Field, v: &[i64]) -> Vector {
        v.iter().map(|&x| field.from_i64(x)).collect()
    }

    #[test]
    fn solve_identity() {
        let a = Matrix::identity(q(), 2);
        let x = solve(&a, &ints(q(), &[1, 2])).unwrap().unwrap();
        assert_eq!(x, ints(q(), &[1, 2]));
    }

    #[test]
    fn solve_nilpotent_jordan_block() {
        let a = Matrix::from_ints(q(), &[&[0, 1], &[0, 0]]);
        let x = solve(&a, &ints(q(), &[1, 0])).unwrap().unwrap();
        assert_eq!(x[1], q().one());
        assert_eq!(a.mul_vec(&x).unwrap(), ints(q(), &[1, 0]));
        assert!(solve(&a, &ints(q(), &[0, 1])).unwrap().is_none());
    }

    #[test]
    fn solve_over_f2_matches_enumeration() {
        let f2 = Field::prime(2).unwrap();
        let a = Matrix::from_ints(f2, &[&[1, 1], &[1, 1]]);
        // all four vectors of F2^2, by hand: (0,0)->(0,0), (1,0)->(1,1), (0,1)->(1,1), (1,1)->(0,0)
        let x = solve(&a, &ints(f2, &[1, 1])).unwrap().unwrap();
        assert_eq!(a.mul_vec(&x).unwrap(), ints(f2, &[1, 1]));
        assert!(solve(&a, &ints(f2, &[1, 0])).unwrap().is_none());
    }

    #[test]
    fn solve_rejects_bad_dimensions() {
        let a = Matrix::identity(q(), 2);
        assert!(solve(&a, &ints(q(), &[1])).is_err());
    }

    #[test]
    fn kernels_and_ranks() {
        assert!(kernel_basis(&Matrix::identity(q(), 3)).is_empty());
        assert_eq!(kernel_basis(&Matrix::zeros(q(), 2, 2)).len(), 2);
        let m = Matrix::from_ints(q(), &[&[1, 2], &[2, 4]]);
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 1);
        // proportional to (2, -1)
        assert_eq!(&k[0][0] + &(&k[0][1] * &q().from_i64(2)), q().zero());
        assert_eq!(rank(&m), 1);
        assert_eq!(rank(&Matrix::zeros(q(), 3, 4)), 0);
        assert_eq!(rank(&Matrix::identity(q(), 5)), 5);
        let f2 = Field::prime(2).unwrap();
        assert_eq!(rank(&Matrix::from_ints(f2, &[&[1, 2], &[2, 4]])), 1);
    }

    fn enumerate_fp(p: u64, n: usize) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..p).map(move |x| {
                        let mut w = v.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        out
    }

    fn small_matrix(p: u64) -> impl Strategy<Value = (usize, usize, Vec<i64>)> {
        (1usize..=4, 1usize..=4)
            .prop_flat_map(move |(r, c)| (Just(r), Just(c), proptest::collection::vec(0..p as i64, r * c)))
    }

    proptest! {
        #[test]
        fn fp_results_match_brute_force((r, c, vals) in small_matrix(3), rhs in proptest::collection::vec(0i64..3, 4)) {
            let f = Field::prime(3).unwrap();
            let mut a = Matrix::zeros(f, r, c);
            for i in 0..r { for j in 0..c { a.set(i, j, f.from_i64(vals[i * c + j])); } }
            let b = ints(f, &rhs[..r]);
            let all = enumerate_fp(3, c);
            let images: Vec<Vector> = all.iter()
                .map(|x| a.mul_vec(&x.iter().map(|&v| f.from_i64(v as i64)).collect::<Vec<_>>()).unwrap())
                .collect();
            let kernel_size = images.iter().filter(|y| is_zero_vector(y)).count();
            let exists = images.contains(&b);
            let sol = solve(&a, &b).unwrap();
            prop_assert_eq!(sol.is_some(), exists);
            if let Some(x) = sol { prop_assert_eq!(a.mul_vec(&x).unwrap(), b); }
            let k = kernel_basis(&a);
            prop_assert_eq!(3usize.pow(k.len() as u32), kernel_size);
            prop_assert_eq!(rank(&a) + k.len(), c);
        }

        #[test]
        fn rank_nullity_and_solutions_over_q(r in 1usize..7, c in 1usize..7, vals in proptest::collection::vec(-3i64..4, 36), rhs in proptest::collection::vec(-3i64..4, 6)) {
            let mut a = Matrix::zeros(q(), r, c);
            for i in 0..r { for j in 0..c { a.set(i, j, q().from_i64(vals[i * 6 + j])); } }
            let k = kernel_basis(&a);
            prop_assert_eq!(rank(&a) + k.len(), c);
            for v in &k { prop_assert!(is_zero_vector(&a.mul_vec(v).unwrap())); }
            let b = ints(q(), &rhs[..r]);
            if let Some(x) = solve(&a, &b).unwrap() { prop_assert_eq!(a.mul_vec(&x).unwrap(), b); }
            let d = elim::reduce_dense(&a);
            let s = elim::reduce_sparse(&a);
            prop_assert_eq!(d.rows, s.rows);
        }
    }
}
