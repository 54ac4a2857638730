//! Exterior (compound) powers.
//!
//! The basis of `Λ^k R^d` is `e_I = e_{i_1} ∧ ... ∧ e_{i_k}` over increasing
//! index sets `I`, ordered lexicographically. Entry `(I, J)` of the compound
//! matrix is the minor of `A` with rows `I` and columns `J`.

use rug::Rational;

use super::matrix::RationalMatrix;
use crate::error::{Error, Result};

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// All increasing `k`-subsets of `0..n` in lexicographic order.
pub fn index_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut current: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(current.clone());
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < n - k + i {
                current[i] += 1;
                for j in i + 1..k {
                    current[j] = current[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn minor(a: &RationalMatrix, rows: &[usize], cols: &[usize]) -> Rational {
    let k = rows.len();
    match k {
        0 => Rational::from(1),
        1 => a.get(rows[0], cols[0]).clone(),
        2 => {
            let p = Rational::from(a.get(rows[0], cols[0]) * a.get(rows[1], cols[1]));
            let q = Rational::from(a.get(rows[0], cols[1]) * a.get(rows[1], cols[0]));
            p - q
        }
        _ => {
            let entries = rows
                .iter()
                .flat_map(|&r| cols.iter().map(move |&c| a.get(r, c).clone()))
                .collect();
            RationalMatrix::new(k, entries).expect("minor is square").determinant()
        }
    }
}

/// The `k`-th compound matrix of `a`, of size `C(d, k)`.
pub fn wedge_power(a: &RationalMatrix, k: usize) -> Result<RationalMatrix> {
    let d = a.dim();
    if k > d {
        return Err(Error::WedgeDegreeOutOfRange { k, dim: d });
    }
    if k == 0 {
        return Ok(RationalMatrix::identity(1));
    }
    if k == 1 {
        return Ok(a.clone());
    }
    if k == d {
        return Ok(RationalMatrix::scalar(a.determinant()));
    }
    let subsets = index_subsets(d, k);
    let size = subsets.len();
    let mut entries = Vec::with_capacity(size * size);
    for rows in &subsets {
        for cols in &subsets {
            entries.push(minor(a, rows, cols));
        }
    }
    RationalMatrix::new(size, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[&str]]) -> RationalMatrix {
        let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
        RationalMatrix::parse(&rows).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(3, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(5, 5), 1);
    }

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(index_subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(index_subsets(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(index_subsets(4, 2).len(), 6);
    }

    #[test]
    fn identity_maps_to_identity() {
        for d in 1..=5 {
            for k in 0..=d {
                let w = wedge_power(&RationalMatrix::identity(d), k).unwrap();
                assert_eq!(w, RationalMatrix::identity(binomial(d, k)));
            }
        }
    }

    #[test]
    fn second_compound_of_three_dimensional_example() {
        let a = m(&[&["5", "4", "1"], &["5", "5", "4"], &["0", "1", "5"]]).scale(&Rational::from((1, 12)));
        let expected =
            m(&[&["5", "15", "11"], &["5", "25", "19"], &["5", "25", "21"]]).scale(&Rational::from((1, 144)));
        assert_eq!(wedge_power(&a, 2).unwrap(), expected);
        let b = a.transpose();
        let expected_b =
            m(&[&["5", "5", "5"], &["15", "25", "25"], &["11", "19", "21"]]).scale(&Rational::from((1, 144)));
        assert_eq!(wedge_power(&b, 2).unwrap(), expected_b);
    }

    #[test]
    fn top_power_is_determinant() {
        let a = m(&[&["-4/7", "5/7"], &["0", "1/7"]]);
        assert_eq!(
            wedge_power(&a, 2).unwrap(),
            RationalMatrix::scalar(Rational::from((-4, 49)))
        );
        assert_eq!(wedge_power(&a, 0).unwrap(), RationalMatrix::identity(1));
    }

    #[test]
    fn out_of_range_degree() {
        let a = RationalMatrix::identity(2);
        assert!(matches!(
            wedge_power(&a, 3),
            Err(Error::WedgeDegreeOutOfRange { k: 3, dim: 2 })
        ));
    }

    #[test]
    fn general_minor_path_matches_determinant() {
        let a = m(&[
            &["1", "2", "0", "1"],
            &["3", "-1", "2", "0"],
            &["0", "1", "1", "1"],
            &["2", "0", "1", "3"],
        ]);
        let w3 = wedge_power(&a, 3).unwrap();
        // the (I, I) entry for I = {0,1,2} is the leading 3x3 principal minor
        let lead = m(&[&["1", "2", "0"], &["3", "-1", "2"], &["0", "1", "1"]]).determinant();
        assert_eq!(*w3.get(0, 0), lead);
    }
}
