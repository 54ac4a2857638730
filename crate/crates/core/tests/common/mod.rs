#![allow(dead_code)]

use affinity_core::linalg::RationalMatrix;

pub fn m(rows: &[&[&str]]) -> RationalMatrix {
    let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
    RationalMatrix::parse(&rows).unwrap()
}

pub fn example1() -> Vec<RationalMatrix> {
    vec![
        m(&[&["-4/7", "5/7"], &["0", "1/7"]]),
        m(&[&["1/7", "0"], &["-5/7", "-4/7"]]),
    ]
}

pub fn example2() -> Vec<RationalMatrix> {
    vec![
        m(&[&["1/3", "1/9"], &["1/2", "1/2"]]),
        m(&[&["-1/2", "-1/3"], &["-1/3", "-1/2"]]),
        m(&[&["1/2", "1/2"], &["1/9", "1/3"]]),
    ]
}

pub fn example3() -> Vec<RationalMatrix> {
    let a1 = m(&[
        &["5/12", "4/12", "1/12"],
        &["5/12", "5/12", "4/12"],
        &["0", "1/12", "5/12"],
    ]);
    let a2 = a1.transpose();
    vec![a1, a2]
}

/// All three worked examples with the `k` used for them.
pub fn fixtures() -> Vec<(&'static str, Vec<RationalMatrix>, usize)> {
    vec![
        ("example1", example1(), 1),
        ("example2", example2(), 1),
        ("example3", example3(), 1),
    ]
}
