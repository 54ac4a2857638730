mod common;

use affinity_core::bigreal::{shared_digits, to_fixed};
use affinity_core::fredholm::coefficients;
use affinity_core::solver::{default_tolerance, solve_report};
use affinity_core::traces::{ReductionMode, TraceEngine};
use affinity_core::Error;
use rug::Float;

const EXAMPLE1: &[(usize, &str)] = &[
    (2, "1.1434179598760199500060486918278578960135"),
    (3, "1.1182723247080062849989060664091309147143"),
    (4, "1.1153889736674619964451849005121800354788"),
    (5, "1.1156042107662615620911669099580406977087"),
    (6, "1.1156031850393050847598379831688008568510"),
    (7, "1.1156032522247510369938823877246662337012"),
    (8, "1.1156032579274026480611546272271108345893"),
    (9, "1.1156032577865057115477556508368581253178"),
    (10, "1.1156032577870288853365835000458393661000"),
    (11, "1.1156032577870309189836777332494995617495"),
    (12, "1.1156032577870308919797928714465125773313"),
];

const EXAMPLE2: &[(usize, &str)] = &[
    (1, "1.5785039107243034256939013227788890720542"),
    (2, "1.4342820777826332124787188767303199686014"),
    (3, "1.4469863740688556416613462603970273895013"),
    (4, "1.4467623250255281973640628619336715940086"),
    (5, "1.4467637772540984329670430410853383429566"),
    (6, "1.4467637738594633254261749944903885675805"),
    (7, "1.4467637738623852320708694662512193916812"),
    (8, "1.4467637738623842970444057284442137326314"),
];

const EXAMPLE3: &[(usize, &str)] = &[
    (3, "1.7401038961345446438166016577528259279145"),
    (4, "1.5361213489345701876913237564586162845041"),
    (5, "1.5877931446449391792898900287081606592496"),
    (6, "1.5845923810065974328521249548663281368839"),
    (7, "1.5847797771441493455748903924132298552229"),
    (8, "1.5847717757074885376771488424245289152003"),
    (9, "1.5847720386659447637772361858954452909738"),
    (10, "1.5847720318530625295258955361662531946959"),
    (11, "1.5847720319951104705943620267403157513317"),
    (12, "1.5847720319926866069700747197780111541015"),
];

/// Each reference row is reproduced to at least `digits` significant digits.
fn check_table(name: &str, tuple: &[affinity_core::linalg::RationalMatrix], rows: &[(usize, &str)], digits: usize) {
    let first = rows[0].0;
    let last = rows[rows.len() - 1].0;
    let report = solve_report(tuple, 1, first..=last, &default_tolerance(256), 256).unwrap();
    for &(n, expected) in rows {
        let value = report
            .value(n)
            .unwrap_or_else(|| panic!("{name}: no value for n = {n}"));
        let got = to_fixed(value, 40);
        let shared = shared_digits(&got, expected);
        assert!(
            shared >= digits,
            "{name} n = {n}: {got} vs {expected} ({shared} digits)"
        );
    }
}

#[test]
fn example1_table() {
    check_table("example1", &common::example1(), EXAMPLE1, 35);
}

#[test]
fn example2_table() {
    check_table("example2", &common::example2(), EXAMPLE2, 35);
}

#[test]
fn example3_table() {
    check_table("example3", &common::example3(), EXAMPLE3, 35);
}

#[test]
fn example3_first_two_rows_have_no_root() {
    let report = solve_report(&common::example3(), 1, 1..=2, &default_tolerance(256), 256).unwrap();
    for row in &report.rows {
        assert!(
            matches!(row.outcome, Err(Error::NoRootFound { .. })),
            "n = {}: {:?}",
            row.n,
            row.outcome
        );
    }
}

#[test]
fn the_root_at_s_n_is_simple() {
    for (name, tuple, k) in common::fixtures() {
        let n = 8;
        let report = solve_report(&tuple, k, n..=n, &default_tolerance(256), 256).unwrap();
        let s_n = report.value(n).unwrap().clone();
        let engine = TraceEngine::new(&tuple, k, n, 256, ReductionMode::Necklace).unwrap();
        let series = coefficients(&engine.table(&s_n, n));
        let mut value = Float::with_val(256, 0);
        let mut slope = Float::with_val(256, 0);
        for (m, a) in series.coeffs.iter().enumerate() {
            value += a;
            slope += Float::with_val(256, a * m as u32);
        }
        assert!(value.clone().abs() < 1e-35, "{name}: p(1) = {value}");
        assert!(slope.clone().abs() > 1e-6, "{name}: p'(1) = {slope}");
    }
}
