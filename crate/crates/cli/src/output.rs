use serde::Serialize;

use distchar::{DistanceMatrix, RationalScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// `v` with 9 significant digits, trailing zeros dropped.
pub fn sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..=8).contains(&exp) {
        let s = format!("{v:.8e}");
        let (m, e) = s.split_once('e').expect("exponent form");
        return format!("{}e{e}", trim(m));
    }
    let decimals = (8 - exp).max(0) as usize;
    trim(&format!("{v:.decimals$}")).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn score(s: &RationalScore) -> String {
    format!("{s} ({})", sig(s.value()))
}

pub fn matrix_csv(d: &DistanceMatrix) -> String {
    let mut out = String::new();
    for i in 0..d.order() {
        let row: Vec<String> = d.row(i).iter().map(|&v| sig(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// 1-based index sets as `{1,3}`.
pub fn index_set(set: &[usize]) -> String {
    let items: Vec<String> = set.iter().map(|j| (j + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

pub fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
}
