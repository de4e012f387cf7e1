use std::fmt::Write;

use pmqkd::sifting::{correspondence_table, PhaseOffsetClass};

/// Formats `2πk/n` as a reduced multiple of π, e.g. `4π/3`.
pub fn lattice_angle(k: usize, n: usize) -> String {
    if k == 0 {
        return "0".to_string();
    }
    let (mut num, mut den) = (2 * k, n);
    let g = gcd(num, den);
    num /= g;
    den /= g;
    let head = if num == 1 { "π".to_string() } else { format!("{num}π") };
    if den == 1 {
        head
    } else {
        format!("{head}/{den}")
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Key-correspondence table for random phases separated by `2πs/n`.
pub fn render_table(n: usize, s: PhaseOffsetClass) -> Result<String, pmqkd::Error> {
    let rows = correspondence_table(n, s)?;
    let header = ["κ_a", "κ_b", "|φ_a−φ_b|", "Δ_φ", "Response", "κ_b′", "κ_b″"];
    let body: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.kappa_a.to_string(),
                r.kappa_b.to_string(),
                lattice_angle(r.offset.0, n),
                lattice_angle(r.delta_class, n),
                r.detector.to_string(),
                r.kappa_b_prime.to_string(),
                r.kappa_b_double_prime.to_string(),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            body.iter()
                .map(|row| row[c].chars().count())
                .chain([header[c].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        writeln!(out, "{}", padded.join("  ").trim_end()).unwrap();
    };
    line(&header);
    for row in &body {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&cells);
    }
    Ok(out)
}
